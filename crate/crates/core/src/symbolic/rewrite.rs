use std::collections::HashMap;

use super::mupoly::MuPoly;
use super::ncpoly::NcPolynomial;
use super::{Letter, Word};
use crate::error::{Error, Result};

/// Which redex of a word is rewritten first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Rewrite the leftmost redex, normalise the resulting words recursively.
    Leftmost,
    /// Rewrite the rightmost redex first.
    Rightmost,
}

/// Rewrites of the adjacent pair `(x, y)`; `None` when the pair is in normal order.
///
/// - `x_i* x_i → 1 + μ² x_i x_i* − (1−μ²) Σ_{k<i} x_k x_k*`
/// - `x_i* x_j → μ x_j x_i*` for `i ≠ j`
/// - `x_j x_i → μ x_i x_j` for `j > i`
/// - `x_i* x_j* → μ x_j* x_i*` for `i < j`
pub fn rewrite_pair(x: Letter, y: Letter) -> Option<NcPolynomial> {
    let mu = MuPoly::mu_pow(1);
    match (x.starred, y.starred) {
        (true, false) if x.index == y.index => {
            let i = x.index;
            let mut out = NcPolynomial::one();
            out.add_term(vec![Letter::plain(i), Letter::star(i)], &MuPoly::mu_pow(2));
            let defect = &MuPoly::mu_pow(2) - &MuPoly::one();
            for k in 1..i {
                out.add_term(vec![Letter::plain(k), Letter::star(k)], &defect);
            }
            Some(out)
        }
        (true, false) => Some(NcPolynomial::term(vec![y, x], mu)),
        (false, false) if x.index > y.index => Some(NcPolynomial::term(vec![y, x], mu)),
        (true, true) if x.index < y.index => Some(NcPolynomial::term(vec![y, x], mu)),
        _ => None,
    }
}

/// Position `p` of a redex `(w[p], w[p+1])` chosen by `strategy`.
pub fn find_redex(word: &[Letter], strategy: Strategy) -> Option<usize> {
    let is_redex = |p: &usize| rewrite_pair(word[*p], word[*p + 1]).is_some();
    let n = word.len().saturating_sub(1);
    match strategy {
        Strategy::Leftmost => (0..n).find(is_redex),
        Strategy::Rightmost => (0..n).rev().find(is_redex),
    }
}

/// Normal words: unstarred letters with non-decreasing indices, then starred
/// letters with non-increasing indices.
pub fn is_normal(word: &[Letter]) -> bool {
    find_redex(word, Strategy::Leftmost).is_none()
}

/// One rewrite step at position `p`.
pub fn rewrite_at(word: &[Letter], p: usize) -> Option<NcPolynomial> {
    let replacement = rewrite_pair(word[p], word[p + 1])?;
    let prefix = NcPolynomial::word(word[..p].to_vec());
    let suffix = NcPolynomial::word(word[p + 2..].to_vec());
    Some(&(&prefix * &replacement) * &suffix)
}

fn check_indices(p: &NcPolynomial, d: usize) -> Result<()> {
    for (w, _) in p.terms() {
        if let Some(l) = w.iter().find(|l| l.index == 0 || l.index > d) {
            return Err(Error::Parameter(format!(
                "letter {l} has index outside 1..={d}"
            )));
        }
    }
    Ok(())
}

/// Memoising normaliser for a fixed strategy.
#[derive(Debug)]
pub struct Normalizer {
    strategy: Strategy,
    memo: HashMap<Word, NcPolynomial>,
}

impl Normalizer {
    pub fn new(strategy: Strategy) -> Self {
        Normalizer {
            strategy,
            memo: HashMap::new(),
        }
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn normalize_word(&mut self, word: &[Letter]) -> NcPolynomial {
        if let Some(done) = self.memo.get(word) {
            return done.clone();
        }
        let result = match find_redex(word, self.strategy) {
            None => NcPolynomial::word(word.to_vec()),
            Some(p) => {
                let step = rewrite_at(word, p).expect("redex position");
                let mut acc = NcPolynomial::zero();
                for (w, c) in step.terms() {
                    acc += &self.normalize_word(w).scale(c);
                }
                acc
            }
        };
        self.memo.insert(word.to_vec(), result.clone());
        result
    }

    pub fn normalize(&mut self, p: &NcPolynomial, d: usize) -> Result<NcPolynomial> {
        check_indices(p, d)?;
        let mut acc = NcPolynomial::zero();
        for (w, c) in p.terms() {
            acc += &self.normalize_word(w).scale(c);
        }
        Ok(acc)
    }

    /// `⟨Ω, p Ω⟩`: the empty-word coefficient of the normal form.
    pub fn vacuum_expectation(&mut self, p: &NcPolynomial, d: usize) -> Result<MuPoly> {
        Ok(self.normalize(p, d)?.coefficient(&[]))
    }
}

/// Normal form under the leftmost strategy.
pub fn normal_order(p: &NcPolynomial, d: usize) -> Result<NcPolynomial> {
    Normalizer::new(Strategy::Leftmost).normalize(p, d)
}

pub fn normal_order_with(p: &NcPolynomial, d: usize, strategy: Strategy) -> Result<NcPolynomial> {
    Normalizer::new(strategy).normalize(p, d)
}

pub fn vacuum_expectation(p: &NcPolynomial, d: usize) -> Result<MuPoly> {
    Normalizer::new(Strategy::Leftmost).vacuum_expectation(p, d)
}
