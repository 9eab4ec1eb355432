use ndarray::Array2;
use ndarray_linalg::{EigValsh, UPLO};

use super::mupoly::MuPoly;
use super::ncpoly::{adjoint_word, NcPolynomial};
use super::rewrite::{Normalizer, Strategy};
use super::{Letter, Word};
use crate::error::{Error, Result};

/// Default bound on the word length of a Gram basis.
pub const DEFAULT_MAX_LEVEL: usize = 4;
/// Largest generator count accepted by [`gram_matrix`].
pub const MAX_GRAM_D: usize = 3;

/// Fock inner products `⟨wΩ, vΩ⟩` over all unstarred words of length `<= level`.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    pub level: usize,
    pub d: usize,
    /// Length-then-lexicographic order.
    pub basis: Vec<Word>,
    /// `entries[v][w] = ⟨wΩ, vΩ⟩`.
    pub entries: Vec<Vec<MuPoly>>,
}

/// Unstarred words of length `<= level` in length-then-lexicographic order.
pub fn unstarred_words(level: usize, d: usize) -> Vec<Word> {
    let mut out: Vec<Word> = vec![Vec::new()];
    let mut layer: Vec<Word> = vec![Vec::new()];
    for _ in 0..level {
        let mut next = Vec::with_capacity(layer.len() * d);
        for w in &layer {
            for i in 1..=d {
                let mut v = w.clone();
                v.push(Letter::plain(i));
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

pub fn gram_matrix(level: usize, d: usize) -> Result<GramMatrix> {
    gram_matrix_bounded(level, d, DEFAULT_MAX_LEVEL)
}

pub fn gram_matrix_bounded(level: usize, d: usize, max_level: usize) -> Result<GramMatrix> {
    if level > max_level {
        return Err(Error::Parameter(format!(
            "Gram level {level} exceeds the configured bound {max_level}"
        )));
    }
    if d == 0 || d > MAX_GRAM_D {
        return Err(Error::Parameter(format!(
            "Gram matrices support 1..={MAX_GRAM_D} generators, got {d}"
        )));
    }
    let basis = unstarred_words(level, d);
    let mut normalizer = Normalizer::new(Strategy::Leftmost);
    let n = basis.len();
    let mut entries = vec![vec![MuPoly::zero(); n]; n];
    for (r, v) in basis.iter().enumerate() {
        for (c, w) in basis.iter().enumerate().skip(r) {
            let mut word = adjoint_word(w);
            word.extend_from_slice(v);
            let value = normalizer.vacuum_expectation(&NcPolynomial::word(word), d)?;
            entries[c][r] = value.clone();
            entries[r][c] = value;
        }
    }
    Ok(GramMatrix {
        level,
        d,
        basis,
        entries,
    })
}

impl GramMatrix {
    pub fn eval(&self, mu: f64) -> Array2<f64> {
        let n = self.basis.len();
        Array2::from_shape_fn((n, n), |(i, j)| self.entries[i][j].eval(mu))
    }

    pub fn min_eigenvalue(&self, mu: f64) -> Result<f64> {
        let values = self.eval(mu).eigvalsh(UPLO::Lower)?;
        Ok(values.iter().copied().fold(f64::INFINITY, f64::min))
    }

    /// Exact symmetry of the polynomial entries.
    pub fn is_symmetric(&self) -> bool {
        let n = self.basis.len();
        (0..n).all(|i| (0..n).all(|j| self.entries[i][j] == self.entries[j][i]))
    }

    pub fn basis_labels(&self) -> Vec<String> {
        self.basis
            .iter()
            .map(|w| {
                if w.is_empty() {
                    "1".to_string()
                } else {
                    w.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
                }
            })
            .collect()
    }

    pub fn entry_strings(&self) -> Vec<Vec<String>> {
        self.entries
            .iter()
            .map(|row| row.iter().map(ToString::to_string).collect())
            .collect()
    }
}
