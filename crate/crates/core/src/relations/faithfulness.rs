//! Finite evidence for faithfulness of the Fock representation: the collapse
//! map ψ from Fock tensor words onto a lower class, and sampled norm
//! domination `‖π(w)‖ <= ‖π_F(w)‖`. Neither is a proof; reports say so.

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::report::{format_float, VerificationReport};
use super::sets::WordEvaluator;
use crate::error::{Error, Result};
use crate::fock_core::{matrix_norm, operator_norm, FockBasis, LinearOperator};
use crate::representations::{build_irrep, truncated_shift, vacuum_projection, IrrepSpec};
use crate::symbolic::{Letter, Word};

/// Tolerance for ψ-image equalities.
pub const PSI_TOL: f64 = 1e-12;
/// Tolerance for multiplicativity of ψ.
pub const PSI_PRODUCT_TOL: f64 = 1e-10;
/// Slack in `‖π(w)‖ <= ‖π_F(w)‖`.
pub const DOMINATION_TOL: f64 = 1e-8;

/// One tensor factor: `S`, `S*` or the vacuum projection `D = 1 − SS*`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlotLetter {
    S,
    SStar,
    D,
}

impl SlotLetter {
    fn adjoint(self) -> Self {
        match self {
            SlotLetter::S => SlotLetter::SStar,
            SlotLetter::SStar => SlotLetter::S,
            SlotLetter::D => SlotLetter::D,
        }
    }
}

/// Elementary tensor whose slot `k` holds a word in `{S, S*, D}` (empty = identity).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorWord {
    pub slots: Vec<Vec<SlotLetter>>,
}

impl TensorWord {
    pub fn identity(d: usize) -> Self {
        TensorWord {
            slots: vec![Vec::new(); d],
        }
    }

    /// `π_F(t_i) = D ⊗ … ⊗ D ⊗ S ⊗ 1 ⊗ … ⊗ 1` with `S` in slot `i`.
    pub fn fock_generator(d: usize, i: usize) -> Self {
        let slots = (1..=d)
            .map(|k| match k.cmp(&i) {
                std::cmp::Ordering::Less => vec![SlotLetter::D],
                std::cmp::Ordering::Equal => vec![SlotLetter::S],
                std::cmp::Ordering::Greater => Vec::new(),
            })
            .collect();
        TensorWord { slots }
    }

    /// Fock image of a word in `t_i`, `t_i*`.
    pub fn from_word(d: usize, word: &[Letter]) -> Self {
        word.iter().fold(TensorWord::identity(d), |acc, l| {
            let g = TensorWord::fock_generator(d, l.index);
            acc.mul(&if l.starred { g.adjoint() } else { g })
        })
    }

    pub fn mul(&self, other: &TensorWord) -> Self {
        let slots = self
            .slots
            .iter()
            .zip(&other.slots)
            .map(|(a, b)| a.iter().chain(b).copied().collect())
            .collect();
        TensorWord { slots }
    }

    pub fn adjoint(&self) -> Self {
        let slots = self
            .slots
            .iter()
            .map(|w| w.iter().rev().map(|l| l.adjoint()).collect())
            .collect();
        TensorWord { slots }
    }

    /// Matrix on the full `d`-slot truncated Fock space.
    pub fn fock_matrix(&self, cap: usize) -> Result<LinearOperator> {
        let basis = FockBasis::new(self.slots.len(), cap)?;
        let factors: Vec<_> = self.slots.iter().map(|w| slot_matrix(w, cap)).collect();
        LinearOperator::tensor(basis, &factors)
    }

    /// `ψ` for class `j` with phase `φ`: slots `<= j` kept, slot `j+1` evaluated at
    /// `S = e^{iφ}`, later slots at `S = 1`; `D` becomes `0` in every collapsed slot.
    pub fn collapse(&self, class_j: usize, phase: f64, cap: usize) -> Result<LinearOperator> {
        let d = self.slots.len();
        if class_j >= d {
            return Err(Error::Parameter(format!(
                "collapse needs class j < d, got j = {class_j}, d = {d}"
            )));
        }
        let mut scalar = Complex64::new(1.0, 0.0);
        for (k, w) in self.slots.iter().enumerate().skip(class_j) {
            let z = if k == class_j {
                Complex64::from_polar(1.0, phase)
            } else {
                Complex64::new(1.0, 0.0)
            };
            for l in w {
                scalar *= match l {
                    SlotLetter::S => z,
                    SlotLetter::SStar => z.conj(),
                    SlotLetter::D => Complex64::new(0.0, 0.0),
                };
            }
        }
        if class_j == 0 {
            let basis = FockBasis::scalar(cap);
            return Ok(LinearOperator::identity(basis).scale(scalar));
        }
        let basis = FockBasis::new(class_j, cap)?;
        let factors: Vec<_> = self.slots[..class_j]
            .iter()
            .map(|w| slot_matrix(w, cap))
            .collect();
        Ok(LinearOperator::tensor(basis, &factors)?.scale(scalar))
    }
}

fn slot_matrix(word: &[SlotLetter], cap: usize) -> Array2<Complex64> {
    let s = truncated_shift(cap);
    let s_star = s.t().to_owned();
    let dmat = vacuum_projection(cap);
    word.iter().fold(Array2::eye(cap + 1), |acc, l| {
        let m = match l {
            SlotLetter::S => &s,
            SlotLetter::SStar => &s_star,
            SlotLetter::D => &dmat,
        };
        acc.dot(m)
    })
}

/// `t1 t2* ...` rendering of a generator word.
pub fn format_t_word(word: &[Letter]) -> String {
    if word.is_empty() {
        return "1".into();
    }
    word.iter()
        .map(|l| format!("t{}{}", l.index, if l.starred { "*" } else { "" }))
        .collect::<Vec<_>>()
        .join("")
}

/// `count` words over `{t_i, t_i*}` with lengths uniform in `1..=max_len`.
/// Word `k` is drawn from its own stream of the seeded generator, so the
/// sample does not depend on evaluation order.
pub fn sample_words(d: usize, count: usize, max_len: usize, seed: u64) -> Vec<Word> {
    (0..count)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let len = rng.random_range(1..=max_len.max(1));
            (0..len)
                .map(|_| Letter::new(rng.random_range(1..=d), rng.random_bool(0.5)))
                .collect()
        })
        .collect()
}

/// Checks `ψ(π_F(t_i)) = π_j(t_i)` for every generator, `ψ(π_F(w)) = π_j(w)`
/// and `ψ(uv) = ψ(u)ψ(v)` on seeded words.
pub fn psi_collapse_check(d: usize, class_j: usize, phase: f64, cap: usize) -> Result<VerificationReport> {
    psi_collapse_check_seeded(d, class_j, phase, cap, 20, 0)
}

pub fn psi_collapse_check_seeded(
    d: usize,
    class_j: usize,
    phase: f64,
    cap: usize,
    samples: usize,
    seed: u64,
) -> Result<VerificationReport> {
    if class_j >= d {
        return Err(Error::Parameter(format!(
            "collapse check needs class j < d, got j = {class_j}, d = {d}"
        )));
    }
    let spec = IrrepSpec::new(d, class_j, phase, cap, 0.0)?;
    let target = build_irrep(&spec)?;
    let mut report = VerificationReport::new("psi_collapse_check")
        .with_param("d", d)
        .with_param("class_j", class_j)
        .with_param("phase", phase)
        .with_param("cap", cap)
        .with_param("samples", samples)
        .with_param("seed", seed)
        .with_param("kind", "evidence");

    for i in 1..=d {
        let image = TensorWord::fock_generator(d, i).collapse(class_j, phase, cap)?;
        let residual = matrix_norm(image.sub(target.op(i))?.matrix())?;
        report.check(
            format!("generator.{i}"),
            format!("psi(pi_F(t{i})) = pi_{class_j}(t{i})"),
            residual,
            PSI_TOL,
        );
    }

    let words = sample_words(d, 2 * samples, 6, seed);
    let evaluator = WordEvaluator::new(target.ops())?;
    let results: Vec<Result<(f64, f64)>> = words
        .par_chunks(2)
        .map(|pair| {
            let (u, v) = (&pair[0], &pair[1]);
            let tu = TensorWord::from_word(d, u);
            let tv = TensorWord::from_word(d, v);
            let psi_u = tu.collapse(class_j, phase, cap)?;
            let psi_v = tv.collapse(class_j, phase, cap)?;
            let psi_uv = tu.mul(&tv).collapse(class_j, phase, cap)?;
            let product = matrix_norm(psi_uv.sub(&psi_u.compose(&psi_v)?)?.matrix())?;
            let hom = matrix_norm(psi_u.sub(&evaluator.word(u)?)?.matrix())?;
            Ok((product, hom))
        })
        .collect();
    for (k, (pair, res)) in words.chunks(2).zip(results).enumerate() {
        let (product, hom) = res?;
        let (u, v) = (format_t_word(&pair[0]), format_t_word(&pair[1]));
        report.check(
            format!("word.{k}"),
            format!("psi(pi_F({u})) = pi_{class_j}({u})"),
            hom,
            PSI_PRODUCT_TOL,
        );
        report.check(
            format!("product.{k}"),
            format!("psi(uv) = psi(u)psi(v) for u = {u}, v = {v}"),
            product,
            PSI_PRODUCT_TOL,
        );
    }
    Ok(report)
}

/// For each word: `‖π(w)‖ <= ‖π_F(w)‖ + 1e-8` in every listed class at the
/// Fock truncation, and `‖π_F(w)‖` non-decreasing over caps `N−4, N−2, N`.
pub fn norm_domination_sample(
    words: &[Word],
    classes: &[IrrepSpec],
    fock: &IrrepSpec,
    seed: u64,
) -> Result<VerificationReport> {
    if !fock.is_fock() {
        return Err(Error::Parameter("reference representation must be the Fock class".into()));
    }
    let d = fock.d;
    let cap = fock.cap;
    if let Some(bad) = classes.iter().find(|c| c.d != d || c.cap != cap) {
        return Err(Error::Parameter(format!(
            "class j = {} has (d, cap) = ({}, {}), expected ({d}, {cap})",
            bad.class_j, bad.d, bad.cap
        )));
    }
    if let Some(w) = words.iter().find(|w| w.iter().any(|l| l.index == 0 || l.index > d)) {
        return Err(Error::Parameter(format!(
            "word {} uses a generator outside 1..={d}",
            format_t_word(w)
        )));
    }
    let ladder: Vec<usize> = [cap.saturating_sub(4), cap.saturating_sub(2), cap]
        .into_iter()
        .filter(|&n| n >= 1)
        .collect();
    let fock_ladder = ladder
        .iter()
        .map(|&n| build_irrep(&IrrepSpec { cap: n, ..*fock }))
        .collect::<Result<Vec<_>>>()?;
    let reps = classes.iter().map(build_irrep).collect::<Result<Vec<_>>>()?;

    struct Row {
        ladder: Vec<f64>,
        classes: Vec<f64>,
    }
    let rows: Vec<Result<Row>> = words
        .par_iter()
        .map(|w| {
            let ladder = fock_ladder
                .iter()
                .map(|f| operator_norm(&WordEvaluator::new(f.ops())?.word(w)?))
                .collect::<Result<Vec<_>>>()?;
            let classes = reps
                .iter()
                .map(|r| operator_norm(&WordEvaluator::new(r.ops())?.word(w)?))
                .collect::<Result<Vec<_>>>()?;
            Ok(Row { ladder, classes })
        })
        .collect();

    let mut report = VerificationReport::new("norm_domination_sample")
        .with_param("d", d)
        .with_param("cap", cap)
        .with_param("seed", seed)
        .with_param("words", words.len())
        .with_param("classes", classes.iter().map(|c| c.class_j).collect::<Vec<_>>())
        .with_param("cap_ladder", ladder.clone())
        .with_param("kind", "evidence");
    for (k, (w, row)) in words.iter().zip(rows).enumerate() {
        let row = row?;
        let label = format_t_word(w);
        let fock_norm = *row.ladder.last().expect("ladder contains the cap");
        for (spec, norm) in classes.iter().zip(&row.classes) {
            report.check(
                format!("dominate.{k}.j{}", spec.class_j),
                format!(
                    "‖pi_{}({label})‖ = {} <= ‖pi_F({label})‖ = {}",
                    spec.class_j,
                    format_float(*norm),
                    format_float(fock_norm)
                ),
                (norm - fock_norm).max(0.0),
                DOMINATION_TOL,
            );
        }
        let drop = row
            .ladder
            .windows(2)
            .map(|p| (p[0] - p[1]).max(0.0))
            .fold(0.0, f64::max);
        report.check(
            format!("monotone.{k}"),
            format!("‖pi_F({label})‖ non-decreasing over caps {ladder:?}"),
            drop,
            DOMINATION_TOL,
        );
    }
    Ok(report)
}
