//! Exact normal ordering in the free *-algebra on `x_1..x_d` modulo the twisted
//! commutation relations, with coefficients in `Q[μ]`.
//!
//! This engine never touches floating point until [`eval_and_bridge`] compares
//! it with a truncated matrix model, which makes it an independent check on
//! every numeric construction in the crate.

mod bridge;
mod gram;
mod mupoly;
mod ncpoly;
mod parse;
mod rewrite;
mod sample;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use bridge::{eval_and_bridge, evaluate_vacuum_numeric, BRIDGE_TOL};
pub use gram::{gram_matrix, gram_matrix_bounded, unstarred_words, GramMatrix, DEFAULT_MAX_LEVEL, MAX_GRAM_D};
pub use mupoly::MuPoly;
pub use ncpoly::{adjoint_word, NcPolynomial};
pub use parse::parse_polynomial;
pub use rewrite::{
    find_redex, is_normal, normal_order, normal_order_with, rewrite_at, rewrite_pair,
    vacuum_expectation, Normalizer, Strategy,
};
pub use sample::{random_polynomial, random_word};

/// A generator `x_i` or its adjoint `x_i*`; indices are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub index: usize,
    pub starred: bool,
}

impl Letter {
    pub fn new(index: usize, starred: bool) -> Self {
        Letter { index, starred }
    }

    pub fn plain(index: usize) -> Self {
        Letter::new(index, false)
    }

    pub fn star(index: usize) -> Self {
        Letter::new(index, true)
    }

    pub fn adjoint(self) -> Self {
        Letter::new(self.index, !self.starred)
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}{}", self.index, if self.starred { "*" } else { "" })
    }
}

pub type Word = Vec<Letter>;

/// `a1* a1 a2`-style rendering; `1` for the empty word.
pub fn format_word(word: &[Letter]) -> String {
    if word.is_empty() {
        return "1".to_string();
    }
    word.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}
