use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_traits::{One, Signed};

use super::mupoly::MuPoly;
use super::{Letter, Word};

/// Element of the free *-algebra on `x_1..x_d` with coefficients in `Q[μ]`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NcPolynomial {
    terms: BTreeMap<Word, MuPoly>,
}

impl NcPolynomial {
    pub fn zero() -> Self {
        NcPolynomial::default()
    }

    pub fn one() -> Self {
        Self::term(Vec::new(), MuPoly::one())
    }

    pub fn constant(c: MuPoly) -> Self {
        Self::term(Vec::new(), c)
    }

    pub fn word(word: Word) -> Self {
        Self::term(word, MuPoly::one())
    }

    pub fn term(word: Word, coeff: MuPoly) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(word, coeff);
        }
        NcPolynomial { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &MuPoly)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, word: &[Letter]) -> MuPoly {
        self.terms.get(word).cloned().unwrap_or_default()
    }

    /// Length of the longest word.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    pub fn max_index(&self) -> usize {
        self.terms
            .keys()
            .flat_map(|w| w.iter().map(|l| l.index))
            .max()
            .unwrap_or(0)
    }

    pub fn add_term(&mut self, word: Word, coeff: &MuPoly) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(word.clone()).or_default();
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&word);
        }
    }

    pub fn scale(&self, c: &MuPoly) -> Self {
        let mut out = NcPolynomial::zero();
        for (w, v) in &self.terms {
            out.add_term(w.clone(), &(v * c));
        }
        out
    }

    /// Involutive anti-automorphism: reverse words, toggle stars. Coefficients are real.
    pub fn adjoint(&self) -> Self {
        let mut out = NcPolynomial::zero();
        for (w, c) in &self.terms {
            out.add_term(adjoint_word(w), c);
        }
        out
    }
}

pub fn adjoint_word(w: &[Letter]) -> Word {
    w.iter().rev().map(|l| l.adjoint()).collect()
}

impl AddAssign<&NcPolynomial> for NcPolynomial {
    fn add_assign(&mut self, rhs: &NcPolynomial) {
        for (w, c) in &rhs.terms {
            self.add_term(w.clone(), c);
        }
    }
}

impl Add for &NcPolynomial {
    type Output = NcPolynomial;
    fn add(self, rhs: &NcPolynomial) -> NcPolynomial {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Neg for &NcPolynomial {
    type Output = NcPolynomial;
    fn neg(self) -> NcPolynomial {
        NcPolynomial {
            terms: self.terms.iter().map(|(w, c)| (w.clone(), -c)).collect(),
        }
    }
}

impl Sub for &NcPolynomial {
    type Output = NcPolynomial;
    fn sub(self, rhs: &NcPolynomial) -> NcPolynomial {
        self + &(-rhs)
    }
}

impl Mul for &NcPolynomial {
    type Output = NcPolynomial;
    fn mul(self, rhs: &NcPolynomial) -> NcPolynomial {
        let mut out = NcPolynomial::zero();
        for (wa, ca) in &self.terms {
            for (wb, cb) in &rhs.terms {
                let mut w = wa.clone();
                w.extend_from_slice(wb);
                out.add_term(w, &(ca * cb));
            }
        }
        out
    }
}

impl fmt::Display for NcPolynomial {
    /// One monomial per `(μ-power, word)` pair, in the CLI input syntax,
    /// e.g. `-1 + a1* a1 - mu^2 a1 a1*`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (w, c) in &self.terms {
            for (e, r) in c.terms() {
                let neg = r.is_negative();
                if first {
                    if neg {
                        write!(f, "-")?;
                    }
                } else {
                    write!(f, " {} ", if neg { '-' } else { '+' })?;
                }
                first = false;
                let mut parts: Vec<String> = Vec::new();
                let mag = r.abs();
                if !mag.is_one() || (e == 0 && w.is_empty()) {
                    parts.push(mag.to_string());
                }
                match e {
                    0 => {}
                    1 => parts.push("mu".into()),
                    _ => parts.push(format!("mu^{e}")),
                }
                parts.extend(w.iter().map(ToString::to_string));
                write!(f, "{}", parts.join(" "))?;
            }
        }
        Ok(())
    }
}
