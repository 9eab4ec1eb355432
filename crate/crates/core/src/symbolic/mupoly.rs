use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Polynomial in the single variable μ with exact rational coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MuPoly {
    coeffs: BTreeMap<u32, BigRational>,
}

impl MuPoly {
    pub fn zero() -> Self {
        MuPoly::default()
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial(c, 0)
    }

    pub fn from_integer(n: i64) -> Self {
        Self::constant(BigRational::from_integer(BigInt::from(n)))
    }

    /// `c · μ^exp`.
    pub fn monomial(c: BigRational, exp: u32) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(exp, c);
        }
        MuPoly { coeffs }
    }

    /// `μ^exp`.
    pub fn mu_pow(exp: u32) -> Self {
        Self::monomial(BigRational::one(), exp)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs.get(&0).is_some_and(|c| c.is_one())
    }

    pub fn coefficient(&self, exp: u32) -> BigRational {
        self.coeffs.get(&exp).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &BigRational)> {
        self.coeffs.iter().map(|(&e, c)| (e, c))
    }

    pub fn degree(&self) -> Option<u32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return MuPoly::zero();
        }
        MuPoly {
            coeffs: self.coeffs.iter().map(|(&e, v)| (e, v * c)).collect(),
        }
    }

    /// Horner evaluation at a floating-point μ.
    pub fn eval(&self, mu: f64) -> f64 {
        let Some(top) = self.degree() else {
            return 0.0;
        };
        let mut acc = 0.0;
        for e in (0..=top).rev() {
            acc = acc * mu + self.coeffs.get(&e).map_or(0.0, rational_to_f64);
        }
        acc
    }

    fn add_term(&mut self, exp: u32, c: &BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(exp).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&exp);
        }
    }
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

impl AddAssign<&MuPoly> for MuPoly {
    fn add_assign(&mut self, rhs: &MuPoly) {
        for (&e, c) in &rhs.coeffs {
            self.add_term(e, c);
        }
    }
}

impl Add for &MuPoly {
    type Output = MuPoly;
    fn add(self, rhs: &MuPoly) -> MuPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Neg for &MuPoly {
    type Output = MuPoly;
    fn neg(self) -> MuPoly {
        MuPoly {
            coeffs: self.coeffs.iter().map(|(&e, c)| (e, -c)).collect(),
        }
    }
}

impl Sub for &MuPoly {
    type Output = MuPoly;
    fn sub(self, rhs: &MuPoly) -> MuPoly {
        self + &(-rhs)
    }
}

impl Mul for &MuPoly {
    type Output = MuPoly;
    fn mul(self, rhs: &MuPoly) -> MuPoly {
        let mut out = MuPoly::zero();
        for (&ea, ca) in &self.coeffs {
            for (&eb, cb) in &rhs.coeffs {
                out.add_term(ea + eb, &(ca * cb));
            }
        }
        out
    }
}

impl fmt::Display for MuPoly {
    /// Ascending powers, e.g. `1 + mu^2`, `-1/2 mu - 3 mu^4`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (&e, c)) in self.coeffs.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let mu = match e {
                0 => String::new(),
                1 => "mu".to_string(),
                _ => format!("mu^{e}"),
            };
            match (mag.is_one(), mu.is_empty()) {
                (true, true) => write!(f, "1")?,
                (true, false) => write!(f, "{mu}")?,
                (false, true) => write!(f, "{mag}")?,
                (false, false) => write!(f, "{mag} {mu}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn arithmetic_and_cancellation() {
        let one_plus_mu2 = &MuPoly::one() + &MuPoly::mu_pow(2);
        let one_minus_mu2 = &MuPoly::one() - &MuPoly::mu_pow(2);
        let prod = &one_plus_mu2 * &one_minus_mu2;
        assert_eq!(prod, &MuPoly::one() - &MuPoly::mu_pow(4));
        assert!((&prod - &prod).is_zero());
        assert_eq!(prod.degree(), Some(4));
    }

    #[test]
    fn display_forms() {
        assert_eq!((&MuPoly::one() + &MuPoly::mu_pow(2)).to_string(), "1 + mu^2");
        let p = &MuPoly::monomial(q(-1, 2), 1) - &MuPoly::monomial(q(3, 1), 4);
        assert_eq!(p.to_string(), "-1/2 mu - 3 mu^4");
        assert_eq!(MuPoly::zero().to_string(), "0");
    }

    #[test]
    fn evaluation() {
        let p = &(&MuPoly::one() + &MuPoly::mu_pow(2)) + &MuPoly::monomial(q(1, 4), 3);
        assert!((p.eval(0.5) - (1.0 + 0.25 + 0.25 * 0.125)).abs() < 1e-15);
        assert_eq!(MuPoly::zero().eval(0.3), 0.0);
    }
}
