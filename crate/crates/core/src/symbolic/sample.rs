use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

use super::mupoly::MuPoly;
use super::ncpoly::NcPolynomial;
use super::{Letter, Word};

/// Letters uniform over `{x_1..x_d, x_1*..x_d*}`, length uniform in `0..=max_len`.
pub fn random_word<R: Rng + ?Sized>(rng: &mut R, d: usize, max_len: usize) -> Word {
    let len = rng.random_range(0..=max_len);
    (0..len)
        .map(|_| Letter::new(rng.random_range(1..=d), rng.random_bool(0.5)))
        .collect()
}

/// Sum of `1..=max_terms` random words with small rational coefficients times `μ^{0..=2}`.
pub fn random_polynomial<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    max_len: usize,
    max_terms: usize,
) -> NcPolynomial {
    let mut p = NcPolynomial::zero();
    let terms = rng.random_range(1..=max_terms.max(1));
    for _ in 0..terms {
        let mut num = rng.random_range(-3i64..=3);
        if num == 0 {
            num = 1;
        }
        let den = rng.random_range(1i64..=3);
        let c = BigRational::new(BigInt::from(num), BigInt::from(den));
        let coeff = MuPoly::monomial(c, rng.random_range(0..=2));
        p.add_term(random_word(rng, d, max_len), &coeff);
    }
    p
}
