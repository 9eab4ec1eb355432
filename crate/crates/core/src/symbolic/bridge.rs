use ndarray::Array1;
use num_complex::Complex64;

use super::ncpoly::NcPolynomial;
use super::rewrite::vacuum_expectation;
use crate::error::{Error, Result};
use crate::relations::VerificationReport;
use crate::representations::TccrFamily;

/// Agreement required between the exact and the truncated vacuum expectation.
pub const BRIDGE_TOL: f64 = 1e-10;

/// `⟨Ω, p(a) Ω⟩` in the truncated model, each word applied to the vacuum vector.
pub fn evaluate_vacuum_numeric(p: &NcPolynomial, a: &TccrFamily) -> Result<f64> {
    let basis = a.basis();
    if p.degree() > basis.cap() {
        return Err(Error::TruncationTooSmall {
            degree: p.degree(),
            cap: basis.cap(),
        });
    }
    if p.max_index() > a.d() {
        return Err(Error::Parameter(format!(
            "polynomial uses generator {} but the family has {}",
            p.max_index(),
            a.d()
        )));
    }
    let adjoints: Vec<_> = a.ops().iter().map(|op| op.adjoint()).collect();
    let mut vacuum = Array1::<Complex64>::zeros(basis.dim());
    vacuum[basis.vacuum()] = Complex64::new(1.0, 0.0);
    let mut total = 0.0;
    for (word, coeff) in p.terms() {
        let mut v = vacuum.clone();
        for l in word.iter().rev() {
            let op = if l.starred {
                &adjoints[l.index - 1]
            } else {
                a.op(l.index)
            };
            v = op.apply(&v);
        }
        total += coeff.eval(a.mu()) * v[basis.vacuum()].re;
    }
    Ok(total)
}

/// Compares the exact vacuum expectation of `p`, evaluated at the family's `μ`,
/// with the same functional computed from the family's matrices.
pub fn eval_and_bridge(p: &NcPolynomial, a: &TccrFamily) -> Result<VerificationReport> {
    let numeric = evaluate_vacuum_numeric(p, a)?;
    let exact = vacuum_expectation(p, a.d())?;
    let symbolic = exact.eval(a.mu());
    let mut report = VerificationReport::new("eval_and_bridge")
        .with_param("d", a.d())
        .with_param("mu", a.mu())
        .with_param("cap", a.basis().cap())
        .with_param("polynomial", p.to_string())
        .with_param("vacuum_expectation", exact.to_string());
    report.check(
        "vacuum",
        format!("<Omega, p(a) Omega> = {symbolic:.12} (exact) vs {numeric:.12} (matrix)"),
        (numeric - symbolic).abs(),
        BRIDGE_TOL,
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::representations::build_fock_tccr;
    use crate::symbolic::parse_polynomial;

    #[test]
    fn number_operator_on_vacuum() {
        let a = build_fock_tccr(1, 0.5, 4).unwrap();
        let p = parse_polynomial("a1* a1", 1).unwrap();
        let r = eval_and_bridge(&p, &a).unwrap();
        assert!(r.all_passed());
        assert!((evaluate_vacuum_numeric(&p, &a).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn second_power() {
        let a = build_fock_tccr(1, 0.5, 4).unwrap();
        let p = parse_polynomial("a1* a1* a1 a1", 1).unwrap();
        assert!((evaluate_vacuum_numeric(&p, &a).unwrap() - 1.25).abs() < 1e-14);
        assert!(eval_and_bridge(&p, &a).unwrap().all_passed());
    }

    #[test]
    fn long_words_need_a_larger_cap() {
        let a = build_fock_tccr(1, 0.5, 2).unwrap();
        let p = parse_polynomial("a1* a1* a1", 1).unwrap();
        assert!(matches!(
            eval_and_bridge(&p, &a),
            Err(Error::TruncationTooSmall { degree: 3, cap: 2 })
        ));
    }
}
