use std::f64::consts::PI;

use tccr_core::fock_core::{core_residual, LinearOperator, MultiIndex, DEFAULT_RANK_TOL};
use tccr_core::reconstruct::{
    hat_s_family, polar_relations_check, qccr_polar_check, roundtrip_check, tilde_a_family,
    verify_lemma_suite,
};
use tccr_core::relations::tccr_residuals;
use tccr_core::representations::{build_fock_tccr, build_irrep, IrrepSpec};

fn failures(r: &tccr_core::relations::VerificationReport) -> Vec<String> {
    r.failures().map(|c| format!("{} {:e}", c.id, c.residual)).collect()
}

#[test]
fn one_mode_weights_match_direct_sum() {
    let mu: f64 = 0.5;
    let t = build_irrep(&IrrepSpec::fock(1, 8)).unwrap();
    let (a, _) = tilde_a_family(&t, mu).unwrap();
    for n in 0..8 {
        let direct: f64 = (0..=n).map(|k| mu.powi(2 * k as i32)).sum();
        assert!((a.op(1).matrix()[(n + 1, n)].re - direct.sqrt()).abs() < 1e-12);
    }
}

#[test]
fn second_generator_carries_mu_per_first_quantum() {
    let t = build_irrep(&IrrepSpec::fock(2, 6)).unwrap();
    let (a, _) = tilde_a_family(&t, 0.37).unwrap();
    let b = a.basis();
    let from = b.index_of(&MultiIndex::new(vec![1, 0])).unwrap();
    let to = b.index_of(&MultiIndex::new(vec![1, 1])).unwrap();
    assert!((a.op(2).matrix()[(to, from)].re - 0.37).abs() < 1e-12);
}

#[test]
fn three_generators_at_mu_07_satisfy_relations() {
    let t = build_irrep(&IrrepSpec::fock(3, 6)).unwrap();
    let (a, _) = tilde_a_family(&t, 0.7).unwrap();
    let r = tccr_residuals(&a).unwrap();
    assert!(r.all_passed(), "{:?}", failures(&r));
}

#[test]
fn hat_of_fock_is_irrep_on_core() {
    let a = build_fock_tccr(2, 0.5, 8).unwrap();
    let hat = hat_s_family(&a, DEFAULT_RANK_TOL).unwrap();
    let t = build_irrep(&IrrepSpec::fock(2, 8)).unwrap();
    for i in 1..=2 {
        assert!(core_residual(hat.op(i), t.op(i), 1).unwrap() <= 1e-10);
    }
}

#[test]
fn hat_at_mu_zero_is_identity_map() {
    let t = build_irrep(&IrrepSpec::fock(2, 5)).unwrap();
    let a = tccr_core::representations::TccrFamily::new(t.ops().to_vec(), 0.0).unwrap();
    let hat = hat_s_family(&a, DEFAULT_RANK_TOL).unwrap();
    for i in 1..=2 {
        assert!(hat.op(i).sub(t.op(i)).unwrap().max_abs_entry() <= 1e-12);
    }
}

#[test]
fn lemma_suite_three_generators() {
    let t = build_irrep(&IrrepSpec::fock(3, 8)).unwrap();
    let r = verify_lemma_suite(&t, 0.5).unwrap();
    assert!(r.all_passed(), "{:?}", failures(&r));
    for id in ["power.2.2.2", "absorb.2.1", "stage_diag.1.1", "twist.3.2.1", "cross_zero.3.3.2"] {
        assert!(r.get(id).is_some(), "missing {id}");
    }
}

#[test]
fn lemma_suite_non_fock_classes() {
    for j in 0..3 {
        let spec = IrrepSpec::new(3, j, PI / 3.0, 6, 0.0).unwrap();
        let t = build_irrep(&spec).unwrap();
        let r = verify_lemma_suite(&t, -0.6).unwrap();
        assert!(r.all_passed(), "class {j}: {:?}", failures(&r));
    }
}

#[test]
fn roundtrip_fock_and_lower_classes() {
    for j in 0..=2 {
        let spec = IrrepSpec::new(2, j, 0.0, 8, 0.0).unwrap();
        let t = build_irrep(&spec).unwrap();
        let r = roundtrip_check(&t, 0.5, DEFAULT_RANK_TOL).unwrap();
        assert!(r.all_passed(), "class {j}: {:?}", failures(&r));
    }
}

#[test]
fn roundtrip_at_mu_zero_is_exact() {
    let t = build_irrep(&IrrepSpec::fock(2, 6)).unwrap();
    let r = roundtrip_check(&t, 0.0, DEFAULT_RANK_TOL).unwrap();
    assert!(r.max_residual() <= 1e-12, "{}", r.max_residual());
}

#[test]
fn polar_part_relations() {
    let a = build_fock_tccr(3, 0.5, 6).unwrap();
    let r = polar_relations_check(&a, DEFAULT_RANK_TOL, 1e-8).unwrap();
    assert!(r.all_passed(), "{:?}", failures(&r));
    assert!(r.get("cs.shift.1.2").is_some());
    let neg = build_fock_tccr(2, -0.5, 6).unwrap();
    let r = polar_relations_check(&neg, DEFAULT_RANK_TOL, 1e-8).unwrap();
    assert!(r.all_passed(), "{:?}", failures(&r));
    assert!(r.get("cs.shift.1.2").is_none());
}

#[test]
fn qccr_polar_identity_for_negative_and_large_q() {
    for &q in &[-0.5, 0.3, 0.9] {
        let r = qccr_polar_check(q, 12, DEFAULT_RANK_TOL).unwrap();
        assert!(r.all_passed(), "q = {q}: {:?}", failures(&r));
    }
}

#[test]
fn corrupted_generator_fails_precondition() {
    let t = build_irrep(&IrrepSpec::fock(2, 4)).unwrap();
    let mut ops = t.ops().to_vec();
    ops[1] = LinearOperator::identity(*t.basis());
    let bad = tccr_core::representations::GeneratorFamily::new(ops).unwrap();
    assert!(tilde_a_family(&bad, 0.5).is_err());
}
