use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tccr_core::fock_core::{
    core_residual, enumerate_basis, operator_norm, polar_left, psd_sqrt, FockBasis, LinearOperator,
    DEFAULT_RANK_TOL,
};
use tccr_core::representations::{build_fock_tccr, build_irrep, IrrepSpec};
use tccr_core::Error;

/// Largest singular value by power iteration on `A* A`, independent of LAPACK.
fn power_norm(a: &LinearOperator) -> f64 {
    let m = a.matrix();
    let gram = m.t().mapv(|z| z.conj()).dot(m);
    let n = gram.nrows();
    let mut v = ndarray::Array1::from_shape_fn(n, |k| Complex64::new(1.0 + 0.01 * k as f64, 0.5));
    let mut lambda = 0.0;
    for _ in 0..5000 {
        let w = gram.dot(&v);
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        lambda = norm / v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v = w.mapv(|z| z / norm);
    }
    lambda.sqrt()
}

fn random_matrix(rng: &mut ChaCha8Rng, basis: FockBasis) -> LinearOperator {
    let n = basis.dim();
    let m = Array2::from_shape_fn((n, n), |_| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    LinearOperator::new(basis, m).unwrap()
}

#[test]
fn basis_sizes_and_vacuum() {
    let b = enumerate_basis(3, 9).unwrap();
    assert_eq!(b.dim(), 1000);
    assert!(b.multi_index(0).entries().iter().all(|&n| n == 0));
    let small = enumerate_basis(2, 1).unwrap();
    let listed: Vec<Vec<usize>> = small.iter().map(|m| m.entries().to_vec()).collect();
    assert_eq!(listed, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
}

#[test]
fn capacity_error_names_the_dimension() {
    match FockBasis::with_limit(4, 12, 20_000) {
        Err(Error::Capacity { dim, .. }) => assert_eq!(dim, 13u128.pow(4)),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn fock_partial_isometries_have_unit_norm() {
    for d in 1..=3 {
        let t = build_irrep(&IrrepSpec::fock(d, 4)).unwrap();
        for op in t.ops() {
            assert!((operator_norm(op).unwrap() - 1.0).abs() < 1e-10);
            assert!((power_norm(op) - 1.0).abs() < 1e-8);
        }
    }
}

#[test]
fn first_generator_norm_is_largest_weight() {
    let mu: f64 = 0.5;
    let a = build_fock_tccr(1, mu, 10).unwrap();
    let expect = ((1.0 - mu.powi(20)) / (1.0 - mu * mu)).sqrt();
    let got = operator_norm(a.op(1)).unwrap();
    assert!((got - expect).abs() <= 1e-10 * expect);
    // a* a is diagonal in the lattice basis, so its largest entry is the squared norm.
    let gram = a.op(1).adjoint().compose(a.op(1)).unwrap();
    let brute = gram
        .matrix()
        .indexed_iter()
        .map(|((r, c), z)| {
            assert!(r == c || z.norm() == 0.0);
            z.re
        })
        .fold(0.0, f64::max)
        .sqrt();
    assert!((brute - expect).abs() <= 1e-12);
}

#[test]
fn positive_part_of_shift_is_diagonal_geometric_sum() {
    let mu: f64 = 0.6;
    let cap = 6;
    let t = build_irrep(&IrrepSpec::fock(2, cap)).unwrap();
    let t1 = t.op(1);
    let t1s = t1.adjoint();
    let basis = *t.basis();
    let mut sum = LinearOperator::zeros(basis);
    let mut up = LinearOperator::identity(basis);
    let mut down = LinearOperator::identity(basis);
    for n in 1..=cap + 2 {
        up = up.compose(t1).unwrap();
        down = t1s.compose(&down).unwrap();
        let w = mu.powi(2 * (n as i32 - 1));
        sum.add_scaled(Complex64::new(w, 0.0), &up.compose(&down).unwrap()).unwrap();
    }
    let root = psd_sqrt(&sum).unwrap();
    for (k, mi) in basis.iter().enumerate() {
        let n1 = mi.entries()[0] as i32;
        let expect = ((1.0 - mu.powi(2 * n1)) / (1.0 - mu * mu)).sqrt();
        assert!((root.matrix()[(k, k)].re - expect).abs() < 1e-12, "{mi:?}");
    }
}

#[test]
fn psd_sqrt_inverts_squares() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let basis = FockBasis::new(1, 7).unwrap();
    for _ in 0..20 {
        let x = random_matrix(&mut rng, basis);
        let b = x.compose(&x.adjoint()).unwrap();
        let b = b.scale_real(1.0 / operator_norm(&b).unwrap());
        let root = psd_sqrt(&b.compose(&b).unwrap()).unwrap();
        assert!(operator_norm(&root.sub(&b).unwrap()).unwrap() < 1e-8);
    }
}

#[test]
fn polar_of_first_generator_is_the_shift() {
    let a = build_fock_tccr(2, 0.5, 8).unwrap();
    let p = polar_left(a.op(1), DEFAULT_RANK_TOL).unwrap();
    let t = build_irrep(&IrrepSpec::fock(2, 8)).unwrap();
    assert!(p.isometric_part.sub(t.op(1)).unwrap().max_abs_entry() < 1e-12);
    let back = p.positive_part.compose(&p.isometric_part).unwrap();
    assert!(operator_norm(&back.sub(a.op(1)).unwrap()).unwrap() < 1e-10);
}

#[test]
fn polar_invariants_on_random_input() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let basis = FockBasis::new(2, 3).unwrap();
    for _ in 0..10 {
        let a = random_matrix(&mut rng, basis);
        let p = polar_left(&a, DEFAULT_RANK_TOL).unwrap();
        let s = &p.isometric_part;
        let sss = s.compose(&s.adjoint()).unwrap().compose(s).unwrap();
        assert!(operator_norm(&sss.sub(s).unwrap()).unwrap() < 1e-10);
        assert!(p.positive_part.hermitian_defect() < 1e-12);
    }
}

#[test]
fn isometry_relation_holds_on_core_and_corruption_is_seen() {
    let t = build_irrep(&IrrepSpec::fock(2, 5)).unwrap();
    let basis = *t.basis();
    let lhs = t.op(1).adjoint().compose(t.op(1)).unwrap();
    let id = LinearOperator::identity(basis);
    assert!(core_residual(&lhs, &id, 2).unwrap() <= 1e-12);
    assert!(core_residual(&lhs, &LinearOperator::zeros(basis), 2).unwrap() >= 1.0 - 1e-12);
    assert!(core_residual(&lhs, &id, 0).unwrap() >= 1.0 - 1e-12);
    assert!(matches!(
        core_residual(&lhs, &id, 6),
        Err(Error::TruncationTooSmall { degree: 6, cap: 5 })
    ));
}

#[test]
fn json_dump_roundtrip_of_generator() {
    let a = build_fock_tccr(2, 0.3, 3).unwrap();
    let dump = a.op(2).to_json_dump();
    let back = LinearOperator::from_json_dump(&dump).unwrap();
    assert_eq!(&back, a.op(2));
}
