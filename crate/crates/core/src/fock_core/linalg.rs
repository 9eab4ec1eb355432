use ndarray::{s, Array1, Array2, Axis, ShapeBuilder};
use ndarray_linalg::{Eigh, SVD, UPLO};
use num_complex::Complex64;

use super::operator::LinearOperator;
use crate::error::{Error, Result};

/// Relative singular-value cutoff used by [`polar_left`] when none is given.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;
/// Eigenvalues below this are treated as zero by [`psd_sqrt`].
pub const EIGEN_CLAMP: f64 = 1e-12;
/// Eigenvalues below `-PSD_TOL` make [`psd_sqrt`] fail.
pub const PSD_TOL: f64 = 1e-10;
/// Admissible entrywise asymmetry for [`psd_sqrt`] inputs.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigen-decomposition of a Hermitian matrix, eigenvectors as columns.
///
/// The LAPACK binding conjugates the eigenvectors of row-major complex input,
/// so the matrix is copied into column-major order first.
pub fn hermitian_eigh(m: &Array2<Complex64>) -> Result<(Array1<f64>, Array2<Complex64>)> {
    let mut f = Array2::<Complex64>::zeros(m.dim().f());
    f.assign(m);
    Ok(f.eigh(UPLO::Lower)?)
}

/// Largest singular value of an arbitrary (possibly rectangular) complex matrix.
pub fn matrix_norm(m: &Array2<Complex64>) -> Result<f64> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric("non-finite matrix entry".into()));
    }
    if m.is_empty() {
        return Ok(0.0);
    }
    if m.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
        return Ok(0.0);
    }
    let blocks = decouple(m);
    if blocks.len() == 1 {
        return dense_norm(m);
    }
    let mut best = 0.0f64;
    for (rows, cols) in blocks {
        let block = m.select(Axis(0), &rows).select(Axis(1), &cols);
        best = best.max(dense_norm(&block)?);
    }
    Ok(best)
}

fn dense_norm(m: &Array2<Complex64>) -> Result<f64> {
    if m.nrows() == 1 || m.ncols() == 1 {
        return Ok(m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt());
    }
    let (_, sv, _) = m.svd(false, false)?;
    Ok(sv.iter().copied().fold(0.0, f64::max))
}

/// Splits the nonzero pattern into independent blocks: rows and columns are
/// linked when they share a nonzero entry. The norm is the maximum block norm.
fn decouple(m: &Array2<Complex64>) -> Vec<(Vec<usize>, Vec<usize>)> {
    let (nr, nc) = m.dim();
    let mut parent: Vec<usize> = (0..nr + nc).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for ((r, c), z) in m.indexed_iter() {
        if z.re != 0.0 || z.im != 0.0 {
            let (a, b) = (find(&mut parent, r), find(&mut parent, nr + c));
            if a != b {
                parent[a] = b;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, (Vec<usize>, Vec<usize>)> = Default::default();
    for x in 0..nr + nc {
        let root = find(&mut parent, x);
        let entry = groups.entry(root).or_default();
        if x < nr {
            entry.0.push(x);
        } else {
            entry.1.push(x - nr);
        }
    }
    groups
        .into_values()
        .filter(|(rows, cols)| !rows.is_empty() && !cols.is_empty())
        .collect()
}

/// Operator norm (largest singular value).
pub fn operator_norm(a: &LinearOperator) -> Result<f64> {
    matrix_norm(a.matrix())
}

/// Positive square root of a Hermitian positive semidefinite operator.
pub fn psd_sqrt(a: &LinearOperator) -> Result<LinearOperator> {
    let scale = a.max_abs_entry().max(1.0);
    let asymmetry = a.hermitian_defect();
    if asymmetry > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian { asymmetry });
    }
    let m = a.matrix();
    let n = a.dim();
    let diagonal = m
        .indexed_iter()
        .all(|((r, c), z)| r == c || (z.re == 0.0 && z.im == 0.0));
    if diagonal {
        let mut root = Array2::<Complex64>::zeros((n, n));
        for k in 0..n {
            let l = m[(k, k)].re;
            if l < -PSD_TOL {
                return Err(Error::NotPsd { eigenvalue: l });
            }
            root[(k, k)] = Complex64::new(if l < EIGEN_CLAMP { 0.0 } else { l.sqrt() }, 0.0);
        }
        return LinearOperator::new(*a.basis(), root);
    }
    let sym = m.mapv(|z| z * 0.5) + m.t().mapv(|z| z.conj() * 0.5);
    let (eigenvalues, vectors) = hermitian_eigh(&sym)?;
    if let Some(&worst) = eigenvalues.iter().find(|&&l| l < -PSD_TOL) {
        return Err(Error::NotPsd { eigenvalue: worst });
    }
    let roots: Array1<f64> = eigenvalues.mapv(|l| if l < EIGEN_CLAMP { 0.0 } else { l.sqrt() });
    let mut scaled = vectors.clone();
    for (mut col, &r) in scaled.axis_iter_mut(Axis(1)).zip(roots.iter()) {
        col.mapv_inplace(|z| z * r);
    }
    let root = scaled.dot(&vectors.t().mapv(|z| z.conj()));
    LinearOperator::new(*a.basis(), root)
}

/// Factors `A = C · S` with `C = (A A*)^{1/2}` and `S` a partial isometry.
#[derive(Clone, Debug)]
pub struct PolarPair {
    pub isometric_part: LinearOperator,
    pub positive_part: LinearOperator,
}

/// Left polar decomposition `A = C · S` via the SVD `A = U Σ V*`:
/// `S = U_r V_r*`, `C = U_r Σ_r U_r*`, keeping singular values above `rank_tol · σ_max`.
///
/// Independent blocks of the nonzero pattern are decomposed separately, which
/// keeps lattice operators sparse and is exact.
pub fn polar_left(a: &LinearOperator, rank_tol: f64) -> Result<PolarPair> {
    if !(rank_tol > 0.0) {
        return Err(Error::Parameter(format!("rank tolerance must be positive, got {rank_tol}")));
    }
    if !a.is_finite() {
        return Err(Error::Numeric("non-finite matrix entry".into()));
    }
    let basis = *a.basis();
    if a.is_exact_zero() {
        return Ok(PolarPair {
            isometric_part: LinearOperator::zeros(basis),
            positive_part: LinearOperator::zeros(basis),
        });
    }
    let m = a.matrix();
    let n = a.dim();
    let mut factors = Vec::new();
    for (rows, cols) in decouple(m) {
        let block = m.select(Axis(0), &rows).select(Axis(1), &cols);
        let (u, sv, vt) = block.svd(true, true)?;
        let (u, vt) = match (u, vt) {
            (Some(u), Some(vt)) => (u, vt),
            _ => return Err(Error::Numeric("SVD returned no singular vectors".into())),
        };
        factors.push((rows, cols, u, sv, vt));
    }
    let sigma_max = factors
        .iter()
        .flat_map(|f| f.3.iter().copied())
        .fold(0.0, f64::max);
    let mut isometric = Array2::<Complex64>::zeros((n, n));
    let mut positive = Array2::<Complex64>::zeros((n, n));
    for (rows, cols, u, sv, vt) in factors {
        let rank = sv.iter().filter(|&&s| s > rank_tol * sigma_max).count();
        if rank == 0 {
            continue;
        }
        let u_r = u.slice(s![.., ..rank]).to_owned();
        let vt_r = vt.slice(s![..rank, ..]).to_owned();
        let s_block = u_r.dot(&vt_r);
        let mut u_sigma = u_r.clone();
        for (mut col, &s) in u_sigma.axis_iter_mut(Axis(1)).zip(sv.iter()) {
            col.mapv_inplace(|z| z * s);
        }
        let c_block = u_sigma.dot(&u_r.t().mapv(|z| z.conj()));
        for (bi, &r) in rows.iter().enumerate() {
            for (bj, &c) in cols.iter().enumerate() {
                isometric[(r, c)] = s_block[(bi, bj)];
            }
            for (bj, &c) in rows.iter().enumerate() {
                positive[(r, c)] = c_block[(bi, bj)];
            }
        }
    }
    Ok(PolarPair {
        isometric_part: LinearOperator::new(basis, isometric)?,
        positive_part: LinearOperator::new(basis, positive)?,
    })
}

/// `‖(lhs − rhs) · Q_{cap − degree}‖`, the relation defect on the truncation core.
///
/// `Q_m` projects onto basis vectors whose occupation numbers are all `<= m`.
/// A word of length `degree` applied to such a vector never touches the cap,
/// so identities among words of that length hold there exactly.
pub fn core_residual(lhs: &LinearOperator, rhs: &LinearOperator, degree: usize) -> Result<f64> {
    let diff = lhs.sub(rhs)?;
    core_norm(&diff, degree)
}

/// `‖A · Q_{cap − degree}‖`.
pub fn core_norm(a: &LinearOperator, degree: usize) -> Result<f64> {
    let basis = a.basis();
    if degree > basis.cap() {
        return Err(Error::TruncationTooSmall {
            degree,
            cap: basis.cap(),
        });
    }
    let cols = basis.core_indices(basis.cap() - degree);
    let nonzero = |z: &Complex64| z.re != 0.0 || z.im != 0.0;
    let cols: Vec<usize> = cols
        .into_iter()
        .filter(|&c| a.matrix().column(c).iter().any(nonzero))
        .collect();
    let sub = a.matrix().select(Axis(1), &cols);
    let rows: Vec<usize> = (0..sub.nrows())
        .filter(|&i| sub.row(i).iter().any(nonzero))
        .collect();
    if rows.is_empty() {
        return Ok(0.0);
    }
    matrix_norm(&sub.select(Axis(0), &rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock_core::FockBasis;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_op(rng: &mut ChaCha8Rng, basis: FockBasis) -> LinearOperator {
        let n = basis.dim();
        let m = Array2::from_shape_fn((n, n), |_| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        LinearOperator::new(basis, m).unwrap()
    }

    /// Power iteration on A*A, independent of the SVD route.
    fn power_norm(a: &LinearOperator) -> f64 {
        let g = a.adjoint().compose(a).unwrap();
        let n = a.dim();
        let mut v = Array1::from_elem(n, Complex64::new(1.0, 0.3));
        let mut lambda = 0.0;
        for _ in 0..2000 {
            let w = g.matrix().dot(&v);
            let nrm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if nrm == 0.0 {
                return 0.0;
            }
            lambda = nrm;
            v = w.mapv(|z| z / nrm);
        }
        lambda.sqrt()
    }

    #[test]
    fn identity_norm_is_one() {
        let b = FockBasis::new(2, 3).unwrap();
        assert!((operator_norm(&LinearOperator::identity(b)).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn norm_matches_power_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let b = FockBasis::new(2, 3).unwrap();
        for _ in 0..5 {
            let a = random_op(&mut rng, b);
            let svd = operator_norm(&a).unwrap();
            let pow = power_norm(&a);
            assert!((svd - pow).abs() <= 1e-10 * svd, "{svd} vs {pow}");
        }
    }

    #[test]
    fn norm_of_a_a_star_is_norm_squared() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let b = FockBasis::new(1, 9).unwrap();
        for _ in 0..10 {
            let a = random_op(&mut rng, b);
            let n = operator_norm(&a).unwrap();
            let n2 = operator_norm(&a.compose(&a.adjoint()).unwrap()).unwrap();
            assert!((n2 - n * n).abs() <= 1e-8 * n * n);
        }
    }

    #[test]
    fn non_finite_entries_are_rejected() {
        let b = FockBasis::new(1, 2).unwrap();
        let mut m = Array2::<Complex64>::eye(3);
        m[(1, 2)] = Complex64::new(f64::NAN, 0.0);
        let a = LinearOperator::new(b, m).unwrap();
        assert!(matches!(operator_norm(&a), Err(Error::Numeric(_))));
    }

    #[test]
    fn sqrt_of_scaled_identity() {
        let b = FockBasis::new(2, 2).unwrap();
        let id = LinearOperator::identity(b);
        let r = psd_sqrt(&id).unwrap();
        assert!(r.sub(&id).unwrap().max_abs_entry() < 1e-14);
        let r4 = psd_sqrt(&id.scale_real(4.0)).unwrap();
        assert!(r4.sub(&id.scale_real(2.0)).unwrap().max_abs_entry() < 1e-14);
    }

    #[test]
    fn sqrt_of_square_recovers_random_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = FockBasis::new(1, 7).unwrap();
        for _ in 0..20 {
            let x = random_op(&mut rng, b);
            let mut p = x.compose(&x.adjoint()).unwrap();
            p = p.scale_real(1.0 / operator_norm(&p).unwrap());
            let sq = p.compose(&p).unwrap();
            let r = psd_sqrt(&sq).unwrap();
            let e = operator_norm(&r.sub(&p).unwrap()).unwrap();
            assert!(e <= 1e-8, "{e}");
            assert!(operator_norm(&r.compose(&r).unwrap().sub(&sq).unwrap()).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn sqrt_rejects_negative_and_non_hermitian() {
        let b = FockBasis::new(1, 2).unwrap();
        let neg = LinearOperator::identity(b).scale_real(-0.5);
        match psd_sqrt(&neg) {
            Err(Error::NotPsd { eigenvalue }) => assert!((eigenvalue + 0.5).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
        let mut m = Array2::<Complex64>::eye(3);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        let skew = LinearOperator::new(b, m).unwrap();
        assert!(matches!(psd_sqrt(&skew), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn sqrt_clamps_tiny_negative_eigenvalues() {
        let b = FockBasis::new(1, 2).unwrap();
        let mut m = Array2::<Complex64>::zeros((3, 3));
        m[(0, 0)] = Complex64::new(1.0, 0.0);
        m[(1, 1)] = Complex64::new(-1e-11, 0.0);
        let r = psd_sqrt(&LinearOperator::new(b, m).unwrap()).unwrap();
        assert_eq!(r.matrix()[(1, 1)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn polar_of_zero_and_unitary() {
        let b = FockBasis::new(1, 3).unwrap();
        let z = polar_left(&LinearOperator::zeros(b), DEFAULT_RANK_TOL).unwrap();
        assert!(z.isometric_part.is_exact_zero() && z.positive_part.is_exact_zero());

        // diagonal phases times a cyclic permutation
        let n = b.dim();
        let u = Array2::from_shape_fn((n, n), |(i, j)| {
            if i == (j + 1) % n {
                Complex64::from_polar(1.0, 0.4 * j as f64)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let u = LinearOperator::new(b, u).unwrap();
        let p = polar_left(&u, DEFAULT_RANK_TOL).unwrap();
        assert!(operator_norm(&p.isometric_part.sub(&u).unwrap()).unwrap() < 1e-12);
        let id = LinearOperator::identity(b);
        assert!(operator_norm(&p.positive_part.sub(&id).unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn polar_roundtrip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for cap in [1usize, 3, 6] {
            let b = FockBasis::new(1, cap).unwrap();
            for _ in 0..50 {
                let a = random_op(&mut rng, b);
                let p = polar_left(&a, DEFAULT_RANK_TOL).unwrap();
                let cs = p.positive_part.compose(&p.isometric_part).unwrap();
                assert!(operator_norm(&cs.sub(&a).unwrap()).unwrap() <= 1e-10);
                let s = &p.isometric_part;
                let sss = s.compose(&s.adjoint()).unwrap().compose(s).unwrap();
                assert!(operator_norm(&sss.sub(s).unwrap()).unwrap() <= 1e-10);
                let c = &p.positive_part;
                assert!(c.hermitian_defect() <= 1e-12);
                let (ev, _) = hermitian_eigh(c.matrix()).unwrap();
                assert!(ev.iter().all(|&l| l >= -1e-12));
            }
        }
    }

    #[test]
    fn polar_of_rank_deficient_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let b = FockBasis::new(1, 5).unwrap();
        let x = random_op(&mut rng, b);
        let mut m = x.into_matrix();
        m.row_mut(2).fill(Complex64::new(0.0, 0.0));
        m.column_mut(4).fill(Complex64::new(0.0, 0.0));
        let a = LinearOperator::new(b, m).unwrap();
        let p = polar_left(&a, DEFAULT_RANK_TOL).unwrap();
        let cs = p.positive_part.compose(&p.isometric_part).unwrap();
        assert!(operator_norm(&cs.sub(&a).unwrap()).unwrap() <= 1e-10);
        // final space of S is range(A): row 2 of S vanishes; initial space excludes e_4
        assert!(p.isometric_part.matrix().row(2).iter().all(|z| z.norm() < 1e-12));
        assert!(p.isometric_part.matrix().column(4).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn core_residual_of_identity_is_zero_and_degree_is_checked() {
        let b = FockBasis::new(2, 3).unwrap();
        let id = LinearOperator::identity(b);
        for degree in 0..=3 {
            assert_eq!(core_residual(&id, &id, degree).unwrap(), 0.0);
        }
        assert!(matches!(
            core_residual(&id, &id, 4),
            Err(Error::TruncationTooSmall { degree: 4, cap: 3 })
        ));
    }
}
