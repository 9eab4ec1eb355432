use ndarray::{linalg::kron, Array2};
use num_complex::Complex64;
use serde_json::{json, Value};

use super::basis::FockBasis;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
/// A factor with at most `dim² / SPARSE_FRACTION` nonzero entries is multiplied sparsely.
const SPARSE_FRACTION: usize = 16;

fn nonzeros(m: &Array2<Complex64>) -> usize {
    m.iter().filter(|&&z| z != ZERO).count()
}

/// Dense complex matrix acting on a fixed truncated basis.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearOperator {
    basis: FockBasis,
    matrix: Array2<Complex64>,
}

impl LinearOperator {
    pub fn new(basis: FockBasis, matrix: Array2<Complex64>) -> Result<Self> {
        let (rows, cols) = matrix.dim();
        if rows != basis.dim() || cols != basis.dim() {
            return Err(Error::Shape {
                rows,
                cols,
                dim: basis.dim(),
            });
        }
        Ok(LinearOperator { basis, matrix })
    }

    pub fn zeros(basis: FockBasis) -> Self {
        let n = basis.dim();
        LinearOperator {
            basis,
            matrix: Array2::zeros((n, n)),
        }
    }

    pub fn identity(basis: FockBasis) -> Self {
        LinearOperator {
            basis,
            matrix: Array2::eye(basis.dim()),
        }
    }

    /// Tensor product of one `(cap+1) x (cap+1)` factor per slot, slot 1 leftmost.
    pub fn tensor(basis: FockBasis, factors: &[Array2<Complex64>]) -> Result<Self> {
        if factors.len() != basis.slots() {
            return Err(Error::Parameter(format!(
                "{} tensor factors supplied for {} slots",
                factors.len(),
                basis.slots()
            )));
        }
        let mut matrix = Array2::<Complex64>::eye(1);
        for f in factors {
            if f.dim() != (basis.slot_dim(), basis.slot_dim()) {
                return Err(Error::Shape {
                    rows: f.nrows(),
                    cols: f.ncols(),
                    dim: basis.slot_dim(),
                });
            }
            matrix = kron(&matrix, f);
        }
        Self::new(basis, matrix)
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<Complex64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    fn check_basis(&self, other: &LinearOperator) -> Result<()> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch {
                left: self.basis.to_string(),
                right: other.basis.to_string(),
            });
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        LinearOperator {
            basis: self.basis,
            matrix: self.matrix.t().mapv(|z| z.conj()),
        }
    }

    /// Operator product `self · other` (apply `other` first).
    ///
    /// Shifts and projections built from the lattice are mostly exact zeros;
    /// when either factor is sparse the product skips them instead of calling BLAS.
    pub fn compose(&self, other: &LinearOperator) -> Result<Self> {
        self.check_basis(other)?;
        let n = self.dim();
        let sparse_limit = n * n / SPARSE_FRACTION;
        let matrix = if nonzeros(&self.matrix) <= sparse_limit {
            let mut out = Array2::<Complex64>::zeros((n, n));
            for ((r, k), &v) in self.matrix.indexed_iter() {
                if v != ZERO {
                    out.row_mut(r).scaled_add(v, &other.matrix.row(k));
                }
            }
            out
        } else if nonzeros(&other.matrix) <= sparse_limit {
            let mut out = Array2::<Complex64>::zeros((n, n));
            for ((k, c), &v) in other.matrix.indexed_iter() {
                if v != ZERO {
                    out.column_mut(c).scaled_add(v, &self.matrix.column(k));
                }
            }
            out
        } else {
            self.matrix.dot(&other.matrix)
        };
        Ok(LinearOperator {
            basis: self.basis,
            matrix,
        })
    }

    pub fn add(&self, other: &LinearOperator) -> Result<Self> {
        self.check_basis(other)?;
        Ok(LinearOperator {
            basis: self.basis,
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn sub(&self, other: &LinearOperator) -> Result<Self> {
        self.check_basis(other)?;
        Ok(LinearOperator {
            basis: self.basis,
            matrix: &self.matrix - &other.matrix,
        })
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        LinearOperator {
            basis: self.basis,
            matrix: self.matrix.mapv(|z| z * factor),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    /// `self + factor · other`, in place.
    pub fn add_scaled(&mut self, factor: Complex64, other: &LinearOperator) -> Result<()> {
        self.check_basis(other)?;
        self.matrix.scaled_add(factor, &other.matrix);
        Ok(())
    }

    /// Whether every entry is exactly zero.
    pub fn is_exact_zero(&self) -> bool {
        self.matrix.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// Largest entrywise deviation `|A_ij - conj(A_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.matrix.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.matrix.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `A · v` for a coordinate vector.
    pub fn apply(&self, v: &ndarray::Array1<Complex64>) -> ndarray::Array1<Complex64> {
        self.matrix.dot(v)
    }

    /// Row-major dump with `[re, im]` pairs, for golden files and debugging.
    pub fn to_json_dump(&self) -> Value {
        let rows: Vec<Value> = self
            .matrix
            .rows()
            .into_iter()
            .map(|row| Value::Array(row.iter().map(|z| json!([z.re, z.im])).collect()))
            .collect();
        json!({
            "slots": self.basis.slots(),
            "cap": self.basis.cap(),
            "matrix": rows,
        })
    }

    pub fn from_json_dump(value: &Value) -> Result<Self> {
        let bad = |what: &str| Error::Parameter(format!("malformed operator dump: {what}"));
        let slots = value["slots"].as_u64().ok_or_else(|| bad("slots"))? as usize;
        let cap = value["cap"].as_u64().ok_or_else(|| bad("cap"))? as usize;
        let basis = if slots == 0 {
            FockBasis::scalar(cap)
        } else {
            FockBasis::new(slots, cap)?
        };
        let rows = value["matrix"].as_array().ok_or_else(|| bad("matrix"))?;
        let n = basis.dim();
        if rows.len() != n {
            return Err(bad("row count"));
        }
        let mut matrix = Array2::<Complex64>::zeros((n, n));
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_array().ok_or_else(|| bad("row"))?;
            if row.len() != n {
                return Err(bad("column count"));
            }
            for (j, pair) in row.iter().enumerate() {
                let re = pair[0].as_f64().ok_or_else(|| bad("entry"))?;
                let im = pair[1].as_f64().ok_or_else(|| bad("entry"))?;
                matrix[(i, j)] = Complex64::new(re, im);
            }
        }
        Self::new(basis, matrix)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn basis() -> FockBasis {
        FockBasis::new(2, 2).unwrap()
    }

    fn op_from(values: &[(f64, f64)]) -> LinearOperator {
        let b = basis();
        let n = b.dim();
        let m = Array2::from_shape_fn((n, n), |(i, j)| {
            let (re, im) = values[(i * n + j) % values.len()];
            Complex64::new(re * (i + 1) as f64, im - j as f64)
        });
        LinearOperator::new(b, m).unwrap()
    }

    proptest! {
        #[test]
        fn adjoint_is_an_involution_and_reverses_products(
            xs in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..20),
            ys in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..20),
        ) {
            let a = op_from(&xs);
            let b = op_from(&ys);
            prop_assert_eq!(a.adjoint().adjoint(), a.clone());
            let lhs = a.compose(&b).unwrap().adjoint();
            let rhs = b.adjoint().compose(&a.adjoint()).unwrap();
            let diff = lhs.sub(&rhs).unwrap().max_abs_entry();
            prop_assert!(diff <= 1e-12, "diff {}", diff);
        }
    }

    #[test]
    fn a_a_star_is_hermitian() {
        let a = op_from(&[(0.3, -1.0), (2.0, 0.5), (-0.7, 0.1)]);
        let g = a.compose(&a.adjoint()).unwrap();
        assert!(g.hermitian_defect() <= 1e-12);
    }

    #[test]
    fn mixing_bases_is_an_error() {
        let a = LinearOperator::identity(FockBasis::new(1, 3).unwrap());
        let b = LinearOperator::identity(FockBasis::new(2, 1).unwrap());
        assert!(matches!(a.compose(&b), Err(Error::BasisMismatch { .. })));
        assert!(a.add(&b).is_err());
        assert!(a.sub(&b).is_err());
    }

    #[test]
    fn tensor_matches_kron_order() {
        let b = FockBasis::new(2, 1).unwrap();
        let x = Array2::from_shape_vec(
            (2, 2),
            vec![0.0, 1.0, 1.0, 0.0].into_iter().map(|r| Complex64::new(r, 0.0)).collect(),
        )
        .unwrap();
        let id = Array2::<Complex64>::eye(2);
        // X on slot 1 flips the most significant digit: (0,1) -> (1,1)
        let op = LinearOperator::tensor(b, &[x, id]).unwrap();
        assert_eq!(op.matrix()[(3, 1)], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn json_dump_roundtrip() {
        let a = op_from(&[(0.25, -1.5), (2.0, 0.5)]);
        let dump = a.to_json_dump();
        assert_eq!(LinearOperator::from_json_dump(&dump).unwrap(), a);
        assert_eq!(dump["matrix"][0][0], json!([0.25, -1.5]));
    }
}
