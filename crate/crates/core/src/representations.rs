//! Concrete operator families: the irreducible representations of the
//! partial-isometry algebra, the Fock generators of the twisted CCR in closed
//! form, and the one-mode q-deformed oscillator.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock_core::{FockBasis, LinearOperator};

/// Parameters of one irreducible class, plus `mu` for builders that need it.
///
/// `class_j = d` is the Fock class; `class_j < d` puts the phase `e^{iφ}` on
/// generator `j + 1` and kills all later generators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IrrepSpec {
    pub d: usize,
    pub class_j: usize,
    pub phase: f64,
    pub cap: usize,
    pub mu: f64,
}

impl IrrepSpec {
    pub fn new(d: usize, class_j: usize, phase: f64, cap: usize, mu: f64) -> Result<Self> {
        let spec = IrrepSpec {
            d,
            class_j,
            phase,
            cap,
            mu,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn fock(d: usize, cap: usize) -> Self {
        IrrepSpec {
            d,
            class_j: d,
            phase: 0.0,
            cap,
            mu: 0.0,
        }
    }

    pub fn is_fock(&self) -> bool {
        self.class_j == self.d
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::Parameter("need at least one generator".into()));
        }
        if self.class_j > self.d {
            return Err(Error::Parameter(format!(
                "class j = {} exceeds d = {}",
                self.class_j, self.d
            )));
        }
        if !(0.0..2.0 * PI).contains(&self.phase) {
            return Err(Error::Parameter(format!("phase {} outside [0, 2π)", self.phase)));
        }
        check_mu(self.mu)?;
        if self.cap == 0 {
            return Err(Error::Parameter("cap must be at least 1".into()));
        }
        Ok(())
    }

    /// Slot count of the representation space: `class_j` (zero slots for the scalar class).
    pub fn slots(&self) -> usize {
        self.class_j
    }
}

pub(crate) fn check_mu(mu: f64) -> Result<()> {
    if !(mu.abs() < 1.0) {
        return Err(Error::Parameter(format!("deformation parameter must satisfy |mu| < 1, got {mu}")));
    }
    Ok(())
}

/// Partial isometries `t_1..t_d` on a common basis.
#[derive(Clone, Debug)]
pub struct GeneratorFamily {
    basis: FockBasis,
    ops: Vec<LinearOperator>,
    spec: Option<IrrepSpec>,
}

impl GeneratorFamily {
    /// Family with no known class (e.g. reconstructed by polar decomposition).
    pub fn new(ops: Vec<LinearOperator>) -> Result<Self> {
        let basis = common_basis(&ops)?;
        Ok(GeneratorFamily {
            basis,
            ops,
            spec: None,
        })
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn ops(&self) -> &[LinearOperator] {
        &self.ops
    }

    pub fn d(&self) -> usize {
        self.ops.len()
    }

    /// Generator `t_i`, 1-based.
    pub fn op(&self, i: usize) -> &LinearOperator {
        &self.ops[i - 1]
    }

    pub fn spec(&self) -> Option<&IrrepSpec> {
        self.spec.as_ref()
    }
}

/// Generators `a_1..a_d` of the twisted CCR with parameter `mu`.
#[derive(Clone, Debug)]
pub struct TccrFamily {
    basis: FockBasis,
    ops: Vec<LinearOperator>,
    mu: f64,
}

impl TccrFamily {
    pub fn new(ops: Vec<LinearOperator>, mu: f64) -> Result<Self> {
        check_mu(mu)?;
        let basis = common_basis(&ops)?;
        Ok(TccrFamily { basis, ops, mu })
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn ops(&self) -> &[LinearOperator] {
        &self.ops
    }

    pub fn d(&self) -> usize {
        self.ops.len()
    }

    /// Generator `a_i`, 1-based.
    pub fn op(&self, i: usize) -> &LinearOperator {
        &self.ops[i - 1]
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn into_ops(self) -> Vec<LinearOperator> {
        self.ops
    }
}

fn common_basis(ops: &[LinearOperator]) -> Result<FockBasis> {
    let first = ops
        .first()
        .ok_or_else(|| Error::Parameter("a family needs at least one operator".into()))?;
    let basis = *first.basis();
    if let Some(other) = ops.iter().find(|op| *op.basis() != basis) {
        return Err(Error::BasisMismatch {
            left: basis.to_string(),
            right: other.basis().to_string(),
        });
    }
    Ok(basis)
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `S e_n = e_{n+1}` for `n < cap`, `S e_cap = 0`.
pub fn truncated_shift(cap: usize) -> Array2<Complex64> {
    let n = cap + 1;
    Array2::from_shape_fn((n, n), |(r, col)| if r == col + 1 { c(1.0) } else { c(0.0) })
}

/// `1 − S S*`, the projection onto `e_0`.
pub fn vacuum_projection(cap: usize) -> Array2<Complex64> {
    let n = cap + 1;
    Array2::from_shape_fn((n, n), |(r, col)| if r == 0 && col == 0 { c(1.0) } else { c(0.0) })
}

/// `μ^n` with `0^0 = 1`.
pub(crate) fn mu_pow(mu: f64, n: usize) -> f64 {
    mu.powi(n as i32)
}

/// `(1 − q^n) / (1 − q) = 1 + q + ... + q^{n−1}`.
pub(crate) fn q_number(q: f64, n: usize) -> f64 {
    (0..n).map(|k| q.powi(k as i32)).sum()
}

/// The irreducible representation of class `spec.class_j`:
/// `t_i = (1−SS*)^{⊗(i−1)} ⊗ S ⊗ 1...` for `i <= j`,
/// `t_{j+1} = e^{iφ} (1−SS*)^{⊗j}`, `t_i = 0` beyond.
pub fn build_irrep(spec: &IrrepSpec) -> Result<GeneratorFamily> {
    spec.validate()?;
    let j = spec.class_j;
    let cap = spec.cap;
    let basis = if j == 0 {
        FockBasis::scalar(cap)
    } else {
        FockBasis::new(j, cap)?
    };
    let shift = truncated_shift(cap);
    let defect = vacuum_projection(cap);
    let id = Array2::<Complex64>::eye(cap + 1);
    let phase = Complex64::from_polar(1.0, spec.phase);

    let mut ops = Vec::with_capacity(spec.d);
    for i in 1..=spec.d {
        let op = if i <= j {
            let factors: Vec<_> = (1..=j)
                .map(|k| match k.cmp(&i) {
                    std::cmp::Ordering::Less => defect.clone(),
                    std::cmp::Ordering::Equal => shift.clone(),
                    std::cmp::Ordering::Greater => id.clone(),
                })
                .collect();
            LinearOperator::tensor(basis, &factors)?
        } else if i == j + 1 {
            if j == 0 {
                LinearOperator::identity(basis).scale(phase)
            } else {
                LinearOperator::tensor(basis, &vec![defect.clone(); j])?.scale(phase)
            }
        } else {
            LinearOperator::zeros(basis)
        };
        ops.push(op);
    }
    Ok(GeneratorFamily {
        basis,
        ops,
        spec: Some(*spec),
    })
}

/// Fock generators of the twisted CCR as weighted lattice shifts:
/// `a_i e_n = μ^{n_1+…+n_{i−1}} · sqrt([n_i + 1]_{μ²}) · e_{n + δ_i}`, zero at `n_i = cap`,
/// where `[m]_q = 1 + q + … + q^{m−1}`.
pub fn build_fock_tccr(d: usize, mu: f64, cap: usize) -> Result<TccrFamily> {
    check_mu(mu)?;
    if d == 0 {
        return Err(Error::Parameter("need at least one generator".into()));
    }
    let basis = FockBasis::new(d, cap)?;
    let q = mu * mu;
    let mut ops = Vec::with_capacity(d);
    for i in 0..d {
        let mut m = Array2::<Complex64>::zeros((basis.dim(), basis.dim()));
        for col in 0..basis.dim() {
            let mi = basis.multi_index(col);
            let n = mi.entries();
            if n[i] == cap {
                continue;
            }
            let before: usize = n[..i].iter().sum();
            let weight = mu_pow(mu, before) * q_number(q, n[i] + 1).sqrt();
            let mut raised = n.to_vec();
            raised[i] += 1;
            let row = basis
                .index_of(&crate::fock_core::MultiIndex::new(raised))
                .expect("raised index below cap");
            m[(row, col)] = c(weight);
        }
        ops.push(LinearOperator::new(basis, m)?);
    }
    TccrFamily::new(ops, mu)
}

/// One-mode generator with `a* a = 1 + q a a*`: `a e_n = sqrt([n+1]_q) e_{n+1}`.
pub fn build_qccr_single(q: f64, cap: usize) -> Result<LinearOperator> {
    if !(q.abs() < 1.0) {
        return Err(Error::Parameter(format!("q must satisfy |q| < 1, got {q}")));
    }
    let basis = FockBasis::new(1, cap)?;
    let n = cap + 1;
    let m = Array2::from_shape_fn((n, n), |(r, col)| {
        if r == col + 1 {
            c(q_number(q, col + 1).sqrt())
        } else {
            c(0.0)
        }
    });
    LinearOperator::new(basis, m)
}
