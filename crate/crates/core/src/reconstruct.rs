//! The two inverse constructions between twisted-CCR generators and partial
//! isometries, the lemma suite behind them, and the round trip.
//!
//! Forward: `a_i = C_i S_i` by polar decomposition, then
//! `Ŝ_1 = S_1`, `Ŝ_i = (1 − Σ_{k<i} Ŝ_k Ŝ_k*) S_i`.
//! Backward: `a_i^{(i)} = T_i t_i` with `T_i² = Σ_{n≥1} μ^{2(n−1)} t_i^n t_i^{*n}`,
//! then `a_i^{(j)} = Σ_{n≥0} μ^n t_j^n a_i^{(j+1)} t_j^{*n}` down to `ã_i = a_i^{(1)}`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock_core::{core_residual, polar_left, psd_sqrt, LinearOperator};
use crate::relations::{
    pi_residuals_with_tol, qccr_residuals, tccr_residuals_with_tol, VerificationReport, MODEL_TOL,
    SVD_TOL,
};
use crate::representations::{build_fock_tccr, build_qccr_single, GeneratorFamily, TccrFamily};

/// Relative size of the neglected tail of a series.
const SERIES_EPS: f64 = 1e-16;
const MAX_SERIES_TERMS: usize = 100_000;

/// Intermediate operators of the backward construction.
#[derive(Clone, Debug)]
pub struct ReconstructionTrace {
    /// `a_i^{(j)}` keyed by `(i, j)`, `1 <= j <= i <= d`.
    pub stages: BTreeMap<(usize, usize), LinearOperator>,
    /// `T_1..T_d`.
    pub positive_parts: Vec<LinearOperator>,
    /// `P_0..P_d` with `P_j = 1 − Σ_{k<=j} t_k t_k*`.
    pub defects: Vec<LinearOperator>,
}

impl ReconstructionTrace {
    pub fn stage(&self, i: usize, j: usize) -> &LinearOperator {
        &self.stages[&(i, j)]
    }

    /// `T_i`, 1-based.
    pub fn positive_part(&self, i: usize) -> &LinearOperator {
        &self.positive_parts[i - 1]
    }

    pub fn defect(&self, j: usize) -> &LinearOperator {
        &self.defects[j]
    }
}

/// `Σ_{n≥0} w^n t^n x t^{*n}`, stopped once a power vanishes exactly or the
/// geometric tail drops below `SERIES_EPS` relative to `x`. For truncated
/// shifts the first condition fires after at most `cap + 1` terms.
pub fn conjugation_series(t: &LinearOperator, x: &LinearOperator, w: f64) -> Result<LinearOperator> {
    let t_star = t.adjoint();
    let scale = frobenius(x).max(f64::MIN_POSITIVE);
    let mut acc = x.clone();
    let mut term = x.clone();
    let mut weight = 1.0;
    for _ in 0..MAX_SERIES_TERMS {
        if w == 0.0 {
            return Ok(acc);
        }
        term = t.compose(&term)?.compose(&t_star)?;
        if term.is_exact_zero() {
            return Ok(acc);
        }
        weight *= w;
        acc.add_scaled(Complex64::new(weight, 0.0), &term)?;
        let tail = weight.abs() * frobenius(&term) / (1.0 - w.abs());
        if tail <= SERIES_EPS * scale {
            return Ok(acc);
        }
    }
    Err(Error::Numeric(format!(
        "series with ratio {w} did not settle within {MAX_SERIES_TERMS} terms"
    )))
}

fn frobenius(a: &LinearOperator) -> f64 {
    a.matrix().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn precondition(report: &VerificationReport, what: &str) -> Result<()> {
    if report.all_passed() {
        return Ok(());
    }
    let mut table = format!("{what} do not hold:\n");
    for c in report.failures() {
        table.push_str(&format!(
            "  {:<16} residual {:.3e} > {:.1e}  ({})\n",
            c.id, c.residual, c.tolerance, c.description
        ));
    }
    Err(Error::Precondition(table.trim_end().to_string()))
}

/// Polar parts `(S_i, C_i)` of each generator, `a_i = C_i S_i`.
pub fn polar_parts(a: &TccrFamily, rank_tol: f64) -> Result<Vec<(LinearOperator, LinearOperator)>> {
    a.ops()
        .par_iter()
        .map(|op| polar_left(op, rank_tol).map(|p| (p.isometric_part, p.positive_part)))
        .collect()
}

/// Partial isometries `Ŝ_i` built from the polar parts of `a`.
pub fn hat_s_family(a: &TccrFamily, rank_tol: f64) -> Result<GeneratorFamily> {
    precondition(
        &tccr_residuals_with_tol(a, SVD_TOL)?,
        "twisted commutation relations on the input",
    )?;
    let basis = *a.basis();
    let parts = polar_parts(a, rank_tol)?;
    let mut hats: Vec<LinearOperator> = Vec::with_capacity(parts.len());
    let mut defect = LinearOperator::identity(basis);
    for (s, _) in parts {
        let hat = defect.compose(&s)?;
        defect = defect.sub(&hat.compose(&hat.adjoint())?)?;
        hats.push(hat);
    }
    GeneratorFamily::new(hats)
}

/// Twisted-CCR generators `ã_i` built from the partial isometries `t`, with the trace.
pub fn tilde_a_family(t: &GeneratorFamily, mu: f64) -> Result<(TccrFamily, ReconstructionTrace)> {
    crate::representations::check_mu(mu)?;
    precondition(
        &pi_residuals_with_tol(t, SVD_TOL)?,
        "partial-isometry relations on the input",
    )?;
    let d = t.d();
    let basis = *t.basis();

    let positive_parts: Vec<LinearOperator> = t
        .ops()
        .par_iter()
        .map(|ti| {
            let range = ti.compose(&ti.adjoint())?;
            psd_sqrt(&conjugation_series(ti, &range, mu * mu)?)
        })
        .collect::<Result<_>>()?;

    let mut defects = vec![LinearOperator::identity(basis)];
    for ti in t.ops() {
        let next = defects.last().expect("P_0").sub(&ti.compose(&ti.adjoint())?)?;
        defects.push(next);
    }

    let chains: Vec<Vec<((usize, usize), LinearOperator)>> = (1..=d)
        .into_par_iter()
        .map(|i| {
            let mut chain = Vec::with_capacity(i);
            let mut current = positive_parts[i - 1].compose(t.op(i))?;
            chain.push(((i, i), current.clone()));
            for j in (1..i).rev() {
                current = conjugation_series(t.op(j), &current, mu)?;
                chain.push(((i, j), current.clone()));
            }
            Ok(chain)
        })
        .collect::<Result<_>>()?;

    let stages: BTreeMap<_, _> = chains.into_iter().flatten().collect();
    let tilde: Vec<LinearOperator> = (1..=d).map(|i| stages[&(i, 1)].clone()).collect();
    let family = TccrFamily::new(tilde, mu)?;
    Ok((
        family,
        ReconstructionTrace {
            stages,
            positive_parts,
            defects,
        },
    ))
}

type Pair = (LinearOperator, LinearOperator);

struct Instance<'a> {
    id: String,
    description: String,
    degree: usize,
    eval: Box<dyn Fn() -> Result<Pair> + Send + Sync + 'a>,
}

impl<'a> Instance<'a> {
    fn new(
        id: String,
        description: String,
        degree: usize,
        eval: impl Fn() -> Result<Pair> + Send + Sync + 'a,
    ) -> Self {
        Instance {
            id,
            description,
            degree,
            eval: Box::new(eval),
        }
    }
}

fn run_instances(report: &mut VerificationReport, instances: Vec<Instance<'_>>, tol: f64) -> Result<()> {
    let residuals: Vec<Result<f64>> = instances
        .par_iter()
        .map(|inst| {
            let (lhs, rhs) = (inst.eval)()?;
            core_residual(&lhs, &rhs, inst.degree)
        })
        .collect();
    for (inst, res) in instances.into_iter().zip(residuals) {
        report.check(inst.id, inst.description, res?, tol);
    }
    Ok(())
}

fn power(op: &LinearOperator, n: usize) -> Result<LinearOperator> {
    let mut acc = LinearOperator::identity(*op.basis());
    for _ in 0..n {
        acc = acc.compose(op)?;
    }
    Ok(acc)
}

/// Every index instance of the identities behind the backward construction,
/// each checked on the truncation core.
pub fn verify_lemma_suite(t: &GeneratorFamily, mu: f64) -> Result<VerificationReport> {
    verify_lemma_suite_with_tol(t, mu, MODEL_TOL)
}

pub fn verify_lemma_suite_with_tol(t: &GeneratorFamily, mu: f64, tol: f64) -> Result<VerificationReport> {
    let (_, trace) = tilde_a_family(t, mu)?;
    let trace = &trace;
    let d = t.d();
    let basis = *t.basis();
    let zero = LinearOperator::zeros(basis);
    let a = |i: usize, j: usize| &trace.stages[&(i, j)];
    let stars: BTreeMap<(usize, usize), LinearOperator> =
        trace.stages.iter().map(|(k, v)| (*k, v.adjoint())).collect();
    let a_star = |i: usize, j: usize| &stars[&(i, j)];
    let t_star: Vec<LinearOperator> = t.ops().iter().map(LinearOperator::adjoint).collect();
    let tt = |k: usize| t.op(k);
    let ts = |k: usize| &t_star[k - 1];
    let p = |j: usize| trace.defect(j);
    let mu_c = Complex64::new(mu, 0.0);

    let mut instances: Vec<Instance<'_>> = Vec::new();

    for j in 0..=d {
        instances.push(Instance::new(
            format!("defect.{j}"),
            format!("P_{j}^2 = P_{j} = P_{j}*"),
            2,
            move || {
                let sq = p(j).compose(p(j))?;
                let asym = p(j).sub(&p(j).adjoint())?;
                Ok((sq.add(&asym)?, p(j).clone()))
            },
        ));
    }

    for i in 1..=d {
        instances.push(Instance::new(
            format!("stage.{i}"),
            format!("a_{i}^({i}) = T_{i} t_{i}"),
            1,
            move || Ok((a(i, i).clone(), trace.positive_part(i).compose(tt(i))?)),
        ));
    }

    for i in 1..=d {
        for j in 1..i {
            instances.push(Instance::new(
                format!("absorb.{i}.{j}"),
                format!("P_{j} a_{i}^({j}) = a_{i}^({})", j + 1),
                3,
                move || Ok((p(j).compose(a(i, j))?, a(i, j + 1).clone())),
            ));
        }
    }

    for i in 1..=d {
        for j in 1..i {
            for k in 1..=j {
                instances.push(Instance::new(
                    format!("absorb_later.{i}.{j}.{k}"),
                    format!("P_{k} a_{i}^({0}) = a_{i}^({0})", j + 1),
                    3,
                    move || Ok((p(k).compose(a(i, j + 1))?, a(i, j + 1).clone())),
                ));
            }
        }
    }

    for i in 1..=d {
        for j in 1..i {
            for k in 1..=j {
                let s = j + 1;
                let z = &zero;
                instances.push(Instance::new(
                    format!("annihilate.{i}.{j}.{k}.a"),
                    format!("t_{k}* a_{i}^({s}) = 0"),
                    2,
                    move || Ok((ts(k).compose(a(i, s))?, z.clone())),
                ));
                instances.push(Instance::new(
                    format!("annihilate.{i}.{j}.{k}.b"),
                    format!("a_{i}^({s}) t_{k} = 0"),
                    2,
                    move || Ok((a(i, s).compose(tt(k))?, z.clone())),
                ));
                instances.push(Instance::new(
                    format!("annihilate.{i}.{j}.{k}.c"),
                    format!("t_{k}* a_{i}^({s})* = 0"),
                    2,
                    move || Ok((ts(k).compose(a_star(i, s))?, z.clone())),
                ));
                instances.push(Instance::new(
                    format!("annihilate.{i}.{j}.{k}.d"),
                    format!("a_{i}^({s})* t_{k} = 0"),
                    2,
                    move || Ok((a_star(i, s).compose(tt(k))?, z.clone())),
                ));
            }
        }
    }

    for j in 1..=d {
        for n in 1..=3usize {
            for m in 1..=3usize {
                let rhs_text = match n.cmp(&m) {
                    std::cmp::Ordering::Greater => format!("t_{j}*^{}", n - m),
                    std::cmp::Ordering::Equal => format!("P_{}", j - 1),
                    std::cmp::Ordering::Less => format!("t_{j}^{}", m - n),
                };
                instances.push(Instance::new(
                    format!("power.{j}.{n}.{m}"),
                    format!("t_{j}*^{n} t_{j}^{m} = {rhs_text}"),
                    n + m,
                    move || {
                        let lhs = power(ts(j), n)?.compose(&power(tt(j), m)?)?;
                        let rhs = match n.cmp(&m) {
                            std::cmp::Ordering::Greater => power(ts(j), n - m)?,
                            std::cmp::Ordering::Equal => p(j - 1).clone(),
                            std::cmp::Ordering::Less => power(tt(j), m - n)?,
                        };
                        Ok((lhs, rhs))
                    },
                ));
            }
        }
    }

    for i in 1..=d {
        for j in 1..=i {
            instances.push(Instance::new(
                format!("stage_diag.{i}.{j}"),
                format!(
                    "a_{i}^({j})* a_{i}^({j}) = P_{} + mu^2 a_{i}^({j}) a_{i}^({j})* - (1-mu^2) sum_{{{j}<=k<{i}}} a_k^({j}) a_k^({j})*",
                    j - 1
                ),
                2,
                move || {
                    let lhs = a_star(i, j).compose(a(i, j))?;
                    let mut rhs = p(j - 1).clone();
                    rhs.add_scaled(Complex64::new(mu * mu, 0.0), &a(i, j).compose(a_star(i, j))?)?;
                    for k in j..i {
                        rhs.add_scaled(
                            Complex64::new(-(1.0 - mu * mu), 0.0),
                            &a(k, j).compose(a_star(k, j))?,
                        )?;
                    }
                    Ok((lhs, rhs))
                },
            ));
        }
    }

    for i in 1..=d {
        for k in 2..=i {
            for j in 1..k {
                let z = &zero;
                instances.push(Instance::new(
                    format!("cross_zero.{i}.{k}.{j}"),
                    format!("a_{i}^({k})* a_{j}^({j}) = 0"),
                    2,
                    move || Ok((a_star(i, k).compose(a(j, j))?, z.clone())),
                ));
            }
        }
    }

    for i in 1..=d {
        for j in 1..i {
            instances.push(Instance::new(
                format!("stage_twist.{i}.{j}"),
                format!("a_{i}^({j})* a_{j}^({j}) = mu a_{j}^({j}) a_{i}^({j})*"),
                2,
                move || {
                    Ok((
                        a_star(i, j).compose(a(j, j))?,
                        a(j, j).compose(a_star(i, j))?.scale(mu_c),
                    ))
                },
            ));
            instances.push(Instance::new(
                format!("stage_twist.{i}.{j}.positive"),
                format!("a_{i}^({j})* T_{j}^2 = T_{j}^2 a_{i}^({j})*"),
                2,
                move || {
                    let tsq = trace.positive_part(j).compose(trace.positive_part(j))?;
                    Ok((a_star(i, j).compose(&tsq)?, tsq.compose(a_star(i, j))?))
                },
            ));
            instances.push(Instance::new(
                format!("stage_twist.{i}.{j}.shift"),
                format!("a_{i}^({j})* t_{j} = mu t_{j} a_{i}^({j})*"),
                2,
                move || {
                    Ok((
                        a_star(i, j).compose(tt(j))?,
                        tt(j).compose(a_star(i, j))?.scale(mu_c),
                    ))
                },
            ));
        }
    }

    for i in 1..=d {
        instances.push(Instance::new(
            format!("positive.{i}"),
            format!("T_{i} t_{i} t_{i}* = t_{i} t_{i}* T_{i}"),
            2,
            move || {
                let range = tt(i).compose(ts(i))?;
                let ti = trace.positive_part(i);
                Ok((ti.compose(&range)?, range.compose(ti)?))
            },
        ));
    }

    for i in 1..=d {
        for j in 1..i {
            for k in 1..j {
                instances.push(Instance::new(
                    format!("twist.{i}.{j}.{k}"),
                    format!("a_{i}^({k})* a_{j}^({k}) = mu a_{j}^({k}) a_{i}^({k})*"),
                    2,
                    move || {
                        Ok((
                            a_star(i, k).compose(a(j, k))?,
                            a(j, k).compose(a_star(i, k))?.scale(mu_c),
                        ))
                    },
                ));
            }
        }
    }

    let mut report = VerificationReport::new("verify_lemma_suite")
        .with_param("d", d)
        .with_param("mu", mu)
        .with_param("cap", basis.cap());
    if let Some(spec) = t.spec() {
        report.set_param("class_j", spec.class_j);
        report.set_param("phase", spec.phase);
    }
    run_instances(&mut report, instances, tol)?;
    Ok(report)
}

fn generator_distance(
    report: &mut VerificationReport,
    prefix: &str,
    got: &[LinearOperator],
    want: &[LinearOperator],
    what: &str,
    tol: f64,
) -> Result<()> {
    let residuals: Vec<Result<f64>> = got
        .par_iter()
        .zip(want)
        .map(|(g, w)| core_residual(g, w, 1))
        .collect();
    for (i, r) in residuals.into_iter().enumerate() {
        let i = i + 1;
        report.check(format!("{prefix}.{i}"), format!("{what} (generator {i})"), r?, tol);
    }
    Ok(())
}

/// Records a failed precondition as a failing check instead of aborting the report.
fn soft<T>(report: &mut VerificationReport, id: &str, r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Precondition(msg)) => {
            report.check(id, msg, f64::INFINITY, 0.0);
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

/// Both directions of the correspondence: `Ŝ(ã(t)) = t` and `ã(Ŝ(a)) = a`,
/// plus the defining relations on every intermediate family.
///
/// The reverse direction starts from the closed-form Fock generators when `t`
/// is the Fock class, otherwise from `ã(t)`.
pub fn roundtrip_check(t: &GeneratorFamily, mu: f64, rank_tol: f64) -> Result<VerificationReport> {
    roundtrip_check_with_tol(t, mu, rank_tol, SVD_TOL)
}

pub fn roundtrip_check_with_tol(
    t: &GeneratorFamily,
    mu: f64,
    rank_tol: f64,
    tol: f64,
) -> Result<VerificationReport> {
    let d = t.d();
    let cap = t.basis().cap();
    let mut report = VerificationReport::new("roundtrip_check")
        .with_param("d", d)
        .with_param("mu", mu)
        .with_param("cap", cap)
        .with_param("rank_tol", rank_tol);
    if let Some(spec) = t.spec() {
        report.set_param("class_j", spec.class_j);
        report.set_param("phase", spec.phase);
    }

    let (tilde, _) = tilde_a_family(t, mu)?;
    report.absorb("forward.tilde_a", tccr_residuals_with_tol(&tilde, tol)?);
    if let Some(hat) = soft(&mut report, "forward.precondition", hat_s_family(&tilde, rank_tol))? {
        report.absorb("forward.hat_s", pi_residuals_with_tol(&hat, tol)?);
        generator_distance(&mut report, "forward.generator", hat.ops(), t.ops(), "Ŝ_i(ã) = t_i", tol)?;
    }

    let fock_input = t.spec().is_some_and(|s| s.is_fock());
    let a = if fock_input {
        build_fock_tccr(d, mu, cap)?
    } else {
        tilde
    };
    report.set_param("reverse_input", if fock_input { "closed_form" } else { "tilde_a" });
    if let Some(hat) = soft(&mut report, "reverse.precondition", hat_s_family(&a, rank_tol))? {
        report.absorb("reverse.hat_s", pi_residuals_with_tol(&hat, tol)?);
        if let Some((back, _)) = soft(&mut report, "reverse.tilde_precondition", tilde_a_family(&hat, mu))? {
            report.absorb("reverse.tilde_a", tccr_residuals_with_tol(&back, tol)?);
            generator_distance(&mut report, "reverse.generator", back.ops(), a.ops(), "ã_i(Ŝ(a)) = a_i", tol)?;
        }
    }
    Ok(report)
}

/// Relations between the polar parts `a_i = C_i S_i` that are equivalent to the
/// twisted CCR, and the expansion `a_i = Σ_n μ^n S_1^n (1 − S_1 S_1*) a_i S_1^{*n}`.
///
/// The commutation relations among the `S_i` need `μ > 0`: for `μ <= 0` the
/// polar phases pick up signs or vanish, and those checks are left out.
pub fn polar_relations_check(a: &TccrFamily, rank_tol: f64, tol: f64) -> Result<VerificationReport> {
    let d = a.d();
    let mu = a.mu();
    let parts = polar_parts(a, rank_tol)?;
    let basis = *a.basis();
    let s = |i: usize| &parts[i - 1].0;
    let c = |i: usize| &parts[i - 1].1;
    let s_star: Vec<LinearOperator> = parts.iter().map(|(s, _)| s.adjoint()).collect();
    let ss = |i: usize| &s_star[i - 1];
    let csq: Vec<LinearOperator> = parts
        .iter()
        .map(|(_, c)| c.compose(c))
        .collect::<Result<_>>()?;
    let c2 = |i: usize| &csq[i - 1];
    let commuting = mu > 0.0;
    let mut instances: Vec<Instance<'_>> = Vec::new();

    for i in 1..=d {
        instances.push(Instance::new(
            format!("cs.diag.{i}"),
            format!("C_{i}^2 S_{i} = S_{i}(1 + mu^2 C_{i}^2 - (1-mu^2) sum_{{j<{i}}} C_j^2)"),
            2,
            move || {
                let mut inner = LinearOperator::identity(basis);
                inner.add_scaled(Complex64::new(mu * mu, 0.0), c2(i))?;
                for j in 1..i {
                    inner.add_scaled(Complex64::new(-(1.0 - mu * mu), 0.0), c2(j))?;
                }
                Ok((c2(i).compose(s(i))?, s(i).compose(&inner)?))
            },
        ));
        for j in 1..=d {
            if j == i {
                continue;
            }
            let factor = if j < i { mu * mu } else { 1.0 };
            instances.push(Instance::new(
                format!("cs.weight.{i}.{j}"),
                if j < i {
                    format!("C_{i}^2 S_{j} = mu^2 S_{j} C_{i}^2")
                } else {
                    format!("C_{i}^2 S_{j} = S_{j} C_{i}^2")
                },
                2,
                move || {
                    Ok((
                        c2(i).compose(s(j))?,
                        s(j).compose(c2(i))?.scale_real(factor),
                    ))
                },
            ));
        }
    }
    for i in 1..=d {
        for j in i + 1..=d {
            instances.push(Instance::new(
                format!("cs.positive.{i}.{j}"),
                format!("C_{i} C_{j} = C_{j} C_{i}"),
                2,
                move || Ok((c(i).compose(c(j))?, c(j).compose(c(i))?)),
            ));
            if commuting {
                instances.push(Instance::new(
                    format!("cs.cross.{i}.{j}"),
                    format!("S_{i}* S_{j} = S_{j} S_{i}*"),
                    2,
                    move || Ok((ss(i).compose(s(j))?, s(j).compose(ss(i))?)),
                ));
                instances.push(Instance::new(
                    format!("cs.shift.{i}.{j}"),
                    format!("S_{i} S_{j} = S_{j} S_{i}"),
                    2,
                    move || Ok((s(i).compose(s(j))?, s(j).compose(s(i))?)),
                ));
            }
        }
    }
    for i in 2..=d {
        instances.push(Instance::new(
            format!("expansion.{i}"),
            format!("a_{i} = sum_n mu^n S_1^n (1 - S_1 S_1*) a_{i} S_1*^n"),
            1,
            move || {
                let defect = LinearOperator::identity(basis).sub(&s(1).compose(ss(1))?)?;
                let inner = defect.compose(a.op(i))?;
                Ok((a.op(i).clone(), conjugation_series(s(1), &inner, mu)?))
            },
        ));
    }

    let mut report = VerificationReport::new("polar_relations_check")
        .with_param("d", d)
        .with_param("mu", mu)
        .with_param("cap", basis.cap())
        .with_param("rank_tol", rank_tol)
        .with_param("shift_commutation_checked", commuting);
    run_instances(&mut report, instances, tol)?;
    Ok(report)
}

/// One-mode q-deformed oscillator: `a* a = 1 + q a a*`, the polar factor `S` is an
/// isometry on the core, and `a = (Σ_{n=1}^{N} q^{n−1} S^n S^{*n})^{1/2} S`.
pub fn qccr_polar_check(q: f64, cap: usize, rank_tol: f64) -> Result<VerificationReport> {
    let a = build_qccr_single(q, cap)?;
    let mut report = VerificationReport::new("qccr_polar_check")
        .with_param("q", q)
        .with_param("cap", cap)
        .with_param("rank_tol", rank_tol);
    report.absorb("relation", qccr_residuals(&a, q, 1e-12)?);
    let polar = polar_left(&a, rank_tol)?;
    let s = &polar.isometric_part;
    let s_star = s.adjoint();
    let basis = *a.basis();
    report.check(
        "isometry",
        "S* S = 1",
        core_residual(&s_star.compose(s)?, &LinearOperator::identity(basis), 2)?,
        MODEL_TOL,
    );
    let range = s.compose(&s_star)?;
    let root = psd_sqrt(&conjugation_series(s, &range, q)?)?;
    report.check(
        "polar_formula",
        "a = (sum_{n>=1} q^(n-1) S^n S*^n)^(1/2) S",
        core_residual(&root.compose(s)?, &a, 1)?,
        SVD_TOL,
    );
    let min_weight = (0..cap)
        .map(|n| a.matrix()[(n + 1, n)].re)
        .fold(f64::INFINITY, f64::min);
    report.check(
        "weights_positive",
        "every weight sqrt([n+1]_q) is real and positive",
        if min_weight > 0.0 { 0.0 } else { -min_weight + 1.0 },
        0.0,
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock_core::DEFAULT_RANK_TOL;
    use crate::representations::{build_irrep, IrrepSpec};

    fn max_diff(a: &[LinearOperator], b: &[LinearOperator]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.sub(y).unwrap().max_abs_entry())
            .fold(0.0, f64::max)
    }

    #[test]
    fn series_stops_on_nilpotent_powers() {
        let t = build_irrep(&IrrepSpec::fock(1, 4)).unwrap();
        let id = LinearOperator::identity(*t.basis());
        let sum = conjugation_series(t.op(1), &id, 1.0 - 1e-9).unwrap();
        // Σ_n S^n S*^n is diag(1, 2, 3, 4, 5).
        for k in 0..5 {
            assert!((sum.matrix()[(k, k)].re - (k + 1) as f64).abs() < 1e-6);
        }
    }

    #[test]
    fn tilde_at_mu_zero_returns_input() {
        let t = build_irrep(&IrrepSpec::fock(2, 4)).unwrap();
        let (a, _) = tilde_a_family(&t, 0.0).unwrap();
        assert!(max_diff(a.ops(), t.ops()) < 1e-14);
    }

    #[test]
    fn tilde_matches_closed_form() {
        for &mu in &[0.5, -0.7] {
            let t = build_irrep(&IrrepSpec::fock(2, 5)).unwrap();
            let (a, _) = tilde_a_family(&t, mu).unwrap();
            let closed = build_fock_tccr(2, mu, 5).unwrap();
            assert!(max_diff(a.ops(), closed.ops()) < 1e-12, "mu = {mu}");
        }
    }

    #[test]
    fn hat_of_closed_form_is_fock_irrep() {
        let a = build_fock_tccr(2, 0.5, 5).unwrap();
        let hat = hat_s_family(&a, DEFAULT_RANK_TOL).unwrap();
        let t = build_irrep(&IrrepSpec::fock(2, 5)).unwrap();
        assert!(max_diff(hat.ops(), t.ops()) < 1e-10);
    }

    #[test]
    fn hat_rejects_non_tccr_input() {
        let a = build_fock_tccr(2, 0.5, 4).unwrap();
        let broken = TccrFamily::new(vec![a.op(1).clone(), a.op(1).clone()], 0.5).unwrap();
        match hat_s_family(&broken, DEFAULT_RANK_TOL) {
            Err(Error::Precondition(msg)) => assert!(msg.contains("diag.2")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lemma_suite_small() {
        let t = build_irrep(&IrrepSpec::fock(2, 6)).unwrap();
        let r = verify_lemma_suite(&t, 0.5).unwrap();
        assert!(r.all_passed(), "{:?}", r.failures().collect::<Vec<_>>());
        assert!(r.get("power.2.2.2").is_some());
    }

    #[test]
    fn qccr_identity() {
        for &q in &[-0.5, 0.3] {
            let r = qccr_polar_check(q, 8, DEFAULT_RANK_TOL).unwrap();
            assert!(r.all_passed(), "{:?}", r.failures().collect::<Vec<_>>());
        }
    }
}
