use num_complex::Complex64;
use rayon::prelude::*;

use super::report::VerificationReport;
use crate::error::{Error, Result};
use crate::fock_core::{core_residual, operator_norm, LinearOperator};
use crate::representations::{q_number, GeneratorFamily, TccrFamily};
use crate::symbolic::{adjoint_word, Letter, Word};

/// Default tolerance for operators built from closed forms.
pub const MODEL_TOL: f64 = 1e-10;
/// Default tolerance for operators that went through an SVD.
pub const SVD_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RelationKind {
    Tccr { mu: f64, d: usize },
    Pi { d: usize },
    Qccr { q: f64 },
}

/// `coeff · word`; the empty word is the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub word: Word,
}

impl Term {
    pub fn new(coeff: f64, word: Word) -> Self {
        Term { coeff, word }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Relation {
    pub label: String,
    pub lhs: Vec<Term>,
    pub rhs: Vec<Term>,
    /// Longest word on either side.
    pub degree: usize,
}

impl Relation {
    pub fn new(label: impl Into<String>, lhs: Vec<Term>, rhs: Vec<Term>) -> Self {
        let degree = lhs.iter().chain(&rhs).map(|t| t.word.len()).max().unwrap_or(0);
        Relation {
            label: label.into(),
            lhs,
            rhs,
            degree,
        }
    }

    pub fn adjoint(&self) -> Relation {
        let conj = |ts: &[Term]| {
            ts.iter()
                .map(|t| Term::new(t.coeff, adjoint_word(&t.word)))
                .collect::<Vec<_>>()
        };
        Relation::new(format!("{}*", self.label), conj(&self.lhs), conj(&self.rhs))
    }

    pub fn describe(&self, letter: char) -> String {
        format!("{} = {}", render(&self.lhs, letter), render(&self.rhs, letter))
    }
}

fn render(terms: &[Term], letter: char) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (k, t) in terms.iter().enumerate() {
        let word = if t.word.is_empty() {
            "1".to_string()
        } else {
            t.word
                .iter()
                .map(|l| format!("{letter}{}{}", l.index, if l.starred { "*" } else { "" }))
                .collect::<Vec<_>>()
                .join("")
        };
        let mag = t.coeff.abs();
        let body = if (mag - 1.0).abs() < 1e-300 {
            word
        } else {
            format!("{}·{word}", super::report::format_float(mag))
        };
        if k == 0 {
            if t.coeff < 0.0 {
                out.push('-');
            }
        } else {
            out.push_str(if t.coeff < 0.0 { " - " } else { " + " });
        }
        out.push_str(&body);
    }
    out
}

/// Defining relations of one of the algebras, each with its word degree.
#[derive(Clone, Debug, PartialEq)]
pub struct RelationSet {
    pub kind: RelationKind,
    pub relations: Vec<Relation>,
}

fn a(i: usize) -> Letter {
    Letter::plain(i)
}

fn s(i: usize) -> Letter {
    Letter::star(i)
}

impl RelationSet {
    /// `a_i* a_i = 1 + μ² a_i a_i* − (1−μ²) Σ_{k<i} a_k a_k*`,
    /// `a_i* a_j = μ a_j a_i*` (i ≠ j), `a_j a_i = μ a_i a_j` (i < j).
    pub fn tccr(mu: f64, d: usize) -> Self {
        let mut relations = Vec::new();
        for i in 1..=d {
            let mut rhs = vec![Term::new(1.0, vec![]), Term::new(mu * mu, vec![a(i), s(i)])];
            for k in 1..i {
                rhs.push(Term::new(-(1.0 - mu * mu), vec![a(k), s(k)]));
            }
            relations.push(Relation::new(
                format!("diag.{i}"),
                vec![Term::new(1.0, vec![s(i), a(i)])],
                rhs,
            ));
        }
        for i in 1..=d {
            for j in 1..=d {
                if i != j {
                    relations.push(Relation::new(
                        format!("twist.{i}.{j}"),
                        vec![Term::new(1.0, vec![s(i), a(j)])],
                        vec![Term::new(mu, vec![a(j), s(i)])],
                    ));
                }
            }
        }
        for i in 1..=d {
            for j in i + 1..=d {
                relations.push(Relation::new(
                    format!("order.{j}.{i}"),
                    vec![Term::new(1.0, vec![a(j), a(i)])],
                    vec![Term::new(mu, vec![a(i), a(j)])],
                ));
            }
        }
        RelationSet {
            kind: RelationKind::Tccr { mu, d },
            relations,
        }
    }

    /// `t_i* t_j = δ_ij (1 − Σ_{k<i} t_k t_k*)`, `t_j t_i = 0` (j > i).
    pub fn pi(d: usize) -> Self {
        let mut relations = Vec::new();
        for i in 1..=d {
            for j in 1..=d {
                let rhs = if i == j {
                    let mut r = vec![Term::new(1.0, vec![])];
                    for k in 1..i {
                        r.push(Term::new(-1.0, vec![a(k), s(k)]));
                    }
                    r
                } else {
                    vec![]
                };
                relations.push(Relation::new(
                    format!("star.{i}.{j}"),
                    vec![Term::new(1.0, vec![s(i), a(j)])],
                    rhs,
                ));
            }
        }
        for i in 1..=d {
            for j in i + 1..=d {
                relations.push(Relation::new(
                    format!("kill.{j}.{i}"),
                    vec![Term::new(1.0, vec![a(j), a(i)])],
                    vec![],
                ));
            }
        }
        RelationSet {
            kind: RelationKind::Pi { d },
            relations,
        }
    }

    /// `a* a = 1 + q a a*`.
    pub fn qccr(q: f64) -> Self {
        RelationSet {
            kind: RelationKind::Qccr { q },
            relations: vec![Relation::new(
                "diag",
                vec![Term::new(1.0, vec![s(1), a(1)])],
                vec![Term::new(1.0, vec![]), Term::new(q, vec![a(1), s(1)])],
            )],
        }
    }

    pub fn adjoint(&self) -> Self {
        RelationSet {
            kind: self.kind,
            relations: self.relations.iter().map(Relation::adjoint).collect(),
        }
    }

    fn letter(&self) -> char {
        match self.kind {
            RelationKind::Pi { .. } => 't',
            _ => 'a',
        }
    }

    /// One core-residual check per relation, evaluated concurrently, reported in order.
    pub fn residual_report(
        &self,
        command: &str,
        ops: &[LinearOperator],
        tol: f64,
    ) -> Result<VerificationReport> {
        let letter = self.letter();
        let evaluator = WordEvaluator::new(ops)?;
        let residuals: Vec<Result<f64>> = self
            .relations
            .par_iter()
            .map(|rel| {
                let lhs = evaluator.expression(&rel.lhs)?;
                let rhs = evaluator.expression(&rel.rhs)?;
                core_residual(&lhs, &rhs, rel.degree)
            })
            .collect();
        let mut report = VerificationReport::new(command);
        for (rel, res) in self.relations.iter().zip(residuals) {
            report.check(rel.label.clone(), rel.describe(letter), res?, tol);
        }
        Ok(report)
    }
}

/// Evaluates words in a fixed operator family (letters are 1-based).
pub struct WordEvaluator<'a> {
    ops: &'a [LinearOperator],
    adjoints: Vec<LinearOperator>,
}

impl<'a> WordEvaluator<'a> {
    pub fn new(ops: &'a [LinearOperator]) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::Parameter("empty operator family".into()));
        }
        Ok(WordEvaluator {
            ops,
            adjoints: ops.iter().map(LinearOperator::adjoint).collect(),
        })
    }

    fn letter(&self, l: Letter) -> Result<&LinearOperator> {
        if l.index == 0 || l.index > self.ops.len() {
            return Err(Error::Parameter(format!(
                "letter index {} outside 1..={}",
                l.index,
                self.ops.len()
            )));
        }
        Ok(if l.starred {
            &self.adjoints[l.index - 1]
        } else {
            &self.ops[l.index - 1]
        })
    }

    pub fn word(&self, word: &[Letter]) -> Result<LinearOperator> {
        let basis = *self.ops[0].basis();
        let Some((first, rest)) = word.split_first() else {
            return Ok(LinearOperator::identity(basis));
        };
        let mut acc = self.letter(*first)?.clone();
        for l in rest {
            acc = acc.compose(self.letter(*l)?)?;
        }
        Ok(acc)
    }

    pub fn expression(&self, terms: &[Term]) -> Result<LinearOperator> {
        let mut acc = LinearOperator::zeros(*self.ops[0].basis());
        for t in terms {
            acc.add_scaled(Complex64::new(t.coeff, 0.0), &self.word(&t.word)?)?;
        }
        Ok(acc)
    }
}

pub fn tccr_residuals(a: &TccrFamily) -> Result<VerificationReport> {
    tccr_residuals_with_tol(a, MODEL_TOL)
}

pub fn tccr_residuals_with_tol(a: &TccrFamily, tol: f64) -> Result<VerificationReport> {
    let mut report =
        RelationSet::tccr(a.mu(), a.d()).residual_report("tccr_residuals", a.ops(), tol)?;
    report.set_param("d", a.d());
    report.set_param("mu", a.mu());
    report.set_param("cap", a.basis().cap());
    Ok(report)
}

pub fn pi_residuals(t: &GeneratorFamily) -> Result<VerificationReport> {
    pi_residuals_with_tol(t, MODEL_TOL)
}

pub fn pi_residuals_with_tol(t: &GeneratorFamily, tol: f64) -> Result<VerificationReport> {
    let mut report = RelationSet::pi(t.d()).residual_report("pi_residuals", t.ops(), tol)?;
    report.set_param("d", t.d());
    report.set_param("cap", t.basis().cap());
    if let Some(spec) = t.spec() {
        report.set_param("class_j", spec.class_j);
        report.set_param("phase", spec.phase);
    }
    Ok(report)
}

pub fn qccr_residuals(a: &LinearOperator, q: f64, tol: f64) -> Result<VerificationReport> {
    let mut report =
        RelationSet::qccr(q).residual_report("qccr_residuals", std::slice::from_ref(a), tol)?;
    report.set_param("q", q);
    report.set_param("cap", a.basis().cap());
    Ok(report)
}

/// `‖a_i a_i*‖ <= 1/(1−μ²)` per generator. On a full `d`-slot Fock basis the
/// truncated value must also equal `(1−μ^{2N})/(1−μ²)`.
pub fn norm_bound_check(a: &TccrFamily) -> Result<VerificationReport> {
    let mu = a.mu();
    let cap = a.basis().cap();
    let bound = 1.0 / (1.0 - mu * mu);
    let truncated = q_number(mu * mu, cap);
    let full_fock = a.basis().slots() == a.d();
    let norms: Vec<Result<f64>> = a
        .ops()
        .par_iter()
        .map(|op| operator_norm(&op.compose(&op.adjoint())?))
        .collect();
    let mut report = VerificationReport::new("norm_bound_check")
        .with_param("d", a.d())
        .with_param("mu", mu)
        .with_param("cap", cap)
        .with_param("bound", bound)
        .with_param("truncated_value", truncated);
    for (i, norm) in norms.into_iter().enumerate() {
        let norm = norm?;
        let i = i + 1;
        report.check(
            format!("bound.{i}"),
            format!("‖a{i}a{i}*‖ = {} <= 1/(1-mu^2)", super::report::format_float(norm)),
            (norm - bound).max(0.0),
            MODEL_TOL,
        );
        if full_fock {
            report.check(
                format!("truncated.{i}"),
                format!("‖a{i}a{i}*‖ = (1-mu^(2N))/(1-mu^2)"),
                (norm - truncated).abs(),
                MODEL_TOL,
            );
        }
    }
    Ok(report)
}
