//! Verification campaigns over the truncated models, emitted as JSON, CSV or
//! Markdown reports with CI-friendly exit codes: 0 when every check passes,
//! 1 when any check fails, 2 on usage or I/O errors.

use std::f64::consts::PI;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::Value;

use tccr_core::fock_core::DEFAULT_RANK_TOL;
use tccr_core::reconstruct::{
    polar_relations_check, qccr_polar_check, roundtrip_check_with_tol, verify_lemma_suite_with_tol,
};
use tccr_core::relations::{
    norm_bound_check, norm_domination_sample, pi_residuals, psi_collapse_check_seeded,
    sample_words, tccr_residuals, VerificationReport, MODEL_TOL, SVD_TOL,
};
use tccr_core::representations::{build_fock_tccr, build_irrep, IrrepSpec};
use tccr_core::symbolic::{eval_and_bridge, gram_matrix, random_polynomial, DEFAULT_MAX_LEVEL};
use tccr_core::{Error, Result};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Values of μ at which Gram matrices are checked for positivity.
pub const GRAM_SAMPLE_MUS: [f64; 6] = [-0.9, -0.5, 0.0, 0.3, 0.7, 0.9];

#[derive(Parser, Debug)]
#[command(name = "tccr", version, about = "Verify truncated models of the twisted CCR")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Subcommand, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    /// Defining relations of the Fock generators and partial isometries, plus the norm bound.
    Verify,
    /// Both inverse constructions, the lemma suite and the polar-part relations.
    Roundtrip,
    /// Partial-isometry relations for every irreducible class.
    Irreps,
    /// Exact Fock Gram matrix, its positivity, and the symbolic-to-matrix bridge.
    Gram,
    /// Collapse map images and sampled norm domination.
    Faithfulness,
    /// One-mode q-deformed oscillator and its polar formula.
    Qccr,
    /// Small fixed campaign touching every module.
    Demo,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Roundtrip => "roundtrip",
            Command::Irreps => "irreps",
            Command::Gram => "gram",
            Command::Faithfulness => "faithfulness",
            Command::Qccr => "qccr",
            Command::Demo => "demo",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Json,
    Csv,
    Md,
}

#[derive(Args, Clone, Debug, Default)]
pub struct Options {
    /// Number of generators [default: 2]
    #[arg(long, global = true)]
    pub d: Option<usize>,
    /// Deformation parameter, |mu| < 1 [default: 0.5]
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    /// One-mode deformation parameter, |q| < 1 [default: 0.3]
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub q: Option<f64>,
    /// Per-slot truncation N >= 2 [default: 8; 12 for faithfulness with d <= 2]
    #[arg(long, global = true)]
    pub cap: Option<usize>,
    /// Irreducible class j in 0..=d [default: d]
    #[arg(long = "class-j", global = true)]
    pub class_j: Option<usize>,
    /// Phase of the non-Fock classes, in [0, 2π)
    #[arg(long, global = true)]
    pub phase: Option<f64>,
    /// Override every check tolerance
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for sampled words and polynomials [default: 42]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of sampled words or polynomials
    #[arg(long, global = true)]
    pub words: Option<usize>,
    /// Gram matrix word length [default: 2]
    #[arg(long, global = true)]
    pub level: Option<usize>,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Report format
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads for independent checks
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

/// A subcommand with its raw options.
#[derive(Clone, Debug)]
pub struct CommandSpec {
    pub command: Command,
    pub options: Options,
}

impl CommandSpec {
    pub fn new(command: Command) -> Self {
        CommandSpec {
            command,
            options: Options::default(),
        }
    }

    pub fn parse_from<I, T>(args: I) -> std::result::Result<Self, clap::Error>
    where
        I: IntoIterator<Item = T>,
        T: Into<OsString> + Clone,
    {
        let cli = Cli::try_parse_from(args)?;
        Ok(CommandSpec {
            command: cli.command,
            options: cli.options,
        })
    }
}

/// Options with defaults filled in.
#[derive(Clone, Copy, Debug)]
struct Resolved {
    d: usize,
    mu: f64,
    q: f64,
    cap: usize,
    class_j: usize,
    phase: f64,
    tol: Option<f64>,
    seed: u64,
    level: usize,
}

fn resolve(command: Command, o: &Options) -> Result<Resolved> {
    let d = o.d.unwrap_or(2);
    let default_cap = if command == Command::Faithfulness && d <= 2 { 12 } else { 8 };
    let r = Resolved {
        d,
        mu: o.mu.unwrap_or(0.5),
        q: o.q.unwrap_or(0.3),
        cap: o.cap.unwrap_or(default_cap),
        class_j: o.class_j.unwrap_or(d),
        phase: o.phase.unwrap_or(0.0),
        tol: o.tol,
        seed: o.seed.unwrap_or(42),
        level: o.level.unwrap_or(2),
    };
    let bad = |msg: String| Err(Error::Parameter(msg));
    if r.d == 0 {
        return bad("--d must be at least 1".into());
    }
    if !(r.mu.abs() < 1.0) {
        return bad(format!("--mu must satisfy |mu| < 1, got {}", r.mu));
    }
    if !(r.q.abs() < 1.0) {
        return bad(format!("--q must satisfy |q| < 1, got {}", r.q));
    }
    if r.cap < 2 {
        return bad(format!("--cap must be at least 2, got {}", r.cap));
    }
    if r.class_j > r.d {
        return bad(format!("--class-j must lie in 0..={}, got {}", r.d, r.class_j));
    }
    if !(0.0..2.0 * PI).contains(&r.phase) {
        return bad(format!("--phase must lie in [0, 2π), got {}", r.phase));
    }
    if let Some(t) = r.tol {
        if !(t > 0.0) || !t.is_finite() {
            return bad(format!("--tol must be positive, got {t}"));
        }
    }
    if r.level > DEFAULT_MAX_LEVEL {
        return bad(format!("--level must be at most {DEFAULT_MAX_LEVEL}, got {}", r.level));
    }
    if o.jobs == Some(0) {
        return bad("--jobs must be at least 1".into());
    }
    Ok(r)
}

fn tol_or(r: &Resolved, default: f64) -> f64 {
    r.tol.unwrap_or(default)
}

/// Same checks with every tolerance replaced by `tol` (pass flags recomputed).
fn retolerate(report: VerificationReport, tol: Option<f64>) -> VerificationReport {
    let Some(tol) = tol else { return report };
    let mut out = VerificationReport::new(report.command.clone());
    out.params = report.params.clone();
    for c in report.checks() {
        out.check(c.id.clone(), c.description.clone(), c.residual, tol);
    }
    out
}

fn run_verify(r: &Resolved) -> Result<VerificationReport> {
    let a = build_fock_tccr(r.d, r.mu, r.cap)?;
    let t = build_irrep(&IrrepSpec::new(r.d, r.class_j, r.phase, r.cap, r.mu)?)?;
    let mut report = VerificationReport::new("verify");
    report.absorb("tccr", retolerate(tccr_residuals(&a)?, r.tol));
    report.absorb("pi", retolerate(pi_residuals(&t)?, r.tol));
    report.absorb("norm_bound", retolerate(norm_bound_check(&a)?, r.tol));
    Ok(report)
}

fn run_roundtrip(r: &Resolved) -> Result<VerificationReport> {
    let spec = IrrepSpec::new(r.d, r.class_j, r.phase, r.cap, r.mu)?;
    let t = build_irrep(&spec)?;
    let mut report = VerificationReport::new("roundtrip");
    report.absorb(
        "roundtrip",
        roundtrip_check_with_tol(&t, r.mu, DEFAULT_RANK_TOL, tol_or(r, SVD_TOL))?,
    );
    report.absorb("lemmas", verify_lemma_suite_with_tol(&t, r.mu, tol_or(r, MODEL_TOL))?);
    if spec.is_fock() {
        let a = build_fock_tccr(r.d, r.mu, r.cap)?;
        report.absorb(
            "polar",
            polar_relations_check(&a, DEFAULT_RANK_TOL, tol_or(r, SVD_TOL))?,
        );
    }
    Ok(report)
}

fn run_irreps(r: &Resolved, phases: &[f64]) -> Result<VerificationReport> {
    let mut report = VerificationReport::new("irreps");
    report.set_param("phases", phases.to_vec());
    for j in 0..=r.d {
        for (k, &phase) in phases.iter().enumerate() {
            let t = build_irrep(&IrrepSpec::new(r.d, j, phase, r.cap, r.mu)?)?;
            report.absorb(&format!("j{j}.p{k}"), retolerate(pi_residuals(&t)?, r.tol));
        }
    }
    Ok(report)
}

fn run_gram(r: &Resolved, polynomials: usize) -> Result<VerificationReport> {
    let g = gram_matrix(r.level, r.d)?;
    let tol = tol_or(r, MODEL_TOL);
    let mut report = VerificationReport::new("gram");
    report.set_param("gram_basis", g.basis_labels());
    report.set_param("gram_entries", g.entry_strings());
    report.check(
        "symmetric",
        "Gram entries are symmetric as exact polynomials",
        if g.is_symmetric() { 0.0 } else { 1.0 },
        0.0,
    );
    let mut mus = GRAM_SAMPLE_MUS.to_vec();
    if !mus.contains(&r.mu) {
        mus.push(r.mu);
    }
    for (k, &mu) in mus.iter().enumerate() {
        let min = g.min_eigenvalue(mu)?;
        report.check(
            format!("positive.{k}"),
            format!("min eigenvalue at mu = {mu} is {min:.6e}"),
            (-min).max(0.0),
            tol,
        );
    }
    let family = build_fock_tccr(r.d, r.mu, r.cap)?;
    let max_len = r.cap.min(5);
    let bridges: Vec<Result<VerificationReport>> = (0..polynomials)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(r.seed);
            rng.set_stream(k as u64);
            let p = random_polynomial(&mut rng, r.d, max_len, 4);
            eval_and_bridge(&p, &family).map(|rep| retolerate(rep, r.tol))
        })
        .collect();
    for (k, b) in bridges.into_iter().enumerate() {
        report.absorb(&format!("bridge.{k}"), b?);
    }
    Ok(report)
}

fn run_faithfulness(r: &Resolved, words: usize, psi_samples: usize) -> Result<VerificationReport> {
    let classes: Vec<usize> = if r.class_j < r.d {
        vec![r.class_j]
    } else {
        (0..r.d).collect()
    };
    if classes.is_empty() {
        return Err(Error::Parameter("faithfulness needs d >= 1 and a class j < d".into()));
    }
    let mut report = VerificationReport::new("faithfulness");
    report.set_param("kind", "evidence");
    for &j in &classes {
        report.absorb(
            &format!("psi.j{j}"),
            retolerate(psi_collapse_check_seeded(r.d, j, r.phase, r.cap, psi_samples, r.seed)?, r.tol),
        );
    }
    let specs = classes
        .iter()
        .map(|&j| IrrepSpec::new(r.d, j, r.phase, r.cap, 0.0))
        .collect::<Result<Vec<_>>>()?;
    let sample = sample_words(r.d, words, 6, r.seed);
    report.absorb(
        "domination",
        retolerate(norm_domination_sample(&sample, &specs, &IrrepSpec::fock(r.d, r.cap), r.seed)?, r.tol),
    );
    Ok(report)
}

fn run_qccr(r: &Resolved) -> Result<VerificationReport> {
    let mut report = VerificationReport::new("qccr");
    report.absorb("q", retolerate(qccr_polar_check(r.q, r.cap, DEFAULT_RANK_TOL)?, r.tol));
    Ok(report)
}

fn run_demo(seed: u64) -> Result<VerificationReport> {
    let r = Resolved {
        d: 2,
        mu: 0.5,
        q: 0.25,
        cap: 8,
        class_j: 2,
        phase: 0.0,
        tol: None,
        seed,
        level: 2,
    };
    let mut report = VerificationReport::new("demo");
    report.absorb("verify", run_verify(&r)?);
    report.absorb("roundtrip", run_roundtrip(&r)?);
    report.absorb("irreps", run_irreps(&r, &[0.0, PI / 3.0, PI])?);
    report.absorb("gram", run_gram(&r, 10)?);
    report.absorb("faithfulness", run_faithfulness(&r, 20, 5)?);
    report.absorb("qccr", run_qccr(&r)?);
    Ok(report)
}

fn record(report: &mut VerificationReport, r: &Resolved, keys: &[&str]) {
    for key in keys {
        let value: Value = match *key {
            "d" => r.d.into(),
            "mu" => r.mu.into(),
            "q" => r.q.into(),
            "cap" => r.cap.into(),
            "class_j" => r.class_j.into(),
            "phase" => r.phase.into(),
            "tol" => r.tol.map_or(Value::Null, Value::from),
            "seed" => r.seed.into(),
            "level" => r.level.into(),
            other => unreachable!("unknown parameter {other}"),
        };
        report.set_param(key, value);
    }
}

/// Runs one subcommand. Parameter problems surface as [`Error::Parameter`].
pub fn execute_command(spec: &CommandSpec) -> Result<VerificationReport> {
    let r = resolve(spec.command, &spec.options)?;
    let o = &spec.options;
    let mut report = match spec.command {
        Command::Verify => {
            let mut rep = run_verify(&r)?;
            record(&mut rep, &r, &["d", "mu", "cap", "class_j", "phase", "tol"]);
            rep
        }
        Command::Roundtrip => {
            let mut rep = run_roundtrip(&r)?;
            record(&mut rep, &r, &["d", "mu", "cap", "class_j", "phase", "tol"]);
            rep
        }
        Command::Irreps => {
            let phases = match o.phase {
                Some(p) => vec![p],
                None => vec![0.0, PI / 3.0, PI],
            };
            let mut rep = run_irreps(&r, &phases)?;
            record(&mut rep, &r, &["d", "cap", "tol"]);
            rep
        }
        Command::Gram => {
            let polynomials = o.words.unwrap_or(20);
            let mut rep = run_gram(&r, polynomials)?;
            record(&mut rep, &r, &["d", "mu", "cap", "level", "seed", "tol"]);
            rep.set_param("words", polynomials);
            rep
        }
        Command::Faithfulness => {
            let words = o.words.unwrap_or(100);
            let mut rep = run_faithfulness(&r, words, 20)?;
            record(&mut rep, &r, &["d", "cap", "class_j", "phase", "seed", "tol"]);
            rep.set_param("words", words);
            rep
        }
        Command::Qccr => {
            let mut rep = run_qccr(&r)?;
            record(&mut rep, &r, &["q", "cap", "tol"]);
            rep
        }
        Command::Demo => {
            let mut rep = run_demo(r.seed)?;
            rep.set_param("seed", r.seed);
            rep
        }
    };
    report.command = spec.command.name().to_string();
    Ok(report)
}

/// Renders `report`; JSON and CSV files carry no trailing newline.
pub fn render_report(report: &VerificationReport, format: Format) -> Result<String> {
    Ok(match format {
        Format::Json => report.to_canonical_json(),
        Format::Csv => report.to_csv()?.trim_end_matches('\n').to_string(),
        Format::Md => report.to_markdown(),
    })
}

/// Writes the report and returns the exit code: 0 all passed, 1 any failure, 2 I/O error.
pub fn emit_report(report: &VerificationReport, format: Format, out: Option<&Path>) -> i32 {
    let text = match render_report(report, format) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let written = match out {
        Some(path) => std::fs::write(path, text.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{}", text.trim_end_matches('\n')).and_then(|_| stdout.flush())
        }
    };
    if let Err(e) = written {
        let target = out.map_or("stdout".to_string(), |p| p.display().to_string());
        eprintln!("error: cannot write report to {target}: {e}");
        return EXIT_USAGE;
    }
    if report.all_passed() {
        EXIT_PASS
    } else {
        let s = report.summary();
        eprintln!("{} of {} checks failed", s.total - s.passed, s.total);
        EXIT_FAIL
    }
}

/// Parses `args` (program name first), runs the subcommand and emits its report.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let spec = match CommandSpec::parse_from(args) {
        Ok(spec) => spec,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let result = match spec.options.jobs {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute_command(&spec)),
            Err(e) => Err(Error::Parameter(format!("cannot start {n} workers: {e}"))),
        },
        _ => execute_command(&spec),
    };
    match result {
        Ok(report) => emit_report(&report, spec.options.format, spec.options.out.as_deref()),
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(args: &[&str]) -> CommandSpec {
        let mut full = vec!["tccr"];
        full.extend_from_slice(args);
        CommandSpec::parse_from(full).unwrap()
    }

    #[test]
    fn flags_after_subcommand_and_negative_values() {
        let s = spec(&["verify", "--d", "3", "--mu", "-0.5", "--cap", "4"]);
        assert_eq!(s.command, Command::Verify);
        assert_eq!(s.options.d, Some(3));
        assert_eq!(s.options.mu, Some(-0.5));
    }

    #[test]
    fn unknown_flags_are_rejected() {
        assert!(CommandSpec::parse_from(["tccr", "verify", "--bogus", "1"]).is_err());
        assert!(CommandSpec::parse_from(["tccr", "nonsense"]).is_err());
    }

    #[test]
    fn parameter_validation() {
        for bad in [
            &["verify", "--mu", "1.0"][..],
            &["verify", "--cap", "1"],
            &["qccr", "--q", "-1"],
            &["irreps", "--class-j", "3"],
            &["verify", "--phase", "7"],
            &["verify", "--tol", "0"],
            &["gram", "--level", "9"],
        ] {
            assert!(
                matches!(execute_command(&spec(bad)), Err(Error::Parameter(_))),
                "{bad:?}"
            );
        }
    }

    #[test]
    fn verify_small() {
        let r = execute_command(&spec(&["verify", "--d", "2", "--cap", "4"])).unwrap();
        assert!(r.all_passed());
        assert_eq!(r.command, "verify");
        assert_eq!(r.params["mu"], 0.5);
        assert!(r.params.get("jobs").is_none() && r.params.get("out").is_none());
    }

    #[test]
    fn gram_prints_exact_diagonal() {
        let r = execute_command(&spec(&["gram", "--d", "1", "--level", "2", "--words", "3"])).unwrap();
        assert!(r.all_passed());
        let entries = &r.params["gram_entries"];
        assert_eq!(entries[2][2], "1 + mu^2");
        assert_eq!(entries[0][0], "1");
        assert_eq!(entries[0][2], "0");
    }

    #[test]
    fn tolerance_override_applies_everywhere() {
        let r = execute_command(&spec(&["qccr", "--tol", "1e-3"])).unwrap();
        assert!(r.checks().iter().all(|c| c.tolerance == 1e-3));
    }

    #[test]
    fn exit_codes() {
        let mut r = VerificationReport::new("x");
        r.check("ok", "", 0.0, 1.0);
        let dir = std::env::temp_dir().join(format!("tccr-cli-unit-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("r.json");
        assert_eq!(emit_report(&r, Format::Json, Some(&path)), EXIT_PASS);
        assert!(std::fs::read_to_string(&path).unwrap().ends_with("\"total\": 1}}"));
        r.check("bad", "", 2.0, 1.0);
        assert_eq!(emit_report(&r, Format::Json, Some(&path)), EXIT_FAIL);
        let missing = dir.join("no/such/dir/r.json");
        assert_eq!(emit_report(&r, Format::Csv, Some(&missing)), EXIT_USAGE);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
