use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Deserialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// One named check: `pass` iff `residual <= tolerance` (NaN never passes).
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub id: String,
    pub description: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(id: impl Into<String>, description: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Check {
            id: id.into(),
            description: description.into(),
            residual,
            tolerance,
            pass: residual <= tolerance,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
}

/// Ordered list of checks plus the parameters that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub command: String,
    pub params: BTreeMap<String, Value>,
    checks: Vec<Check>,
    summary: Summary,
}

impl VerificationReport {
    pub fn new(command: impl Into<String>) -> Self {
        VerificationReport {
            command: command.into(),
            params: BTreeMap::new(),
            checks: Vec::new(),
            summary: Summary::default(),
        }
    }

    pub fn with_param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.set_param(key, value);
        self
    }

    pub fn set_param(&mut self, key: &str, value: impl Into<Value>) {
        self.params.insert(key.to_string(), value.into());
    }

    pub fn push(&mut self, check: Check) {
        self.summary.total += 1;
        if check.pass {
            self.summary.passed += 1;
        }
        self.checks.push(check);
    }

    pub fn check(
        &mut self,
        id: impl Into<String>,
        description: impl Into<String>,
        residual: f64,
        tolerance: f64,
    ) {
        self.push(Check::new(id, description, residual, tolerance));
    }

    /// Appends the checks of `other` with `prefix.` prepended to their ids;
    /// its parameters land under `params[prefix]` when not empty.
    pub fn absorb(&mut self, prefix: &str, other: VerificationReport) {
        if !other.params.is_empty() {
            let map: Map<String, Value> = other.params.into_iter().collect();
            self.params.insert(prefix.to_string(), Value::Object(map));
        }
        for mut c in other.checks {
            c.id = format!("{prefix}.{}", c.id);
            self.push(c);
        }
    }

    pub fn checks(&self) -> &[Check] {
        &self.checks
    }

    pub fn summary(&self) -> Summary {
        self.summary
    }

    pub fn all_passed(&self) -> bool {
        self.summary.passed == self.summary.total
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    pub fn get(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }

    /// Single-line JSON with sorted keys, `", "` / `": "` separators and
    /// floats rounded to 15 significant digits.
    pub fn to_canonical_json(&self) -> String {
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| {
                let mut m = Map::new();
                m.insert("id".into(), Value::String(c.id.clone()));
                m.insert("description".into(), Value::String(c.description.clone()));
                m.insert("residual".into(), float_value(c.residual));
                m.insert("tolerance".into(), float_value(c.tolerance));
                m.insert("pass".into(), Value::Bool(c.pass));
                Value::Object(m)
            })
            .collect();
        let mut summary = Map::new();
        summary.insert("total".into(), Value::from(self.summary.total));
        summary.insert("passed".into(), Value::from(self.summary.passed));
        let mut root = Map::new();
        root.insert("command".into(), Value::String(self.command.clone()));
        root.insert(
            "params".into(),
            Value::Object(self.params.clone().into_iter().collect()),
        );
        root.insert("checks".into(), Value::Array(checks));
        root.insert("summary".into(), Value::Object(summary));
        let mut out = String::new();
        write_canonical(&Value::Object(root), &mut out);
        out
    }

    /// Parses a report; `pass` flags and the summary are recomputed from the data.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct RawCheck {
            id: String,
            description: String,
            residual: Option<f64>,
            tolerance: Option<f64>,
        }
        #[derive(Deserialize)]
        struct Raw {
            command: String,
            #[serde(default)]
            params: BTreeMap<String, Value>,
            checks: Vec<RawCheck>,
        }
        let raw: Raw = serde_json::from_str(text)?;
        let mut report = VerificationReport::new(raw.command);
        report.params = raw.params;
        for c in raw.checks {
            report.check(
                c.id,
                c.description,
                c.residual.unwrap_or(f64::NAN),
                c.tolerance.unwrap_or(f64::NAN),
            );
        }
        Ok(report)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["id", "description", "residual", "tolerance", "pass"])?;
        for c in &self.checks {
            w.write_record([
                c.id.as_str(),
                c.description.as_str(),
                &format_float(c.residual),
                &format_float(c.tolerance),
                if c.pass { "true" } else { "false" },
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {}\n", self.command);
        if !self.params.is_empty() {
            let _ = writeln!(out, "| parameter | value |\n|---|---|");
            for (k, v) in &self.params {
                let mut rendered = String::new();
                write_canonical(v, &mut rendered);
                let _ = writeln!(out, "| {k} | `{}` |", rendered.replace('|', "\\|"));
            }
            out.push('\n');
        }
        let _ = writeln!(out, "| id | description | residual | tolerance | pass |\n|---|---|---|---|---|");
        for c in &self.checks {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} |",
                c.id,
                c.description.replace('|', "\\|"),
                format_float(c.residual),
                format_float(c.tolerance),
                if c.pass { "yes" } else { "**NO**" }
            );
        }
        let _ = writeln!(out, "\n{} / {} checks passed", self.summary.passed, self.summary.total);
        out
    }
}

/// Shortest representation of `x` rounded to 15 significant digits; `null` if not finite.
pub fn format_float(x: f64) -> String {
    if !x.is_finite() {
        return "null".to_string();
    }
    let rounded: f64 = format!("{x:.14e}").parse().expect("formatted float parses");
    if rounded == 0.0 {
        return "0.0".to_string();
    }
    format!("{rounded:?}")
}

fn float_value(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn write_canonical(v: &Value, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&format_float(n.as_f64().expect("f64 number")));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                write_canonical(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (k, key) in keys.into_iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                out.push_str(&Value::String(key.clone()).to_string());
                out.push_str(": ");
                write_canonical(&map[key], out);
            }
            out.push('}');
        }
    }
}
