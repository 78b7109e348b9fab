//! JSON reports with a fixed float format.
//!
//! Every float is written in scientific notation with 17 significant digits
//! (`{:.16e}`), which round-trips binary64 exactly; non-finite values become
//! `null`. Object keys keep insertion order, so a report is a pure function of
//! its inputs. Wall-clock data lives in a separate `<name>.meta.json`.
//!
//! Report schema (version 1):
//!
//! ```text
//! {
//!   "schema": "swmorse-report",
//!   "schema_version": 1,
//!   "command": <string>,
//!   "passed": <bool>,
//!   "inputs": { ... command inputs ... },
//!   "results": { ... command results ... },
//!   "checks": [ { "name": <string>, "passed": <bool>, "value": <number>, "limit": <number> } ]
//! }
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::Result;
use crate::flow::FlowTrace;
use crate::functional::EnergyBreakdown;
use crate::hodge::JacobianPoint;
use crate::spectral::SpectralReport;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(String, Json)>),
}

impl Json {
    pub fn obj<K: Into<String>>(pairs: impl IntoIterator<Item = (K, Json)>) -> Json {
        Json::Obj(pairs.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    pub fn nums(values: &[f64]) -> Json {
        Json::Arr(values.iter().map(|v| Json::Num(*v)).collect())
    }

    pub fn str(s: impl Into<String>) -> Json {
        Json::Str(s.into())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out.push('\n');
        out
    }

    fn write(&self, out: &mut String, indent: usize) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(i) => write!(out, "{i}").expect("write to string"),
            Json::Num(x) => out.push_str(&format_float(*x)),
            Json::Str(s) => write_string(out, s),
            Json::Arr(items) if items.is_empty() => out.push_str("[]"),
            Json::Arr(items) => {
                // short numeric rows stay on one line
                if items.len() <= 8
                    && items
                        .iter()
                        .all(|i| matches!(i, Json::Num(_) | Json::Int(_)))
                {
                    out.push('[');
                    for (i, item) in items.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        item.write(out, indent);
                    }
                    out.push(']');
                    return;
                }
                out.push_str("[\n");
                for (i, item) in items.iter().enumerate() {
                    pad(out, indent + 1);
                    item.write(out, indent + 1);
                    out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
                }
                pad(out, indent);
                out.push(']');
            }
            Json::Obj(pairs) if pairs.is_empty() => out.push_str("{}"),
            Json::Obj(pairs) => {
                out.push_str("{\n");
                for (i, (k, v)) in pairs.iter().enumerate() {
                    pad(out, indent + 1);
                    write_string(out, k);
                    out.push_str(": ");
                    v.write(out, indent + 1);
                    out.push_str(if i + 1 < pairs.len() { ",\n" } else { "\n" });
                }
                pad(out, indent);
                out.push('}');
            }
        }
    }
}

fn pad(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

fn write_string(out: &mut String, s: &str) {
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => write!(out, "\\u{:04x}", c as u32).expect("write to string"),
            c => out.push(c),
        }
    }
    out.push('"');
}

/// 17 significant digits in scientific notation, `null` when not finite.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

/// One named pass/fail check carried in a report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub limit: f64,
}

impl Check {
    /// Passes when `value ≤ limit`.
    pub fn at_most(name: &str, value: f64, limit: f64) -> Check {
        Check {
            name: name.to_string(),
            passed: value <= limit,
            value,
            limit,
        }
    }

    /// Passes when `value ≥ limit`.
    pub fn at_least(name: &str, value: f64, limit: f64) -> Check {
        Check {
            name: name.to_string(),
            passed: value >= limit,
            value,
            limit,
        }
    }

    pub fn equals(name: &str, value: usize, expected: usize) -> Check {
        Check {
            name: name.to_string(),
            passed: value == expected,
            value: value as f64,
            limit: expected as f64,
        }
    }

    fn to_json(&self) -> Json {
        Json::obj([
            ("name", Json::str(&self.name)),
            ("passed", Json::Bool(self.passed)),
            ("value", Json::Num(self.value)),
            ("limit", Json::Num(self.limit)),
        ])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub inputs: Json,
    pub results: Json,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(command: &str, inputs: Json, results: Json, checks: Vec<Check>) -> Report {
        Report {
            command: command.to_string(),
            inputs,
            results,
            checks,
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> Json {
        Json::obj([
            ("schema", Json::str("swmorse-report")),
            ("schema_version", Json::Int(SCHEMA_VERSION as i64)),
            ("command", Json::str(&self.command)),
            ("passed", Json::Bool(self.passed())),
            ("inputs", self.inputs.clone()),
            ("results", self.results.clone()),
            (
                "checks",
                Json::Arr(self.checks.iter().map(Check::to_json).collect()),
            ),
        ])
    }

    /// Writes `<dir>/<command>.json` and `<dir>/<command>.meta.json`,
    /// returning the report path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.json", self.command));
        fs::write(&path, self.to_json().render())?;
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let meta = Json::obj([
            ("report", Json::str(format!("{}.json", self.command))),
            ("created_unix_seconds", Json::Int(secs as i64)),
            ("tool_version", Json::str(env!("CARGO_PKG_VERSION"))),
        ]);
        fs::write(
            dir.join(format!("{}.meta.json", self.command)),
            meta.render(),
        )?;
        Ok(path)
    }
}

pub fn energy_json(e: &EnergyBreakdown) -> Json {
    Json::obj([
        ("curvature_term", Json::Num(e.curvature_term)),
        ("dirichlet_term", Json::Num(e.dirichlet_term)),
        ("quartic_term", Json::Num(e.quartic_term)),
        (
            "curvature_coupling_term",
            Json::Num(e.curvature_coupling_term),
        ),
        ("topological_term", Json::Num(e.topological_term)),
        ("total", Json::Num(e.total)),
    ])
}

pub fn spectral_json(r: &SpectralReport) -> Json {
    Json::obj([
        ("solver", Json::str(r.solver.name())),
        ("dimension", Json::Int(r.dimension as i64)),
        ("dimension_kind", Json::str("real")),
        ("zero_threshold", Json::Num(r.zero_threshold)),
        ("morse_index", Json::Int(r.morse_index as i64)),
        ("kernel_dim", Json::Int(r.kernel_dim as i64)),
        ("iterations", Json::Int(r.iterations as i64)),
        ("eigenvalues", Json::nums(&r.eigenvalues)),
        ("residuals", Json::nums(&r.residuals)),
    ])
}

pub fn jacobian_json(p: &JacobianPoint) -> Json {
    Json::nums(&p.coords)
}

/// Trace as plot-ready columns.
pub fn flow_json(t: &FlowTrace) -> Json {
    let col = |f: fn(&crate::flow::FlowRecord) -> f64| {
        Json::nums(&t.records.iter().map(f).collect::<Vec<_>>())
    };
    Json::obj([
        ("status", Json::str(t.status.name())),
        ("iterations", Json::Int(t.last().iteration as i64)),
        (
            "regauged_at",
            Json::Arr(t.regauged_at.iter().map(|i| Json::Int(*i as i64)).collect()),
        ),
        (
            "columns",
            Json::obj([
                ("iteration", col(|r| r.iteration as f64)),
                ("energy", col(|r| r.energy)),
                ("grad_norm", col(|r| r.grad_norm)),
                ("phi_norm", col(|r| r.phi_norm)),
                ("step", col(|r| r.step)),
            ]),
        ),
    ])
}
