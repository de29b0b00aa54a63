//! Config validation with source positions.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::locate::PathIndex;
use super::{ExperimentConfig, Metric, Scenario, SweepVariable};
use crate::simulation::DeploymentSpec;

/// One problem in a config file. `line`/`column` are 1-based; both are 0
/// when the file could not be read at all.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub path: String,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path = if self.path.is_empty() { "<root>" } else { &self.path };
        write!(f, "{}:{}: {}: {}", self.line, self.column, path, self.message)
    }
}

/// Reads and checks a config file; an empty list means it is valid.
pub fn validate_config(path: &Path) -> Vec<Diagnostic> {
    match std::fs::read_to_string(path) {
        Ok(text) => validate_config_str(&text),
        Err(e) => vec![Diagnostic {
            path: String::new(),
            line: 0,
            column: 0,
            message: format!("cannot read {}: {e}", path.display()),
        }],
    }
}

pub fn validate_config_str(text: &str) -> Vec<Diagnostic> {
    parse_config(text).err().unwrap_or_default()
}

/// Parses and semantically checks a config, reporting every problem found.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, Vec<Diagnostic>> {
    let cfg: ExperimentConfig = match serde_json::from_str(text) {
        Ok(c) => c,
        Err(e) => {
            let index = serde_json::from_str::<serde_json::Value>(text).ok().map(|_| PathIndex::build(text));
            let message = e.to_string();
            // Strip serde's own " at line X column Y" suffix.
            let message = match message.rfind(" at line ") {
                Some(i) => message[..i].to_string(),
                None => message,
            };
            let path = index.as_ref().map(|ix| ix.at(e.line(), e.column())).unwrap_or_default();
            return Err(vec![Diagnostic {
                path,
                line: e.line(),
                column: e.column(),
                message,
            }]);
        }
    };
    let problems = semantic_problems(&cfg);
    if problems.is_empty() {
        return Ok(cfg);
    }
    let index = PathIndex::build(text);
    Err(problems
        .into_iter()
        .map(|(path, message)| {
            let path = index.refine(&path, &message);
            let (line, column) = index.locate(&path);
            Diagnostic {
                path,
                line,
                column,
                message,
            }
        })
        .collect())
}

fn semantic_problems(cfg: &ExperimentConfig) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = Vec::new();
    let mut err = |path: &str, msg: String| out.push((path.to_string(), msg));

    if cfg.deployments.is_empty() {
        err("deployments", "at least one deployment is required".into());
    }
    for (i, d) in cfg.deployments.iter().enumerate() {
        let base = format!("deployments[{i}]");
        if d.name.trim().is_empty() {
            err(&format!("{base}.name"), "name must not be empty".into());
        }
        if cfg.deployments[..i].iter().any(|o| o.name == d.name) {
            err(&format!("{base}.name"), format!("duplicate deployment name '{}'", d.name));
        }
        match &d.spec {
            DeploymentSpec::Ppp { tiers } => {
                if tiers.is_empty() {
                    err(&format!("{base}.spec.tiers"), "tiers must contain at least one tier".into());
                }
                for (j, t) in tiers.iter().enumerate() {
                    if let Err(e) = t.validate() {
                        err(&format!("{base}.spec.tiers[{j}]"), e.to_string());
                    }
                }
                if tiers.len() > 1 && cfg.sweep.variable == SweepVariable::Density {
                    err(&format!("{base}.spec"), "density sweeps need single-tier deployments".into());
                }
            }
            spec => {
                if let Err(e) = spec.validate() {
                    err(&format!("{base}.spec.density"), e.to_string());
                }
            }
        }
    }

    match cfg.scenario {
        Scenario::FigRateVsProbLowV if cfg.deployments.len() != 1 => {
            err("deployments", "fig_rate_vs_prob_low_v takes exactly one deployment".into())
        }
        Scenario::FigProbSingleVsMulti if cfg.deployments.len() < 2 => err(
            "deployments",
            "fig_prob_single_vs_multi compares two deployments (single-tier first)".into(),
        ),
        Scenario::Custom if cfg.metrics.is_empty() => err("metrics", "custom scenarios need at least one metric".into()),
        _ => {}
    }

    let grid = &cfg.sweep.grid;
    if grid.is_empty() {
        err("sweep.grid", "grid must not be empty".into());
    }
    for (i, x) in grid.iter().enumerate() {
        let ok = match cfg.sweep.variable {
            SweepVariable::Velocity => x.is_finite() && *x >= 0.0,
            SweepVariable::Density => x.is_finite() && *x > 0.0,
        };
        if !ok {
            err(&format!("sweep.grid[{i}]"), format!("grid value {x} is out of range for this sweep variable"));
        }
        if i > 0 && !(grid[i - 1] < *x) {
            err(&format!("sweep.grid[{i}]"), "grid must be strictly increasing".into());
        }
    }

    if cfg.sweep.variable == SweepVariable::Density {
        match cfg.velocity {
            None => err("sweep", "density sweeps need a top-level velocity".into()),
            Some(v) if !(v.is_finite() && v >= 0.0) => err("velocity", format!("velocity must be non-negative, got {v}")),
            _ => {}
        }
    }

    let tasks = cfg.tasks();
    let needs = |m: Metric| tasks.iter().any(|(_, t)| *t == m);
    if needs(Metric::Rate) {
        match &cfg.mobility {
            None => err("mobility", "rate metrics need a mobility model".into()),
            Some(m) => {
                if let Err(e) = m.validate() {
                    err("mobility", e.to_string());
                } else if cfg.sweep.variable == SweepVariable::Velocity {
                    if let Some(&x) = grid.iter().find(|x| **x > 0.0) {
                        if let Err(e) = m.with_speed(x) {
                            err("mobility", e.to_string());
                        }
                    }
                }
            }
        }
        if !(cfg.horizon > 0.0 && cfg.horizon.is_finite()) {
            err("horizon", format!("horizon must be positive, got {}", cfg.horizon));
        }
    }
    if let Some(p) = cfg.period {
        if !(p > 0.0 && p.is_finite()) {
            err("period", format!("period must be positive, got {p}"));
        }
    }
    if let Err(e) = cfg.plan.validate() {
        err("plan.n_replications", e.to_string());
    }
    if let Err(e) = cfg.quad.validate() {
        err("quad", e.to_string());
    }
    if let Some(g) = cfg.assert_gap {
        if !(g >= 0.0 && g.is_finite()) {
            err("assert_gap", format!("assert_gap must be non-negative, got {g}"));
        }
    }
    out
}
