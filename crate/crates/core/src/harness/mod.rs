//! Experiment configs and the runner behind the `handoff` CLI: sweeps a
//! velocity or density grid and puts analytical values next to Monte Carlo
//! estimates.

mod locate;
mod validate;

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use tracing::info;

use crate::analysis::{
    handoff_prob, handoff_rate, hex_lattice_length_intensity, multi_tier_handoff_prob, ppp_length_intensity,
    sojourn_time, square_lattice_length_intensity, AnalysisError, QuadratureSpec,
};
use crate::geometry::{estimate_length_intensity, mean_cell_radius, AssociationPolicy, LatticeKind, Tier};
use crate::rng::rng_from_seed;
use crate::mobility::{MobilityError, ModelConfig};
use crate::simulation::{
    estimate_handoff_prob, estimate_handoff_rate, estimate_sojourn, DeploymentSpec, Estimate, ReplicationPlan,
    SimulationError,
};

pub use validate::{parse_config, validate_config, validate_config_str, Diagnostic};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("config has {} problem(s); first: {}", .0.len(), .0.first().map(|d| d.to_string()).unwrap_or_default())]
    Invalid(Vec<Diagnostic>),
    #[error("{0}")]
    Unavailable(String),
    #[error(transparent)]
    Simulation(#[from] SimulationError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Mobility(#[from] MobilityError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Scenario {
    /// Handoff rate against velocity for every listed deployment.
    FigRateComparison,
    /// Rate and one-period probability side by side at low speed.
    FigRateVsProbLowV,
    /// Handoff probability of each listed deployment (single vs multi-tier).
    FigProbSingleVsMulti,
    /// Any combination of `metrics` × `deployments`.
    Custom,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::FigRateComparison => "fig_rate_comparison",
            Scenario::FigRateVsProbLowV => "fig_rate_vs_prob_low_v",
            Scenario::FigProbSingleVsMulti => "fig_prob_single_vs_multi",
            Scenario::Custom => "custom",
        }
    }

    /// Bundled config reproducing this scenario, if any.
    pub fn bundled_config(self) -> Option<&'static str> {
        match self {
            Scenario::FigRateComparison => Some(include_str!("../../configs/fig_rate_comparison.json")),
            Scenario::FigRateVsProbLowV => Some(include_str!("../../configs/fig_rate_vs_prob_low_v.json")),
            Scenario::FigProbSingleVsMulti => Some(include_str!("../../configs/fig_prob_single_vs_multi.json")),
            Scenario::Custom => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Handoffs per second.
    Rate,
    /// Serving-BS change over one unit-time movement.
    Probability,
    /// Mean time in the initial cell, censored at `period`.
    Sojourn,
}

impl Metric {
    fn as_str(self) -> &'static str {
        match self {
            Metric::Rate => "rate",
            Metric::Probability => "probability",
            Metric::Sojourn => "sojourn",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// User speed in m/s.
    Velocity,
    /// BS density in 1/m² (single-tier deployments only).
    Density,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedDeployment {
    pub name: String,
    pub spec: DeploymentSpec,
}

fn default_horizon() -> f64 {
    500.0
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    /// Output file stem; defaults to the scenario name.
    #[serde(default)]
    pub name: Option<String>,
    pub deployments: Vec<NamedDeployment>,
    /// Mobility model for rate metrics; its speed is replaced by the sweep value.
    #[serde(default)]
    pub mobility: Option<ModelConfig>,
    #[serde(default)]
    pub policy: AssociationPolicy,
    pub sweep: Sweep,
    /// Speed used when sweeping density.
    #[serde(default)]
    pub velocity: Option<f64>,
    /// Only read by the custom scenario.
    #[serde(default)]
    pub metrics: Vec<Metric>,
    /// Censoring period for sojourn metrics, seconds.
    #[serde(default)]
    pub period: Option<f64>,
    pub plan: ReplicationPlan,
    /// Trajectory seconds per replication for rate metrics.
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default)]
    pub quad: QuadratureSpec,
    /// Run the Monte Carlo side as well as the analysis.
    #[serde(default = "yes")]
    pub simulate: bool,
    /// Fail (exit 3) when any relative analytical/simulated gap exceeds this.
    #[serde(default)]
    pub assert_gap: Option<f64>,
    /// Default output directory.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        parse_config(text).map_err(HarnessError::Invalid)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn file_stem(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.scenario.as_str().to_string())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let canon = serde_json::to_string(self).unwrap_or_default();
        let mut s = String::with_capacity(64);
        for b in Sha256::digest(canon.as_bytes()) {
            let _ = write!(s, "{b:02x}");
        }
        s
    }

    /// `(series deployment index, metric)` pairs in output order.
    pub fn tasks(&self) -> Vec<(usize, Metric)> {
        match self.scenario {
            Scenario::FigRateComparison => (0..self.deployments.len()).map(|i| (i, Metric::Rate)).collect(),
            Scenario::FigRateVsProbLowV => vec![(0, Metric::Rate), (0, Metric::Probability)],
            Scenario::FigProbSingleVsMulti => (0..self.deployments.len()).map(|i| (i, Metric::Probability)).collect(),
            Scenario::Custom => (0..self.deployments.len())
                .flat_map(|i| self.metrics.iter().map(move |m| (i, *m)))
                .collect(),
        }
    }
}

/// One grid point of one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub series: String,
    pub deployment: String,
    pub metric: Metric,
    pub x: f64,
    pub analytical: Option<f64>,
    pub simulated: Option<Estimate>,
    /// `|sim − analytical| / |analytical|`, when both exist.
    pub rel_gap: Option<f64>,
}

/// Scenario-level property check reported next to the rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub scenario: Scenario,
    pub config_digest: String,
    pub base_seed: u64,
    pub rows: Vec<ResultRow>,
    pub checks: Vec<Check>,
    /// Series without a closed form or quadrature.
    pub notes: Vec<String>,
    pub max_rel_gap: Option<f64>,
    pub assert_gap: Option<f64>,
    /// False when some gap exceeds `assert_gap`.
    pub within_gap: bool,
}

impl ExperimentSummary {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), HarnessError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "series",
            "deployment",
            "metric",
            "x",
            "analytical",
            "sim_mean",
            "sim_se",
            "sim_ci_low",
            "sim_ci_high",
            "sim_n",
            "rel_gap",
        ])?;
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.rows {
            let s = r.simulated.as_ref();
            out.write_record([
                r.series.clone(),
                r.deployment.clone(),
                r.metric.as_str().to_string(),
                r.x.to_string(),
                opt(r.analytical),
                opt(s.map(|e| e.mean)),
                opt(s.map(|e| e.std_error)),
                opt(s.map(|e| e.ci95_low)),
                opt(s.map(|e| e.ci95_high)),
                s.map(|e| e.n.to_string()).unwrap_or_default(),
                opt(r.rel_gap),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn write_files(&self, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf), HarnessError> {
        std::fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{stem}.csv"));
        let json_path = dir.join(format!("{stem}.json"));
        self.write_csv(std::fs::File::create(&csv_path)?)?;
        std::fs::write(&json_path, serde_json::to_string_pretty(self)?)?;
        Ok((csv_path, json_path))
    }
}

fn substitute_density(spec: &DeploymentSpec, lambda: f64) -> Result<DeploymentSpec, HarnessError> {
    Ok(match spec {
        DeploymentSpec::Ppp { tiers } if tiers.len() == 1 => DeploymentSpec::Ppp {
            tiers: vec![Tier { density: lambda, ..tiers[0] }],
        },
        DeploymentSpec::Ppp { .. } => {
            return Err(HarnessError::Unavailable("density sweeps need single-tier deployments".into()))
        }
        DeploymentSpec::SquareLattice { .. } => DeploymentSpec::SquareLattice { density: lambda },
        DeploymentSpec::HexLattice { .. } => DeploymentSpec::HexLattice { density: lambda },
    })
}

/// Sample points and window size (in mean cell radii of the sparsest tier)
/// for the Δd boundary estimate used when `μ₁` has no closed form.
const MU1_SAMPLES: usize = 200_000;
const MU1_WINDOW_RADII: f64 = 30.0;

/// `μ₁` of a multi-tier deployment from the Δd-neighbourhood estimator on one
/// large realization, with `Δd` a hundredth of the mean cell radius.
fn estimated_length_intensity(
    spec: &DeploymentSpec,
    policy: AssociationPolicy,
    seed: u64,
) -> Result<crate::geometry::BoundaryIntensityEstimate, HarnessError> {
    let tiers = spec.tiers();
    let sparsest = tiers.iter().map(|t| t.density).fold(f64::INFINITY, f64::min);
    let half = MU1_WINDOW_RADII * mean_cell_radius(sparsest);
    let mut rng = rng_from_seed(seed);
    let dep = spec.realize([half, half], spec.default_guard(), &mut rng)?;
    let delta_d = mean_cell_radius(spec.total_density()) / 100.0;
    Ok(estimate_length_intensity(&dep, policy, delta_d, MU1_SAMPLES, seed)
        .map_err(crate::simulation::SimulationError::from)?)
}

/// Boundary length intensity, when known in closed form.
fn length_intensity(spec: &DeploymentSpec) -> Option<f64> {
    match spec {
        DeploymentSpec::SquareLattice { density } => {
            Some(square_lattice_length_intensity(LatticeKind::Square.spacing_for_density(*density)))
        }
        DeploymentSpec::HexLattice { density } => {
            Some(hex_lattice_length_intensity(LatticeKind::Hex.spacing_for_density(*density)))
        }
        DeploymentSpec::Ppp { tiers } if tiers.len() == 1 => Some(ppp_length_intensity(tiers[0].density)),
        DeploymentSpec::Ppp { .. } => None,
    }
}

struct Point {
    spec: DeploymentSpec,
    v: f64,
}

fn analytical(cfg: &ExperimentConfig, metric: Metric, p: &Point, mu1: Option<f64>) -> Result<Option<f64>, HarnessError> {
    let single_ppp = match &p.spec {
        DeploymentSpec::Ppp { tiers } if tiers.len() == 1 => Some(tiers[0].density),
        _ => None,
    };
    match metric {
        Metric::Rate => {
            let model = cfg
                .mobility
                .as_ref()
                .ok_or_else(|| HarnessError::Unavailable("rate metrics need a mobility model".into()))?
                .with_speed(p.v)?;
            match (length_intensity(&p.spec).or(mu1), model.moments()) {
                (Some(mu1), Some(m)) => Ok(Some(handoff_rate(mu1, m)?)),
                _ => Ok(None),
            }
        }
        Metric::Probability => match &p.spec {
            DeploymentSpec::Ppp { tiers } if tiers.len() == 1 => Ok(Some(handoff_prob(p.v, tiers[0].density, &cfg.quad)?.value)),
            DeploymentSpec::Ppp { tiers } => Ok(Some(multi_tier_handoff_prob(p.v, tiers, &cfg.quad)?.total)),
            _ => Ok(None),
        },
        Metric::Sojourn => {
            let period = cfg.period.unwrap_or(1.0);
            match (&p.spec, single_ppp) {
                (_, Some(lambda)) => Ok(Some(sojourn_time(p.v, period, lambda, &cfg.quad)?.value)),
                (DeploymentSpec::Ppp { .. }, None) => Err(HarnessError::Unavailable(
                    "sojourn time has no formula for multi-tier deployments (cells need not be convex)".into(),
                )),
                _ => Ok(None),
            }
        }
    }
}

fn simulated(cfg: &ExperimentConfig, metric: Metric, p: &Point) -> Result<Estimate, HarnessError> {
    Ok(match metric {
        Metric::Rate => {
            let model = cfg
                .mobility
                .as_ref()
                .ok_or_else(|| HarnessError::Unavailable("rate metrics need a mobility model".into()))?
                .with_speed(p.v)?;
            estimate_handoff_rate(&model, &p.spec, cfg.policy, &cfg.plan, cfg.horizon)?
        }
        Metric::Probability => estimate_handoff_prob(p.v, &p.spec, cfg.policy, &cfg.plan)?,
        Metric::Sojourn => estimate_sojourn(p.v, cfg.period.unwrap_or(1.0), &p.spec, cfg.policy, &cfg.plan)?,
    })
}

/// Runs every series over the grid. Rows come out grouped by series, then
/// in grid order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary, HarnessError> {
    let text = serde_json::to_string(cfg)?;
    parse_config(&text).map_err(HarnessError::Invalid)?;
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for (di, metric) in cfg.tasks() {
        let dep = &cfg.deployments[di];
        let series = format!("{}:{}", dep.name, metric.as_str());
        let mut missing = false;
        let mu1 = match (metric, length_intensity(&dep.spec)) {
            (Metric::Rate, None) if cfg.sweep.variable == SweepVariable::Velocity => {
                let est = estimated_length_intensity(&dep.spec, cfg.policy, cfg.plan.base_seed)?;
                notes.push(format!(
                    "{series}: no closed-form boundary length intensity; using the Δd estimate μ₁ = {:.6} ± {:.6} /m (Δd = {:.3} m)",
                    est.mu1_hat, est.ci95_halfwidth, est.delta_d
                ));
                Some(est.mu1_hat)
            }
            _ => None,
        };
        for &x in &cfg.sweep.grid {
            let p = match cfg.sweep.variable {
                SweepVariable::Velocity => Point {
                    spec: dep.spec.clone(),
                    v: x,
                },
                SweepVariable::Density => Point {
                    spec: substitute_density(&dep.spec, x)?,
                    v: cfg.velocity.unwrap_or(0.0),
                },
            };
            let analytical = analytical(cfg, metric, &p, mu1)?;
            missing |= analytical.is_none();
            let simulated = if cfg.simulate { Some(simulated(cfg, metric, &p)?) } else { None };
            let rel_gap = match (analytical, simulated) {
                (Some(a), Some(s)) if a != 0.0 => Some((s.mean - a).abs() / a.abs()),
                (Some(_), Some(s)) => Some(s.mean.abs()),
                _ => None,
            };
            info!(series = %series, x, ?analytical, sim = ?simulated.map(|s| s.mean), "grid point");
            rows.push(ResultRow {
                series: series.clone(),
                deployment: dep.name.clone(),
                metric,
                x,
                analytical,
                simulated,
                rel_gap,
            });
        }
        if missing {
            notes.push(format!("{series}: no analytical formula for this deployment; simulation only"));
        }
    }
    let max_rel_gap = rows.iter().filter_map(|r| r.rel_gap).fold(None, |m: Option<f64>, g| Some(m.map_or(g, |m| m.max(g))));
    let within_gap = match (cfg.assert_gap, max_rel_gap) {
        (Some(t), Some(g)) => g <= t,
        _ => true,
    };
    Ok(ExperimentSummary {
        scenario: cfg.scenario,
        config_digest: cfg.digest(),
        base_seed: cfg.plan.base_seed,
        checks: scenario_checks(cfg, &rows),
        rows,
        notes,
        max_rel_gap,
        assert_gap: cfg.assert_gap,
        within_gap,
    })
}

fn series_values<'a>(rows: &'a [ResultRow], series: &str) -> impl Iterator<Item = &'a ResultRow> + 'a {
    let s = series.to_string();
    rows.iter().filter(move |r| r.series == s)
}

fn scenario_checks(cfg: &ExperimentConfig, rows: &[ResultRow]) -> Vec<Check> {
    let mut checks = Vec::new();
    let value = |r: &ResultRow| r.analytical.or(r.simulated.map(|s| s.mean));
    match cfg.scenario {
        Scenario::FigRateVsProbLowV => {
            let name = &cfg.deployments[0].name;
            let rate: Vec<_> = series_values(rows, &format!("{name}:rate")).collect();
            let prob: Vec<_> = series_values(rows, &format!("{name}:probability")).collect();
            for (r, p) in rate.iter().zip(&prob) {
                if let (Some(h), Some(ph)) = (r.analytical, p.analytical) {
                    let rel = (ph - h).abs() / h;
                    checks.push(Check {
                        name: format!("rate ≈ probability at x = {}", r.x),
                        passed: rel <= 0.05,
                        detail: format!("H·1s = {h:.6}, P(H) = {ph:.6}, relative difference {rel:.4}"),
                    });
                }
            }
        }
        Scenario::FigProbSingleVsMulti if cfg.deployments.len() >= 2 => {
            let a = &cfg.deployments[0].name;
            let b = &cfg.deployments[1].name;
            let single: Vec<_> = series_values(rows, &format!("{a}:probability")).collect();
            let multi: Vec<_> = series_values(rows, &format!("{b}:probability")).collect();
            let ok = single
                .iter()
                .zip(&multi)
                .all(|(s, m)| value(m).unwrap_or(f64::NAN) >= value(s).unwrap_or(f64::NAN));
            checks.push(Check {
                name: format!("{b} probability ≥ {a} probability at every grid point"),
                passed: ok,
                detail: String::new(),
            });
        }
        Scenario::FigRateComparison => {
            let rate_of = |kind: fn(&DeploymentSpec) -> bool| {
                cfg.deployments
                    .iter()
                    .find(|d| kind(&d.spec))
                    .map(|d| series_values(rows, &format!("{}:rate", d.name)).filter_map(|r| r.analytical).collect::<Vec<_>>())
            };
            let square = rate_of(|s| matches!(s, DeploymentSpec::SquareLattice { .. }));
            let hex = rate_of(|s| matches!(s, DeploymentSpec::HexLattice { .. }));
            let ppp = rate_of(|s| matches!(s, DeploymentSpec::Ppp { tiers } if tiers.len() == 1));
            if let (Some(sq), Some(pp)) = (&square, &ppp) {
                checks.push(Check {
                    name: "square lattice and single-tier PPP rates coincide".into(),
                    passed: sq.iter().zip(pp).all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs()),
                    detail: String::new(),
                });
            }
            if let (Some(sq), Some(hx)) = (&square, &hex) {
                let expect = 3f64.powf(0.25) / 2f64.sqrt();
                let worst = sq.iter().zip(hx).map(|(a, b)| (b / a - expect).abs()).fold(0.0, f64::max);
                checks.push(Check {
                    name: "hex / square rate ratio is 3^(1/4)/sqrt(2)".into(),
                    passed: worst <= 1e-12,
                    detail: format!("worst deviation {worst:e}"),
                });
            }
        }
        _ => {}
    }
    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bundled(s: Scenario) -> ExperimentConfig {
        ExperimentConfig::from_json(s.bundled_config().unwrap()).unwrap()
    }

    #[test]
    fn bundled_configs_parse() {
        for s in [Scenario::FigRateComparison, Scenario::FigRateVsProbLowV, Scenario::FigProbSingleVsMulti] {
            let cfg = bundled(s);
            assert_eq!(cfg.scenario, s);
            assert!(validate_config_str(s.bundled_config().unwrap()).is_empty());
        }
    }

    #[test]
    fn analytical_rate_comparison() {
        let mut cfg = bundled(Scenario::FigRateComparison);
        cfg.simulate = false;
        let out = run_experiment(&cfg).unwrap();
        assert!(out.checks.iter().all(|c| c.passed), "{:?}", out.checks);
        assert!(out.notes.iter().any(|n| n.contains("two_tier")));
        let mut buf = Vec::new();
        out.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("series,deployment,metric,x,analytical,sim_mean"));
    }

    #[test]
    fn digest_is_stable_and_sensitive() {
        let a = bundled(Scenario::FigRateVsProbLowV);
        let mut b = a.clone();
        assert_eq!(a.digest(), b.digest());
        b.plan.base_seed += 1;
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 64);
    }

    #[test]
    fn multi_tier_sojourn_is_reported() {
        let mut cfg = bundled(Scenario::FigProbSingleVsMulti);
        cfg.scenario = Scenario::Custom;
        cfg.metrics = vec![Metric::Sojourn];
        cfg.period = Some(5.0);
        cfg.simulate = false;
        assert!(matches!(run_experiment(&cfg), Err(HarnessError::Unavailable(_))));
    }
}
