//! Command-line front end.
//!
//! Each subcommand reads a JSON config (every field optional, unknown keys
//! rejected), applies `--set key.path=value` and the shared flags on top,
//! runs a sweep and writes one CSV table. The effective config is written
//! next to the CSV as `<stem>.config.json`.
//!
//! Exit codes: 0 success, 1 failed checks or I/O, 2 invalid config,
//! 3 infeasible parameters, 4 sweep finished with failed points. Failures
//! print one JSON object on stderr.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::analytics::{
    coverage_vs_obstruction, expected_roi_coverage, expected_void_redundancy, gamma_coverage_approx, DiscModelParams,
    RoiSpec,
};
use crate::error::{invalid, Error, Result};
use crate::freeway::{
    run_experiment, run_experiment_multi, ExperimentRecord, FreewayConfig, FreewayMetric, SweepPoint,
};
use crate::montecarlo::simulate_gamma_coverage;
use crate::pointprocess::Seed;
use crate::temporal::{run_temporal_experiment, DynamicConfig};
use crate::v2i::{grid_capacity, single_lane_capacity, v2v_throughput_proxy, LaneMode, LaneParams, SharingMode};
use crate::validation::{self, ValidateConfig};

/// Environment variable holding the default `--jobs`.
pub const JOBS_ENV: &str = "COLLABSENSE_JOBS";

#[derive(Debug, Parser)]
#[command(
    name = "collabsense",
    version,
    about = "Collaborative vehicular sensing: figure sweeps and oracle checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON config file for the subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Root seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Seeds (or Monte Carlo trials) per sweep point.
    #[arg(long, global = true)]
    pub trials: Option<u64>,

    /// Worker threads.
    #[arg(long, global = true, env = JOBS_ENV)]
    pub jobs: Option<usize>,

    /// Output CSV; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Raster cell size in meters.
    #[arg(long, global = true)]
    pub resolution: Option<f64>,

    /// Config override, `key.path=value` with a JSON or bare-string value.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Single-sensor coverage against density, closed form and freeway.
    CoverageArea,
    /// Void-location redundancy against density.
    Redundancy,
    /// γ-coverage against penetration.
    GammaCoverage,
    /// 1-coverage against obstruction density at fixed sensor density.
    ObstructionSweep,
    /// V2I capacity, single lane or lane-assisted grid.
    V2i,
    /// Grid chain when all three lanes need the data.
    V2iAllLanes,
    /// Object coverage with road-side units and opposite traffic.
    Temporal,
    /// Closed forms against simulation.
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CoverageArea => "coverage-area",
            Command::Redundancy => "redundancy",
            Command::GammaCoverage => "gamma-coverage",
            Command::ObstructionSweep => "obstruction-sweep",
            Command::V2i => "v2i",
            Command::V2iAllLanes => "v2i-all-lanes",
            Command::Temporal => "temporal",
            Command::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            kind: "invalid_config",
            message: message.into(),
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        CliError {
            code: 1,
            kind: "io",
            message: format!("{}: {e}", path.display()),
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::json!({ "error": self.kind, "code": self.code, "message": self.message }).to_string()
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Infeasible(_) => CliError {
                code: 3,
                kind: "infeasible",
                message: e.to_string(),
            },
            _ => CliError::config(e.to_string()),
        }
    }
}

/// Ordered result rows under a fixed header. Cells are preformatted.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl ResultTable {
    fn new(header: &[&'static str]) -> Self {
        ResultTable {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// True when an `error` column exists and some row fills it.
    pub fn has_failed_points(&self) -> bool {
        match self.header.iter().position(|h| *h == "error") {
            Some(i) => self.rows.iter().any(|r| !r[i].is_empty()),
            None => false,
        }
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        // writing into memory cannot fail
        w.write_record(&self.header).expect("csv header");
        for r in &self.rows {
            w.write_record(r).expect("csv row");
        }
        w.into_inner().expect("csv flush")
    }
}

/// Shortest round-trip decimal; empty for non-finite values.
fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        String::new()
    }
}

fn step_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| ((lo + k as f64 * step) * 1e6).round() / 1e6).collect()
}

fn check_unit_list(name: &str, xs: &[f64]) -> Result<()> {
    if xs.is_empty() || xs.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(invalid(format!("{name} must be a nonempty list in [0, 1]")));
    }
    Ok(())
}

fn check_positive_list(name: &str, xs: &[f64]) -> Result<()> {
    if xs.is_empty() || xs.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(invalid(format!("{name} must be a nonempty list of positive values")));
    }
    Ok(())
}

fn check_runs(trials: usize, resolution: f64) -> Result<()> {
    if trials == 0 {
        return Err(invalid("trials must be >= 1"));
    }
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(invalid(format!("resolution must be > 0, got {resolution}")));
    }
    Ok(())
}

fn strip_roi() -> RoiSpec {
    RoiSpec::DiscStrip {
        r_interest: 100.0,
        strip_half_width: 12.0,
    }
}

const MODEL_HEADER: [&str; 9] = [
    "source",
    "lambda",
    "p_s",
    "gamma",
    "metric",
    "mean",
    "std_error",
    "n_seeds",
    "error",
];

fn analytic_row(lambda: f64, p_s: f64, gamma: Option<u32>, metric: &str, value: Result<f64>) -> Vec<String> {
    let (mean, error) = match value {
        Ok(v) => (num(v), String::new()),
        Err(e) => (String::new(), e.to_string()),
    };
    vec![
        "analytic".into(),
        num(lambda),
        num(p_s),
        gamma.map(|g| g.to_string()).unwrap_or_default(),
        metric.into(),
        mean,
        "0".into(),
        "0".into(),
        error,
    ]
}

fn record_row(source: &str, gamma: Option<u32>, r: &ExperimentRecord) -> Vec<String> {
    vec![
        source.into(),
        num(r.lambda),
        num(r.p_s),
        gamma.map(|g| g.to_string()).unwrap_or_default(),
        r.metric.clone(),
        num(r.mean),
        num(r.std_error),
        r.n_seeds.to_string(),
        r.error.clone().unwrap_or_default(),
    ]
}

fn lambda_sweep(lambdas: &[f64]) -> Vec<SweepPoint> {
    lambdas
        .iter()
        .map(|&l| SweepPoint {
            lambda: Some(l),
            p_s: None,
        })
        .collect()
}

/// Single-sensor coverage against density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoverageAreaConfig {
    pub seed: u64,
    pub trials: usize,
    pub resolution: f64,
    pub r_obj: f64,
    pub r_sense: f64,
    pub roi: RoiSpec,
    pub analytic_lambdas: Vec<f64>,
    pub simulated_lambdas: Vec<f64>,
    pub freeway: FreewayConfig,
}

impl Default for CoverageAreaConfig {
    fn default() -> Self {
        let mut analytic = vec![0.001];
        analytic.extend(step_grid(0.0025, 0.03, 0.0025));
        let mut simulated = vec![0.001];
        simulated.extend(step_grid(0.0025, 0.0225, 0.0025));
        simulated.push(0.024);
        CoverageAreaConfig {
            seed: 1,
            trials: 20,
            resolution: 0.25,
            r_obj: 1.67,
            r_sense: 100.0,
            roi: strip_roi(),
            analytic_lambdas: analytic,
            simulated_lambdas: simulated,
            freeway: FreewayConfig {
                p_s: 1.0,
                ..FreewayConfig::default()
            },
        }
    }
}

impl CoverageAreaConfig {
    fn validate(&self) -> Result<()> {
        check_runs(self.trials, self.resolution)?;
        check_positive_list("analytic_lambdas", &self.analytic_lambdas)?;
        if self.simulated_lambdas.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(invalid("simulated_lambdas must be positive"));
        }
        DiscModelParams::new(0.01, 1.0, self.r_obj, self.r_sense)?;
        self.freeway.validate()
    }

    fn run(&self) -> Result<ResultTable> {
        let mut t = ResultTable::new(&MODEL_HEADER);
        for &l in &self.analytic_lambdas {
            let p = DiscModelParams::new(l, 1.0, self.r_obj, self.r_sense)?;
            t.push(analytic_row(
                l,
                1.0,
                None,
                "coverage_area_norm",
                expected_roi_coverage(&p, &self.roi),
            ));
        }
        if !self.simulated_lambdas.is_empty() {
            let recs = run_experiment(
                &self.freeway,
                &lambda_sweep(&self.simulated_lambdas),
                &FreewayMetric::CoverageAreaNorm,
                self.trials,
                Seed::new(self.seed, 0),
                self.resolution,
            )?;
            recs.iter().for_each(|r| t.push(record_row("freeway", None, r)));
        }
        Ok(t)
    }
}

/// Void-location redundancy against density, all vehicles collaborating.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RedundancyConfig {
    pub seed: u64,
    pub trials: usize,
    pub resolution: f64,
    pub samples: usize,
    pub r_obj: f64,
    pub r_sense: f64,
    pub analytic_lambdas: Vec<f64>,
    pub simulated_lambdas: Vec<f64>,
    pub freeway: FreewayConfig,
}

impl Default for RedundancyConfig {
    fn default() -> Self {
        let c = CoverageAreaConfig::default();
        RedundancyConfig {
            seed: 1,
            trials: 20,
            resolution: 0.25,
            samples: 200,
            r_obj: c.r_obj,
            r_sense: c.r_sense,
            analytic_lambdas: c.analytic_lambdas,
            simulated_lambdas: c.simulated_lambdas,
            freeway: c.freeway,
        }
    }
}

impl RedundancyConfig {
    fn validate(&self) -> Result<()> {
        check_runs(self.trials, self.resolution)?;
        check_positive_list("analytic_lambdas", &self.analytic_lambdas)?;
        if self.samples == 0 {
            return Err(invalid("samples must be >= 1"));
        }
        DiscModelParams::new(0.01, 1.0, self.r_obj, self.r_sense)?;
        self.freeway.validate()
    }

    fn run(&self) -> Result<ResultTable> {
        let mut t = ResultTable::new(&MODEL_HEADER);
        for &l in &self.analytic_lambdas {
            let p = DiscModelParams::new(l, 1.0, self.r_obj, self.r_sense)?;
            t.push(analytic_row(
                l,
                1.0,
                None,
                "void_redundancy",
                expected_void_redundancy(&p),
            ));
        }
        if !self.simulated_lambdas.is_empty() {
            let recs = run_experiment(
                &self.freeway,
                &lambda_sweep(&self.simulated_lambdas),
                &FreewayMetric::VoidRedundancy { samples: self.samples },
                self.trials,
                Seed::new(self.seed, 0),
                self.resolution,
            )?;
            recs.iter().for_each(|r| t.push(record_row("freeway", None, r)));
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaPreset {
    /// Approximation against simulation of the disc model, λ = 0.01.
    Fig7a,
    /// Freeway γ-coverage and RSU gain, λ = 0.01.
    Fig7b,
    /// Approximate 1-coverage over penetration and density.
    Fig8a,
    /// Freeway 1-coverage over penetration and density.
    Fig8b,
}

/// γ-coverage against penetration. Unset `lambdas` and `gammas` take the
/// preset's values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GammaCoverageConfig {
    pub preset: GammaPreset,
    pub seed: u64,
    pub trials: usize,
    pub resolution: f64,
    pub lambdas: Option<Vec<f64>>,
    pub p_s: Vec<f64>,
    pub gammas: Option<Vec<u32>>,
    /// RSU redundancy for the gain rows of `fig7b`.
    pub gamma_rsu: u32,
    pub r_obj: f64,
    pub r_sense: f64,
    pub roi: RoiSpec,
    pub freeway: FreewayConfig,
}

impl Default for GammaCoverageConfig {
    fn default() -> Self {
        GammaCoverageConfig {
            preset: GammaPreset::Fig7a,
            seed: 1,
            trials: 20,
            resolution: 0.25,
            lambdas: None,
            p_s: step_grid(0.1, 0.9, 0.1),
            gammas: None,
            gamma_rsu: 1,
            r_obj: 1.67,
            r_sense: 100.0,
            roi: strip_roi(),
            freeway: FreewayConfig::default(),
        }
    }
}

impl GammaCoverageConfig {
    /// Fills preset-dependent fields so the echoed config is complete.
    fn resolved(mut self) -> Self {
        let (l, g) = match self.preset {
            GammaPreset::Fig7a | GammaPreset::Fig7b => (vec![0.01], vec![1, 2, 3]),
            GammaPreset::Fig8a | GammaPreset::Fig8b => (vec![0.005, 0.01, 0.0175, 0.024], vec![1]),
        };
        self.lambdas.get_or_insert(l);
        self.gammas.get_or_insert(g);
        self
    }

    fn lambdas(&self) -> &[f64] {
        self.lambdas.as_deref().unwrap_or(&[])
    }

    fn gammas(&self) -> &[u32] {
        self.gammas.as_deref().unwrap_or(&[])
    }

    fn validate(&self) -> Result<()> {
        check_runs(self.trials, self.resolution)?;
        check_positive_list("lambdas", self.lambdas())?;
        check_unit_list("p_s", &self.p_s)?;
        if self.gammas().is_empty() || self.gammas().contains(&0) {
            return Err(invalid("gammas must be a nonempty list of values >= 1"));
        }
        DiscModelParams::new(0.01, 1.0, self.r_obj, self.r_sense)?;
        self.freeway.validate()
    }

    fn run(&self) -> Result<ResultTable> {
        let mut t = ResultTable::new(&MODEL_HEADER);
        let root = Seed::new(self.seed, 0);
        match self.preset {
            GammaPreset::Fig7a | GammaPreset::Fig8a => {
                for &l in self.lambdas() {
                    for &p in &self.p_s {
                        for &g in self.gammas() {
                            let v = DiscModelParams::new(l, p, self.r_obj, self.r_sense)
                                .and_then(|q| gamma_coverage_approx(&q, &self.roi, g))
                                .map(|a| a.normalized);
                            t.push(analytic_row(l, p, Some(g), "gamma_coverage_norm", v));
                        }
                    }
                }
                if self.preset == GammaPreset::Fig7a {
                    for (i, &l) in self.lambdas().iter().enumerate() {
                        let q = DiscModelParams::new(l, 1.0, self.r_obj, self.r_sense)?;
                        let pts = simulate_gamma_coverage(
                            &q,
                            &self.p_s,
                            self.gammas(),
                            &self.roi,
                            self.trials,
                            self.resolution,
                            root.child(i as u64),
                        )?;
                        for pt in pts {
                            t.push(vec![
                                "model_mc".into(),
                                num(l),
                                num(pt.p_s),
                                pt.gamma.to_string(),
                                "gamma_coverage_norm".into(),
                                num(pt.summary.mean),
                                num(pt.summary.std_error),
                                pt.summary.n.to_string(),
                                String::new(),
                            ]);
                        }
                    }
                }
            }
            GammaPreset::Fig7b | GammaPreset::Fig8b => {
                let sweep: Vec<SweepPoint> = self
                    .lambdas()
                    .iter()
                    .flat_map(|&l| {
                        self.p_s.iter().map(move |&p| SweepPoint {
                            lambda: Some(l),
                            p_s: Some(p),
                        })
                    })
                    .collect();
                let mut metrics: Vec<(u32, FreewayMetric)> = self
                    .gammas()
                    .iter()
                    .map(|&g| (g, FreewayMetric::GammaCoverageNorm { gamma: g }))
                    .collect();
                if self.preset == GammaPreset::Fig7b {
                    metrics.extend(self.gammas().iter().filter(|&&g| g > self.gamma_rsu).map(|&g| {
                        (
                            g,
                            FreewayMetric::RsuGain {
                                gamma: g,
                                gamma_rsu: self.gamma_rsu,
                            },
                        )
                    }));
                }
                let ms: Vec<FreewayMetric> = metrics.iter().map(|m| m.1).collect();
                let recs = run_experiment_multi(&self.freeway, &sweep, &ms, self.trials, root, self.resolution)?;
                for (r, (g, _)) in recs.iter().zip(metrics.iter().cycle()) {
                    t.push(record_row("freeway", Some(*g), r));
                }
            }
        }
        Ok(t)
    }
}

/// Approximate γ-coverage at a fixed sensor density while the total
/// density grows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObstructionSweepConfig {
    pub lambda_s: f64,
    pub lambda_total: Vec<f64>,
    pub gammas: Vec<u32>,
    pub r_obj: f64,
    pub r_sense: f64,
    pub roi: RoiSpec,
}

impl Default for ObstructionSweepConfig {
    fn default() -> Self {
        ObstructionSweepConfig {
            lambda_s: 0.002,
            lambda_total: step_grid(0.002, 0.03, 0.002),
            gammas: vec![1],
            r_obj: 1.67,
            r_sense: 100.0,
            roi: strip_roi(),
        }
    }
}

impl ObstructionSweepConfig {
    fn validate(&self) -> Result<()> {
        check_positive_list("lambda_total", &self.lambda_total)?;
        if !(self.lambda_s.is_finite() && self.lambda_s > 0.0) {
            return Err(invalid("lambda_s must be > 0"));
        }
        if self.gammas.is_empty() || self.gammas.contains(&0) {
            return Err(invalid("gammas must be a nonempty list of values >= 1"));
        }
        DiscModelParams::new(0.01, 1.0, self.r_obj, self.r_sense).map(|_| ())
    }

    fn run(&self) -> Result<ResultTable> {
        let mut t = ResultTable::new(&[
            "lambda_s",
            "lambda_total",
            "obstruction_density",
            "gamma",
            "coverage_norm",
        ]);
        for &g in &self.gammas {
            let pts = coverage_vs_obstruction(
                self.lambda_s,
                &self.lambda_total,
                self.r_obj,
                self.r_sense,
                &self.roi,
                g,
            )?;
            for (&lt, (obs, v)) in self.lambda_total.iter().zip(pts) {
                t.push(vec![num(self.lambda_s), num(lt), num(obs), g.to_string(), num(v)]);
            }
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum V2iMode {
    Single,
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct V2iConfig {
    pub mode: V2iMode,
    pub eta: u32,
    pub p_s: Vec<f64>,
    pub seed: u64,
    /// Trials behind the V2V message-count column.
    pub trials: u64,
}

impl Default for V2iConfig {
    fn default() -> Self {
        V2iConfig {
            mode: V2iMode::Single,
            eta: 5,
            p_s: step_grid(0.05, 0.95, 0.05),
            seed: 1,
            trials: 100_000,
        }
    }
}

impl V2iConfig {
    fn validate(&self) -> Result<()> {
        check_unit_list("p_s", &self.p_s)?;
        if self.eta < 1 || self.trials < 1 {
            return Err(invalid("eta and trials must be >= 1"));
        }
        Ok(())
    }

    fn run(&self) -> Result<ResultTable> {
        let rows = self
            .p_s
            .par_iter()
            .map(|&p| {
                let lp = LaneParams::with_eta(self.eta, p)?;
                // common random numbers across penetrations
                let seed = Seed::new(self.seed, 0);
                let (ul, bc, uni, lane) = match self.mode {
                    V2iMode::Single => {
                        let r = single_lane_capacity(&lp)?;
                        (
                            r.c_ul_norm,
                            r.c_dl_broadcast_norm,
                            r.c_dl_unicast_norm,
                            LaneMode::SingleLane,
                        )
                    }
                    V2iMode::Grid => {
                        let r = grid_capacity(self.eta, p, SharingMode::SameLane)?;
                        (
                            r.c_ul_norm,
                            r.c_dl_broadcast_norm,
                            r.c_dl_unicast_norm,
                            LaneMode::GridSameLane,
                        )
                    }
                };
                let v2v = v2v_throughput_proxy(&lp, lane, self.trials, seed)?;
                Ok(vec![num(p), num(ul), num(bc), num(uni), num(v2v)])
            })
            .collect::<Result<Vec<_>>>()?;
        let mut t = ResultTable::new(&["p_s", "c_ul_norm", "c_dl_bcast_norm", "c_dl_uni_norm", "c_v2v_norm"]);
        rows.into_iter().for_each(|r| t.push(r));
        Ok(t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct V2iAllLanesConfig {
    pub eta: u32,
    pub p_s: Vec<f64>,
}

impl Default for V2iAllLanesConfig {
    fn default() -> Self {
        V2iAllLanesConfig {
            eta: 5,
            p_s: step_grid(0.0, 1.0, 0.05),
        }
    }
}

impl V2iAllLanesConfig {
    fn validate(&self) -> Result<()> {
        check_unit_list("p_s", &self.p_s)?;
        if self.eta < 1 {
            return Err(invalid("eta must be >= 1"));
        }
        Ok(())
    }

    fn run(&self) -> Result<ResultTable> {
        let mut t = ResultTable::new(&["p_s", "p_v2i", "c_ul_norm", "c_dl_bcast_norm", "c_dl_uni_norm"]);
        for &p in &self.p_s {
            let r = grid_capacity(self.eta, p, SharingMode::AllLanes)?;
            t.push(vec![
                num(p),
                num(r.p_v2i),
                num(r.c_ul_norm),
                num(r.c_dl_broadcast_norm),
                num(r.c_dl_unicast_norm),
            ]);
        }
        Ok(t)
    }
}

/// Object coverage for every scheme over penetration and tracking window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TemporalConfig {
    pub seed: u64,
    pub trials: usize,
    pub gamma: usize,
    pub p_s: Vec<f64>,
    pub taus: Vec<f64>,
    pub scenario: DynamicConfig,
}

impl Default for TemporalConfig {
    fn default() -> Self {
        TemporalConfig {
            seed: 1,
            trials: 10,
            gamma: 1,
            p_s: step_grid(0.1, 0.9, 0.1),
            taus: vec![0.0, 0.5, 1.0, 2.0],
            scenario: DynamicConfig::default(),
        }
    }
}

impl TemporalConfig {
    fn validate(&self) -> Result<()> {
        check_unit_list("p_s", &self.p_s)?;
        if self.trials == 0 || self.gamma == 0 {
            return Err(invalid("trials and gamma must be >= 1"));
        }
        if self.taus.is_empty() || self.taus.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(invalid("taus must be a nonempty list of values >= 0"));
        }
        if let Some(t) = self.taus.iter().find(|&&t| t > self.scenario.duration) {
            return Err(invalid(format!(
                "tau {t} exceeds the run duration {}",
                self.scenario.duration
            )));
        }
        self.scenario.validate()
    }

    fn run(&self) -> Result<ResultTable> {
        let recs = run_temporal_experiment(
            &self.scenario,
            &self.p_s,
            &self.taus,
            self.gamma,
            self.trials,
            Seed::new(self.seed, 0),
        )?;
        let mut t = ResultTable::new(&["p_s", "scheme", "tau", "direction", "mean", "std_error", "n_seeds"]);
        for r in recs {
            let dir = serde_json::to_value(r.direction)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default();
            t.push(vec![
                num(r.p_s),
                r.scheme.name().into(),
                num(r.tau),
                dir,
                num(r.mean),
                num(r.std_error),
                r.n_seeds.to_string(),
            ]);
        }
        Ok(t)
    }
}

fn run_validate(cfg: &ValidateConfig) -> Result<ResultTable> {
    let mut t = ResultTable::new(&["criterion", "check", "value", "target", "tolerance", "passed"]);
    for c in validation::run(cfg)? {
        t.push(vec![
            c.criterion.to_string(),
            c.name,
            num(c.value),
            num(c.target),
            num(c.tolerance),
            c.passed.to_string(),
        ]);
    }
    Ok(t)
}

/// Result of one subcommand.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: ResultTable,
    /// Config after defaults and overrides.
    pub effective: Value,
}

impl Outcome {
    /// Exit code for a completed run.
    pub fn exit_code(&self, command: Command) -> i32 {
        if self.table.has_failed_points() {
            return 4;
        }
        if command == Command::Validate {
            let i = self.table.header.iter().position(|h| *h == "passed").unwrap_or(0);
            if self.table.rows.iter().any(|r| r[i] != "true") {
                return 1;
            }
        }
        0
    }
}

/// Sets `path` (dot separated) in `root`, creating objects on the way.
pub fn set_path(root: &mut Value, path: &str, value: Value) -> std::result::Result<(), CliError> {
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::config(format!("bad override key {path:?}")));
    }
    let mut cur = root;
    for k in &keys[..keys.len() - 1] {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| CliError::config(format!("override {path:?} goes through a non-object")))?;
        cur = obj.entry(k.to_string()).or_insert_with(|| Value::Object(Map::new()));
        if cur.is_null() {
            *cur = Value::Object(Map::new());
        }
    }
    let obj = cur
        .as_object_mut()
        .ok_or_else(|| CliError::config(format!("override {path:?} goes through a non-object")))?;
    obj.insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

fn parse_override(raw: &str) -> std::result::Result<(String, Value), CliError> {
    let (k, v) = raw
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("override {raw:?} is not key=value")))?;
    let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
    Ok((k.trim().to_string(), value))
}

/// Raw config value: file contents (or `{}`), then flags, then `--set`.
pub fn raw_config(cli: &Cli) -> std::result::Result<Value, CliError> {
    let mut v = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?
        }
        None => Value::Object(Map::new()),
    };
    if !v.is_object() {
        return Err(CliError::config("config must be a JSON object"));
    }
    if let Some(s) = cli.seed {
        set_path(&mut v, "seed", s.into())?;
    }
    if let Some(n) = cli.trials {
        set_path(&mut v, "trials", n.into())?;
    }
    if let Some(r) = cli.resolution {
        set_path(&mut v, "resolution", r.into())?;
    }
    for raw in &cli.overrides {
        let (k, val) = parse_override(raw)?;
        set_path(&mut v, &k, val)?;
    }
    Ok(v)
}

fn typed<T: DeserializeOwned + Serialize>(command: Command, raw: Value) -> std::result::Result<(T, Value), CliError> {
    let cfg: T = serde_json::from_value(raw).map_err(|e| CliError::config(format!("{}: {e}", command.name())))?;
    let effective = serde_json::to_value(&cfg).map_err(|e| CliError::config(e.to_string()))?;
    Ok((cfg, effective))
}

/// Parses, validates and runs `command` on an already built config value.
pub fn execute(command: Command, raw: Value) -> std::result::Result<Outcome, CliError> {
    macro_rules! go {
        ($t:ty, $prep:expr, $run:expr) => {{
            let (cfg, _) = typed::<$t>(command, raw)?;
            let cfg: $t = $prep(cfg);
            let effective = serde_json::to_value(&cfg).map_err(|e| CliError::config(e.to_string()))?;
            cfg.validate()?;
            let table = $run(&cfg)?;
            Ok(Outcome { table, effective })
        }};
    }
    fn same<T>(c: T) -> T {
        c
    }
    match command {
        Command::CoverageArea => go!(CoverageAreaConfig, same, CoverageAreaConfig::run),
        Command::Redundancy => go!(RedundancyConfig, same, RedundancyConfig::run),
        Command::GammaCoverage => go!(
            GammaCoverageConfig,
            GammaCoverageConfig::resolved,
            GammaCoverageConfig::run
        ),
        Command::ObstructionSweep => go!(ObstructionSweepConfig, same, ObstructionSweepConfig::run),
        Command::V2i => go!(V2iConfig, same, V2iConfig::run),
        Command::V2iAllLanes => go!(V2iAllLanesConfig, same, V2iAllLanesConfig::run),
        Command::Temporal => go!(TemporalConfig, same, TemporalConfig::run),
        Command::Validate => go!(ValidateConfig, same, run_validate),
    }
}

/// Sidecar path for the effective config: `out.csv` -> `out.config.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("config.json")
}

fn write_outputs(cli: &Cli, out: &Outcome) -> std::result::Result<(), CliError> {
    let csv = out.table.to_csv();
    match &cli.out {
        Some(path) => {
            std::fs::write(path, &csv).map_err(|e| CliError::io(path, e))?;
            let side = sidecar_path(path);
            let doc = serde_json::json!({ "command": cli.command.name(), "config": out.effective });
            let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::config(e.to_string()))?;
            text.push('\n');
            std::fs::write(&side, text).map_err(|e| CliError::io(&side, e))?;
        }
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(&csv)
                .and_then(|_| so.flush())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
        }
    }
    Ok(())
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let result = (|| {
        let raw = raw_config(cli)?;
        let jobs = cli.jobs.unwrap_or(0);
        if cli.jobs == Some(0) {
            return Err(CliError::config("--jobs must be >= 1"));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::config(e.to_string()))?;
        let out = pool.install(|| execute(cli.command, raw))?;
        write_outputs(cli, &out)?;
        Ok(out.exit_code(cli.command))
    })();
    match result {
        Ok(0) => 0,
        Ok(code) => {
            let e = CliError {
                code,
                kind: if code == 4 { "partial_sweep" } else { "checks_failed" },
                message: if code == 4 {
                    "some sweep points failed; see the error column".into()
                } else {
                    "some checks failed; see the passed column".into()
                },
            };
            eprintln!("{}", e.to_json_line());
            code
        }
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            e.code
        }
    }
}

/// Entry point for the binary: parses `std::env::args` and runs.
pub fn main_entry() -> i32 {
    match Cli::try_parse() {
        Ok(cli) => run(&cli),
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            eprintln!("{}", CliError::config(e.to_string().trim_end()).to_json_line());
            2
        }
    }
}
