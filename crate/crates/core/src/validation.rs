//! Oracle-agreement checks: closed forms against independent Monte Carlo.
//!
//! Each check returns one [`Check`] row per compared quantity. Nothing here
//! panics on a failed comparison; callers decide what to do with `passed`.

use serde::{Deserialize, Serialize};

use crate::analytics::{
    expected_coverage_area, expected_void_redundancy, gamma_coverage_approx, DiscModelParams, RoiSpec,
};
use crate::error::{invalid, Result};
use crate::montecarlo::{simulate_coverage_area_two_level, simulate_gamma_coverage, simulate_void_redundancy};
use crate::pointprocess::Seed;
use crate::v2i::{
    build_transition_matrix, grid_capacity, monte_carlo_lane, single_lane_capacity, LaneMode, LaneParams, SharingMode,
};

/// One compared quantity. `passed` is `|value - target| <= tolerance` unless
/// the check name says otherwise (`>` / `<` bounds put the bound in
/// `target` and leave `tolerance` at 0).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub criterion: u8,
    pub name: String,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn within(criterion: u8, name: String, value: f64, target: f64, tolerance: f64) -> Check {
        Check {
            criterion,
            name,
            value,
            target,
            tolerance,
            passed: (value - target).abs() <= tolerance,
        }
    }

    fn above(criterion: u8, name: String, value: f64, bound: f64) -> Check {
        Check {
            criterion,
            name,
            value,
            target: bound,
            tolerance: 0.0,
            passed: value > bound,
        }
    }

    fn below(criterion: u8, name: String, value: f64, bound: f64) -> Check {
        Check {
            criterion,
            name,
            value,
            target: bound,
            tolerance: 0.0,
            passed: value < bound,
        }
    }
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| ((lo + k as f64 * step) * 1e6).round() / 1e6).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoverageCheck {
    pub lambdas: Vec<f64>,
    /// Coarse-level sensors per seed, one entry per density.
    pub sensors_per_seed: Vec<usize>,
    pub paired_per_seed: usize,
    pub seeds: usize,
    pub resolution: f64,
    pub coarse_resolution: f64,
    pub r_obj: f64,
    pub r_sense: f64,
    pub rel_tolerance: f64,
}

impl Default for CoverageCheck {
    fn default() -> Self {
        CoverageCheck {
            lambdas: vec![0.003, 0.01, 0.0175, 0.03],
            sensors_per_seed: vec![20, 40, 70, 140],
            paired_per_seed: 2,
            seeds: 200,
            resolution: 0.25,
            coarse_resolution: 1.0,
            r_obj: 1.67,
            r_sense: 100.0,
            rel_tolerance: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RedundancyCheck {
    pub lambda: f64,
    pub p_s: Vec<f64>,
    pub seeds: usize,
    pub points_per_seed: usize,
    pub r_obj: f64,
    pub r_sense: f64,
    pub rel_tolerance: f64,
    pub k_se: f64,
}

impl Default for RedundancyCheck {
    fn default() -> Self {
        RedundancyCheck {
            lambda: 0.01,
            p_s: vec![0.25, 0.5, 1.0],
            seeds: 100,
            points_per_seed: 100,
            r_obj: 1.67,
            r_sense: 100.0,
            rel_tolerance: 0.05,
            k_se: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GammaCheck {
    pub lambda: f64,
    pub p_s: Vec<f64>,
    pub gammas: Vec<u32>,
    pub roi: RoiSpec,
    pub seeds: usize,
    pub resolution: f64,
    pub r_obj: f64,
    pub r_sense: f64,
    pub tolerance: f64,
}

impl Default for GammaCheck {
    fn default() -> Self {
        GammaCheck {
            lambda: 0.01,
            p_s: grid(0.1, 0.9, 0.1),
            gammas: vec![1, 2, 3],
            roi: RoiSpec::DiscStrip {
                r_interest: 100.0,
                strip_half_width: 12.0,
            },
            seeds: 100,
            resolution: 0.25,
            r_obj: 1.67,
            r_sense: 100.0,
            tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LaneCheck {
    pub etas: Vec<u32>,
    pub p_s: Vec<f64>,
    pub trials: u64,
    pub k_se: f64,
}

impl Default for LaneCheck {
    fn default() -> Self {
        LaneCheck {
            etas: vec![1, 2, 5, 10],
            p_s: grid(0.1, 0.9, 0.1),
            trials: 1_000_000,
            k_se: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridCheck {
    pub eta: u32,
    /// Penetrations at which transition matrices are checked.
    pub p_s: Vec<f64>,
    pub stochastic_tolerance: f64,
    /// Same-lane normalized uplink must stay below `assisted_bound` here.
    pub assisted_p_s: Vec<f64>,
    pub assisted_bound: f64,
    /// All-lanes `p_v2i` must exceed `all_lanes_bound` here.
    pub all_lanes_p_s: Vec<f64>,
    pub all_lanes_bound: f64,
}

impl Default for GridCheck {
    fn default() -> Self {
        GridCheck {
            eta: 5,
            p_s: grid(0.0, 1.0, 0.05),
            stochastic_tolerance: 1e-12,
            assisted_p_s: vec![0.81, 0.85, 0.9, 0.95, 0.99, 1.0],
            assisted_bound: 0.25,
            all_lanes_p_s: grid(0.1, 0.6, 0.05),
            all_lanes_bound: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateConfig {
    pub seed: u64,
    /// Subset of {1, 3, 4, 7, 8} to run.
    pub criteria: Vec<u8>,
    pub coverage: CoverageCheck,
    pub redundancy: RedundancyCheck,
    pub gamma: GammaCheck,
    pub lane: LaneCheck,
    pub grid: GridCheck,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        ValidateConfig {
            seed: 1,
            criteria: vec![1, 3, 4, 7, 8],
            coverage: CoverageCheck::default(),
            redundancy: RedundancyCheck::default(),
            gamma: GammaCheck::default(),
            lane: LaneCheck::default(),
            grid: GridCheck::default(),
        }
    }
}

impl ValidateConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(c) = self.criteria.iter().find(|c| ![1, 3, 4, 7, 8].contains(*c)) {
            return Err(invalid(format!("criterion {c} is not an oracle check")));
        }
        if self.coverage.lambdas.len() != self.coverage.sensors_per_seed.len() {
            return Err(invalid(
                "coverage.lambdas and coverage.sensors_per_seed differ in length",
            ));
        }
        Ok(())
    }
}

/// Mean coverage area against the closed form, relative error per density.
pub fn coverage_area_checks(c: &CoverageCheck, root: Seed) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (i, (&lambda, &k)) in c.lambdas.iter().zip(&c.sensors_per_seed).enumerate() {
        let p = DiscModelParams::new(lambda, 1.0, c.r_obj, c.r_sense)?;
        let exact = expected_coverage_area(&p)?.total;
        let mc = simulate_coverage_area_two_level(
            &p,
            c.seeds,
            k,
            c.paired_per_seed,
            c.resolution,
            c.coarse_resolution,
            root.child(i as u64),
        )?;
        out.push(Check::within(
            1,
            format!(
                "coverage_area_rel_err lambda={lambda} mc={:.2}+-{:.2} exact={exact:.2}",
                mc.mean, mc.std_error
            ),
            mc.mean / exact - 1.0,
            0.0,
            c.rel_tolerance,
        ));
    }
    Ok(out)
}

/// Void-location redundancy: level at the largest penetration, exact
/// linearity of the closed form, and empirical linearity.
pub fn redundancy_checks(c: &RedundancyCheck, root: Seed) -> Result<Vec<Check>> {
    let p_max = c.p_s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let top = c
        .p_s
        .iter()
        .position(|&p| p == p_max)
        .ok_or_else(|| invalid("no penetrations"))?;
    let exact = |p_s: f64| expected_void_redundancy(&DiscModelParams::new(c.lambda, p_s, c.r_obj, c.r_sense)?);
    let run = simulate_void_redundancy(c.lambda, &c.p_s, c.r_obj, c.r_sense, c.seeds, c.points_per_seed, root)?;
    let e_top = exact(p_max)?;
    let s = run.summary(top);
    let mut out = vec![Check::within(
        3,
        format!(
            "void_redundancy_rel_err p_s={p_max} mc={:.3}+-{:.3} exact={e_top:.3} n={}",
            s.mean, s.std_error, s.n
        ),
        s.mean / e_top - 1.0,
        0.0,
        c.rel_tolerance,
    )];
    for (i, &p) in c.p_s.iter().enumerate() {
        let lin = exact(p)? - p / p_max * e_top;
        out.push(Check::within(
            3,
            format!("void_redundancy_analytic_linearity p_s={p}"),
            lin,
            0.0,
            8.0 * f64::EPSILON * e_top,
        ));
        let r = run.linearity_residual(i);
        let tol = if r.std_error > 0.0 { c.k_se * r.std_error } else { 0.0 };
        out.push(Check::within(
            3,
            format!("void_redundancy_empirical_linearity p_s={p} se={:.4}", r.std_error),
            r.mean,
            0.0,
            tol,
        ));
    }
    Ok(out)
}

/// γ-coverage approximation against simulation of the disc model.
pub fn gamma_checks(c: &GammaCheck, root: Seed) -> Result<Vec<Check>> {
    let p = DiscModelParams::new(c.lambda, 1.0, c.r_obj, c.r_sense)?;
    let pts = simulate_gamma_coverage(&p, &c.p_s, &c.gammas, &c.roi, c.seeds, c.resolution, root)?;
    pts.iter()
        .map(|pt| {
            let q = DiscModelParams { p_s: pt.p_s, ..p };
            let a = gamma_coverage_approx(&q, &c.roi, pt.gamma)?.normalized;
            Ok(Check::within(
                4,
                format!(
                    "gamma_approx_minus_mc p_s={} gamma={} mc={:.4}+-{:.4} approx={a:.4}",
                    pt.p_s, pt.gamma, pt.summary.mean, pt.summary.std_error
                ),
                a - pt.summary.mean,
                0.0,
                c.tolerance,
            ))
        })
        .collect()
}

/// Single-lane closed form against direct relay simulation.
pub fn lane_checks(c: &LaneCheck, root: Seed) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let r = single_lane_capacity(&LaneParams::with_eta(5, 0.5)?)?;
    out.push(Check::within(
        7,
        "e_n_uplink eta=5 p_s=0.5".into(),
        r.e_n_uplink,
        0.964844,
        5e-7,
    ));
    for eta in [1, 2, 5, 10] {
        for p in [0.0, 1.0] {
            let r = single_lane_capacity(&LaneParams::with_eta(eta, p)?)?;
            out.push(Check::within(
                7,
                format!("e_n_uplink eta={eta} p_s={p}"),
                r.e_n_uplink,
                0.0,
                0.0,
            ));
        }
    }
    let mut k = 0;
    for &eta in &c.etas {
        for &p in &c.p_s {
            let lp = LaneParams::with_eta(eta, p)?;
            let exact = single_lane_capacity(&lp)?;
            let mc = monte_carlo_lane(&lp, LaneMode::SingleLane, c.trials, root.child(k))?;
            k += 1;
            out.push(Check::within(
                7,
                format!("mc_uplink eta={eta} p_s={p} se={:.2e}", mc.se_n_uplink),
                mc.e_n_uplink,
                exact.e_n_uplink,
                c.k_se * mc.se_n_uplink,
            ));
            out.push(Check::within(
                7,
                format!("mc_dl_unicast eta={eta} p_s={p} se={:.2e}", mc.se_n_dl_unicast),
                mc.e_n_dl_unicast,
                exact.e_n_dl_unicast,
                c.k_se * mc.se_n_dl_unicast,
            ));
        }
    }
    Ok(out)
}

/// Grid chain properties.
pub fn grid_checks(c: &GridCheck) -> Result<Vec<Check>> {
    let modes = [
        (SharingMode::SameLane, "same_lane"),
        (SharingMode::AllLanes, "all_lanes"),
    ];
    let mut out = Vec::new();
    for (mode, name) in modes {
        let worst = c
            .p_s
            .iter()
            .map(|&p| Ok(build_transition_matrix(p, mode)?.max_row_error()))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        out.push(Check::within(
            8,
            format!("row_sum_error {name}"),
            worst,
            0.0,
            c.stochastic_tolerance,
        ));
        let g = grid_capacity(c.eta, 1.0, mode)?;
        out.push(Check::within(8, format!("p_v2i {name} p_s=1"), g.p_v2i, 0.0, 0.0));
    }
    for &p in &c.assisted_p_s {
        let g = grid_capacity(c.eta, p, SharingMode::SameLane)?;
        out.push(Check::below(
            8,
            format!("assisted_c_ul_norm p_s={p}"),
            g.c_ul_norm,
            c.assisted_bound,
        ));
    }
    for &p in &c.all_lanes_p_s {
        let g = grid_capacity(c.eta, p, SharingMode::AllLanes)?;
        out.push(Check::above(
            8,
            format!("all_lanes_p_v2i p_s={p}"),
            g.p_v2i,
            c.all_lanes_bound,
        ));
    }
    Ok(out)
}

/// Runs the configured criteria in order. Criterion `n` draws from
/// `Seed::new(seed, n)`.
pub fn run(cfg: &ValidateConfig) -> Result<Vec<Check>> {
    cfg.validate()?;
    let mut out = Vec::new();
    for &c in &cfg.criteria {
        let root = Seed::new(cfg.seed, c as u64);
        out.extend(match c {
            1 => coverage_area_checks(&cfg.coverage, root)?,
            3 => redundancy_checks(&cfg.redundancy, root)?,
            4 => gamma_checks(&cfg.gamma, root)?,
            7 => lane_checks(&cfg.lane, root)?,
            _ => grid_checks(&cfg.grid)?,
        });
    }
    Ok(out)
}
