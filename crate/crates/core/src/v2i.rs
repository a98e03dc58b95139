//! Infrastructure (V2I) capacity needed to share sensor data along lanes.
//!
//! A reference sensing vehicle shares its data with the `η` vehicles ahead
//! and behind. Data travels over line-of-sight V2V links between adjacent
//! collaborating vehicles; a non-collaborating vehicle breaks the chain, and
//! the infrastructure relays the data (one uplink, then broadcast or one
//! unicast per receiving vehicle that V2V cannot reach).
//!
//! Two models are provided: a single lane, in closed form, and a three-lane
//! grid where the lanes next to the reference lane can help relay. The grid
//! is analysed as a Markov chain over columns with state `(X, Y)`: `X` holds
//! one bit per lane ("collaborating and already has the data") and `Y`
//! records whether V2I was needed so far.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::pointprocess::Seed;
use crate::stats::{percentile, Running};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaneParams {
    pub eta: u32,
    pub p_s: f64,
    pub speed_s: f64,
    pub t_gap: f64,
    pub t_interest: f64,
    pub segment_d: f64,
    pub nu: f64,
}

impl LaneParams {
    /// Parameters with `η = ⌊t_interest / t_gap⌋`.
    pub fn new(p_s: f64, speed_s: f64, t_gap: f64, t_interest: f64, segment_d: f64, nu: f64) -> Result<Self> {
        if !(t_gap > 0.0 && t_interest >= 0.0 && speed_s > 0.0) {
            return Err(invalid(format!(
                "need t_gap > 0, t_interest >= 0, speed > 0; got {t_gap}, {t_interest}, {speed_s}"
            )));
        }
        let p = LaneParams {
            eta: (t_interest / t_gap + 1e-9).floor() as u32,
            p_s,
            speed_s,
            t_gap,
            t_interest,
            segment_d,
            nu,
        };
        p.validate()?;
        Ok(p)
    }

    /// Defaults with the given `η` and penetration: 30 m/s, 1 s gaps, a
    /// 1 km segment and a unit data rate.
    pub fn with_eta(eta: u32, p_s: f64) -> Result<Self> {
        LaneParams::new(p_s, 30.0, 1.0, eta as f64, 1000.0, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_s) {
            return Err(invalid(format!("p_s must be in [0, 1], got {}", self.p_s)));
        }
        if self.eta < 1 {
            return Err(invalid("eta must be >= 1"));
        }
        if !(self.segment_d >= 0.0 && self.nu >= 0.0) {
            return Err(invalid("segment length and data rate must be >= 0"));
        }
        Ok(())
    }

    /// Vehicles per meter, `1 / (s t_gap)`.
    pub fn lambda_vehicle(&self) -> f64 {
        1.0 / (self.speed_s * self.t_gap)
    }

    fn scale(&self) -> f64 {
        self.lambda_vehicle() * self.segment_d * self.nu
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityResult {
    pub e_n_uplink: f64,
    pub e_n_dl_unicast: f64,
    pub c_ul: f64,
    pub c_dl_broadcast: f64,
    pub c_dl_unicast: f64,
    pub c_ul_norm: f64,
    pub c_dl_broadcast_norm: f64,
    pub c_dl_unicast_norm: f64,
}

impl CapacityResult {
    fn from_counts(p: &LaneParams, e_up: f64, e_dl: f64) -> Self {
        let s = p.scale();
        CapacityResult {
            e_n_uplink: e_up,
            e_n_dl_unicast: e_dl,
            c_ul: p.p_s * e_up * s,
            c_dl_broadcast: p.p_s * e_up * s,
            c_dl_unicast: p.p_s * e_dl * s,
            c_ul_norm: p.p_s * e_up,
            c_dl_broadcast_norm: p.p_s * e_up,
            c_dl_unicast_norm: p.p_s * e_dl,
        }
    }
}

/// Probability that V2I is needed to reach the vehicles ahead:
/// `1 - Σ_{k=0}^{η} p^k (1-p)^{η-k}`. The sum runs over the disjoint events
/// "the first `k` vehicles collaborate and the rest do not".
pub fn p_front(eta: u32, p_s: f64) -> f64 {
    let q = 1.0 - p_s;
    let s: f64 = (0..=eta as i32).map(|k| p_s.powi(k) * q.powi(eta as i32 - k)).sum();
    (1.0 - s).max(0.0)
}

/// Probability that V2I is needed in at least one direction.
pub fn p_v2i(eta: u32, p_s: f64) -> f64 {
    let f = p_front(eta, p_s);
    1.0 - (1.0 - f) * (1.0 - f)
}

/// Closed-form single-lane capacity.
pub fn single_lane_capacity(p: &LaneParams) -> Result<CapacityResult> {
    p.validate()?;
    let e_up = p_v2i(p.eta, p.p_s);
    let e_dl = if p.eta >= 2 {
        2.0 * (p.eta as f64 - 1.0) * p.p_s * (1.0 - p.p_s)
    } else {
        0.0
    };
    Ok(CapacityResult::from_counts(p, e_up, e_dl))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SharingMode {
    /// Data is needed only in the reference lane; neighbors may relay.
    SameLane,
    /// Every collaborating vehicle in the three lanes needs the data.
    AllLanes,
}

/// Grid chain state: lane bits `x` (top, center, bottom) and the V2I flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridChainState {
    pub x: [bool; 3],
    pub y: bool,
}

impl GridChainState {
    pub const COUNT: usize = 16;

    pub fn index(&self) -> usize {
        self.x[0] as usize | (self.x[1] as usize) << 1 | (self.x[2] as usize) << 2 | (self.y as usize) << 3
    }

    pub fn from_index(i: usize) -> Self {
        GridChainState {
            x: [i & 1 != 0, i & 2 != 0, i & 4 != 0],
            y: i & 8 != 0,
        }
    }
}

fn bits3(i: usize) -> [bool; 3] {
    [i & 1 != 0, i & 2 != 0, i & 4 != 0]
}

/// Outcome of one column update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColumnStep {
    pub x_next: [bool; 3],
    /// V2I needed for this column.
    pub v2i: bool,
    /// Unicast downlinks needed for this column.
    pub unicasts: u32,
    /// Vehicles in this column that received the data over V2V.
    pub v2v_receptions: u32,
}

/// Applies the relay rules to one column: `x` is the previous column's
/// state and `s` the collaboration bits of the new column.
pub fn column_step(x: [bool; 3], s: [bool; 3], mode: SharingMode) -> ColumnStep {
    let t = [x[0] && s[0], x[1] && s[1], x[2] && s[2]];
    let h = [
        t[0] || (s[0] && (t[1] || (t[2] && s[1]))),
        t[1] || (s[1] && (t[0] || t[2])),
        t[2] || (s[2] && (t[1] || (t[0] && s[1]))),
    ];
    let count = |b: [bool; 3]| b.iter().filter(|&&v| v).count() as u32;
    match mode {
        SharingMode::SameLane => {
            let v2i = s[1] && !h[1];
            let x_next = if v2i { s } else { h };
            ColumnStep {
                x_next,
                v2i,
                unicasts: v2i as u32,
                v2v_receptions: count(x_next) - v2i as u32,
            }
        }
        SharingMode::AllLanes => {
            let lacking = [s[0] && !h[0], s[1] && !h[1], s[2] && !h[2]];
            let v2i = lacking.iter().any(|&b| b);
            // Lacking vehicles joined through a collaborating center form one
            // group; otherwise the two outer lanes are separate.
            let unicasts = if s[1] {
                v2i as u32
            } else {
                lacking[0] as u32 + lacking[2] as u32
            };
            ColumnStep {
                x_next: s,
                v2i,
                unicasts,
                v2v_receptions: count(s) - unicasts,
            }
        }
    }
}

/// Row-stochastic transition matrix over [`GridChainState`] indices:
/// `m[i][j] = P(Z_{k+1} = j | Z_k = i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    pub p_s: f64,
    pub mode: SharingMode,
    pub m: [[f64; 16]; 16],
}

fn column_prob(s: [bool; 3], p: f64) -> f64 {
    s.iter().map(|&b| if b { p } else { 1.0 - p }).product()
}

pub fn build_transition_matrix(p_s: f64, mode: SharingMode) -> Result<TransitionMatrix> {
    if !(0.0..=1.0).contains(&p_s) {
        return Err(invalid(format!("p_s must be in [0, 1], got {p_s}")));
    }
    let mut m = [[0.0; 16]; 16];
    for (i, row) in m.iter_mut().enumerate() {
        let z = GridChainState::from_index(i);
        for si in 0..8 {
            let s = bits3(si);
            let step = column_step(z.x, s, mode);
            let next = GridChainState {
                x: step.x_next,
                y: z.y || step.v2i,
            };
            row[next.index()] += column_prob(s, p_s);
        }
    }
    Ok(TransitionMatrix { p_s, mode, m })
}

impl TransitionMatrix {
    /// `π P` for a row distribution `π`.
    pub fn advance(&self, pi: &[f64; 16]) -> [f64; 16] {
        let mut out = [0.0; 16];
        for (i, &w) in pi.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                *o += w * self.m[i][j];
            }
        }
        out
    }

    pub fn max_row_error(&self) -> f64 {
        self.m
            .iter()
            .map(|r| (r.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Initial column: the reference (center) holds its data, each outer lane
/// collaborates independently with probability `p_s` and then holds the
/// data too. Returns `(probability, state)` pairs.
pub fn initial_states(p_s: f64) -> Vec<(f64, GridChainState)> {
    let mut out = Vec::with_capacity(4);
    for (a, b) in [(false, false), (true, false), (false, true), (true, true)] {
        let w = (if a { p_s } else { 1.0 - p_s }) * (if b { p_s } else { 1.0 - p_s });
        out.push((
            w,
            GridChainState {
                x: [a, true, b],
                y: false,
            },
        ));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridCapacity {
    pub p_v2i: f64,
    pub e_n_dl_unicast: f64,
    pub c_ul_norm: f64,
    pub c_dl_broadcast_norm: f64,
    pub c_dl_unicast_norm: f64,
}

/// Grid-chain capacity: `p_v2i` from the `η`-step distribution per initial
/// state, unicasts as the sum over columns of the expected per-column count,
/// both directions.
pub fn grid_capacity(eta: u32, p_s: f64, mode: SharingMode) -> Result<GridCapacity> {
    if eta < 1 {
        return Err(invalid("eta must be >= 1"));
    }
    let tm = build_transition_matrix(p_s, mode)?;
    let unicast_rate: Vec<f64> = (0..16)
        .map(|i| {
            let x = GridChainState::from_index(i).x;
            (0..8)
                .map(|si| {
                    let s = bits3(si);
                    column_prob(s, p_s) * column_step(x, s, mode).unicasts as f64
                })
                .sum()
        })
        .collect();

    let mut pv = 0.0;
    let mut dl = 0.0;
    for (w, z0) in initial_states(p_s) {
        if w == 0.0 {
            continue;
        }
        let mut pi = [0.0; 16];
        pi[z0.index()] = 1.0;
        let mut uni = 0.0;
        for _ in 0..eta {
            uni += pi.iter().zip(&unicast_rate).map(|(a, b)| a * b).sum::<f64>();
            pi = tm.advance(&pi);
        }
        let front: f64 = (8..16).map(|i| pi[i]).sum();
        pv += w * (1.0 - (1.0 - front) * (1.0 - front));
        dl += w * 2.0 * uni;
    }
    Ok(GridCapacity {
        p_v2i: pv,
        e_n_dl_unicast: dl,
        c_ul_norm: p_s * pv,
        c_dl_broadcast_norm: p_s * pv,
        c_dl_unicast_norm: p_s * dl,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaneMode {
    SingleLane,
    GridSameLane,
    GridAllLanes,
}

impl LaneMode {
    fn grid(self) -> Option<SharingMode> {
        match self {
            LaneMode::SingleLane => None,
            LaneMode::GridSameLane => Some(SharingMode::SameLane),
            LaneMode::GridAllLanes => Some(SharingMode::AllLanes),
        }
    }

    /// V2V receptions per reference vehicle at full penetration.
    pub fn full_penetration_v2v(self, eta: u32) -> f64 {
        match self {
            LaneMode::SingleLane => 2.0 * eta as f64,
            _ => 6.0 * eta as f64 + 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct RefOutcome {
    uplink: bool,
    unicasts: u32,
    v2v: u32,
}

/// Relay outcome for one direction of a single lane; `bits[0]` is the
/// vehicle next to the reference.
fn lane_direction(bits: &[bool]) -> RefOutcome {
    let mut out = RefOutcome::default();
    let mut chain = true;
    let mut prev = true;
    for &b in bits {
        if b {
            if chain {
                out.v2v += 1;
            } else {
                out.uplink = true;
                if !prev {
                    out.unicasts += 1;
                } else {
                    out.v2v += 1;
                }
            }
        } else {
            chain = false;
        }
        prev = b;
    }
    out
}

fn grid_direction(first: [bool; 3], cols: &[[bool; 3]], mode: SharingMode) -> RefOutcome {
    let mut out = RefOutcome::default();
    let mut x = first;
    for &s in cols {
        let st = column_step(x, s, mode);
        out.uplink |= st.v2i;
        out.unicasts += st.unicasts;
        out.v2v += st.v2v_receptions;
        x = st.x_next;
    }
    out
}

/// Outcome for a reference in the middle of `cols` (length `2η + 1`).
fn reference_outcome(cols: &[[bool; 3]], eta: usize, mode: LaneMode) -> RefOutcome {
    let center = eta;
    let ahead: Vec<[bool; 3]> = cols[center + 1..=center + eta].to_vec();
    let behind: Vec<[bool; 3]> = cols[center - eta..center].iter().rev().copied().collect();
    let (f, b, extra) = match mode.grid() {
        None => {
            let a: Vec<bool> = ahead.iter().map(|c| c[1]).collect();
            let bb: Vec<bool> = behind.iter().map(|c| c[1]).collect();
            (lane_direction(&a), lane_direction(&bb), 0)
        }
        Some(m) => {
            let c0 = cols[center];
            let first = [c0[0], true, c0[2]];
            (
                grid_direction(first, &ahead, m),
                grid_direction(first, &behind, m),
                c0[0] as u32 + c0[2] as u32,
            )
        }
    };
    RefOutcome {
        uplink: f.uplink || b.uplink,
        unicasts: f.unicasts + b.unicasts,
        v2v: f.v2v + b.v2v + extra,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaneMcResult {
    pub trials: u64,
    pub e_n_uplink: f64,
    pub se_n_uplink: f64,
    pub e_n_dl_unicast: f64,
    pub se_n_dl_unicast: f64,
    pub e_v2v: f64,
    pub c_ul_norm: f64,
    pub c_dl_unicast_norm: f64,
    /// Mean uplinks per road segment of length `segment_d`.
    pub burst_mean: f64,
    /// 95th percentile of uplinks per road segment.
    pub burst_p95: f64,
}

/// Bernoulli source comparing raw 64-bit draws against a threshold.
struct Coin {
    threshold: u64,
    always: bool,
}

impl Coin {
    fn new(p: f64) -> Coin {
        Coin {
            threshold: (p * 18_446_744_073_709_551_616.0) as u64,
            always: p >= 1.0,
        }
    }

    fn flip<R: RngCore>(&self, rng: &mut R) -> bool {
        self.always || rng.next_u64() < self.threshold
    }
}

const BURST_WINDOWS: usize = 2000;

/// Direct simulation of the relay rules around independent reference
/// vehicles, plus a burst statistic over consecutive road segments of one
/// long shared lane.
pub fn monte_carlo_lane(p: &LaneParams, mode: LaneMode, trials: u64, seed: Seed) -> Result<LaneMcResult> {
    p.validate()?;
    if trials < 1 {
        return Err(invalid("trials must be >= 1"));
    }
    let eta = p.eta as usize;
    let coin = Coin::new(p.p_s);
    let mut rng = seed.child(0).rng();
    let mut up = Running::default();
    let mut dl = Running::default();
    let mut v2v = Running::default();
    let mut cols = vec![[false; 3]; 2 * eta + 1];
    let lanes = if mode.grid().is_some() { 3 } else { 1 };
    for _ in 0..trials {
        for (k, c) in cols.iter_mut().enumerate() {
            if lanes == 1 {
                c[1] = k == eta || coin.flip(&mut rng);
            } else {
                *c = [
                    coin.flip(&mut rng),
                    k == eta || coin.flip(&mut rng),
                    coin.flip(&mut rng),
                ];
            }
        }
        let o = reference_outcome(&cols, eta, mode);
        up.push(o.uplink as u8 as f64);
        dl.push(o.unicasts as f64);
        v2v.push(o.v2v as f64);
    }

    let (burst_mean, burst_p95) = burst_statistic(p, mode, seed.child(1));
    Ok(LaneMcResult {
        trials,
        e_n_uplink: up.mean(),
        se_n_uplink: up.std_error(),
        e_n_dl_unicast: dl.mean(),
        se_n_dl_unicast: dl.std_error(),
        e_v2v: v2v.mean(),
        c_ul_norm: p.p_s * up.mean(),
        c_dl_unicast_norm: p.p_s * dl.mean(),
        burst_mean,
        burst_p95,
    })
}

fn burst_statistic(p: &LaneParams, mode: LaneMode, seed: Seed) -> (f64, f64) {
    let eta = p.eta as usize;
    let per_segment = ((p.lambda_vehicle() * p.segment_d).round() as usize).max(1);
    let n = per_segment * BURST_WINDOWS + 2 * eta;
    let coin = Coin::new(p.p_s);
    let mut rng = seed.rng();
    let cols: Vec<[bool; 3]> = (0..n)
        .map(|_| [coin.flip(&mut rng), coin.flip(&mut rng), coin.flip(&mut rng)])
        .collect();
    let counts: Vec<f64> = (0..BURST_WINDOWS)
        .map(|w| {
            (0..per_segment)
                .filter(|&j| {
                    let c = eta + w * per_segment + j;
                    cols[c][1] && reference_outcome(&cols[c - eta..=c + eta], eta, mode).uplink
                })
                .count() as f64
        })
        .collect();
    (crate::stats::mean(&counts), percentile(&counts, 95.0))
}

/// Mean V2V receptions per sensing vehicle, normalized by the same count at
/// full penetration.
pub fn v2v_throughput_proxy(p: &LaneParams, mode: LaneMode, trials: u64, seed: Seed) -> Result<f64> {
    let r = monte_carlo_lane(p, mode, trials, seed)?;
    Ok(r.e_v2v / mode.full_penetration_v2v(p.eta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_lane_values() {
        let r = single_lane_capacity(&LaneParams::with_eta(5, 0.5).unwrap()).unwrap();
        assert!((r.e_n_uplink - (1.0 - (6.0f64 / 32.0).powi(2))).abs() < 1e-15);
        assert!((r.e_n_uplink - 0.964844).abs() < 5e-7);
        assert!((r.e_n_dl_unicast - 2.0).abs() < 1e-15);
        assert_eq!(r.c_ul, r.c_dl_broadcast);
        for p in [0.0, 1.0] {
            let r = single_lane_capacity(&LaneParams::with_eta(5, p).unwrap()).unwrap();
            assert_eq!((r.e_n_uplink, r.c_ul, r.c_dl_unicast), (0.0, 0.0, 0.0));
        }
        assert_eq!(p_front(1, 0.5), 0.0);
        assert!((p_front(5, 0.5) - 0.8125).abs() < 1e-15);
    }

    #[test]
    fn eta_from_times() {
        let p = LaneParams::new(0.5, 30.0, 1.5, 8.0, 1000.0, 1.0).unwrap();
        assert_eq!(p.eta, 5);
        assert!((p.lambda_vehicle() - 1.0 / 45.0).abs() < 1e-15);
    }

    #[test]
    fn single_lane_uplink_is_unimodal() {
        let vals: Vec<f64> = (1..100).map(|i| p_v2i(5, i as f64 / 100.0)).collect();
        assert!(vals.iter().all(|&v| v > 0.0));
        let signs: Vec<bool> = vals.windows(2).map(|w| w[1] >= w[0]).collect();
        let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
        assert_eq!(changes, 1);
    }

    #[test]
    fn matrices_are_stochastic() {
        for mode in [SharingMode::SameLane, SharingMode::AllLanes] {
            for i in 0..=10 {
                let tm = build_transition_matrix(i as f64 / 10.0, mode).unwrap();
                assert!(tm.max_row_error() < 1e-12);
                assert!(tm.m.iter().flatten().all(|&v| v >= 0.0));
                let mut pi = [0.0; 16];
                pi[2] = 1.0;
                for _ in 0..100 {
                    pi = tm.advance(&pi);
                }
                assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn absorbing_extremes() {
        let full = build_transition_matrix(1.0, SharingMode::SameLane).unwrap();
        let all = GridChainState { x: [true; 3], y: false }.index();
        assert_eq!(full.m[all][all], 1.0);
        let none = build_transition_matrix(0.0, SharingMode::SameLane).unwrap();
        let empty = GridChainState {
            x: [false; 3],
            y: false,
        }
        .index();
        assert_eq!(none.m[all][empty], 1.0);
        for mode in [SharingMode::SameLane, SharingMode::AllLanes] {
            assert_eq!(grid_capacity(5, 1.0, mode).unwrap().p_v2i, 0.0);
        }
    }

    #[test]
    fn lateral_assist_reduces_v2i() {
        for i in 1..20 {
            let p = i as f64 / 20.0;
            let g = grid_capacity(5, p, SharingMode::SameLane).unwrap();
            assert!(g.p_v2i <= p_v2i(5, p) + 1e-12, "{p}");
        }
    }

    #[test]
    fn lane_direction_rules() {
        // 1 1 0 1 1: uplink, one unicast, three V2V hops (two in front of the
        // gap, one after the unicast).
        let o = lane_direction(&[true, true, false, true, true]);
        assert_eq!((o.uplink, o.unicasts, o.v2v), (true, 1, 3));
        let o = lane_direction(&[true, true, false, false, false]);
        assert_eq!((o.uplink, o.unicasts, o.v2v), (false, 0, 2));
    }

    #[test]
    fn grid_mc_matches_chain() {
        for mode in [LaneMode::GridSameLane, LaneMode::GridAllLanes] {
            for p_s in [0.2, 0.5, 0.8] {
                let lp = LaneParams::with_eta(5, p_s).unwrap();
                let mc = monte_carlo_lane(&lp, mode, 200_000, Seed::new(3, 1)).unwrap();
                let ch = grid_capacity(5, p_s, mode.grid().unwrap()).unwrap();
                assert!(
                    (mc.e_n_uplink - ch.p_v2i).abs() < 4.0 * mc.se_n_uplink + 1e-12,
                    "{mode:?} {p_s}"
                );
                assert!(
                    (mc.e_n_dl_unicast - ch.e_n_dl_unicast).abs() < 4.0 * mc.se_n_dl_unicast + 1e-12,
                    "{mode:?} {p_s}"
                );
            }
        }
    }

    #[test]
    fn full_penetration_proxy_and_bursts() {
        for mode in [LaneMode::SingleLane, LaneMode::GridSameLane, LaneMode::GridAllLanes] {
            let lp = LaneParams::with_eta(5, 1.0).unwrap();
            let r = monte_carlo_lane(&lp, mode, 1000, Seed::new(1, 1)).unwrap();
            assert_eq!(r.e_n_uplink, 0.0);
            assert_eq!(r.burst_p95, 0.0);
            assert_eq!(v2v_throughput_proxy(&lp, mode, 1000, Seed::new(1, 1)).unwrap(), 1.0);
            let zero = LaneParams::with_eta(5, 0.0).unwrap();
            assert_eq!(v2v_throughput_proxy(&zero, mode, 1000, Seed::new(1, 1)).unwrap(), 0.0);
            let mid = LaneParams::with_eta(5, 0.6).unwrap();
            let r = monte_carlo_lane(&mid, mode, 1000, Seed::new(1, 1)).unwrap();
            assert!(r.burst_p95 >= r.burst_mean);
        }
    }

    #[test]
    fn proxy_is_monotone_with_common_numbers() {
        let vals: Vec<f64> = (1..=9)
            .map(|i| {
                let lp = LaneParams::with_eta(5, i as f64 / 10.0).unwrap();
                v2v_throughput_proxy(&lp, LaneMode::SingleLane, 20_000, Seed::new(8, 0)).unwrap()
            })
            .collect();
        assert!(vals.windows(2).all(|w| w[1] >= w[0]), "{vals:?}");
    }
}
