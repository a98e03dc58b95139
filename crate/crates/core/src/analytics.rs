//! Closed forms for the disc Boolean model.
//!
//! Objects are discs of radius `r` centered at an HPPP of intensity λ, each
//! a sensor with probability `p_s`; sensors sit at disc centers with an omni
//! support of radius `R`. For the typical sensor, a void point at distance
//! `ρ > r` is visible iff no other disc meets the segment to it, which has
//! probability `exp(-λ(πr² + 2rρ))`. Everything below follows from that.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::sensing::disc_band_area;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscModelParams {
    pub lambda: f64,
    pub p_s: f64,
    pub r_obj: f64,
    pub r_sense: f64,
}

impl DiscModelParams {
    pub fn new(lambda: f64, p_s: f64, r_obj: f64, r_sense: f64) -> Result<Self> {
        let p = DiscModelParams {
            lambda,
            p_s,
            r_obj,
            r_sense,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !ok(self.lambda) {
            return Err(invalid(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !(0.0..=1.0).contains(&self.p_s) {
            return Err(invalid(format!("p_s must be in [0, 1], got {}", self.p_s)));
        }
        if !ok(self.r_obj) || !ok(self.r_sense) {
            return Err(invalid(format!(
                "radii must be >= 0, got r_obj={} r_sense={}",
                self.r_obj, self.r_sense
            )));
        }
        Ok(())
    }

    /// Sensor intensity `p_s λ`.
    pub fn lambda_s(&self) -> f64 {
        self.p_s * self.lambda
    }
}

/// Region of interest centered on the typical sensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RoiSpec {
    Disc { r_interest: f64 },
    DiscStrip { r_interest: f64, strip_half_width: f64 },
}

impl RoiSpec {
    fn validate(&self) -> Result<()> {
        let (r, h) = match *self {
            RoiSpec::Disc { r_interest } => (r_interest, 1.0),
            RoiSpec::DiscStrip {
                r_interest,
                strip_half_width,
            } => (r_interest, strip_half_width),
        };
        if !(r > 0.0 && r.is_finite() && h > 0.0 && h.is_finite()) {
            return Err(invalid(format!("bad region of interest {self:?}")));
        }
        Ok(())
    }

    pub fn r_interest(&self) -> f64 {
        match *self {
            RoiSpec::Disc { r_interest } | RoiSpec::DiscStrip { r_interest, .. } => r_interest,
        }
    }

    /// Area of the region intersected with the centered disc of radius `rho`.
    fn area_within(&self, rho: f64) -> f64 {
        let rho = rho.min(self.r_interest());
        match *self {
            RoiSpec::Disc { .. } => PI * rho * rho,
            RoiSpec::DiscStrip {
                strip_half_width: h, ..
            } => disc_band_area(rho, -h, h),
        }
    }

    pub fn area(&self) -> f64 {
        self.area_within(self.r_interest())
    }

    /// Angular measure of the circle of radius `rho` inside the region.
    fn angular_weight(&self, rho: f64) -> f64 {
        match *self {
            RoiSpec::Disc { .. } => 2.0 * PI,
            RoiSpec::DiscStrip {
                strip_half_width: h, ..
            } => {
                if rho <= h {
                    2.0 * PI
                } else {
                    4.0 * (h / rho).asin()
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverageAreaTerms {
    pub total: f64,
    pub self_term: f64,
    pub void_term: f64,
}

/// `∫_0^ρ t e^{-a t} dt`, accurate for small `aρ`.
fn ramp_exp_integral(a: f64, rho: f64) -> f64 {
    let x = a * rho;
    if x < 0.5 {
        // Σ (-x)^n / (n! (n + 2)) · ρ²
        let mut sum = 0.0;
        let mut term = 1.0;
        for n in 0..40 {
            sum += term / (n as f64 + 2.0);
            term *= -x / (n as f64 + 1.0);
            if term.abs() < 1e-18 {
                break;
            }
        }
        rho * rho * sum
    } else {
        (1.0 - (1.0 + x) * (-x).exp()) / (a * a)
    }
}

/// `ln(2π ∫_r^ρmax t e^{-2λrt} dt)`: the void visibility integral without
/// the `e^{-λπr²}` factor, in log space.
fn ln_void_integral(p: &DiscModelParams, rho_max: f64) -> f64 {
    let r = p.r_obj;
    if rho_max <= r {
        return f64::NEG_INFINITY;
    }
    let a = 2.0 * p.lambda * r;
    let base = (2.0 * PI).ln();
    if a * r < 1.0 {
        return base + (ramp_exp_integral(a, rho_max) - ramp_exp_integral(a, r)).ln();
    }
    // [(1 + ar) e^{-ar} - (1 + aρ) e^{-aρ}] / a²
    let ratio = (1.0 + a * rho_max) / (1.0 + a * r) * (-a * (rho_max - r)).exp();
    base + (1.0 + a * r).ln() - a * r + (-ratio).ln_1p() - 2.0 * a.ln()
}

/// Expected coverage area of the typical sensor.
///
/// `self_term = π min(R, r)²` is the sensor's own body inside its support;
/// `void_term = 2π e^{-λπr²} ∫_r^R ρ e^{-2λrρ} dρ`.
pub fn expected_coverage_area(p: &DiscModelParams) -> Result<CoverageAreaTerms> {
    p.validate()?;
    let m = p.r_obj.min(p.r_sense);
    let self_term = PI * m * m;
    let void_term = (ln_void_integral(p, p.r_sense) - p.lambda * PI * p.r_obj * p.r_obj).exp();
    Ok(CoverageAreaTerms {
        total: self_term + void_term,
        self_term,
        void_term,
    })
}

/// `v · e^{-e}` evaluated in log space.
fn scaled(v: f64, e: f64) -> f64 {
    if v <= 0.0 {
        0.0
    } else {
        (v.ln() - e).exp()
    }
}

/// Expected redundancy of a void location: `p_s λ · void_term / e^{-λπr²}`.
pub fn expected_void_redundancy(p: &DiscModelParams) -> Result<f64> {
    p.validate()?;
    Ok(p.p_s * p.lambda * ln_void_integral(p, p.r_sense).exp())
}

fn ln_factorial(k: u64) -> f64 {
    if k < 256 {
        (2..=k).map(|i| (i as f64).ln()).sum()
    } else {
        let n = k as f64 + 1.0;
        // Stirling series for ln Γ(n).
        (n - 0.5) * n.ln() - n + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * n) - 1.0 / (360.0 * n.powi(3))
    }
}

/// `P(N(m) >= k)` for `N(m)` Poisson with mean `m`.
pub fn poisson_tail(k: u64, m: f64) -> Result<f64> {
    if !(m.is_finite() && m >= 0.0) {
        return Err(invalid(format!("poisson mean must be >= 0, got {m}")));
    }
    if k == 0 {
        return Ok(1.0);
    }
    if m == 0.0 {
        return Ok(0.0);
    }
    let ln_m = m.ln();
    let term = |i: u64| (-m + i as f64 * ln_m - ln_factorial(i)).exp();
    if (k as f64) > m {
        let mut t = term(k);
        let mut sum = 0.0;
        let mut i = k;
        while t > 0.0 {
            sum += t;
            i += 1;
            t *= m / i as f64;
            if t < sum * 1e-18 {
                break;
            }
        }
        Ok(sum.min(1.0))
    } else {
        let cdf: f64 = (0..k).map(term).sum();
        Ok((1.0 - cdf).clamp(0.0, 1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproxTerms {
    /// Own body inside the region of interest and the support.
    pub ed_c_a: f64,
    /// Void space inside the region of interest seen by the sensor.
    pub ed_c_not_a: f64,
    /// Region of interest outside the own body.
    pub ed_not_a: f64,
    /// Own body inside the support.
    pub ea_s: f64,
    pub r_bar_void: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaApprox {
    pub normalized: f64,
    pub terms: ApproxTerms,
}

/// Composite Gauss-Legendre quadrature of `f` over `[a, b]`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    const X: [f64; 4] = [
        0.339_981_043_584_856_3,
        0.861_136_311_594_052_6,
        -0.339_981_043_584_856_3,
        -0.861_136_311_594_052_6,
    ];
    const W: [f64; 4] = [
        0.652_145_154_862_546_1,
        0.347_854_845_137_453_9,
        0.652_145_154_862_546_1,
        0.347_854_845_137_453_9,
    ];
    if b <= a {
        return 0.0;
    }
    let h = (b - a) / panels as f64;
    let mut s = 0.0;
    for i in 0..panels {
        let mid = a + (i as f64 + 0.5) * h;
        for (x, w) in X.iter().zip(W) {
            s += w * f(mid + 0.5 * h * x);
        }
    }
    0.5 * h * s
}

/// Expected void area inside `roi` seen by the typical sensor.
fn roi_void_coverage(p: &DiscModelParams, roi: &RoiSpec) -> f64 {
    let r = p.r_obj;
    let hi = p.r_sense.min(roi.r_interest());
    if hi <= r {
        return 0.0;
    }
    let exponent = p.lambda * PI * r * r;
    if let RoiSpec::Disc { .. } = roi {
        return (ln_void_integral(p, hi) - exponent).exp();
    }
    let a = 2.0 * p.lambda * r;
    let f = |rho: f64| roi.angular_weight(rho) * rho * (-a * rho).exp();
    let mut knots = vec![r, hi];
    if let RoiSpec::DiscStrip { strip_half_width, .. } = roi {
        if *strip_half_width > r && *strip_half_width < hi {
            knots.insert(1, *strip_half_width);
        }
    }
    let integral: f64 = knots.windows(2).map(|w| integrate(f, w[0], w[1], 400)).sum();
    scaled(integral, exponent)
}

/// Expected fraction of `roi` covered by the typical sensor alone,
/// `E[|D⁰ ∩ C⁰|] / |D⁰|`.
pub fn expected_roi_coverage(p: &DiscModelParams, roi: &RoiSpec) -> Result<f64> {
    p.validate()?;
    roi.validate()?;
    let body = p.r_obj.min(p.r_sense);
    Ok((roi.area_within(body) + roi_void_coverage(p, roi)) / roi.area())
}

/// Poisson-tail approximation of the normalized γ-coverage of the typical
/// sensor's region of interest when every sensor collaborates.
pub fn gamma_coverage_approx(p: &DiscModelParams, roi: &RoiSpec, gamma: u32) -> Result<GammaApprox> {
    p.validate()?;
    roi.validate()?;
    if gamma < 1 {
        return Err(invalid("gamma must be >= 1"));
    }
    let body = p.r_obj.min(p.r_sense);
    let d_area = roi.area();
    let terms = ApproxTerms {
        ed_c_a: roi.area_within(body),
        ed_c_not_a: roi_void_coverage(p, roi),
        ed_not_a: d_area - roi.area_within(p.r_obj),
        ea_s: PI * body * body,
        r_bar_void: expected_void_redundancy(p)?,
    };
    let g = gamma as u64;
    let m_s = p.lambda_s() * terms.ea_s;
    let void_free = (-p.lambda * PI * p.r_obj * p.r_obj).exp();
    let total = terms.ed_c_a * poisson_tail(g - 1, m_s)?
        + terms.ed_c_not_a * poisson_tail(g - 1, terms.r_bar_void)?
        + terms.ed_not_a * poisson_tail(g, m_s)?
        + (terms.ed_not_a * void_free - terms.ed_c_not_a) * poisson_tail(g, terms.r_bar_void)?;
    Ok(GammaApprox {
        normalized: total / d_area,
        terms,
    })
}

/// Normalized γ-coverage against obstruction density `λ - λ_s` at a fixed
/// sensor density `λ_s`. Returns `(λ - λ_s, normalized)` per sweep point.
pub fn coverage_vs_obstruction(
    lambda_s_fixed: f64,
    lambda_total_sweep: &[f64],
    r_obj: f64,
    r_sense: f64,
    roi: &RoiSpec,
    gamma: u32,
) -> Result<Vec<(f64, f64)>> {
    lambda_total_sweep
        .iter()
        .map(|&lt| {
            if lt.is_nan() || lt < lambda_s_fixed || lt <= 0.0 {
                return Err(invalid(format!(
                    "total density {lt} must be positive and at least the sensor density {lambda_s_fixed}"
                )));
            }
            let p = DiscModelParams::new(lt, lambda_s_fixed / lt, r_obj, r_sense)?;
            Ok((lt - lambda_s_fixed, gamma_coverage_approx(&p, roi, gamma)?.normalized))
        })
        .collect()
}
