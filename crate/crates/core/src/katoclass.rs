//! Strip diagnostics for the class of bounded increasing functions that
//! continue analytically to `|Im z| < r` with `Im g(z) · Im z ≥ 0`.
//!
//! A strip half-width shows up twice: as half the exponential tail rate of the
//! partner's derivative, and as the exponential decay rate of the function's
//! own derivative transform. Both are fitted log-linearly behind an R² gate.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funclib::{self, FunctionSpec, POLE_GUARD};
use crate::grid::Grid;

/// Minimum coefficient of determination for a tail fit.
pub const MIN_FIT_QUALITY: f64 = 0.999;

/// Default tail window, as fractions of the half-width.
pub const DEFAULT_WINDOW: (f64, f64) = (0.5, 0.9);

pub const DEFAULT_HERGLOTZ_LEVELS: usize = 8;

/// Tail share of the outermost decade above which a moment is flagged divergent.
pub const DIVERGENCE_SHARE: f64 = 1e-6;

const HERGLOTZ_TOL: f64 = 1e-12;
const TRANSFORM_FLOOR: f64 = 1e-13;
const TRANSFORM_STEP: f64 = 0.05;
const TRANSFORM_CAP: f64 = 200.0;
const ROMBERG_LEVELS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitSide {
    Left,
    Right,
    /// Decay of the derivative transform; the window is in frequency.
    Transform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripEstimate {
    pub half_width: f64,
    pub fit_window: (f64, f64),
    pub fit_quality: f64,
    pub side: FitSide,
}

struct LineFit {
    slope: f64,
    r_squared: f64,
}

fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 { (slope * sxy / syy).clamp(0.0, 1.0) } else { 0.0 };
    LineFit { slope, r_squared }
}

fn gate(estimate: StripEstimate) -> Result<StripEstimate> {
    if !(estimate.fit_quality >= MIN_FIT_QUALITY) || !(estimate.half_width > 0.0) {
        return Err(Error::UnreliableFit { quality: estimate.fit_quality, required: MIN_FIT_QUALITY });
    }
    Ok(estimate)
}

/// Strip half-width of the partner function from the exponential tails of
/// `f′`, sampled at the grid nodes, on the default window.
pub fn estimate_strip_from_partner(fprime_samples: &[f64], grid: &Grid) -> Result<StripEstimate> {
    estimate_strip_from_partner_in(fprime_samples, grid, DEFAULT_WINDOW)
}

/// As [`estimate_strip_from_partner`] with the window `[lo·L, hi·L]` on each side.
pub fn estimate_strip_from_partner_in(
    fprime_samples: &[f64],
    grid: &Grid,
    window: (f64, f64),
) -> Result<StripEstimate> {
    if fprime_samples.len() != grid.len() {
        return Err(Error::param("sample count does not match the grid"));
    }
    let (lo_frac, hi_frac) = window;
    if !(0.0 <= lo_frac && lo_frac < hi_frac && hi_frac <= 1.0) {
        return Err(Error::param("tail window must satisfy 0 ≤ lo < hi ≤ 1"));
    }
    let l = grid.half_width();
    let (lo, hi) = (lo_frac * l, hi_frac * l);

    let mut best: Option<StripEstimate> = None;
    for side in [FitSide::Left, FitSide::Right] {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (&x, &v) in grid.nodes().iter().zip(fprime_samples) {
            let d = match side {
                FitSide::Left => -x,
                _ => x,
            };
            if d < lo || d > hi {
                continue;
            }
            if !(v > 0.0) {
                return Err(Error::domain(format!("derivative not positive at {x} in the tail window")));
            }
            xs.push(d);
            ys.push(v.ln());
        }
        if xs.len() < 3 {
            return Err(Error::param("tail window holds fewer than three nodes"));
        }
        let fit = fit_line(&xs, &ys);
        let estimate = gate(StripEstimate {
            half_width: -fit.slope / 2.0,
            fit_window: (lo, hi),
            fit_quality: fit.r_squared,
            side,
        })?;
        if best.is_none_or(|b| estimate.half_width < b.half_width) {
            best = Some(estimate);
        }
    }
    Ok(best.expect("two sides fitted"))
}

/// Strip half-width of `spec` itself from the decay of `|ĥ′(k)| / k`.
///
/// The fit window is `[0.5, 0.9]·k_max`, where `k_max` is the first frequency
/// at which the transform falls below `1e-13` of its value at zero. `Ok(None)`
/// when that never happens below the frequency cap (a very wide strip).
pub fn estimate_strip_from_transform(spec: &FunctionSpec, grid: &Grid) -> Result<Option<StripEstimate>> {
    let at_zero = spec.fhat_prime(0.0, grid)?.norm();
    if !(at_zero > 0.0) {
        return Err(Error::domain("derivative transform vanishes at zero"));
    }
    let floor = TRANSFORM_FLOOR * at_zero;
    let steps = (TRANSFORM_CAP / TRANSFORM_STEP) as usize;
    let mut k_max = None;
    for i in 1..=steps {
        let k = i as f64 * TRANSFORM_STEP;
        if spec.fhat_prime(k, grid)?.norm() < floor {
            k_max = Some(k);
            break;
        }
    }
    let Some(k_max) = k_max else {
        return Ok(None);
    };
    let (lo, hi) = (DEFAULT_WINDOW.0 * k_max, DEFAULT_WINDOW.1 * k_max);
    let count = 64;
    let mut xs = Vec::with_capacity(count);
    let mut ys = Vec::with_capacity(count);
    for i in 0..count {
        let k = lo + (hi - lo) * i as f64 / (count - 1) as f64;
        let v = spec.fhat_prime(k, grid)?.norm();
        if !(v > 0.0) {
            return Err(Error::UnreliableFit { quality: 0.0, required: MIN_FIT_QUALITY });
        }
        xs.push(k);
        ys.push((v / k).ln());
    }
    let fit = fit_line(&xs, &ys);
    gate(StripEstimate {
        half_width: -fit.slope,
        fit_window: (lo, hi),
        fit_quality: fit.r_squared,
        side: FitSide::Transform,
    })
    .map(Some)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpMoment {
    pub value: f64,
    /// The outermost decade of the grid carries more than [`DIVERGENCE_SHARE`] of the total.
    pub diverging: bool,
}

/// `∫ f′(ξ) e^{s|ξ|} dξ` over the grid.
///
/// The two half-lines are folded onto `[0, L]` and integrated by Romberg
/// extrapolation on the grid's own nodes, which removes the kink at zero.
pub fn exp_moment(spec: &FunctionSpec, s: f64, grid: &Grid) -> Result<ExpMoment> {
    if !s.is_finite() {
        return Err(Error::param("moment exponent must be finite"));
    }
    let derivative = spec.sample_derivative(grid)?;
    let c = grid.center_index();
    let nodes = grid.nodes();
    // folded integrand on x ≥ 0
    let folded: Vec<f64> = (0..=c)
        .map(|i| {
            let x = nodes[c + i];
            (s * x).exp() * (derivative[c + i] + derivative[c - i])
        })
        .collect();
    let h = grid.spacing();
    let intervals = folded.len() - 1;

    let mut levels = 0;
    while levels < ROMBERG_LEVELS && intervals.is_multiple_of(1 << (levels + 1)) {
        levels += 1;
    }
    let mut table: Vec<f64> = (0..=levels)
        .map(|lev| {
            let step = 1 << lev;
            let samples: Vec<f64> = folded.iter().step_by(step).cloned().collect();
            let inner: f64 = samples.iter().sum();
            h * step as f64 * (inner - 0.5 * (samples[0] + samples[samples.len() - 1]))
        })
        .collect();
    for lev in 1..=levels {
        let factor = 4f64.powi(lev as i32);
        table = table.windows(2).map(|p| (factor * p[0] - p[1]) / (factor - 1.0)).collect();
    }
    let value = table[0];

    let outer = 0.9 * grid.half_width();
    let tail: f64 = (0..=c)
        .filter(|&i| nodes[c + i] >= outer)
        .map(|i| folded[i] * if i == c { 0.5 * h } else { h })
        .sum();
    let diverging = !(value.is_finite() && tail.abs() <= DIVERGENCE_SHARE * value.abs());
    Ok(ExpMoment { value, diverging })
}

/// `y · Im g(x + iy) ≥ −1e-12` at every node and at the levels
/// `y = ±r·m/(n_levels + 1)`.
pub fn herglotz_grid_check(g: &FunctionSpec, r: f64, grid: &Grid, n_levels: usize) -> Result<bool> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::param("strip half-width must be positive"));
    }
    let strip = g
        .strip_half_width()
        .ok_or(Error::Unsupported("continuation of sampled data"))?;
    if r >= strip - POLE_GUARD {
        return Err(Error::PoleProximity { z: Complex64::new(0.0, r) });
    }
    for m in 1..=n_levels {
        let level = r * m as f64 / (n_levels + 1) as f64;
        for y in [level, -level] {
            for &x in grid.nodes() {
                let value = g.continue_analytic(Complex64::new(x, y))?;
                if y * value.im < -HERGLOTZ_TOL {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn single_atom(spec: &FunctionSpec) -> Result<funclib::TanhAtom> {
    match spec.atoms() {
        Some([atom]) => Ok(*atom),
        _ => Err(Error::Unsupported("closed-form modes exist for single-atom pairs only")),
    }
}

/// Max-node residual of the continued diagonal identity
/// `(2π)^{-1/2} (Im g(x+iy)/y) f̂′(−2iy) = |φ(x+iy)|²` for a rank-one pair
/// `g = w tanh(a(x−t))`, `f = w′ tanh(b(ξ−t′))`, `ab = π/2`, whose mode is
/// `φ(x) = (ww′/2b)^{1/2} sech(a(x−t)) e^{ixt′}`.
pub fn strip_continuation_identity(g: &FunctionSpec, f: &FunctionSpec, grid: &Grid, y: f64) -> Result<f64> {
    let ga = single_atom(g)?;
    let fa = single_atom(f)?;
    let (a, b) = (ga.scale(), fa.scale());
    if ((a * b) / FRAC_PI_2 - 1.0).abs() > 1e-9 {
        return Err(Error::param("pair is not rank one: scales must multiply to π/2"));
    }
    let limit = (FRAC_PI_2 / a).min(b);
    if !y.is_finite() || y.abs() >= limit - POLE_GUARD {
        return Err(Error::PoleProximity { z: Complex64::new(0.0, y) });
    }
    let amplitude = ga.weight() * fa.weight() / (2.0 * b);
    let transform = funclib::fhat_prime_closed_complex(&[fa], Complex64::new(0.0, -2.0 * y));
    let mut worst = 0.0f64;
    for &x in grid.nodes() {
        let z = Complex64::new(x, y);
        let ratio = if y == 0.0 {
            g.deriv(x)?
        } else {
            g.continue_analytic(z)?.im / y
        };
        let lhs = funclib::INV_SQRT_2PI * ratio * transform.re;
        let w = a * (z - ga.center());
        let rhs = amplitude * funclib::sech_complex_norm_sqr(w) * (-2.0 * y * fa.center()).exp();
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// `|∫ |φ(x+iy)|² e^{2sx} dx − ∫ |φ̂(ξ+is)|² e^{−2yξ} dξ|` for `φ = sech`,
/// `φ̂(k) = (π/2)^{1/2} sech(πk/2)`.
pub fn plancherel_strip_check(y: f64, s: f64, grid: &Grid) -> Result<f64> {
    let (lhs, rhs) = plancherel_sides(y, s, grid)?;
    Ok((lhs - rhs).abs())
}

/// Both quadratures of [`plancherel_strip_check`].
pub fn plancherel_sides(y: f64, s: f64, grid: &Grid) -> Result<(f64, f64)> {
    if !(y.abs() < FRAC_PI_2) {
        return Err(Error::domain("|y| must stay below π/2"));
    }
    // |φ̂(ξ+is)|² has poles at s = ±1
    if !(s.abs() < 1.0) {
        return Err(Error::domain("|s| must stay below 1"));
    }
    let lhs = grid.integrate_fn(|x| funclib::sech_complex_norm_sqr(Complex64::new(x, y)) * (2.0 * s * x).exp());
    let rhs = grid.integrate_fn(|xi| {
        let w = Complex64::new(xi, s) * FRAC_PI_2;
        FRAC_PI_2 * funclib::sech_complex_norm_sqr(w) * (-2.0 * y * xi).exp()
    });
    Ok((lhs, rhs))
}

/// `φ̂(0)` for `φ = sech`.
pub fn sech_transform_at_zero() -> f64 {
    FRAC_PI_2.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StripReport {
    /// Strip of `g`.
    pub r: f64,
    /// Strip of `f`.
    pub r_prime: f64,
    pub product: f64,
    /// `r·r′ − π/2`.
    pub pi_over_2_gap: f64,
    /// Worst R² among the fits on `f` data.
    pub fit_quality_f: f64,
    /// Worst R² among the fits on `g` data.
    pub fit_quality_g: f64,
}

/// Strip of `own`: the smaller of the partner-tail and own-transform estimates.
fn combined_strip(own: &FunctionSpec, partner: &FunctionSpec, grid: &Grid) -> Result<(f64, f64, f64)> {
    let from_partner = estimate_strip_from_partner(&partner.sample_derivative(grid)?, grid)?;
    let from_own = estimate_strip_from_transform(own, grid)?;
    let r = from_own.map_or(from_partner.half_width, |e| e.half_width.min(from_partner.half_width));
    let own_quality = from_own.map_or(1.0, |e| e.fit_quality);
    Ok((r, from_partner.fit_quality, own_quality))
}

/// Estimated strips of `g` and `f` and their product against π/2.
pub fn strip_product_report(g: &FunctionSpec, f: &FunctionSpec, grid: &Grid) -> Result<StripReport> {
    let (r, quality_f_tail, quality_g_transform) = combined_strip(g, f, grid)?;
    let (r_prime, quality_g_tail, quality_f_transform) = combined_strip(f, g, grid)?;
    let product = r * r_prime;
    Ok(StripReport {
        r,
        r_prime,
        product,
        pi_over_2_gap: product - FRAC_PI_2,
        fit_quality_f: quality_f_tail.min(quality_f_transform),
        fit_quality_g: quality_g_tail.min(quality_g_transform),
    })
}

/// `r·r′` against `π/2` as a relative deviation.
pub fn relative_gap(report: &StripReport, target: f64) -> f64 {
    (report.product - target).abs() / target
}
