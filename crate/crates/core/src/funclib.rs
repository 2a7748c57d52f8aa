//! Bounded monotone functions on the line: finite tanh mixtures and sampled
//! functions, with derivatives, strip continuation and the transform of the
//! derivative.
//!
//! Transform convention used everywhere in the crate:
//! `f̂(k) = (2π)^{-1/2} ∫ f(x) e^{-ikx} dx`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

pub type ComplexPoint = Complex64;

/// Minimum distance (in the atom's rescaled variable) kept from the poles
/// `iπ/2 + ikπ` of tanh.
pub const POLE_GUARD: f64 = 1e-6;

/// Below this `|k|` the sech² transform switches to its analytic limit.
pub const SMALL_FREQUENCY: f64 = 1e-8;

/// Relative size of `f′` at the grid ends above which a numeric transform is
/// flagged as truncated.
pub const TAIL_DECAY: f64 = 1e-12;

pub(crate) const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// One increasing term `weight · tanh(scale · (x − center))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAtom", deny_unknown_fields)]
pub struct TanhAtom {
    scale: f64,
    center: f64,
    weight: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAtom {
    scale: f64,
    center: f64,
    weight: f64,
}

impl TryFrom<RawAtom> for TanhAtom {
    type Error = Error;

    fn try_from(raw: RawAtom) -> Result<Self> {
        TanhAtom::new(raw.scale, raw.center, raw.weight)
    }
}

impl TanhAtom {
    pub fn new(scale: f64, center: f64, weight: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::param(format!("atom scale must be positive, got {scale}")));
        }
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::param(format!(
                "atom weight must be positive (increasing atoms only), got {weight}"
            )));
        }
        if !center.is_finite() {
            return Err(Error::param("atom center must be finite"));
        }
        Ok(TanhAtom { scale, center, weight })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn value(&self, x: f64) -> f64 {
        self.weight * (self.scale * (x - self.center)).tanh()
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let s = sech(self.scale * (x - self.center));
        self.weight * self.scale * s * s
    }

    /// Half-width of the strip in which this atom is analytic.
    pub fn strip_half_width(&self) -> f64 {
        FRAC_PI_2 / self.scale
    }

    fn continued(&self, z: Complex64) -> Result<Complex64> {
        let w = self.scale * (z - self.center);
        if w.im.abs() >= FRAC_PI_2 - POLE_GUARD {
            return Err(Error::PoleProximity { z });
        }
        Ok(self.weight * tanh_complex(w))
    }

    /// `(2π)^{1/2}` times the transform of this atom's derivative, at complex frequency.
    fn derivative_transform_unnormalized(&self, k: Complex64) -> Complex64 {
        let phase = (-Complex64::i() * k * self.center).exp();
        self.weight * phase * sech2_transform(self.scale, k)
    }
}

/// `∫ α sech²(αx) e^{-ikx} dx = πk / (α sinh(πk / 2α))`, with the `k → 0`
/// limit 2 taken analytically.
fn sech2_transform(scale: f64, k: Complex64) -> Complex64 {
    if k.norm() < SMALL_FREQUENCY {
        return Complex64::new(2.0, 0.0);
    }
    let u = PI * k / (2.0 * scale);
    if u.re.abs() > 700.0 {
        return Complex64::new(0.0, 0.0);
    }
    2.0 * u / u.sinh()
}

pub(crate) fn sech(x: f64) -> f64 {
    let a = x.abs();
    if a > 700.0 {
        0.0
    } else {
        1.0 / a.cosh()
    }
}

/// `tanh(x + iy)` evaluated through `sech(2x)` so large `|x|` neither
/// overflows nor produces `inf/inf`.
pub(crate) fn tanh_complex(w: Complex64) -> Complex64 {
    let (two_x, two_y) = (2.0 * w.re, 2.0 * w.im);
    let c = sech(two_x);
    let denom = 1.0 + two_y.cos() * c;
    Complex64::new(two_x.tanh() / denom, two_y.sin() * c / denom)
}

/// `|sech(x + iy)|² = 2 / (cosh 2x + cos 2y)`, stable for large `|x|`.
pub(crate) fn sech_complex_norm_sqr(w: Complex64) -> f64 {
    let c = sech(2.0 * w.re);
    2.0 * c / (1.0 + (2.0 * w.im).cos() * c)
}

/// A finite positive combination of tanh atoms plus a constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TanhMixture {
    atoms: Vec<TanhAtom>,
    #[serde(default)]
    offset: f64,
}

impl TanhMixture {
    pub fn new(atoms: Vec<TanhAtom>, offset: f64) -> Self {
        TanhMixture { atoms, offset }
    }

    pub fn atoms(&self) -> &[TanhAtom] {
        &self.atoms
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }
}

/// Function values and derivatives on increasing nodes; linear interpolation in between.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    nodes: Vec<f64>,
    values: Vec<f64>,
    derivs: Vec<f64>,
}

impl SampledFunction {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>, derivs: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::param("sampled function needs at least two nodes"));
        }
        if values.len() != nodes.len() || derivs.len() != nodes.len() {
            return Err(Error::param("sampled function columns differ in length"));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("sample nodes must be strictly increasing"));
        }
        if values.iter().chain(&nodes).any(|v| !v.is_finite()) {
            return Err(Error::param("sampled values must be finite"));
        }
        if derivs.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::param("sampled derivative must be finite and non-negative"));
        }
        Ok(SampledFunction { nodes, values, derivs })
    }

    /// Samples `value` and `derivative` at the grid nodes.
    pub fn from_fn(grid: &Grid, value: impl Fn(f64) -> f64, derivative: impl Fn(f64) -> f64) -> Result<Self> {
        let nodes = grid.nodes().to_vec();
        let values = nodes.iter().map(|&x| value(x)).collect();
        let derivs = nodes.iter().map(|&x| derivative(x)).collect();
        SampledFunction::new(nodes, values, derivs)
    }

    /// Reads a CSV with header `x,value,derivative`.
    pub fn read_csv(path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            x: f64,
            value: f64,
            derivative: f64,
        }
        let mut reader = csv::Reader::from_path(path)?;
        let (mut nodes, mut values, mut derivs) = (Vec::new(), Vec::new(), Vec::new());
        for row in reader.deserialize() {
            let row: Row = row?;
            nodes.push(row.x);
            values.push(row.value);
            derivs.push(row.derivative);
        }
        SampledFunction::new(nodes, values, derivs)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn derivatives(&self) -> &[f64] {
        &self.derivs
    }

    fn interpolate(&self, column: &[f64], x: f64) -> Result<f64> {
        let (lo, hi) = (self.nodes[0], self.nodes[self.nodes.len() - 1]);
        if !(x >= lo && x <= hi) {
            return Err(Error::domain(format!("x = {x} outside sampled hull [{lo}, {hi}]")));
        }
        let i = match self.nodes.partition_point(|&n| n <= x) {
            0 => 0,
            p if p >= self.nodes.len() => self.nodes.len() - 2,
            p => p - 1,
        };
        let (x0, x1) = (self.nodes[i], self.nodes[i + 1]);
        let t = (x - x0) / (x1 - x0);
        Ok(column[i] + t * (column[i + 1] - column[i]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec {
    TanhMixture(TanhMixture),
    Sampled(SampledFunction),
}

impl FunctionSpec {
    pub fn mixture(atoms: Vec<TanhAtom>, offset: f64) -> Self {
        FunctionSpec::TanhMixture(TanhMixture::new(atoms, offset))
    }

    /// `weight · tanh(scale · (x − center))`.
    pub fn atom(scale: f64, center: f64, weight: f64) -> Result<Self> {
        Ok(FunctionSpec::mixture(vec![TanhAtom::new(scale, center, weight)?], 0.0))
    }

    pub fn sampled(f: SampledFunction) -> Self {
        FunctionSpec::Sampled(f)
    }

    pub fn atoms(&self) -> Option<&[TanhAtom]> {
        match self {
            FunctionSpec::TanhMixture(m) => Some(m.atoms()),
            FunctionSpec::Sampled(_) => None,
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::domain("evaluation point must be finite"));
        }
        match self {
            FunctionSpec::TanhMixture(m) => Ok(m.offset + m.atoms.iter().map(|a| a.value(x)).sum::<f64>()),
            FunctionSpec::Sampled(s) => s.interpolate(&s.values, x),
        }
    }

    pub fn deriv(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::domain("evaluation point must be finite"));
        }
        match self {
            FunctionSpec::TanhMixture(m) => Ok(m.atoms.iter().map(|a| a.derivative(x)).sum()),
            FunctionSpec::Sampled(s) => s.interpolate(&s.derivs, x),
        }
    }

    /// Total increase `lim (f(x) − f(−x))`.
    pub fn bracket(&self) -> f64 {
        match self {
            FunctionSpec::TanhMixture(m) => 2.0 * m.atoms.iter().map(|a| a.weight).sum::<f64>(),
            FunctionSpec::Sampled(s) => s.values[s.values.len() - 1] - s.values[0],
        }
    }

    /// Non-constant and increasing. Empty mixtures are constants.
    pub fn is_strictly_monotone(&self) -> bool {
        match self {
            FunctionSpec::TanhMixture(m) => !m.atoms.is_empty(),
            FunctionSpec::Sampled(s) => s.values[s.values.len() - 1] > s.values[0],
        }
    }

    /// Analytic continuation of a mixture into its pole-free strip.
    pub fn continue_analytic(&self, z: ComplexPoint) -> Result<Complex64> {
        match self {
            FunctionSpec::TanhMixture(m) => m
                .atoms
                .iter()
                .try_fold(Complex64::new(m.offset, 0.0), |acc, a| Ok(acc + a.continued(z)?)),
            FunctionSpec::Sampled(_) => Err(Error::Unsupported("analytic continuation of sampled data")),
        }
    }

    /// Largest strip half-width free of poles: `min π/(2α)`. `None` for sampled data.
    pub fn strip_half_width(&self) -> Option<f64> {
        self.atoms().map(|atoms| {
            atoms
                .iter()
                .map(TanhAtom::strip_half_width)
                .fold(f64::INFINITY, f64::min)
        })
    }

    /// Transform of the derivative at a real frequency: closed form for
    /// mixtures, quadrature on `grid` otherwise.
    pub fn fhat_prime(&self, k: f64, grid: &Grid) -> Result<Complex64> {
        match self {
            FunctionSpec::TanhMixture(m) => Ok(fhat_prime_closed(&m.atoms, k)),
            FunctionSpec::Sampled(_) => fhat_prime_numeric(self, k, grid),
        }
    }

    /// Derivative sampled at the grid nodes.
    pub fn sample_derivative(&self, grid: &Grid) -> Result<Vec<f64>> {
        grid.nodes().iter().map(|&x| self.deriv(x)).collect()
    }

    pub fn sample_values(&self, grid: &Grid) -> Result<Vec<f64>> {
        grid.nodes().iter().map(|&x| self.eval(x)).collect()
    }

    pub fn with_offset(&self, offset: f64) -> Self {
        match self {
            FunctionSpec::TanhMixture(m) => FunctionSpec::mixture(m.atoms.clone(), offset),
            FunctionSpec::Sampled(s) => {
                let shift = offset - s.values[0];
                FunctionSpec::Sampled(SampledFunction {
                    values: s.values.iter().map(|v| v + shift).collect(),
                    ..s.clone()
                })
            }
        }
    }

    /// `x ↦ f(c·x)` for `c > 0`.
    pub fn compose_scale(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::param("dilation factor must be positive"));
        }
        Ok(match self {
            FunctionSpec::TanhMixture(m) => FunctionSpec::mixture(
                m.atoms
                    .iter()
                    .map(|a| TanhAtom::new(a.scale * c, a.center / c, a.weight))
                    .collect::<Result<_>>()?,
                m.offset,
            ),
            FunctionSpec::Sampled(s) => FunctionSpec::Sampled(SampledFunction::new(
                s.nodes.iter().map(|x| x / c).collect(),
                s.values.clone(),
                s.derivs.iter().map(|d| d * c).collect(),
            )?),
        })
    }

    /// `x ↦ f(x − t)`.
    pub fn translate(&self, t: f64) -> Result<Self> {
        Ok(match self {
            FunctionSpec::TanhMixture(m) => FunctionSpec::mixture(
                m.atoms
                    .iter()
                    .map(|a| TanhAtom::new(a.scale, a.center + t, a.weight))
                    .collect::<Result<_>>()?,
                m.offset,
            ),
            FunctionSpec::Sampled(s) => FunctionSpec::Sampled(SampledFunction::new(
                s.nodes.iter().map(|x| x + t).collect(),
                s.values.clone(),
                s.derivs.clone(),
            )?),
        })
    }
}

pub fn eval(spec: &FunctionSpec, x: f64) -> Result<f64> {
    spec.eval(x)
}

pub fn deriv(spec: &FunctionSpec, x: f64) -> Result<f64> {
    spec.deriv(x)
}

pub fn bracket(spec: &FunctionSpec) -> f64 {
    spec.bracket()
}

pub fn continue_analytic(spec: &FunctionSpec, z: ComplexPoint) -> Result<Complex64> {
    spec.continue_analytic(z)
}

/// Closed-form `f̂′(k)` of a tanh mixture.
pub fn fhat_prime_closed(atoms: &[TanhAtom], k: f64) -> Complex64 {
    fhat_prime_closed_complex(atoms, Complex64::new(k, 0.0))
}

/// Closed-form `f̂′` continued to complex frequency. Finite for
/// `|Im k| < 2 min α`.
pub fn fhat_prime_closed_complex(atoms: &[TanhAtom], k: Complex64) -> Complex64 {
    atoms
        .iter()
        .map(|a| a.derivative_transform_unnormalized(k))
        .sum::<Complex64>()
        * INV_SQRT_2PI
}

/// Trapezoid approximation of `f̂′(k)` on `grid`. Fails with a truncation
/// error when `f′` has not decayed at the grid ends.
pub fn fhat_prime_numeric(spec: &FunctionSpec, k: f64, grid: &Grid) -> Result<Complex64> {
    let samples = spec.sample_derivative(grid)?;
    check_tail_decay(&samples)?;
    Ok(transform_samples(&samples, grid, k))
}

pub(crate) fn check_tail_decay(samples: &[f64]) -> Result<()> {
    let peak = samples.iter().cloned().fold(0.0, f64::max);
    if peak <= 0.0 {
        return Err(Error::domain("derivative vanishes on the grid"));
    }
    let tail = samples[0].max(samples[samples.len() - 1]) / peak;
    if tail > TAIL_DECAY {
        return Err(Error::Truncation { tail });
    }
    Ok(())
}

/// `(2π)^{-1/2} Σ w_i s_i e^{-ik x_i}`.
pub(crate) fn transform_samples(samples: &[f64], grid: &Grid, k: f64) -> Complex64 {
    let sum = grid
        .nodes()
        .iter()
        .zip(grid.weights())
        .zip(samples)
        .fold(Complex64::new(0.0, 0.0), |acc, ((&x, &w), &s)| {
            let (sin, cos) = (k * x).sin_cos();
            acc + Complex64::new(cos, -sin) * (w * s)
        });
    sum * INV_SQRT_2PI
}
