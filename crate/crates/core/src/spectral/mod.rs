//! Spectrum of a discretized commutator: numerical rank, positivity, mode
//! extraction and the identities tying the modes back to `f` and `g`.
//!
//! A rank-N commutator `Σ_j (φ_j, ·) φ_j` shows up as N eigenvalues well above
//! the discretization noise; the modes are recovered from the eigenvectors as
//! `φ_j(x_i) = v_j[i] √λ_j / √w_i`.

mod eigen;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::funclib::FunctionSpec;
use crate::grid::Grid;
use crate::kernel::{self, KernelMatrix, Side};

/// Relative eigenvalue threshold for rank, positivity and mode retention.
pub const DEFAULT_REL_TOL: f64 = 1e-8;

const HERMITIAN_TOL: f64 = 1e-12;
const REAL_DIAGONAL_TOL: f64 = 1e-14;

/// Number of eigenvalues (by magnitude) compared across the Fourier duality.
pub const DUALITY_TOP: usize = 10;

/// One retained eigenpair.
#[derive(Debug, Clone)]
pub struct Mode {
    /// Position in the descending eigenvalue list.
    pub index: usize,
    pub eigenvalue: f64,
    /// Unit eigenvector of the weighted matrix, phase-fixed.
    pub eigenvector: Vec<Complex64>,
    /// `v[i] √|λ| / √w_i`; multiply `|φ|²` by `sign(λ)` to rebuild the kernel.
    pub values: Vec<Complex64>,
}

impl Mode {
    pub fn sign(&self) -> f64 {
        if self.eigenvalue < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpectralResult {
    grid: Grid,
    side: Side,
    eigenvalues: Vec<f64>,
    modes: Vec<Mode>,
    numerical_rank: usize,
    min_eigenvalue: f64,
    positivity: bool,
}

impl SpectralResult {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// All eigenvalues, algebraic descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Retained eigenpairs (`|λ| > tol · max|λ|`), in eigenvalue order.
    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn numerical_rank(&self) -> usize {
        self.numerical_rank
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    pub fn positivity(&self) -> bool {
        self.positivity
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Eigenvalues sorted by decreasing magnitude.
    pub fn by_magnitude(&self) -> Vec<f64> {
        sorted_by_magnitude(&self.eigenvalues)
    }

    /// Mode attached to the most negative retained eigenvalue, if any.
    pub fn most_negative_mode(&self) -> Option<&Mode> {
        self.modes.iter().rfind(|m| m.eigenvalue < 0.0)
    }
}

fn sorted_by_magnitude(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    v
}

fn check_integrity(a: &KernelMatrix) -> Result<()> {
    let m = a.entries();
    let scale = m.max_abs();
    if scale == 0.0 {
        return Ok(());
    }
    let defect = m.hermitian_defect() / scale;
    if defect > HERMITIAN_TOL {
        return Err(Error::Integrity(format!("matrix is not Hermitian (relative defect {defect:e})")));
    }
    let worst_im = (0..m.dim()).map(|i| m[(i, i)].im.abs()).fold(0.0, f64::max);
    if worst_im > REAL_DIAGONAL_TOL * scale {
        return Err(Error::Integrity(format!("diagonal has imaginary part {worst_im:e}")));
    }
    Ok(())
}

/// Full spectrum; modes retained at [`DEFAULT_REL_TOL`].
pub fn eigendecompose(a: &KernelMatrix) -> Result<SpectralResult> {
    eigendecompose_with_tol(a, DEFAULT_REL_TOL)
}

pub fn eigendecompose_with_tol(a: &KernelMatrix, rel_tol: f64) -> Result<SpectralResult> {
    check_integrity(a)?;
    let decomposition = eigen::decompose(a.entries())?;
    let eigenvalues = decomposition.values.clone();
    let max_abs = eigenvalues.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let inv_sqrt_w: Vec<f64> = a.grid().weights().iter().map(|w| 1.0 / w.sqrt()).collect();

    let modes = eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, v)| max_abs > 0.0 && v.abs() > rel_tol * max_abs)
        .map(|(index, &eigenvalue)| {
            let eigenvector = decomposition.vector(index);
            let amplitude = eigenvalue.abs().sqrt();
            let values = eigenvector
                .iter()
                .zip(&inv_sqrt_w)
                .map(|(v, s)| v * (amplitude * s))
                .collect();
            Mode { index, eigenvalue, eigenvector, values }
        })
        .collect();

    let (positivity, min_eigenvalue) = positivity_of(&eigenvalues, rel_tol);
    Ok(SpectralResult {
        grid: a.grid().clone(),
        side: a.side(),
        numerical_rank: rank_of(&eigenvalues, rel_tol),
        eigenvalues,
        modes,
        min_eigenvalue,
        positivity,
    })
}

/// Spectrum only, algebraic descending.
pub fn eigenvalues(a: &KernelMatrix) -> Result<Vec<f64>> {
    check_integrity(a)?;
    eigen::eigenvalues(a.entries())
}

fn rank_of(values: &[f64], rel_tol: f64) -> usize {
    let max_abs = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if max_abs == 0.0 {
        return 0;
    }
    values.iter().filter(|v| v.abs() > rel_tol * max_abs).count()
}

fn positivity_of(values: &[f64], rel_tol: f64) -> (bool, f64) {
    let max_abs = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let min = if min.is_finite() { min } else { 0.0 };
    (min >= -rel_tol * max_abs, min)
}

/// Count of eigenvalues with `|λ| > rel_tol · max|λ|`.
pub fn numerical_rank(result: &SpectralResult, rel_tol: f64) -> usize {
    rank_of(&result.eigenvalues, rel_tol)
}

/// `(min λ ≥ −rel_tol · max|λ|, min λ)`.
pub fn positivity_check(result: &SpectralResult, rel_tol: f64) -> (bool, f64) {
    positivity_of(&result.eigenvalues, rel_tol)
}

/// Node values of `φ_j` for a non-negative result.
pub fn extract_modes(result: &SpectralResult) -> Result<Vec<Vec<Complex64>>> {
    if !result.positivity {
        return Err(Error::State(format!(
            "modes are defined for non-negative commutators; min eigenvalue {}",
            result.min_eigenvalue
        )));
    }
    Ok(result.modes.iter().map(|m| m.values.clone()).collect())
}

/// `(sign λ_j, φ_j)` for every retained eigenvalue, positive or not.
pub fn signed_modes(result: &SpectralResult) -> Vec<(f64, &[Complex64])> {
    result.modes.iter().map(|m| (m.sign(), m.values.as_slice())).collect()
}

/// `Σ_j sign(λ_j) |φ_j(x_i)|²` at every node; equals `K(x_i, x_i)` up to the dropped noise.
pub fn diagonal_from_modes(result: &SpectralResult) -> Vec<f64> {
    let n = result.grid.len();
    let mut diag = vec![0.0; n];
    for m in &result.modes {
        for (d, v) in diag.iter_mut().zip(&m.values) {
            *d += m.sign() * v.norm_sqr();
        }
    }
    diag
}

/// `max_{x,y} |K(x,y) − Σ_j sign(λ_j) φ_j(x) conj(φ_j(y))|`, relative to `max |K|`.
pub fn reconstruction_residual(result: &SpectralResult, kernel: &KernelMatrix) -> f64 {
    let n = kernel.dim();
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let k = kernel.kernel_value(i, j);
            let rebuilt: Complex64 = result
                .modes
                .iter()
                .map(|m| m.values[i] * m.values[j].conj() * m.sign())
                .sum();
            worst = worst.max((k - rebuilt).norm());
            scale = scale.max(k.norm());
        }
    }
    if scale == 0.0 {
        worst
    } else {
        worst / scale
    }
}

/// Maximum weighted Gram defect `|∫ φ_j conj(φ_k) − |λ_j| δ_jk|` over retained modes.
pub fn orthogonality_defect(result: &SpectralResult) -> f64 {
    let w = result.grid.weights();
    let mut worst = 0.0f64;
    for (j, a) in result.modes.iter().enumerate() {
        for (k, b) in result.modes.iter().enumerate() {
            let gram: Complex64 = a
                .values
                .iter()
                .zip(&b.values)
                .zip(w)
                .map(|((p, q), &wi)| p * q.conj() * wi)
                .sum();
            let target = if j == k { a.eigenvalue.abs() } else { 0.0 };
            worst = worst.max((gram - target).norm());
        }
    }
    worst
}

/// Max-node residual of `g′ = (2π/[f]) Σ_j |φ_j|²` (position side) or
/// `f′ = (2π/[g]) Σ_j |φ̂_j|²` (momentum side). Indefinite spectra enter with
/// their signs.
pub fn diagonal_identity_residual(result: &SpectralResult, g: &FunctionSpec, f: &FunctionSpec) -> Result<f64> {
    let (multiplier, symbol) = match result.side {
        Side::Position => (g, f),
        Side::Momentum => (f, g),
    };
    let bracket = symbol.bracket();
    if bracket <= 0.0 {
        return Err(Error::param("identity needs a non-constant symbol"));
    }
    let derivative = multiplier.sample_derivative(&result.grid)?;
    let rebuilt = diagonal_from_modes(result);
    Ok(derivative
        .iter()
        .zip(&rebuilt)
        .map(|(d, s)| (d - 2.0 * PI / bracket * s).abs())
        .fold(0.0, f64::max))
}

/// Largest difference between the top-[`DUALITY_TOP`] eigenvalues (by magnitude)
/// of two spectra.
pub fn spectral_gap(a: &[f64], b: &[f64]) -> f64 {
    let (a, b) = (sorted_by_magnitude(a), sorted_by_magnitude(b));
    a.iter()
        .zip(&b)
        .take(DUALITY_TOP)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Position-side versus momentum-side spectra of the same commutator.
pub fn duality_check(g: &FunctionSpec, f: &FunctionSpec, grid: &Grid) -> Result<f64> {
    let position = eigenvalues(&kernel::assemble_position_kernel(g, f, grid)?)?;
    let momentum = eigenvalues(&kernel::assemble_momentum_kernel(g, f, grid)?)?;
    Ok(spectral_gap(&position, &momentum))
}
