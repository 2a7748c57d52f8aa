//! Nyström discretization of the commutator kernels
//!
//! ```text
//! K(x, y)  = (2π)^{-1/2} · (g(x) − g(y))/(x − y) · f̂′(y − x)     position side
//! K̃(ξ, η) = (2π)^{-1/2} · (f(ξ) − f(η))/(ξ − η) · ĝ′(ξ − η)     momentum side
//! ```
//!
//! Entries are weighted symmetrically, `A_ij = √(w_i w_j) K(x_i, x_j)`, so the
//! matrix stays Hermitian and has the same spectrum as the one-sided Nyström
//! matrix.

use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funclib::{self, FunctionSpec, TanhAtom, INV_SQRT_2PI};
use crate::grid::Grid;
use crate::matrix::CMatrix;

/// Below this separation divided differences use the series-stable form.
pub const NEAR_DIAGONAL: f64 = 1e-4;

/// Beyond this `|α(x − y)|` the tanh difference no longer cancels and is used directly.
const FAR_SEPARATION: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Position,
    Momentum,
}

#[derive(Debug, Clone)]
pub struct KernelMatrix {
    grid: Grid,
    side: Side,
    entries: CMatrix,
}

impl KernelMatrix {
    /// Wraps raw weighted entries, e.g. for tests on hand-built matrices.
    pub fn from_entries(grid: Grid, side: Side, entries: CMatrix) -> Result<Self> {
        if entries.dim() != grid.len() {
            return Err(Error::param("matrix dimension does not match grid"));
        }
        Ok(KernelMatrix { grid, side, entries })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.dim()
    }

    /// Unweighted kernel value `K(x_i, x_j)`.
    pub fn kernel_value(&self, i: usize, j: usize) -> Complex64 {
        let w = self.grid.weights();
        self.entries[(i, j)] / (w[i] * w[j]).sqrt()
    }

    /// Unweighted diagonal `K(x_i, x_i)`.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.kernel_value(i, i).re).collect()
    }

    /// Hermiticity defect relative to `max |A|`.
    pub fn relative_hermitian_defect(&self) -> f64 {
        let scale = self.entries.max_abs();
        if scale == 0.0 {
            0.0
        } else {
            self.entries.hermitian_defect() / scale
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.entries.write_csv(file)?;
        Ok(())
    }
}

/// `(g(x) − g(y))/(x − y)`, continued by `g′(x)` on the diagonal.
pub fn divided_difference(g: &FunctionSpec, x: f64, y: f64) -> Result<f64> {
    match g {
        FunctionSpec::TanhMixture(m) => {
            if !(x.is_finite() && y.is_finite()) {
                return Err(Error::domain("divided difference needs finite points"));
            }
            Ok(m.atoms()
                .iter()
                .map(|a| {
                    let dx = x - y;
                    let (ax, ay) = (a.scale() * (x - a.center()), a.scale() * (y - a.center()));
                    atom_divided_difference(a, dx, ax, ay, funclib::sech(ax), funclib::sech(ay))
                })
                .sum())
        }
        FunctionSpec::Sampled(_) => {
            if x == y {
                g.deriv(x)
            } else if (x - y).abs() < NEAR_DIAGONAL {
                Ok(0.5 * (g.deriv(x)? + g.deriv(y)?))
            } else {
                Ok((g.eval(x)? - g.eval(y)?) / (x - y))
            }
        }
    }
}

/// One atom's contribution: `w·sinh(α dx)/dx · sech(a)·sech(b)`, which equals
/// `w (tanh a − tanh b)/dx` without the cancellation.
fn atom_divided_difference(a: &TanhAtom, dx: f64, ax: f64, ay: f64, sech_x: f64, sech_y: f64) -> f64 {
    let u = a.scale() * dx;
    if u.abs() > FAR_SEPARATION {
        return a.weight() * (ax.tanh() - ay.tanh()) / dx;
    }
    a.weight() * a.scale() * sinhc(u) * sech_x * sech_y
}

/// `sinh(u)/u` with a Taylor branch near zero.
fn sinhc(u: f64) -> f64 {
    if u.abs() < NEAR_DIAGONAL {
        let u2 = u * u;
        1.0 + u2 / 6.0 * (1.0 + u2 / 20.0)
    } else {
        u.sinh() / u
    }
}

/// Divided differences of one function tabulated on a grid.
enum DifferenceTable {
    Mixture {
        atoms: Vec<TanhAtom>,
        // per atom: α(x_i − t) and sech of it
        scaled: Vec<Vec<f64>>,
        sech: Vec<Vec<f64>>,
    },
    Sampled {
        values: Vec<f64>,
        derivs: Vec<f64>,
    },
}

impl DifferenceTable {
    fn new(spec: &FunctionSpec, grid: &Grid) -> Result<Self> {
        Ok(match spec {
            FunctionSpec::TanhMixture(m) => {
                let scaled: Vec<Vec<f64>> = m
                    .atoms()
                    .iter()
                    .map(|a| grid.nodes().iter().map(|x| a.scale() * (x - a.center())).collect())
                    .collect();
                let sech = scaled
                    .iter()
                    .map(|row| row.iter().map(|&v| funclib::sech(v)).collect())
                    .collect();
                DifferenceTable::Mixture { atoms: m.atoms().to_vec(), scaled, sech }
            }
            FunctionSpec::Sampled(_) => DifferenceTable::Sampled {
                values: spec.sample_values(grid)?,
                derivs: spec.sample_derivative(grid)?,
            },
        })
    }

    fn get(&self, nodes: &[f64], i: usize, j: usize) -> f64 {
        let (i, j) = (i.min(j), i.max(j));
        let dx = nodes[i] - nodes[j];
        match self {
            DifferenceTable::Mixture { atoms, scaled, sech } => atoms
                .iter()
                .enumerate()
                .map(|(k, a)| atom_divided_difference(a, dx, scaled[k][i], scaled[k][j], sech[k][i], sech[k][j]))
                .sum(),
            DifferenceTable::Sampled { values, derivs } => {
                if i == j {
                    derivs[i]
                } else if dx.abs() < NEAR_DIAGONAL {
                    0.5 * (derivs[i] + derivs[j])
                } else {
                    (values[i] - values[j]) / dx
                }
            }
        }
    }
}

/// `f̂′` on the lags `d·h`, `d = 0..n`; negative lags are conjugates since `f′` is real.
fn lag_transform_table(spec: &FunctionSpec, grid: &Grid) -> Result<Vec<Complex64>> {
    let n = grid.len();
    let h = grid.spacing();
    match spec {
        FunctionSpec::TanhMixture(m) => Ok((0..n)
            .map(|d| funclib::fhat_prime_closed(m.atoms(), d as f64 * h))
            .collect()),
        FunctionSpec::Sampled(_) => {
            let samples = spec.sample_derivative(grid)?;
            funclib::check_tail_decay(&samples)?;
            Ok((0..n)
                .into_par_iter()
                .map(|d| funclib::transform_samples(&samples, grid, d as f64 * h))
                .collect())
        }
    }
}

fn check_pair(a: &FunctionSpec, b: &FunctionSpec) -> Result<()> {
    if !a.is_strictly_monotone() || !b.is_strictly_monotone() {
        return Err(Error::param("both functions must be non-constant and increasing"));
    }
    Ok(())
}

/// `multiplier` enters through its divided differences, `symbol` through the
/// transform of its derivative at lag `sign·(x_j − x_i)`.
fn assemble(multiplier: &FunctionSpec, symbol: &FunctionSpec, grid: &Grid, side: Side) -> Result<KernelMatrix> {
    check_pair(multiplier, symbol)?;
    let n = grid.len();
    let differences = DifferenceTable::new(multiplier, grid)?;
    let lags = lag_transform_table(symbol, grid)?;
    let sqrt_w: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
    let nodes = grid.nodes();

    let mut data = vec![Complex64::new(0.0, 0.0); n * n];
    data.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for (j, entry) in row.iter_mut().enumerate() {
            // position: f̂′(x_j − x_i); momentum: ĝ′(ξ_i − ξ_j)
            let forward = match side {
                Side::Position => j >= i,
                Side::Momentum => i >= j,
            };
            let t = lags[i.abs_diff(j)];
            let t = if forward { t } else { t.conj() };
            let dd = differences.get(nodes, i, j);
            *entry = t * (sqrt_w[i] * sqrt_w[j] * INV_SQRT_2PI * dd);
        }
    });
    Ok(KernelMatrix { grid: grid.clone(), side, entries: CMatrix::from_rows(n, data) })
}

/// Weighted discretization of the kernel of `i[f(P), g(Q)]`.
pub fn assemble_position_kernel(g: &FunctionSpec, f: &FunctionSpec, grid: &Grid) -> Result<KernelMatrix> {
    assemble(g, f, grid, Side::Position)
}

/// Weighted discretization of the Fourier-side kernel, unitarily equivalent
/// to the position side.
pub fn assemble_momentum_kernel(g: &FunctionSpec, f: &FunctionSpec, grid: &Grid) -> Result<KernelMatrix> {
    assemble(f, g, grid, Side::Momentum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funclib::SampledFunction;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn tanh() -> FunctionSpec {
        FunctionSpec::atom(1.0, 0.0, 1.0).unwrap()
    }

    fn kato_f() -> FunctionSpec {
        FunctionSpec::atom(FRAC_PI_2, 0.0, 1.0).unwrap()
    }

    #[test]
    fn divided_difference_examples() {
        assert_eq!(divided_difference(&tanh(), 0.0, 0.0).unwrap(), 1.0);
        let v = divided_difference(&tanh(), 1.0, -1.0).unwrap();
        assert!((v - 0.5 * (1f64.tanh() - (-1f64).tanh())).abs() < 1e-15);
        assert!((divided_difference(&tanh(), 1e-9, 0.0).unwrap() - 1.0).abs() < 1e-12);
        // far apart and far out: no NaN
        let far = divided_difference(&tanh(), 400.0, -400.0).unwrap();
        assert!((far - 2.0 / 800.0).abs() < 1e-15);
        assert_eq!(divided_difference(&tanh(), 800.0, 800.5).unwrap(), 0.0);
    }

    #[test]
    fn divided_difference_matches_naive_off_diagonal() {
        let g = FunctionSpec::mixture(
            vec![TanhAtom::new(0.8, -0.5, 0.3).unwrap(), TanhAtom::new(2.0, 1.0, 1.1).unwrap()],
            0.4,
        );
        for &(x, y) in &[(0.3, -1.2), (2.0, 1.5), (-3.0, 4.0), (0.01, 0.02)] {
            let naive = (g.eval(x).unwrap() - g.eval(y).unwrap()) / (x - y);
            assert!((divided_difference(&g, x, y).unwrap() - naive).abs() < 1e-13);
        }
    }

    #[test]
    fn kato_pair_kernel_at_origin() {
        let grid = Grid::standard();
        let k = assemble_position_kernel(&tanh(), &kato_f(), &grid).unwrap();
        let c = grid.center_index();
        let value = k.kernel_value(c, c);
        // route 1: (2π)^{-1/2} g′(0) f̂′(0); route 2: φ(0)²/π with φ = sech
        let route1 = INV_SQRT_2PI * 1.0 * funclib::fhat_prime_closed(kato_f().atoms().unwrap(), 0.0).re;
        let route2 = 1.0 / PI;
        assert!((value.re - route1).abs() < 1e-15);
        assert!((value.re - route2).abs() < 1e-15);
        // the whole kernel is π^{-1} sech x sech y
        for &(i, j) in &[(c, c + 7), (c - 40, c + 13), (10, 700)] {
            let (x, y) = (grid.nodes()[i], grid.nodes()[j]);
            let exact = 1.0 / (PI * x.cosh() * y.cosh());
            assert!((k.kernel_value(i, j) - exact).norm() < 1e-15);
        }
    }

    #[test]
    fn momentum_kernel_at_origin() {
        let grid = Grid::standard();
        let k = assemble_momentum_kernel(&tanh(), &kato_f(), &grid).unwrap();
        let c = grid.center_index();
        assert!((k.kernel_value(c, c).re - 0.5).abs() < 1e-14);
        assert!(k.diagonal().iter().all(|&d| d >= 0.0));
        assert!(k.relative_hermitian_defect() < 1e-12);
    }

    #[test]
    fn diagonal_limit_formula() {
        let grid = Grid::new(12.0, 241).unwrap();
        let g = FunctionSpec::mixture(vec![TanhAtom::new(1.3, 0.7, 0.4).unwrap()], 0.0);
        let f = FunctionSpec::mixture(
            vec![TanhAtom::new(0.9, -0.3, 1.0).unwrap(), TanhAtom::new(2.0, 1.0, 0.2).unwrap()],
            0.0,
        );
        let k = assemble_position_kernel(&g, &f, &grid).unwrap();
        let scale = k.entries().max_abs() / grid.spacing();
        for (i, &x) in grid.nodes().iter().enumerate() {
            let expected = g.deriv(x).unwrap() * f.bracket() / (2.0 * PI);
            assert!((k.diagonal()[i] - expected).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn shifted_atoms_are_hermitian_and_complex() {
        let grid = Grid::new(15.0, 301).unwrap();
        let g = FunctionSpec::mixture(vec![TanhAtom::new(1.0, 0.5, 1.0).unwrap()], 0.0);
        let f = FunctionSpec::mixture(vec![TanhAtom::new(1.2, 1.5, 0.7).unwrap()], 0.0);
        let k = assemble_position_kernel(&g, &f, &grid).unwrap();
        assert!(!k.entries().is_real());
        assert_eq!(k.entries().hermitian_defect(), 0.0);
        let (i, j) = (100, 180);
        assert_eq!(k.entries()[(i, j)], k.entries()[(j, i)].conj());
    }

    #[test]
    fn constant_shift_is_bit_identical() {
        let grid = Grid::new(10.0, 101).unwrap();
        let g = tanh();
        let f = kato_f();
        let a = assemble_position_kernel(&g, &f, &grid).unwrap();
        let b = assemble_position_kernel(&g.with_offset(3.7), &f.with_offset(-1.1), &grid).unwrap();
        assert_eq!(a.entries(), b.entries());
    }

    #[test]
    fn constant_functions_rejected() {
        let grid = Grid::new(5.0, 11).unwrap();
        let c = FunctionSpec::mixture(vec![], 1.0);
        assert!(matches!(assemble_position_kernel(&c, &tanh(), &grid), Err(Error::Parameter(_))));
    }

    #[test]
    fn sampled_symbol_matches_closed_form() {
        let grid = Grid::new(20.0, 401).unwrap();
        let f = kato_f();
        let sampled = FunctionSpec::sampled(
            SampledFunction::from_fn(&grid, |x| f.eval(x).unwrap(), |x| f.deriv(x).unwrap()).unwrap(),
        );
        let a = assemble_position_kernel(&tanh(), &f, &grid).unwrap();
        let b = assemble_position_kernel(&tanh(), &sampled, &grid).unwrap();
        let diff = a
            .entries()
            .as_slice()
            .iter()
            .zip(b.entries().as_slice())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-9 * a.entries().max_abs(), "diff {diff}");
    }
}
