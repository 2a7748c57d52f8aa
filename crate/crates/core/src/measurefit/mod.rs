//! Discrete recovery of the representing measure of `g`, that is
//! `g(x) = Σ m_i tanh(r̂(x − t_i)) + c` with `m_i ≥ 0`, by non-negative least
//! squares on `g′`.

mod nnls;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::funclib::{self, FunctionSpec, TanhAtom};
use crate::grid::Grid;

/// Gradient tolerance of the active-set solver, relative to `max |Aᵀb|`.
pub const GRADIENT_TOL: f64 = 1e-10;

/// Sample nodes per atom in the default atom grid.
pub const DEFAULT_SUBSAMPLE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureAtom {
    pub t: f64,
    pub m: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    atoms: Vec<MeasureAtom>,
    r_hat: f64,
    offset: f64,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<MeasureAtom>, r_hat: f64, offset: f64) -> Result<Self> {
        if !(r_hat.is_finite() && r_hat > 0.0) {
            return Err(Error::param("r_hat must be positive"));
        }
        if atoms.iter().any(|a| !(a.m >= 0.0) || !a.t.is_finite()) {
            return Err(Error::param("masses must be non-negative and centers finite"));
        }
        Ok(DiscreteMeasure { atoms, r_hat, offset })
    }

    pub fn atoms(&self) -> &[MeasureAtom] {
        &self.atoms
    }

    pub fn r_hat(&self) -> f64 {
        self.r_hat
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.m).sum()
    }
}

#[derive(Debug, Clone)]
pub struct MeasureFit {
    pub measure: DiscreteMeasure,
    /// Weighted RMS misfit of `g′`.
    pub residual: f64,
    pub conditioning_warning: Option<String>,
}

#[derive(Debug, Serialize)]
struct MeasureJson<'a> {
    r_hat: f64,
    offset: f64,
    atoms: &'a [MeasureAtom],
    residual: f64,
}

impl MeasureFit {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(MeasureJson {
            r_hat: self.measure.r_hat,
            offset: self.measure.offset,
            atoms: &self.measure.atoms,
            residual: self.residual,
        })
        .expect("measure serializes")
    }
}

/// Sample-grid nodes taken every [`DEFAULT_SUBSAMPLE`]-th, when the node count allows.
pub fn default_atom_grid(sample_grid: &Grid) -> Result<Grid> {
    let intervals = sample_grid.len() - 1;
    if !intervals.is_multiple_of(2 * DEFAULT_SUBSAMPLE) {
        return Err(Error::param("sample grid does not subsample evenly"));
    }
    Grid::new(sample_grid.half_width(), intervals / DEFAULT_SUBSAMPLE + 1)
}

/// Fit `g′(x) ≈ r̂ Σ m_i sech²(r̂(x − t_i))` with atoms at the `atom_grid`
/// nodes, weighted by the `sample_grid` quadrature.
pub fn fit_measure(g: &FunctionSpec, r_hat: f64, atom_grid: &Grid, sample_grid: &Grid) -> Result<MeasureFit> {
    if atom_grid.half_width() > sample_grid.half_width() {
        return Err(Error::param("atom grid must lie inside the sample grid"));
    }
    fit_on(g, r_hat, atom_grid.nodes(), sample_grid.nodes(), sample_grid.weights())
}

fn fit_on(g: &FunctionSpec, r_hat: f64, centers: &[f64], nodes: &[f64], weights: &[f64]) -> Result<MeasureFit> {
    if !(r_hat.is_finite() && r_hat > 0.0) {
        return Err(Error::param("r_hat must be positive"));
    }
    if centers.is_empty() {
        return Err(Error::param("no atom centers"));
    }
    let rows = nodes.len();
    let sqrt_w: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let mut data = Vec::with_capacity(rows * centers.len());
    for &t in centers {
        for (&x, s) in nodes.iter().zip(&sqrt_w) {
            let sech = funclib::sech(r_hat * (x - t));
            data.push(s * r_hat * sech * sech);
        }
    }
    let design = nnls::Design { rows, cols: centers.len(), data };
    let mut target = Vec::with_capacity(rows);
    for (&x, s) in nodes.iter().zip(&sqrt_w) {
        target.push(s * g.deriv(x)?);
    }

    let scale = (0..design.cols)
        .map(|j| design.column(j).iter().zip(&target).map(|(a, b)| a * b).sum::<f64>().abs())
        .fold(0.0, f64::max);
    let solution = nnls::solve(&design, &target, GRADIENT_TOL * scale.max(1.0));

    let atoms: Vec<MeasureAtom> = centers
        .iter()
        .zip(&solution.x)
        .filter(|(_, &m)| m > 0.0)
        .map(|(&t, &m)| MeasureAtom { t, m })
        .collect();

    let total_weight: f64 = weights.iter().sum();
    let mut offset_sum = 0.0;
    let mut misfit = 0.0;
    for (i, (&x, &w)) in nodes.iter().zip(weights).enumerate() {
        let model: f64 = atoms.iter().map(|a| a.m * (r_hat * (x - a.t)).tanh()).sum();
        offset_sum += w * (g.eval(x)? - model);
        let fitted: f64 = solution
            .x
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0.0)
            .map(|(j, &m)| design.column(j)[i] * m)
            .sum();
        misfit += (target[i] - fitted).powi(2);
    }

    let mut warnings = Vec::new();
    if solution.rank_deficient {
        warnings.push("rank-deficient passive set");
    }
    if !solution.converged {
        warnings.push("active-set iteration limit reached");
    }
    Ok(MeasureFit {
        measure: DiscreteMeasure::new(atoms, r_hat, offset_sum / total_weight)?,
        residual: (misfit / total_weight).sqrt(),
        conditioning_warning: (!warnings.is_empty()).then(|| warnings.join("; ")),
    })
}

/// `Σ m_i tanh(r̂(x − t_i)) + c` as a mixture.
pub fn reconstruct(measure: &DiscreteMeasure) -> Result<FunctionSpec> {
    let atoms = measure
        .atoms
        .iter()
        .filter(|a| a.m > 0.0)
        .map(|a| TanhAtom::new(measure.r_hat, a.t, a.m))
        .collect::<Result<Vec<_>>>()?;
    Ok(FunctionSpec::mixture(atoms, measure.offset))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample_grid() -> Grid {
        Grid::standard()
    }

    fn sup_error(a: &FunctionSpec, b: &FunctionSpec, grid: &Grid) -> f64 {
        grid.nodes()
            .iter()
            .map(|&x| (a.eval(x).unwrap() - b.eval(x).unwrap()).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn tanh_is_one_atom() {
        let grid = sample_grid();
        let g = FunctionSpec::atom(1.0, 0.0, 1.0).unwrap();
        let fit = fit_measure(&g, 1.0, &default_atom_grid(&grid).unwrap(), &grid).unwrap();
        assert_eq!(fit.measure.atoms().len(), 1);
        let atom = fit.measure.atoms()[0];
        assert!(atom.t.abs() < 1e-12);
        assert!((atom.m - 1.0).abs() < 1e-6);
        assert!(fit.residual <= 1e-8);
        assert!(sup_error(&reconstruct(&fit.measure).unwrap(), &g, &grid) <= 1e-6);
    }

    #[test]
    fn two_atoms_recovered() {
        let grid = sample_grid();
        let g = FunctionSpec::mixture(
            vec![TanhAtom::new(1.0, 1.0, 0.5).unwrap(), TanhAtom::new(1.0, -1.0, 0.5).unwrap()],
            0.0,
        );
        let fit = fit_measure(&g, 1.0, &default_atom_grid(&grid).unwrap(), &grid).unwrap();
        let mass_near = |t0: f64| -> f64 {
            fit.measure.atoms().iter().filter(|a| (a.t - t0).abs() < 0.1).map(|a| a.m).sum()
        };
        assert!((mass_near(1.0) - 0.5).abs() < 1e-4);
        assert!((mass_near(-1.0) - 0.5).abs() < 1e-4);
        assert!(sup_error(&reconstruct(&fit.measure).unwrap(), &g, &grid) <= 1e-5);
    }

    #[test]
    fn wrong_family_misfits() {
        let grid = sample_grid();
        let g = FunctionSpec::atom(1.0, 0.0, 1.0).unwrap();
        let atoms = default_atom_grid(&grid).unwrap();
        // sech² is not a positive mixture of wider sech² bumps
        let wide = fit_measure(&g, 0.5, &atoms, &grid).unwrap();
        assert!(wide.residual > 1e-3);
        // scipy NNLS on the same design: residual 0.0755047, mass 1.28761
        assert!((wide.residual - 0.075_504_7).abs() < 1e-6, "{}", wide.residual);
        assert!((wide.measure.total_mass() - 1.287_61).abs() < 1e-5, "{}", wide.measure.total_mass());
        // narrower bumps can imitate it
        let narrow = fit_measure(&g, 2.0, &atoms, &grid).unwrap();
        assert!(narrow.residual < 1e-6);
        assert!((narrow.measure.total_mass() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn empty_measure_is_constant() {
        let m = DiscreteMeasure::new(vec![], 1.0, 0.3).unwrap();
        let f = reconstruct(&m).unwrap();
        assert_eq!(f.eval(5.0).unwrap(), 0.3);
        assert!(!f.is_strictly_monotone());
    }

    #[test]
    fn json_shape() {
        let grid = Grid::new(10.0, 201).unwrap();
        let g = FunctionSpec::atom(1.0, 0.0, 1.0).unwrap();
        let fit = fit_measure(&g, 1.0, &default_atom_grid(&grid).unwrap(), &grid).unwrap();
        let v = fit.to_json();
        assert!(v["r_hat"].is_number() && v["offset"].is_number() && v["residual"].is_number());
        assert!(v["atoms"][0]["t"].is_number() && v["atoms"][0]["m"].is_number());
    }

    #[test]
    fn nested_atom_grids_do_not_worsen() {
        let grid = Grid::new(10.0, 401).unwrap();
        let g = FunctionSpec::mixture(
            vec![TanhAtom::new(1.3, 0.35, 0.7).unwrap(), TanhAtom::new(0.8, -1.1, 0.4).unwrap()],
            0.0,
        );
        let mut previous = f64::INFINITY;
        for n in [11, 21, 41, 81] {
            let atoms = Grid::new(10.0, n).unwrap();
            let fit = fit_measure(&g, 0.9, &atoms, &grid).unwrap();
            assert!(fit.residual <= previous * (1.0 + 1e-6) + 1e-12, "n={n}");
            previous = fit.residual;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn translation_equivariance(
            shift_steps in -10i32..10,
            w0 in 0.1f64..1.0,
            w1 in 0.1f64..1.0,
        ) {
            let grid = Grid::new(12.0, 241).unwrap();
            let atom_grid = default_atom_grid(&grid).unwrap();
            let h = atom_grid.spacing();
            let t0 = shift_steps as f64 * h;
            let g = FunctionSpec::mixture(
                vec![TanhAtom::new(1.0, -5.0 * h, w0).unwrap(), TanhAtom::new(1.0, 4.0 * h, w1).unwrap()],
                0.2,
            );
            let moved = g.translate(t0).unwrap();
            let shifted_nodes: Vec<f64> = grid.nodes().iter().map(|x| x + t0).collect();
            let shifted_centers: Vec<f64> = atom_grid.nodes().iter().map(|x| x + t0).collect();
            let a = fit_on(&g, 1.0, atom_grid.nodes(), grid.nodes(), grid.weights()).unwrap();
            let b = fit_on(&moved, 1.0, &shifted_centers, &shifted_nodes, grid.weights()).unwrap();
            prop_assert_eq!(a.measure.atoms().len(), b.measure.atoms().len());
            for (p, q) in a.measure.atoms().iter().zip(b.measure.atoms()) {
                prop_assert!((q.t - p.t - t0).abs() < 1e-8);
                prop_assert!((q.m - p.m).abs() < 1e-8);
            }
            prop_assert!((a.measure.offset() - b.measure.offset()).abs() < 1e-8);
            prop_assert!((a.residual - b.residual).abs() < 1e-8);
        }

        #[test]
        fn masses_never_negative(
            scale in 0.5f64..2.0,
            center in -3.0f64..3.0,
            r_hat in 0.3f64..3.0,
        ) {
            let grid = Grid::new(10.0, 201).unwrap();
            let g = FunctionSpec::atom(scale, center, 1.0).unwrap();
            let fit = fit_measure(&g, r_hat, &default_atom_grid(&grid).unwrap(), &grid).unwrap();
            prop_assert!(fit.measure.atoms().iter().all(|a| a.m >= 0.0));
        }
    }
}
