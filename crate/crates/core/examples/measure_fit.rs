//! Recovering `g = Σ m tanh(r̂(x − t)) + c` by non-negative least squares.

use katolab::measurefit::{default_atom_grid, fit_measure, reconstruct};
use katolab::{FunctionSpec, Grid, TanhAtom};

fn main() -> katolab::Result<()> {
    let grid = Grid::standard();
    let atoms = default_atom_grid(&grid)?;
    let g = FunctionSpec::mixture(vec![TanhAtom::new(1.0, -1.0, 0.5)?, TanhAtom::new(1.0, 1.0, 0.5)?], 0.2);

    for r_hat in [1.0, 2.0, 0.5] {
        let fit = fit_measure(&g, r_hat, &atoms, &grid)?;
        println!(
            "r_hat = {r_hat}: {} atoms, mass {:.8}, offset {:.8}, residual {:.3e}",
            fit.measure.atoms().len(),
            fit.measure.total_mass(),
            fit.measure.offset(),
            fit.residual
        );
        if let Some(w) = &fit.conditioning_warning {
            println!("  warning: {w}");
        }
    }

    let fit = fit_measure(&g, 1.0, &atoms, &grid)?;
    println!("{}", serde_json::to_string_pretty(&fit.to_json())?);
    let back = reconstruct(&fit.measure)?;
    let err = grid
        .nodes()
        .iter()
        .map(|&x| Ok((back.eval(x)? - g.eval(x)?).abs()))
        .collect::<katolab::Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    println!("round trip sup error {err:.3e}");
    Ok(())
}
