//! The same commutator seen from position and momentum space.

use katolab::kernel::{assemble_momentum_kernel, assemble_position_kernel};
use katolab::spectral::{diagonal_identity_residual, eigendecompose, spectral_gap};
use katolab::{FunctionSpec, Grid, TanhAtom};

fn main() -> katolab::Result<()> {
    let grid = Grid::standard();
    let g = FunctionSpec::mixture(vec![TanhAtom::new(1.2, 0.4, 0.8)?], 0.0);
    let f = FunctionSpec::mixture(vec![TanhAtom::new(1.1, -0.3, 1.0)?, TanhAtom::new(2.0, 0.5, 0.3)?], 0.0);

    let position = eigendecompose(&assemble_position_kernel(&g, &f, &grid)?)?;
    let momentum = eigendecompose(&assemble_momentum_kernel(&g, &f, &grid)?)?;

    println!("{:>4} {:>22} {:>22}", "j", "position", "momentum");
    for (j, (p, m)) in position.by_magnitude().iter().zip(momentum.by_magnitude()).take(6).enumerate() {
        println!("{j:>4} {p:>22.15e} {m:>22.15e}");
    }
    println!("top-10 gap {:.3e}", spectral_gap(position.eigenvalues(), momentum.eigenvalues()));
    println!(
        "diagonal identities: position {:.3e}, momentum {:.3e}",
        diagonal_identity_residual(&position, &g, &f)?,
        diagonal_identity_residual(&momentum, &g, &f)?
    );
    Ok(())
}
