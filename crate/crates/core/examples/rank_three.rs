//! An indefinite finite-rank commutator: `f = tanh(π/2·) + β tanh(π·)`.

use std::f64::consts::PI;

use katolab::cli::experiments::{phi_minus, rank_three_pair};
use katolab::kernel::assemble_position_kernel;
use katolab::spectral::{eigendecompose, extract_modes, signed_modes};
use katolab::Grid;

fn main() -> katolab::Result<()> {
    let beta = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.1);
    let (g, f) = rank_three_pair(beta)?;
    let grid = Grid::standard();
    let result = eigendecompose(&assemble_position_kernel(&g, &f, &grid)?)?;

    println!("beta = {beta}, rank {}", result.numerical_rank());
    for mode in result.modes() {
        println!("  eigenvalue[{}] = {:+.12}", mode.index, mode.eigenvalue);
    }
    println!("expected minimum (beta/2pi)(2 - pi) = {:+.12}", beta / (2.0 * PI) * (2.0 - PI));

    if let Some(negative) = result.most_negative_mode() {
        let c = grid.center_index();
        let k = c + 20;
        let ratio = negative.values[k].re / phi_minus(grid.nodes()[k]);
        println!("negative mode / phi_- at x = {}: {ratio:.9}", grid.nodes()[k]);
    }
    match extract_modes(&result) {
        Ok(_) => println!("positive: plain modes available"),
        Err(e) => println!("plain modes refused ({e}); {} signed modes instead", signed_modes(&result).len()),
    }
    Ok(())
}
