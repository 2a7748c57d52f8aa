use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use katolab::kernel::assemble_position_kernel;
use katolab::spectral::eigendecompose;
use katolab::{FunctionSpec, Grid};

fn main() -> katolab::Result<()> {
    let grid = Grid::standard();
    let g = FunctionSpec::atom(1.0, 0.0, 1.0)?;
    let f = FunctionSpec::atom(FRAC_PI_2, 0.0, 1.0)?;
    let t = Instant::now();
    let kernel = assemble_position_kernel(&g, &f, &grid)?;
    let result = eigendecompose(&kernel)?;
    println!("{} nodes in {:.2?}", grid.len(), t.elapsed());
    println!("top eigenvalue {:.15} (2/pi = {:.15})", result.eigenvalues()[0], 2.0 / PI);
    println!("second eigenvalue {:e}", result.eigenvalues()[1]);
    println!("numerical rank {}", result.numerical_rank());
    Ok(())
}
