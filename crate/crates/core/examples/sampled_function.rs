//! Tabulated functions enter the pipeline through CSV.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use katolab::kernel::assemble_position_kernel;
use katolab::spectral::eigendecompose;
use katolab::{FunctionSpec, Grid, SampledFunction};

fn main() -> katolab::Result<()> {
    let grid = Grid::standard();
    let mut file = tempfile::NamedTempFile::new()?;
    writeln!(file, "x,value,derivative")?;
    for &x in grid.nodes() {
        let t = (FRAC_PI_2 * x).tanh();
        writeln!(file, "{x},{t},{}", FRAC_PI_2 * (1.0 - t * t))?;
    }
    file.flush()?;

    let f = FunctionSpec::sampled(SampledFunction::read_csv(file.path())?);
    let g = FunctionSpec::atom(1.0, 0.0, 1.0)?;
    let result = eigendecompose(&assemble_position_kernel(&g, &f, &grid)?)?;
    println!("sampled f: rank {}, top eigenvalue {:.12}", result.numerical_rank(), result.eigenvalues()[0]);

    let closed = FunctionSpec::atom(FRAC_PI_2, 0.0, 1.0)?;
    for k in [0.0, 1.0, 3.0] {
        println!("f^'({k}): sampled {:.12}, closed {:.12}", f.fhat_prime(k, &grid)?.re, closed.fhat_prime(k, &grid)?.re);
    }
    Ok(())
}
