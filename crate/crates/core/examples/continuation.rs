//! Identities continued into the strip for the rank-one pair.

use std::f64::consts::FRAC_PI_2;

use katolab::katoclass::{plancherel_sides, strip_continuation_identity};
use katolab::{FunctionSpec, Grid};

fn main() -> katolab::Result<()> {
    let grid = Grid::standard();
    let g = FunctionSpec::atom(1.0, 0.0, 1.0)?;
    let f = FunctionSpec::atom(FRAC_PI_2, 0.0, 1.0)?;

    for y in [0.0, 0.3, 0.9, 1.5] {
        println!("diagonal identity at height {y}: residual {:.3e}", strip_continuation_identity(&g, &f, &grid, y)?);
    }
    if let Err(e) = strip_continuation_identity(&g, &f, &grid, 1.6) {
        println!("height 1.6: {e}");
    }

    for (y, s) in [(0.0, 0.0), (0.2, 0.0), (0.2, 0.3), (-0.7, 0.4)] {
        let (lhs, rhs) = plancherel_sides(y, s, &grid)?;
        println!("y = {y:+}, s = {s:+}: {lhs:.15} vs {rhs:.15}");
    }
    Ok(())
}
