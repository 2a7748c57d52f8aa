//! Sign of `Im g` in the strip and exponential moments of `g′`.

use std::f64::consts::FRAC_PI_2;

use katolab::katoclass::{exp_moment, herglotz_grid_check, DEFAULT_HERGLOTZ_LEVELS};
use katolab::{FunctionSpec, Grid, TanhAtom};

fn main() -> katolab::Result<()> {
    let grid = Grid::standard();
    let tanh = FunctionSpec::atom(1.0, 0.0, 1.0)?;
    let mixture = FunctionSpec::mixture(
        vec![TanhAtom::new(0.7, -2.0, 0.3)?, TanhAtom::new(1.0, 0.5, 1.0)?, TanhAtom::new(1.3, 3.0, 0.6)?],
        0.25,
    );

    for (name, g) in [("tanh", &tanh), ("mixture", &mixture)] {
        let strip = g.strip_half_width().expect("closed form");
        let ok = herglotz_grid_check(g, strip - 0.01, &grid, DEFAULT_HERGLOTZ_LEVELS)?;
        println!("{name}: strip {strip:.6}, Herglotz on the grid: {ok}");
    }
    match herglotz_grid_check(&tanh, FRAC_PI_2 + 0.1, &grid, DEFAULT_HERGLOTZ_LEVELS) {
        Err(e) => println!("beyond the strip: {e}"),
        Ok(ok) => println!("beyond the strip: {ok}"),
    }

    let wide = Grid::new(40.0, 1601)?;
    for s in [0.0, 0.5, 1.0, 1.5, 2.5] {
        let m = exp_moment(&tanh, s, &wide)?;
        println!("int e^(s|x|) sech^2, s = {s}: {:.12} {}", m.value, if m.diverging { "(diverging)" } else { "" });
    }
    Ok(())
}
