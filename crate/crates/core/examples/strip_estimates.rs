//! Strip half-widths from derivative tails and transform decay.

use std::f64::consts::{FRAC_PI_2, PI};

use katolab::katoclass::{estimate_strip_from_partner, estimate_strip_from_transform, strip_product_report};
use katolab::{FunctionSpec, Grid, TanhAtom};

fn main() -> katolab::Result<()> {
    let grid = Grid::standard();
    let g = FunctionSpec::atom(1.0, 0.0, 1.0)?;
    let kato_f = FunctionSpec::atom(FRAC_PI_2, 0.0, 1.0)?;
    let three_f = FunctionSpec::mixture(vec![TanhAtom::new(FRAC_PI_2, 0.0, 1.0)?, TanhAtom::new(PI, 0.0, 0.1)?], 0.0);

    let tail = estimate_strip_from_partner(&kato_f.sample_derivative(&grid)?, &grid)?;
    println!("strip of g from the tail of f': {:.6} (R^2 {:.8}, {:?})", tail.half_width, tail.fit_quality, tail.side);
    if let Some(own) = estimate_strip_from_transform(&three_f, &grid)? {
        println!("strip of f from its own transform: {:.6} on k in [{:.1}, {:.1}]", own.half_width, own.fit_window.0, own.fit_window.1);
    }

    for (name, f, target) in [("kato", &kato_f, FRAC_PI_2), ("rank three", &three_f, PI / 4.0)] {
        let r = strip_product_report(&g, f, &grid)?;
        println!(
            "{name:>10}: r = {:.6}, r' = {:.6}, r r' = {:.6} (target {:.6})",
            r.r, r.r_prime, r.product, target
        );
        println!("{}", serde_json::to_string(&r)?);
    }
    Ok(())
}
