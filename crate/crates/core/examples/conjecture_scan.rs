//! Minimum eigenvalue and strip product across a family of pairs.

use katolab::cli::experiments::scan_rows;
use katolab::cli::{ScanConfig, SweepAxis};

fn main() -> katolab::Result<()> {
    let mut config = ScanConfig::default_sweep();
    config.axes = vec![
        SweepAxis { param: "f.atoms.0.scale".into(), values: vec![1.3, 1.5, std::f64::consts::FRAC_PI_2, 1.7] },
        SweepAxis { param: "f.atoms.1.weight".into(), values: vec![0.02, 0.2] },
    ];
    let rows = scan_rows(&config, katolab::spectral::DEFAULT_REL_TOL)?;
    println!("{:>8} {:>8} {:>14} {:>5} {:>10}", "scale", "weight", "min eig", "rank", "r r'");
    let mut i = 0;
    for scale in &config.axes[0].values {
        for weight in &config.axes[1].values {
            let row = rows[i];
            println!(
                "{scale:>8.4} {weight:>8.3} {:>14.6e} {:>5} {:>10.6}",
                row.min_eigenvalue,
                row.rank.map_or("-".into(), |r| r.to_string()),
                row.product
            );
            i += 1;
        }
    }
    Ok(())
}
