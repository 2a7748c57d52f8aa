//! Driving the pipeline from a JSON config, as the `run` subcommand does.

use katolab::cli::{run, ExperimentConfig, RunOptions};

const CONFIG: &str = r#"{
    "f": {"type": "tanh_mixture", "atoms": [{"scale": 1.5707963267948966, "center": 0, "weight": 1}]},
    "g": {"type": "tanh_mixture", "atoms": [{"scale": 1, "center": 0, "weight": 1}]},
    "grid": {"L": 20, "n": 801},
    "ops": [
        "spectrum",
        {"assert_rank": {"rank": 1}},
        "assert_positive",
        {"assert_top_eigenvalue": {"value": 0.6366197723675814}},
        {"diagonal_identity": {}},
        {"duality": {}},
        {"strip_product": {"target": 1.5707963267948966}},
        {"exp_moment": {"s": 0.5, "of": "g"}},
        {"herglotz": {"r": 1.56}},
        {"measure_fit": {"r_hat": 1.0, "max_residual": 1e-8}}
    ]
}"#;

fn main() -> katolab::Result<()> {
    let out = tempfile::tempdir()?;
    let config = ExperimentConfig::from_json(CONFIG)?;
    let outcome = run(&config, &RunOptions { out_dir: Some(out.path().to_path_buf()), ..RunOptions::default() })?;
    for check in &outcome.checks {
        println!("{:<28} {:<5} {:.6e}", check.name, check.passed, check.value);
    }
    println!("exit code {}", outcome.exit_code());
    for file in &outcome.files {
        println!("wrote {}", file.file_name().unwrap().to_string_lossy());
    }
    Ok(())
}
