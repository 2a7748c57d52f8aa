use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const KATO_ATOMS_F: &str = r#"{"type": "tanh_mixture", "atoms": [{"scale": 1.5707963267948966, "center": 0, "weight": 1}]}"#;
const TANH: &str = r#"{"type": "tanh_mixture", "atoms": [{"scale": 1, "center": 0, "weight": 1}]}"#;
const RANK_THREE_F: &str = r#"{"type": "tanh_mixture", "atoms": [
    {"scale": 1.5707963267948966, "center": 0, "weight": 1},
    {"scale": 3.141592653589793, "center": 0, "weight": 0.1}]}"#;

fn katolab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_katolab"))
        .args(args)
        .current_dir(dir)
        .env_remove("KATOLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, f: &str, g: &str, n: usize, ops: &str) -> String {
    let text = format!(r#"{{"f": {f}, "g": {g}, "grid": {{"L": 20, "n": {n}}}, "ops": {ops}, "out_dir": "out"}}"#);
    std::fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn check<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["checks"].as_array().unwrap().iter().find(|c| c["name"] == name).unwrap()
}

#[test]
fn run_kato_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "kato.json", KATO_ATOMS_F, TANH, 801, r#"["spectrum", {"assert_rank": {"rank": 1}}]"#);
    let out = katolab(&["run", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let eig = std::fs::read_to_string(dir.path().join("out/eigenvalues.csv")).unwrap();
    assert!(eig.starts_with("index,eigenvalue\n0,0.63661977236758"));
    let modes = std::fs::read_to_string(dir.path().join("out/modes.csv")).unwrap();
    assert!(modes.starts_with("node,mode_index,re,im\n"));
    assert_eq!(modes.lines().count(), 802);
    assert_eq!(report(&dir.path().join("out"))["passed"], true);
}

#[test]
fn even_node_count_is_invalid_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "even.json", KATO_ATOMS_F, TANH, 800, r#"["spectrum"]"#);
    let out = katolab(&["run", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
    assert!(!dir.path().join("out").exists());
}

#[test]
fn invalid_configs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("extra.json"), format!(r#"{{"f": {KATO_ATOMS_F}, "g": {TANH}, "colour": 1}}"#)).unwrap();
    assert_eq!(katolab(&["run", "--config", "extra.json", "--out", "o"], dir.path()).status.code(), Some(2));
    assert_eq!(katolab(&["run", "--config", "missing.json", "--out", "o"], dir.path()).status.code(), Some(2));
    assert_eq!(katolab(&["run"], dir.path()).status.code(), Some(2));
    assert_eq!(katolab(&["frobnicate"], dir.path()).status.code(), Some(2));
    let cfg = write_config(dir.path(), "k.json", KATO_ATOMS_F, TANH, 101, r#"["spectrum"]"#);
    assert_eq!(katolab(&["run", "--config", &cfg, "--tol", "2"], dir.path()).status.code(), Some(2));
    let constant = r#"{"type": "tanh_mixture", "atoms": [], "offset": 1}"#;
    let cfg = write_config(dir.path(), "c.json", constant, TANH, 101, r#"["spectrum"]"#);
    assert_eq!(katolab(&["run", "--config", &cfg], dir.path()).status.code(), Some(2));
    assert!(!dir.path().join("o").exists() && !dir.path().join("out").exists());
}

#[test]
fn positivity_assertion_fails_on_rank_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "r3.json", RANK_THREE_F, TANH, 801, r#"["spectrum", "assert_positive"]"#);
    let out = katolab(&["run", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let r = report(&dir.path().join("out"));
    assert_eq!(check(&r, "positivity")["passed"], false);
    assert!(r["spectrum"]["min_eigenvalue"].as_f64().unwrap() < 0.0);
}

#[test]
fn all_ops_run_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let ops = r#"["spectrum", {"diagonal_identity": {}}, {"duality": {}}, {"strip_product": {"target": 1.5707963267948966}},
        {"exp_moment": {"s": 0.5, "of": "g"}}, {"herglotz": {"r": 1.5}}, {"measure_fit": {"r_hat": 1, "max_residual": 1e-8}},
        {"assert_top_eigenvalue": {"value": 0.6366197723675814}}, {"assert_min_eigenvalue": {"value": 0, "tol": 1e-8}}]"#;
    let cfg = write_config(dir.path(), "all.json", KATO_ATOMS_F, TANH, 801, ops);
    let out = katolab(&["run", "--config", &cfg, "--out", "elsewhere", "--dump-kernel"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let base = dir.path().join("elsewhere");
    let kernel = std::fs::read_to_string(base.join("kernel.csv")).unwrap();
    assert_eq!(kernel.lines().count(), 801);
    assert_eq!(kernel.lines().next().unwrap().split(',').count(), 2 * 801);
    let r = report(&base);
    assert_eq!(r["checks"].as_array().unwrap().len(), 8);
    let measure = &r["results"].as_array().unwrap().iter().find(|v| v["op"] == "measure_fit").unwrap()["measure"];
    assert_eq!(measure["atoms"].as_array().unwrap().len(), 1);
}

#[test]
fn sampled_function_path_is_relative_to_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("cfg")).unwrap();
    let mut csv = String::from("x,value,derivative\n");
    for i in 0..=800 {
        let x = -20.0 + 0.05 * i as f64;
        let t = (FRAC_PI_2 * x).tanh();
        csv.push_str(&format!("{x},{t},{}\n", FRAC_PI_2 * (1.0 - t * t)));
    }
    std::fs::write(dir.path().join("cfg/f.csv"), csv).unwrap();
    write_config(&dir.path().join("cfg"), "s.json", r#"{"type": "sampled", "path": "f.csv"}"#, TANH, 801, r#"[{"assert_rank": {"rank": 1}}]"#);
    let out = katolab(&["run", "--config", "cfg/s.json", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "k.json", RANK_THREE_F, TANH, 401, r#"["spectrum", {"duality": {}}]"#);
    katolab(&["run", "--config", &cfg, "--out", "a", "--threads", "1"], dir.path());
    katolab(&["run", "--config", &cfg, "--out", "b", "--threads", "4"], dir.path());
    for file in ["eigenvalues.csv", "modes.csv", "report.json"] {
        let a = std::fs::read(dir.path().join("a").join(file)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
}

#[test]
fn verify_rank_one_variants() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(katolab(&["verify-rank-one", "--out", "d"], dir.path()).status.code(), Some(0));
    let r = report(&dir.path().join("d"));
    for name in ["rank", "positivity", "top_eigenvalue", "mode_overlap", "diagonal_identity_position", "duality"] {
        assert_eq!(check(&r, name)["passed"], true, "{name}");
    }

    assert_eq!(katolab(&["verify-rank-one", "--nodes", "101", "--out", "c"], dir.path()).status.code(), Some(0));
    assert_eq!(report(&dir.path().join("c"))["relaxation"], 100.0);
    // 51 nodes is too coarse even for the relaxed tolerances
    assert_eq!(katolab(&["verify-rank-one", "--nodes", "51", "--out", "c51"], dir.path()).status.code(), Some(1));

    let out = katolab(&["verify-rank-one", "--f-scale", "1.6", "--report-only", "--out", "p"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = report(&dir.path().join("p"));
    assert!(r["rank"].as_u64().unwrap() >= 2);
    assert_eq!(r["passed"], false);
    assert_eq!(katolab(&["verify-rank-one", "--f-scale", "1.6", "--out", "q"], dir.path()).status.code(), Some(1));
}

#[test]
fn verify_rank_three_variants() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(katolab(&["verify-rank-three", "--out", "d"], dir.path()).status.code(), Some(0));
    let r = report(&dir.path().join("d"));
    for name in ["min_eigenvalue", "negative_mode_overlap", "sech_phi_minus_inner", "quadratic_form", "lambda_minus", "lambda_plus"] {
        assert_eq!(check(&r, name)["passed"], true, "{name}");
    }
    assert!((check(&r, "quadratic_form")["value"].as_f64().unwrap() + 0.010_370_805).abs() < 1e-5);

    assert_eq!(katolab(&["verify-rank-three", "--beta", "0.01", "--out", "e"], dir.path()).status.code(), Some(0));
    let min = report(&dir.path().join("e"))["spectrum"]["min_eigenvalue"].as_f64().unwrap();
    assert!((min + 0.001_816_901_1).abs() < 1e-6);

    assert_eq!(katolab(&["verify-rank-three", "--beta", "0", "--out", "z"], dir.path()).status.code(), Some(0));
    let r = report(&dir.path().join("z"));
    assert_eq!(r["spectrum"]["rank"], 1);
    assert_eq!(r["spectrum"]["positivity"], true);

    assert_eq!(katolab(&["verify-rank-three", "--beta", "0.6", "--out", "x"], dir.path()).status.code(), Some(2));
    assert!(!dir.path().join("x").exists());
}

fn scan_config(dir: &Path, name: &str, f: &str, axes: &str) -> String {
    let text = format!(r#"{{"f": {f}, "g": {TANH}, "grid": {{"L": 20, "n": 401}}, "axes": {axes}}}"#);
    std::fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

fn scan_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(|r| r.unwrap()).collect()
}

#[test]
fn conjecture_scan_points() {
    let dir = tempfile::tempdir().unwrap();
    let kato = scan_config(dir.path(), "kato.json", KATO_ATOMS_F, "[]");
    assert_eq!(katolab(&["conjecture", "scan", "--config", &kato, "--out", "k"], dir.path()).status.code(), Some(0));
    let rows = scan_rows(&dir.path().join("k/scan.csv"));
    assert_eq!(rows.len(), 1);
    let min: f64 = rows[0][1].parse().unwrap();
    let product: f64 = rows[0][5].parse().unwrap();
    assert!(min >= -1e-8 * 2.0 / PI);
    assert!((product - FRAC_PI_2).abs() < 0.05 * FRAC_PI_2);

    let three = scan_config(dir.path(), "three.json", RANK_THREE_F, "[]");
    assert_eq!(katolab(&["conjecture", "scan", "--config", &three, "--out", "t"], dir.path()).status.code(), Some(0));
    let rows = scan_rows(&dir.path().join("t/scan.csv"));
    assert!(rows[0][1].parse::<f64>().unwrap() < 0.0);
    assert!((rows[0][5].parse::<f64>().unwrap() - PI / 4.0).abs() < 0.05 * PI / 4.0);

    let empty = scan_config(dir.path(), "empty.json", KATO_ATOMS_F, r#"[{"param": "f.atoms.0.scale", "values": []}]"#);
    assert_eq!(katolab(&["conjecture", "scan", "--config", &empty, "--out", "e"], dir.path()).status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("e/scan.csv")).unwrap();
    assert_eq!(text, "index,f.atoms.0.scale,min_eigenvalue,rank,r_estimate,r_prime_estimate,product\n");
}

#[test]
fn conjecture_scan_is_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let axes = r#"[{"param": "f.atoms.0.scale", "values": [1.3, 1.5707963267948966, 1.8]},
                  {"param": "g.atoms.0.center", "values": [0, 0.5]}]"#;
    let cfg = scan_config(dir.path(), "sweep.json", RANK_THREE_F, axes);
    assert_eq!(katolab(&["conjecture", "scan", "--config", &cfg, "--out", "one", "--threads", "1"], dir.path()).status.code(), Some(0));
    let out = Command::new(env!("CARGO_BIN_EXE_katolab"))
        .args(["conjecture", "scan", "--config", &cfg, "--out", "many"])
        .current_dir(dir.path())
        .env("KATOLAB_THREADS", "4")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let one = std::fs::read(dir.path().join("one/scan.csv")).unwrap();
    let many = std::fs::read(dir.path().join("many/scan.csv")).unwrap();
    assert_eq!(one, many);
    assert_eq!(scan_rows(&dir.path().join("one/scan.csv")).len(), 6);
}

#[test]
fn conjecture_scan_rejects_bad_sweeps() {
    let dir = tempfile::tempdir().unwrap();
    let values: Vec<String> = (0..101).map(|i| format!("{}", 1.0 + i as f64 * 0.01)).collect();
    let axis = format!("[{}]", values.join(","));
    let big = scan_config(
        dir.path(),
        "big.json",
        KATO_ATOMS_F,
        &format!(r#"[{{"param": "f.atoms.0.scale", "values": {axis}}}, {{"param": "g.atoms.0.scale", "values": {axis}}}]"#),
    );
    assert_eq!(katolab(&["conjecture", "scan", "--config", &big, "--out", "b"], dir.path()).status.code(), Some(2));
    let unknown = scan_config(dir.path(), "u.json", KATO_ATOMS_F, r#"[{"param": "f.atoms.3.scale", "values": [1]}]"#);
    assert_eq!(katolab(&["conjecture", "scan", "--config", &unknown, "--out", "u"], dir.path()).status.code(), Some(2));
    let negative = scan_config(dir.path(), "n.json", KATO_ATOMS_F, r#"[{"param": "f.atoms.0.weight", "values": [-1]}]"#);
    assert_eq!(katolab(&["conjecture", "scan", "--config", &negative, "--out", "n"], dir.path()).status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_katolab"))
        .args(["conjecture", "scan", "--out", "t"])
        .current_dir(dir.path())
        .env("KATOLAB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!["b", "u", "n", "t"].iter().any(|d| dir.path().join(d).exists()));
}

#[test]
fn default_scan_runs() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(katolab(&["conjecture", "scan", "--out", "s"], dir.path()).status.code(), Some(0));
    assert_eq!(scan_rows(&dir.path().join("s/scan.csv")).len(), 15);
}
