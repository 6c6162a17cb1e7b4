use std::path::PathBuf;
use std::process::Command;

use carnot_polar::group::{builtin, GroupFile};

fn temp_path(label: &str) -> PathBuf {
    std::env::temp_dir().join(format!("carnot-cli-{label}-{}", std::process::id()))
}

fn carnot(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_carnot"))
        .args(args)
        .env_remove("CARNOT_CONFIG")
        .env_remove("RUST_LOG")
        .output()
        .expect("run carnot");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn field(report: &str, key: &str) -> String {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no `{key}` in report"))
        .to_string()
}

#[test]
fn verify_heisenberg_all_conditions() {
    let (code, out, err) = carnot(&["verify", "--group", "heis1", "--conditions", "i,ii,iii", "--seed", "11"]);
    assert_eq!(code, 0, "{err}\n{out}");
    assert_eq!(field(&out, "overall"), "pass");
    assert_eq!(field(&out, "seed"), "11");
}

#[test]
fn verify_euclidean_control() {
    let (code, out, _) = carnot(&["verify", "--group", "euclid3", "--conditions", "i", "--seed", "2"]);
    assert_eq!(code, 0);
    let max: f64 = field(&out, "i.linf.max").parse().unwrap();
    assert!(max <= 1e-10, "{max}");
    assert_eq!(field(&out, "i.linf.module"), "horizontal");
    assert_eq!(field(&out, "i.linf.tol"), "1.000000e-8");
}

#[test]
fn verify_is_byte_identical() {
    let args = ["verify", "--group", "heis2", "--seed", "5", "--points", "300"];
    let (c1, a, _) = carnot(&args);
    let (c2, b, _) = carnot(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
}

#[test]
fn impossible_tolerance_fails_with_exit_one() {
    let (code, out, _) = carnot(&["verify", "--group", "heis1", "--conditions", "i", "--seed", "1", "--tol", "1e-30"]);
    assert_eq!(code, 1);
    assert_eq!(field(&out, "overall"), "fail");
}

#[test]
fn drawn_seed_is_logged() {
    let (code, out, err) = carnot(&["verify", "--group", "euclid3", "--conditions", "i", "--points", "20"]);
    assert_eq!(code, 0);
    let seed = field(&out, "seed");
    assert!(err.contains(&format!("--seed {seed}")), "{err}");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(carnot(&["verify", "--group", "no-such-group"]).0, 2);
    assert_eq!(carnot(&["verify", "--conditions", "iv"]).0, 2);
    assert_eq!(carnot(&["verify", "--tol-key", "nope=1e-3"]).0, 2);
    assert_eq!(carnot(&["frobnicate"]).0, 2);
    assert_eq!(carnot(&["capacity", "--a", "2", "--b", "1"]).0, 2);
    assert_eq!(carnot(&["--help"]).0, 0);
}

#[test]
fn config_file_and_env_var() {
    let cfg = temp_path("cfg.toml");
    std::fs::write(&cfg, "group = \"euclid3\"\nseed = 4\n[tolerances]\ni = 1e-10\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_carnot"))
        .args(["verify", "--conditions", "i", "--points", "50"])
        .env("CARNOT_CONFIG", &cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(field(&text, "group"), "euclid3");
    assert_eq!(field(&text, "seed"), "4");
    assert_eq!(field(&text, "i.linf.tol"), "1.000000e-10");

    let bad = temp_path("bad.toml");
    std::fs::write(&bad, "colour = \"red\"\n").unwrap();
    let (code, _, err) = carnot(&["--config", bad.to_str().unwrap(), "verify"]);
    assert_eq!(code, 2);
    assert!(err.contains("unknown field"), "{err}");
}

#[test]
fn flow_svg_has_eight_paths() {
    let svg = temp_path("flow.svg");
    let csv = temp_path("flow.csv");
    let (code, _, err) = carnot(&[
        "flow",
        "--group",
        "heis1",
        "--curves",
        "8",
        "--seed",
        "1",
        "--svg",
        svg.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") && text.trim_end().ends_with("</svg>"));
    assert_eq!(text.matches("<path ").count(), 8);
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().count(), 1 + 8 * 64);
    // N(γ_a(s)) = s in every row
    for line in rows.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        let (s, n) = (cols[4], cols[8]);
        assert!((n - s).abs() <= 1e-9 * s, "{line}");
    }
}

#[test]
fn integrate_record_and_csv() {
    let csv = temp_path("int.csv");
    let (code, out, _) = carnot(&["integrate", "--group", "heis1", "--csv", csv.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v: f64 = field(&out, "value").parse().unwrap();
    assert!((v - std::f64::consts::PI.powi(2) / 2.0).abs() < 1e-8);
    assert_eq!(field(&out, "seed"), "none");
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert!(rows.starts_with("group,integrand,method,value,error_estimate,seed,evaluations\nheis1,gauss-quartic"));

    let mc = ["integrate", "--group", "heis1", "--method", "ambient-mc", "--samples", "20000", "--seed", "9"];
    let (c1, a, _) = carnot(&mc);
    let (_, b, _) = carnot(&mc);
    assert_eq!(c1, 0);
    assert_eq!(a, b);
    assert_eq!(field(&a, "seed"), "9");
}

#[test]
fn capacity_newtonian() {
    let (code, out, _) = carnot(&["capacity", "--group", "euclid3", "--p", "2", "--a", "1", "--b", "2"]);
    assert_eq!(code, 0);
    let v: f64 = field(&out, "value").parse().unwrap();
    assert!((v - 8.0 * std::f64::consts::PI).abs() < 1e-6 * v);
}

#[test]
fn emitted_group_round_trips() {
    let path = temp_path("group.toml");
    let (code, _, _) = carnot(&["emit-group", "--group", "quaternionic", "--output", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let spec = GroupFile::parse(&std::fs::read_to_string(&path).unwrap()).unwrap().into_spec().unwrap();
    assert_eq!(spec, builtin("quaternionic").unwrap());
    let (code, out, _) = carnot(&["kaplan", "--group", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let c: f64 = field(&out, "c").parse().unwrap();
    let r: f64 = field(&out, "max_residual").parse().unwrap();
    assert!((c - 16.0).abs() < 1e-8 && r <= 1e-8, "{out}");
}

#[test]
fn in_process_run_matches_binary() {
    let mut buf = Vec::new();
    let code = carnot_cli::run(["carnot", "verify", "--group", "euclid3", "--conditions", "i", "--seed", "8", "--points", "40"], &mut buf);
    assert_eq!(code, 0);
    let (_, out, _) = carnot(&["verify", "--group", "euclid3", "--conditions", "i", "--seed", "8", "--points", "40"]);
    assert_eq!(String::from_utf8(buf).unwrap(), out);
}
