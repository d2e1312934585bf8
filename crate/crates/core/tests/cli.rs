use std::fs;
use std::path::Path;
use std::process::Command;

use tempfile::TempDir;

const BASE: &str = r#""radius": 0.375, "h": 0.0625, "n_modes": 20, "order": 4, "samples_per_band": 20"#;

fn run(sub: &str, config: &str, dir: &Path) -> (i32, String) {
    let cfg = dir.join(format!("{sub}.json"));
    fs::write(&cfg, config).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_bloch"))
        .args([sub, "--config", cfg.to_str().unwrap(), "--out", dir.join("out").to_str().unwrap()])
        .output()
        .unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn config(sign: &str, extra: &str) -> String {
    format!(r#"{{ {BASE}, "sign": "{sign}"{extra} }}"#)
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn every_subcommand_succeeds_with_fixed_headers() {
    let dir = TempDir::new().unwrap();
    let cfg = config("positive", "");
    for sub in ["mesh", "spectrum", "dispersion", "series", "bounds", "validate"] {
        let (code, err) = run(sub, &cfg, dir.path());
        assert_eq!(code, 0, "{sub}: {err}");
    }
    let out = dir.path().join("out");
    assert_eq!(header(&out.join("spectrum.csv")), "j,nu_j,mean_j,class");
    assert_eq!(header(&out.join("dispersion.csv")), "zeta0,tau_sq,band_index");
    assert_eq!(header(&out.join("series.csv")), "m,zeta_m,norm_Pc,norm_P,norm_tilde");
    assert_eq!(
        header(&out.join("bounds.csv")),
        "m,a_hat,b_hat,c_hat,d_hat,p_bar,p,s,domination_ok"
    );
    assert_eq!(
        header(&out.join("validate.csv")),
        "eta,M,zeta_series,zeta_direct,abs_err,field_err,residual"
    );
    assert!(out.join("mesh.txt").exists());
    let bounds = fs::read_to_string(out.join("bounds.csv")).unwrap();
    assert!(bounds.lines().skip(1).all(|l| l.ends_with(",true")));

    let echo: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("effective_config.json")).unwrap()).unwrap();
    assert_eq!(echo["radius"], 0.375);
    assert_eq!(echo["order"], 4);
    assert_eq!(echo["tau"], 1.0);

    let svg = fs::read_to_string(out.join("band.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert!(svg.trim_end().ends_with("</svg>"));
    assert!(svg.contains("<polyline") || svg.contains("<path") || svg.contains("<circle"));
}

#[test]
fn reruns_are_byte_identical() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let cfg = config("negative", "");
    for sub in ["spectrum", "series", "bounds"] {
        assert_eq!(run(sub, &cfg, a.path()).0, 0);
        assert_eq!(run(sub, &cfg, b.path()).0, 0);
    }
    for f in ["spectrum.csv", "series.csv", "bounds.csv", "effective_config.json"] {
        let x = fs::read(a.path().join("out").join(f)).unwrap();
        let y = fs::read(b.path().join("out").join(f)).unwrap();
        assert_eq!(x, y, "{f}");
    }
}

#[test]
fn tau_sweep_writes_one_file_per_tau() {
    let dir = TempDir::new().unwrap();
    let cfg = config("negative", r#", "tau_sweep": [0.5, 1.0, 2.0]"#);
    assert_eq!(run("bounds", &cfg, dir.path()).0, 0);
    let out = dir.path().join("out");
    for k in 0..3 {
        assert!(out.join(format!("bounds_tau{k}.csv")).exists());
    }
}

#[test]
fn invalid_configurations_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let cases = [
        config("positive", r#", "unknown_key": 1"#),
        r#"{ "radius": 0.6, "h": 0.0625, "sign": "positive" }"#.to_string(),
        config("positive", r#", "order": 1"#).replace(r#""order": 4, "#, ""),
        config("negative", r#", "branch": 1"#),
        config("positive", r#", "etas": [0.9]"#),
        "not json".to_string(),
    ];
    for cfg in &cases {
        let (code, err) = run("series", cfg, dir.path());
        assert_eq!(code, 2, "{cfg}: {err}");
        assert!(!err.is_empty());
    }
    let missing = Command::new(env!("CARGO_BIN_EXE_bloch"))
        .args(["mesh", "--config", "/nonexistent.json", "--out", "/tmp/x"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_with_three() {
    let dir = TempDir::new().unwrap();
    let (code, err) = run("series", &config("positive", r#", "tau": 1e-5"#), dir.path());
    assert_eq!(code, 3, "{err}");
    assert!(err.contains("hierarchy"));
}
