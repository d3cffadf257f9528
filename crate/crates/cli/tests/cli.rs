use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use serde_json::Value;
use xylab::estimators::SeriesEstimate;
use xylab_cli::{sha256_hex, RunManifest, MANIFEST_FILE, OUT_DIR_ENV};

fn xylab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xylab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove(OUT_DIR_ENV)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn manifest(dir: &Path) -> RunManifest {
    serde_json::from_str(&std::fs::read_to_string(dir.join(MANIFEST_FILE)).unwrap()).unwrap()
}

#[test]
fn tier_one_passes_quickly() {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let out = xylab(&["verify", "--tier", "1"], dir.path());
    assert!(start.elapsed() < Duration::from_secs(60));
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = json(&dir.path().join("verify_report.json"));
    assert_eq!(report["pass"], true);
    let records = report["records"].as_array().unwrap();
    assert!(!records.is_empty());
    for r in records {
        for key in ["check", "instance", "lhs", "rhs", "slack", "pass"] {
            assert!(r.get(key).is_some(), "{r}");
        }
    }
    let m = manifest(dir.path());
    assert_eq!(m.command, "verify");
    assert_eq!(m.exit_code, 0);
    assert_eq!(m.checks.len(), records.len());
}

#[test]
fn injected_fault_fails_with_named_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = xylab(&["verify", "--inject-fault"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let report = json(&dir.path().join("verify_report.json"));
    assert_eq!(report["pass"], false);
    let failed: Vec<&str> = report["failed"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert!(failed.contains(&"height-winding"), "{failed:?}");
    assert!(manifest(dir.path()).config.inject_fault);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, "").unwrap();
    let cfg = empty.to_str().unwrap();
    assert_eq!(
        xylab(&["--config", cfg, "verify"], dir.path()).status.code(),
        Some(2)
    );
    assert_eq!(
        xylab(&["verify", "--tier", "4"], dir.path()).status.code(),
        Some(2)
    );
    assert_eq!(xylab(&["estimate", "--bogus"], dir.path()).status.code(), Some(2));
    assert_eq!(
        xylab(&["estimate", "--beta", "0.5"], dir.path()).status.code(),
        Some(2)
    );
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"beta": -1}"#).unwrap();
    assert_eq!(
        xylab(
            &[
                "--config",
                bad.to_str().unwrap(),
                "estimate",
                "--observable",
                "cov"
            ],
            dir.path()
        )
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn two_point_estimate_is_reproducible() {
    let args = [
        "estimate",
        "--observable",
        "two-point",
        "--beta",
        "0.5",
        "--n",
        "8",
        "--sweeps",
        "1500",
        "--burnin",
        "100",
        "--seed",
        "4",
    ];
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = xylab(&args, d.path());
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let bytes = std::fs::read(a.path().join("two_point.csv")).unwrap();
    assert_eq!(bytes, std::fs::read(b.path().join("two_point.csv")).unwrap());
    let s = SeriesEstimate::from_csv("two_point", &bytes).unwrap();
    assert_eq!(
        s.entries.iter().map(|e| e.k).collect::<Vec<_>>(),
        (0..=4).collect::<Vec<_>>()
    );
    assert!(s.entries[1].estimate > s.entries[2].estimate);

    let (ma, mb) = (manifest(a.path()), manifest(b.path()));
    assert_eq!(ma.outputs, mb.outputs);
    assert_eq!(ma.config_sha256, mb.config_sha256);
    assert_eq!(ma.config.sweeps, Some(1500));
    for o in &ma.outputs {
        assert_eq!(
            o.sha256,
            sha256_hex(&std::fs::read(a.path().join(&o.path)).unwrap())
        );
    }
}

#[test]
fn zero_beta_series_is_a_delta_and_fit_refuses() {
    let dir = tempfile::tempdir().unwrap();
    let out = xylab(
        &[
            "estimate",
            "--observable",
            "two-point",
            "--beta",
            "0",
            "--n",
            "6",
            "--sweeps",
            "300",
            "--burnin",
            "50",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let s = SeriesEstimate::from_csv(
        "two_point",
        &std::fs::read(dir.path().join("two_point.csv")).unwrap(),
    )
    .unwrap();
    assert_eq!(s.entries[0].estimate, 1.0);
    assert!(s.entries[1..].iter().all(|e| e.estimate == 0.0));
    assert!(!dir.path().join("two_point_fit.json").exists());
    assert!(manifest(dir.path())
        .notes
        .iter()
        .any(|n| n.contains("no mass fit")));
}

#[test]
fn covariance_and_sign_outputs() {
    for (obs, files) in [
        ("cov", &["cov.csv", "cov_height.csv", "cov_difference.csv"][..]),
        (
            "sign-cov",
            &["sign_cov.csv", "fk_connectivity.csv", "sign_cov_difference.csv"][..],
        ),
    ] {
        let dir = tempfile::tempdir().unwrap();
        let out = xylab(
            &[
                "estimate",
                "--observable",
                obs,
                "--beta",
                "0.8",
                "--n",
                "3",
                "--k-max",
                "2",
                "--sweeps",
                "3000",
                "--burnin",
                "200",
            ],
            dir.path(),
        );
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let m = manifest(dir.path());
        for f in files {
            assert!(m.outputs.iter().any(|o| o.path == *f), "{obs}: {f}");
        }
    }
}

#[test]
fn rejection_budget_refusal_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let out = xylab(
        &[
            "estimate",
            "--observable",
            "cov",
            "--sampler",
            "rejection",
            "--beta",
            "0.5",
            "--n",
            "24",
            "--sweeps",
            "200",
            "--burnin",
            "100",
            "--max-attempts",
            "100",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sampler"));
}

#[test]
fn synthetic_demo_gives_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = xylab(&["demo-main-theorem", "--synthetic"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = json(&dir.path().join("demo_report.json"));
    assert!((r["ratio"]["value"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert_eq!(r["in_band"], true);
    let fit = json(&dir.path().join("cov_fit.json"));
    for key in ["mass", "ci_lo", "ci_hi", "window", "n", "beta", "seed"] {
        assert!(fit.get(key).is_some());
    }
}

#[test]
fn small_demo_warns_about_window() {
    let dir = tempfile::tempdir().unwrap();
    let out = xylab(
        &[
            "demo-main-theorem",
            "--n",
            "4",
            "--sweeps",
            "2000",
            "--burnin",
            "200",
        ],
        dir.path(),
    );
    assert!(matches!(out.status.code(), Some(0) | Some(3)));
    assert!(manifest(dir.path())
        .notes
        .iter()
        .any(|n| n.contains("degenerate")));
}

#[test]
fn config_file_is_echoed_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"beta": 0.4, "n": 4, "observable": "two-point", "sweeps": 800, "burnin": 100, "seed": 9}"#,
    )
    .unwrap();
    let out = xylab(
        &["--config", cfg.to_str().unwrap(), "estimate", "--seed", "10"],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let m = manifest(dir.path());
    assert_eq!((m.config.beta, m.config.n, m.config.seed), (0.4, 4, 10));
    assert_eq!(m.version, env!("CARGO_PKG_VERSION"));
}

#[test]
fn environment_overrides_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let env_dir = dir.path().join("from-env");
    let out = Command::new(env!("CARGO_BIN_EXE_xylab"))
        .args(["demo-main-theorem", "--synthetic", "--out"])
        .arg(dir.path().join("from-flag"))
        .env(OUT_DIR_ENV, &env_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(env_dir.join(MANIFEST_FILE).exists());
}

#[test]
fn config_fuzz_seeds_are_valid() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus/experiment_config");
    for e in std::fs::read_dir(dir).unwrap() {
        let text = std::fs::read_to_string(e.unwrap().path()).unwrap();
        xylab_cli::ExperimentConfig::from_json(&text)
            .unwrap()
            .validate()
            .unwrap();
    }
}
