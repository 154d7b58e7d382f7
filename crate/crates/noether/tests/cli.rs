//! Black-box tests of the `noether` binary: flag surface, exit codes, report
//! formats and cross-format payload equality.

use std::path::PathBuf;
use std::process::{Command, Output};

fn noether(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noether"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("noether-cli-{}-{name}", std::process::id()))
}

#[test]
fn list_shows_catalog_rows() {
    let out = noether(&["list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let row = text
        .lines()
        .find(|l| l.starts_with("kepler_2d"))
        .expect("kepler_2d row");
    let cols: Vec<&str> = row.split_whitespace().collect();
    assert_eq!(cols[0], "kepler_2d");
    assert_eq!(cols[1], "2", "dimension column");
    assert_eq!(cols[2], "5", "triple count column");
    assert_eq!(cols[3], "4", "constant count column");
}

#[test]
fn list_json_and_filter() {
    let out = noether(&["list", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let ids: Vec<&str> = parsed
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["id"].as_str().unwrap())
        .collect();
    assert!(ids.contains(&"lane_emden_n5"));

    let out = noether(&["list", "--filter", "toda"]);
    let text = stdout(&out);
    let data_lines: Vec<&str> = text.lines().skip(1).filter(|l| !l.trim().is_empty()).collect();
    assert_eq!(data_lines.len(), 2);
    assert!(data_lines.iter().all(|l| l.contains("toda")));
}

#[test]
fn explain_prints_metadata_and_rejects_unknown_ids() {
    let out = noether(&["explain", "kepler_2d"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("Laplace-Runge-Lenz"), "{text}");
    assert!(text.contains("lrl_delay_x"));

    let out = noether(&["explain", "lane_emden_n5"]);
    assert!(stdout(&out).contains("first integral"));

    let out = noether(&["explain", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_exit_codes() {
    let out = noether(&["verify", "--entries", "oscillator_shift", "--quiet"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let out = noether(&["verify", "--entries", "not_a_system", "--quiet"]);
    assert_eq!(out.status.code(), Some(2));

    // An impossible tolerance forces a verification failure (exit 1) through
    // the config-file path.
    let cfg = temp_path("force-fail.cfg");
    std::fs::write(
        &cfg,
        "entries = oscillator_energy\nentry.oscillator_energy.tolerance = 1e-18\n",
    )
    .unwrap();
    let out = noether(&["verify", "--quiet", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    std::fs::remove_file(&cfg).ok();

    // Unknown config keys are rejected with a usage error.
    let cfg = temp_path("bad-key.cfg");
    std::fs::write(&cfg, "entrys = all\n").unwrap();
    let out = noether(&["verify", "--quiet", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_file(&cfg).ok();
}

#[test]
fn csv_and_json_reports_carry_identical_numbers() {
    let json_path = temp_path("report.json");
    let csv_path = temp_path("report.csv");
    let entries = "oscillator_energy,toda_n2";
    let out = noether(&[
        "verify", "--entries", entries, "--seed", "3", "--quiet",
        "--format", "json", "--report", json_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = noether(&[
        "verify", "--entries", entries, "--seed", "3", "--quiet",
        "--format", "csv", "--report", csv_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    let csv = std::fs::read_to_string(&csv_path).unwrap();

    let mut json_rows = Vec::new();
    for entry in json["entries"].as_array().unwrap() {
        for d in entry["drifts"].as_array().unwrap() {
            json_rows.push((
                entry["entry_id"].as_str().unwrap().to_string(),
                d["constant_id"].as_str().unwrap().to_string(),
                d["t0"].as_f64().unwrap(),
                d["max_abs_drift"].as_f64().unwrap(),
                d["rel_drift"].as_f64().unwrap(),
                d["tolerance"].as_f64().unwrap(),
                d["pass"].as_bool().unwrap(),
            ));
        }
    }
    let mut csv_rows = Vec::new();
    for line in csv.lines().skip(1) {
        let c: Vec<&str> = line.split(',').collect();
        csv_rows.push((
            c[0].to_string(),
            c[1].to_string(),
            c[2].parse::<f64>().unwrap(),
            c[3].parse::<f64>().unwrap(),
            c[4].parse::<f64>().unwrap(),
            c[5].parse::<f64>().unwrap(),
            c[6].parse::<bool>().unwrap(),
        ));
    }
    assert_eq!(json_rows.len(), csv_rows.len());
    for (j, c) in json_rows.iter().zip(&csv_rows) {
        assert_eq!(j.0, c.0);
        assert_eq!(j.1, c.1);
        // Bit-exact payloads: both formats round-trip binary64.
        assert_eq!(j.2.to_bits(), c.2.to_bits());
        assert_eq!(j.3.to_bits(), c.3.to_bits());
        assert_eq!(j.4.to_bits(), c.4.to_bits());
        assert_eq!(j.5.to_bits(), c.5.to_bits());
        assert_eq!(j.6, c.6);
    }
    std::fs::remove_file(&json_path).ok();
    std::fs::remove_file(&csv_path).ok();
}

#[test]
fn config_values_hold_unless_flags_are_given() {
    let cfg = temp_path("precedence.cfg");
    std::fs::write(&cfg, "entries = toda_n2\nformat = csv\n").unwrap();
    let out = noether(&["verify", "--quiet", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("entry_id,"), "config format should apply");
    assert!(text.contains("toda_n2,"), "config entries should apply");
    assert!(!text.contains("kepler_2d,"), "config restricted the selection");
    std::fs::remove_file(&cfg).ok();
}

#[test]
fn custom_systems_from_config_file() {
    let cfg = temp_path("custom.cfg");
    std::fs::write(
        &cfg,
        "custom.heavy_kepler.family = kepler\n\
         custom.heavy_kepler.params = 2.0\n\
         custom.heavy_kepler.q0 = 1.5, 0\n\
         custom.heavy_kepler.qdot0 = 0, 1.0\n\
         custom.heavy_kepler.interval = 0, 8\n",
    )
    .unwrap();
    let out = noether(&[
        "verify", "--quiet", "--config", cfg.to_str().unwrap(),
        "--entries", "heavy_kepler", "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("heavy_kepler,velocity_component_0"));
    assert!(text.contains("heavy_kepler,energy"));

    // A broken family name is a config error.
    std::fs::write(&cfg, "custom.x.family = warp\ncustom.x.q0 = 1\ncustom.x.qdot0 = 0\n").unwrap();
    let out = noether(&["verify", "--quiet", "--config", cfg.to_str().unwrap(), "--entries", "x"]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_file(&cfg).ok();
}

#[test]
fn verify_honours_interval_and_rel_tol_flags() {
    let out = noether(&[
        "verify",
        "--entries",
        "oscillator_energy",
        "--interval",
        "0,3.14",
        "--rel-tol",
        "1e-9",
        "--quiet",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.lines().count() > 1);

    let out = noether(&["verify", "--entries", "all", "--interval", "5,1", "--quiet"]);
    assert_eq!(out.status.code(), Some(2), "empty interval is a config error");
}
