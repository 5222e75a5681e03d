use std::io::Write;
use std::process::{Command, Output};

use pelks_cli::config::{ConfigError, FieldModel, MuMode};
use pelks_cli::fixtures::{fixture, FIXTURES};
use pelks_cli::report::{Outcome, Provenance};
use pelks_cli::{run, PelInstanceConfig, Status};
use proptest::prelude::*;
use serde_json::Value;

fn pelks(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pelks")).args(args).output().expect("binary runs")
}

fn temp_config(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn read_json(path: &std::path::Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn strip_timing(mut v: Value) -> Value {
    for c in v["checks"].as_array_mut().unwrap() {
        c.as_object_mut().unwrap().remove("elapsed_ms");
    }
    v
}

#[test]
fn every_fixture_passes_with_exit_zero() {
    for (name, _) in FIXTURES {
        let out = pelks(&["run", "--config", &format!("fixture:{name}")]);
        assert_eq!(out.status.code(), Some(0), "{name}:\n{}", String::from_utf8_lossy(&out.stdout));
    }
}

#[test]
fn quaternion_fixture_reports_exponent_one_at_every_place() {
    let rep = run(&fixture("quaternion-C").unwrap(), None).unwrap();
    let exps: Vec<_> = rep.checks.iter().filter(|c| c.name.ends_with("image_exponent")).collect();
    assert_eq!(exps.len(), 3);
    for c in exps {
        assert_eq!(c.computed, Value::from(1));
        assert_eq!(c.status, Status::Pass);
    }
}

#[test]
fn unitary_fixture_metric_identity_is_tight() {
    let rep = run(&fixture("unitary-A").unwrap(), Some(&glob::Pattern::new("metric.*").unwrap())).unwrap();
    assert_eq!(rep.checks.len(), 1);
    let dev = rep.checks[0].computed["max_deviation"].as_f64().unwrap();
    assert!(dev < 1e-8);
    assert_eq!(rep.checks[0].computed["ratios"].as_array().unwrap().len(), 20);
}

#[test]
fn empty_selection_exits_zero_with_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = pelks(&["run", "--config", "fixture:unitary-A", "--only", "no.such.check", "--report", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = read_json(&path);
    assert_eq!(v["checks"], Value::Array(vec![]));
    assert_eq!(v["summary"]["total"], 0);
}

#[test]
fn invalid_configs_exit_two() {
    let cases = [
        r#"{"type":"A","n":1,"r":2,"signature":[1,0]}"#,
        r#"{"type":"A","n":1,"r":2,"signature":[1,1],"extra":true}"#,
        r#"{"type":"A","n":1,"r":2,"signature":[1,1],"local":[{"q":6,"split":true}]}"#,
        r#"{"type":"A","n":1,"r":2,"signature":[1,1],"local":[{"q":3,"colour":1}]}"#,
        r#"{"type":"C","n":1,"r":1,"signature":[1,1],"local":[{"q":3,"split":true}]}"#,
        r#"{"type":"C","n":1,"r":1,"signature":[1,0]}"#,
        r#"{"type":"A","n":2,"r":3,"signature":[2,1]}"#,
        r#"{"type":"A","n":1,"r":4,"signature":[1,3],"archimedean":{"model":{"kind":"gaussian"},"mu":{"mode":"self-dual-auto"}}}"#,
        r#"{"type":"A","n":1,"r":2,"signature":[1,1],"archimedean":{"model":{"kind":"rational"},"mu":{"mode":"self-dual-auto"}}}"#,
        r#"{"type":"A","n":1,"r":2,"signature":[1,1],"archimedean":{"model":{"kind":"gaussian","extra":0},"mu":{"mode":"self-dual-auto"}}}"#,
        r#"{"type":"A","n":1,"r":2,"signature":[1,1],"archimedean":{"model":{"kind":"gaussian"},"mu":{"mode":"explicit","matrix":[[[0,0]]]}}}"#,
        r#"{"type":"A","n":1,"r":2,"signature":[1,1],"global":{"d":4}}"#,
        r#"{"type":"A","n":1,"r":2,"signature":[1,1],"tolerances":{"numeric_epsilon":-1}}"#,
        r#"{"type":"A","n":1,"r":2,"signature":[1,1],"samples":0}"#,
        r#"not json"#,
    ];
    for text in cases {
        let f = temp_config(text);
        let out = pelks(&["run", "--config", f.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{text}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("config invalid"));
    }
    assert_eq!(pelks(&["run", "--config", "/nonexistent/config.json"]).status.code(), Some(2));
    assert_eq!(pelks(&["run", "--config", "fixture:missing"]).status.code(), Some(2));
}

#[test]
fn diagnostics_name_the_field() {
    let err = PelInstanceConfig::from_json(r#"{"type":"A","n":1,"r":2,"signature":[2,1]}"#).unwrap_err();
    assert!(matches!(err, ConfigError::Invalid { ref field, .. } if field == "signature"));
    let err = PelInstanceConfig::from_json(r#"{"type":"A","n":1,"r":2,"signature":[1,1],"local":[{"q":3},{"q":10}]}"#).unwrap_err();
    assert!(matches!(err, ConfigError::Invalid { ref field, .. } if field == "local[1]"));
}

#[test]
fn a_failing_check_exits_one_without_aborting_the_run() {
    let mut cfg = fixture("unitary-A").unwrap();
    cfg.tolerances.numeric_epsilon = 1e-300;
    let f = temp_config(&serde_json::to_string(&cfg).unwrap());
    let out = pelks(&["run", "--config", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let rep = run(&cfg, None).unwrap();
    assert_eq!(rep.summary.failed, 1);
    assert_eq!(rep.summary.total, 14);
    let failed: Vec<_> = rep.checks.iter().filter(|c| c.status == Status::Fail).map(|c| c.name.as_str()).collect();
    assert_eq!(failed, ["metric.identity"]);
}

#[test]
fn missing_self_dual_form_fails_and_dependent_checks_skip() {
    let mut cfg = fixture("basechange-A").unwrap();
    cfg.archimedean.as_mut().unwrap().mu = MuMode::SelfDualAuto {};
    let rep = run(&cfg, None).unwrap();
    let mu = rep.checks.iter().find(|c| c.name == "arch.mu_normalisation").unwrap();
    assert_eq!(mu.status, Status::Fail);
    assert!(mu.detail.contains("integrality defect"));
    let metric = rep.checks.iter().find(|c| c.name == "metric.identity").unwrap();
    assert_eq!(metric.status, Status::Skipped);
    assert_eq!(rep.exit_code(), 1);
}

#[test]
fn runs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out = pelks(&["run", "--config", "fixture:basechange-A", "--no-timing", "--report", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    // with timings, the bodies agree once elapsed times are dropped
    let c = dir.path().join("c.json");
    pelks(&["run", "--config", "fixture:basechange-A", "--report", c.to_str().unwrap()]);
    assert_eq!(strip_timing(read_json(&c)), read_json(&a));
}

#[test]
fn seed_and_samples_overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("r.json");
    let out = pelks(&["run", "--config", "fixture:siegel-C", "--seed", "7", "--samples", "3", "--only", "metric.*", "--report", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = read_json(&p);
    assert_eq!(v["seed"], 7);
    assert_eq!(v["samples"], 3);
    assert_eq!(v["checks"][0]["computed"]["ratios"].as_array().unwrap().len(), 3);
}

#[test]
fn report_schema_and_ordering() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("r.json");
    pelks(&["run", "--config", "fixture:unitary-A", "--report", p.to_str().unwrap()]);
    let v = read_json(&p);
    assert_eq!(v["schema_version"], 1);
    let checks = v["checks"].as_array().unwrap();
    let names: Vec<&str> = checks.iter().map(|c| c["name"].as_str().unwrap()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
    for c in checks {
        let prov = c["expected"]["provenance"].as_str().unwrap();
        assert!(["paper", "trivial", "derived"].contains(&prov));
        assert!(["pass", "fail", "skipped"].contains(&c["status"].as_str().unwrap()));
        assert!(c["elapsed_ms"].as_f64().unwrap() >= 0.0);
        assert!(c.get("tolerance").is_some());
    }
    assert_eq!(v["summary"]["passed"], checks.len());
}

#[test]
fn explicit_mu_and_custom_model_reproduce_the_gaussian_fixture() {
    let base = fixture("unitary-A").unwrap();
    let reference = run(&base, None).unwrap();
    let mut custom = base.clone();
    let arch = custom.archimedean.as_mut().unwrap();
    arch.model = FieldModel::Custom {
        algebra: vec![
            pelks_cli::config::AlgebraElementSpec { label: "1".into(), sigma: vec![vec![[1.0, 0.0]]] },
            pelks_cli::config::AlgebraElementSpec { label: "i".into(), sigma: vec![vec![[0.0, 1.0]]] },
        ],
        structure_constants: vec![vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1], vec![-1, 0]]],
    };
    arch.mu = MuMode::Explicit { matrix: vec![vec![[-2.0, 0.0]]] };
    let rep = run(&custom, None).unwrap();
    assert_eq!(rep.exit_code(), 0, "{}", rep.table());
    let get = |r: &pelks_cli::Report, n: &str| r.checks.iter().find(|c| c.name == n).unwrap().clone();
    for name in ["metric.identity", "pipeline.psi_modulus", "arch.duality"] {
        assert_eq!(get(&rep, name).computed, get(&reference, name).computed, "{name}");
    }
    let deg = get(&rep, "arch.polarization_degree");
    assert_eq!(deg.expected.provenance, Provenance::Derived);
    assert!((deg.computed["degree"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(get(&rep, "arch.mu_normalisation").status, Status::Skipped);
}

#[test]
fn inconsistent_custom_structure_constants_are_a_config_error() {
    let mut cfg = fixture("unitary-A").unwrap();
    cfg.archimedean.as_mut().unwrap().model = FieldModel::Custom {
        algebra: vec![
            pelks_cli::config::AlgebraElementSpec { label: "1".into(), sigma: vec![vec![[1.0, 0.0]]] },
            pelks_cli::config::AlgebraElementSpec { label: "i".into(), sigma: vec![vec![[0.0, 1.0]]] },
        ],
        structure_constants: vec![vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1], vec![1, 0]]],
    };
    assert!(matches!(run(&cfg, None), Err(ConfigError::Invalid { .. })));
}

#[test]
fn fixtures_list_and_explain() {
    let out = pelks(&["fixtures", "list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for name in ["siegel-C", "quaternion-C", "unitary-A", "basechange-A"] {
        assert!(text.contains(name));
    }
    let show = pelks(&["fixtures", "show", "unitary-A"]);
    assert!(PelInstanceConfig::from_json(&String::from_utf8_lossy(&show.stdout)).is_ok());
    let rep = run(&fixture("unitary-A").unwrap(), None).unwrap();
    for c in &rep.checks {
        let out = pelks(&["explain", &c.name]);
        assert_eq!(out.status.code(), Some(0), "{}", c.name);
    }
    assert_eq!(pelks(&["explain", "no.such.check"]).status.code(), Some(2));
}

#[test]
fn configs_roundtrip_through_json() {
    for (name, _) in FIXTURES {
        let cfg = fixture(name).unwrap();
        let again = PelInstanceConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(cfg, again);
    }
}

proptest! {
    #[test]
    fn status_is_fail_iff_deviation_exceeds_tolerance(dev in 0.0f64..2.0, tol in 0.0f64..2.0) {
        let o = Outcome::measured(Value::Null, Value::Null, Provenance::Derived, tol, dev);
        prop_assert_eq!(o.status() == Status::Fail, dev > tol);
    }

    #[test]
    fn same_seed_same_body(seed in any::<u64>()) {
        let mut cfg = fixture("siegel-C").unwrap();
        cfg.seed = seed;
        cfg.samples = 3;
        let a = run(&cfg, None).unwrap().body();
        let b = run(&cfg, None).unwrap().body();
        prop_assert_eq!(a.to_json(), b.to_json());
    }
}
