//! Runner behaviors end to end: configuration hygiene, expectation
//! semantics, the bundled gallery, and the binary's exit codes.

use std::fs;
use std::process::Command;

use foliage_cli::config::{Expect, ModelKind, ScenarioConfig};
use foliage_cli::gallery;
use foliage_cli::runner::run_scenario;

const MINIMAL_SUSPENSION: &str = r#"
[model]
kind = "suspension"
matrix = [[2, 1], [1, 1]]

[sampling]
seed = 5
count = 8
s_max = 1.0
step = 1e-3
horizon = 5.0
geodesics = 4

[[checks]]
name = "lewis"
"#;

#[test]
fn a_minimal_configuration_parses_with_defaults() {
    let cfg = ScenarioConfig::from_toml(MINIMAL_SUSPENSION).unwrap();
    assert_eq!(cfg.model.kind, ModelKind::Suspension);
    assert_eq!(cfg.model.eta, None);
    assert_eq!(cfg.tolerances.pass, 1e-8);
    assert_eq!(cfg.checks.len(), 1);
    assert_eq!(cfg.checks[0].expect, Expect::Pass);
}

#[test]
fn unknown_keys_are_rejected() {
    let text = MINIMAL_SUSPENSION.replace("seed = 5", "seed = 5\nspeed = 9");
    let err = ScenarioConfig::from_toml(&text).unwrap_err();
    assert!(format!("{err:#}").contains("unknown field"), "{err:#}");
}

#[test]
fn unknown_check_names_are_rejected() {
    let text = MINIMAL_SUSPENSION.replace("name = \"lewis\"", "name = \"lewys\"");
    let err = ScenarioConfig::from_toml(&text).unwrap_err();
    assert!(format!("{err:#}").contains("unknown check"), "{err:#}");
}

#[test]
fn fields_from_the_wrong_model_kind_are_rejected() {
    let text = MINIMAL_SUSPENSION.replace(
        "matrix = [[2, 1], [1, 1]]",
        "matrix = [[2, 1], [1, 1]]\nleaf_metric = [1.0]",
    );
    let err = ScenarioConfig::from_toml(&text).unwrap_err();
    assert!(format!("{err:#}").contains("product"), "{err:#}");
}

#[test]
fn a_shear_monodromy_fails_at_model_build() {
    let text = MINIMAL_SUSPENSION.replace("[[2, 1], [1, 1]]", "[[1, 1], [0, 1]]");
    let cfg = ScenarioConfig::from_toml(&text).unwrap();
    let err = run_scenario(&cfg).unwrap_err();
    assert!(
        format!("{err:#}").contains("monodromy matrix was rejected"),
        "{err:#}"
    );
}

#[test]
fn expectations_gate_the_overall_verdict() {
    // The warped model fails the derivative criterion. Expecting that
    // failure makes the run succeed; expecting a pass makes it fail.
    let expecting_fail = r#"
[model]
kind = "warped"

[sampling]
seed = 5
count = 8
s_max = 1.0
step = 1e-3
horizon = 5.0
geodesics = 4

[[checks]]
name = "lewis"
expect = "fail"
"#;
    let cfg = ScenarioConfig::from_toml(expecting_fail).unwrap();
    let summary = run_scenario(&cfg).unwrap();
    assert!(summary.all_matched());

    let expecting_pass = expecting_fail.replace("expect = \"fail\"\n", "");
    let cfg = ScenarioConfig::from_toml(&expecting_pass).unwrap();
    let summary = run_scenario(&cfg).unwrap();
    assert!(!summary.all_matched());
    assert!(summary.text().contains("MISMATCH"));
    assert!(summary.text().contains("overall: FAIL"));
}

#[test]
fn graph_checks_on_a_plain_model_are_degenerate() {
    let text = MINIMAL_SUSPENSION.replace("name = \"lewis\"", "name = \"graph-metric\"");
    let cfg = ScenarioConfig::from_toml(&text).unwrap();
    let summary = run_scenario(&cfg).unwrap();
    assert!(!summary.all_matched());

    let tolerated = text.replace(
        "name = \"graph-metric\"",
        "name = \"graph-metric\"\nexpect = \"degenerate\"",
    );
    let cfg = ScenarioConfig::from_toml(&tolerated).unwrap();
    assert!(run_scenario(&cfg).unwrap().all_matched());
}

#[test]
fn the_gallery_has_four_parseable_entries() {
    let names = gallery::names();
    assert_eq!(names.len(), 4);
    assert_eq!(
        names,
        ["suspension-211", "product-lorentz", "warped-negative", "graph-suite"]
    );
    for name in names {
        let cfg = gallery::entry(name).unwrap();
        assert!(!cfg.checks.is_empty(), "{name} must request checks");
        assert_eq!(cfg.sampling.seed, 42, "{name} must pin the seed");
    }
    assert!(gallery::entry("no-such-entry").is_err());
}

#[test]
fn gallery_runs_match_the_committed_golden_summaries() {
    let goldens = [
        ("suspension-211", include_str!("golden/suspension-211.toml")),
        ("product-lorentz", include_str!("golden/product-lorentz.toml")),
        ("warped-negative", include_str!("golden/warped-negative.toml")),
        ("graph-suite", include_str!("golden/graph-suite.toml")),
    ];
    for (name, golden) in goldens {
        let summary = run_scenario(&gallery::entry(name).unwrap()).unwrap();
        assert_eq!(summary.toml(), golden, "summary drifted for {name}");
    }
}

fn foliage_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_foliage"))
}

#[test]
fn the_binary_reports_verdicts_through_exit_codes() {
    let dir = tempfile::tempdir().unwrap();

    // A passing scenario exits 0 and writes the summary pair plus CSVs.
    let cfg_path = dir.path().join("ok.toml");
    fs::write(&cfg_path, MINIMAL_SUSPENSION).unwrap();
    let out_dir = dir.path().join("out");
    let status = foliage_bin()
        .args(["run", cfg_path.to_str().unwrap(), "--out", out_dir.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out_dir.join("summary.txt").exists());
    assert!(out_dir.join("summary.toml").exists());
    assert!(out_dir.join("lewis.csv").exists());
    let csv = fs::read_to_string(out_dir.join("lewis.csv")).unwrap();
    assert!(csv.starts_with("check,sample_index,loc0"), "{csv}");

    // An unmet expectation exits 1.
    let bad = MINIMAL_SUSPENSION.replace("kind = \"suspension\"", "kind = \"warped\"");
    let bad = bad.replace("matrix = [[2, 1], [1, 1]]\n", "");
    let bad_path = dir.path().join("bad.toml");
    fs::write(&bad_path, bad).unwrap();
    let status = foliage_bin()
        .args(["run", bad_path.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));

    // A rejected model exits 2 with a diagnostic on stderr.
    let shear = MINIMAL_SUSPENSION.replace("[[2, 1], [1, 1]]", "[[1, 1], [0, 1]]");
    let shear_path = dir.path().join("shear.toml");
    fs::write(&shear_path, shear).unwrap();
    let output = foliage_bin()
        .args(["run", shear_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("rejected"));

    // Gallery names resolve when no file with that name exists.
    let status = foliage_bin()
        .args(["run", "warped-negative"])
        .current_dir(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
}

#[test]
fn the_single_check_verb_honors_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("model.toml");
    fs::write(&cfg_path, MINIMAL_SUSPENSION).unwrap();

    let output = foliage_bin()
        .args([
            "check",
            "projectability",
            "--model",
            cfg_path.to_str().unwrap(),
            "--seed",
            "7",
            "--tol",
            "1e-9",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(text.contains("projectability: PASS"), "{text}");
    assert!(text.contains("pass < 1.0e-9"), "{text}");
}
