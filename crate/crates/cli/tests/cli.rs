//! Binary-level checks: exit codes, determinism across parallelism, the
//! corrupted-bracket fixture, and the JSON report shape against the bundled
//! schema.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_bvkernel")
}

fn suite_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("suites").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn passing_suite_exits_zero() {
    let out = run(&["run", suite_path("classical-bv.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("OVERALL: PASS"));
    assert!(!text.contains("COUNTEREXAMPLE"));
}

#[test]
fn corrupted_bracket_fails_with_one_counterexample() {
    let out = run(&["run", suite_path("corrupted-bracket.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("OVERALL: FAIL"));
    assert_eq!(
        text.matches("COUNTEREXAMPLE").count(),
        1,
        "exactly one counterexample per failed identity:\n{text}"
    );
}

#[test]
fn config_errors_exit_two() {
    let out = run(&["run", "/nonexistent/suite.toml"]);
    assert_eq!(out.status.code(), Some(2));

    let dir = std::env::temp_dir().join("bvkernel-bad-suite");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.toml");
    std::fs::write(&path, "[[job]]\nsuite = \"no-such-suite\"\n").unwrap();
    let out = run(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");

    // a syntactically broken file reports a position
    std::fs::write(&path, "[[job]\nsuite = ").unwrap();
    let out = run(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("parse error"), "{err}");
}

#[test]
fn empty_job_list_passes_with_warning() {
    let dir = std::env::temp_dir().join("bvkernel-empty-suite");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("empty.toml");
    std::fs::write(&path, "# no jobs\n").unwrap();
    let out = run(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("WARNING"));
    assert!(text.contains("OVERALL: PASS (0 jobs)"));
}

#[test]
fn reports_are_deterministic_across_parallelism() {
    let suite = suite_path("classical-bv.toml");
    let suite = suite.to_str().unwrap();
    let a = run(&["run", suite, "--format", "json", "--jobs", "1"]);
    let b = run(&["run", suite, "--format", "json", "--jobs", "4"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
    let mut ja: serde_json::Value =
        serde_json::from_slice(&a.stdout).expect("valid json report");
    let mut jb: serde_json::Value = serde_json::from_slice(&b.stdout).unwrap();
    strip_timing(&mut ja);
    strip_timing(&mut jb);
    assert_eq!(ja, jb, "identical config + seed must give identical content");
}

fn strip_timing(v: &mut serde_json::Value) {
    if let Some(jobs) = v.get_mut("jobs").and_then(|j| j.as_array_mut()) {
        for job in jobs {
            if let Some(obj) = job.as_object_mut() {
                obj.remove("elapsed_ms");
            }
        }
    }
}

#[test]
fn seed_override_changes_sampled_runs_reproducibly() {
    let suite = suite_path("classical-bv.toml");
    let suite = suite.to_str().unwrap();
    let a = run(&["run", suite, "--format", "json", "--seed", "5"]);
    let b = run(&["run", suite, "--format", "json", "--seed", "5"]);
    let mut ja: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let mut jb: serde_json::Value = serde_json::from_slice(&b.stdout).unwrap();
    strip_timing(&mut ja);
    strip_timing(&mut jb);
    assert_eq!(ja, jb);
}

#[test]
fn json_report_matches_bundled_schema_shape() {
    let suite = suite_path("classical-bv.toml");
    let out = run(&["run", suite.to_str().unwrap(), "--format", "json"]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();

    // the bundled schema parses and pins the version
    let schema_text = std::fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/run-report.schema.json"),
    )
    .unwrap();
    let schema: serde_json::Value = serde_json::from_str(&schema_text).unwrap();
    assert_eq!(
        schema["definitions"]["job"]["required"],
        serde_json::json!(["name", "suite", "pass", "elapsed_ms"])
    );

    // structural validation of the report against the schema's requirements
    for key in ["schema_version", "overall_pass", "jobs"] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
    assert_eq!(report["schema_version"], 1);
    assert!(report["overall_pass"].is_boolean());
    for job in report["jobs"].as_array().unwrap() {
        for key in ["name", "suite", "pass", "elapsed_ms"] {
            assert!(job.get(key).is_some(), "job missing {key}");
        }
        if let Some(ids) = job.get("identities") {
            for id in ids.as_array().unwrap() {
                for key in ["name", "domain", "cases", "nonzero_cases", "pass"] {
                    assert!(id.get(key).is_some(), "identity missing {key}");
                }
            }
        }
    }
}

#[test]
fn subcommands_run_directly() {
    let out = run(&[
        "check-order",
        "--n-even",
        "1",
        "--n-odd",
        "0",
        "--alg-cap",
        "8",
        "--op",
        "dx1*dx1",
        "--r-max",
        "3",
        "--expect-order",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");

    let out = run(&["verify-gbva", "--algebra", "poly:1,1,4", "--delta", "dx1*dt1"]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");

    let out = run(&["lie-homology", "--lie", "sl2", "--expect-homology", "1,0,0,1"]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");

    // a wrong expectation fails with exit 1
    let out = run(&["lie-homology", "--lie", "sl2", "--expect-homology", "1,1,0,1"]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");

    // a malformed operator is a configuration error
    let out = run(&["verify-gbva", "--algebra", "poly:1,1,4", "--delta", "nonsense("]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn vosa_extra_checks_run() {
    let out = run(&[
        "vosa-verify",
        "--weight-cap",
        "3",
        "--checks",
        "g0,l0:0,residue:1,mode-order-laws",
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
}

#[test]
fn custom_lie_table_loads_from_suite_file() {
    // sl2 written out as a structure-constant table
    let dir = std::env::temp_dir().join("bvkernel-custom-lie");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("custom.toml");
    std::fs::write(
        &path,
        r#"
[[job]]
suite = "lie-suite"
name = "custom table equal to sl2"
expect_homology = [1, 0, 0, 1]
expect_cohomology = [1, 0, 0, 1]

[job.lie]
dim = 3
brackets = [
  [2, 0, 0, "2"],
  [2, 1, 1, "-2"],
  [0, 1, 2, "1"],
]
"#,
    )
    .unwrap();
    let out = run(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");

    // a table violating the Jacobi identity is rejected at construction
    std::fs::write(
        &path,
        r#"
[[job]]
suite = "lie-suite"
name = "bad table"

[job.lie]
dim = 3
brackets = [
  [0, 1, 2, "1"],
  [1, 2, 0, "1"],
  [2, 0, 1, "1"],
  [0, 2, 2, "1"],
]
"#,
    )
    .unwrap();
    let out = run(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("refused"), "{text}");
}

#[test]
fn reemitting_one_report_is_byte_identical() {
    use bvkernel_cli::{parse_suite, render_json, render_text, run_suite, Overrides};
    let text = std::fs::read_to_string(suite_path("classical-bv.toml")).unwrap();
    let suite = parse_suite(&text).unwrap();
    let report = run_suite(&suite.job, 1, &Overrides::default()).unwrap();
    assert_eq!(render_text(&report), render_text(&report));
    assert_eq!(render_json(&report).unwrap(), render_json(&report).unwrap());
}
