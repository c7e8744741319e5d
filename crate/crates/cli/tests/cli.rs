use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn apr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apr"))
        .args(args)
        .env_remove("RUST_LOG")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

/// Ingest and index the fixture dump once per test binary.
fn index_dir() -> &'static Path {
    static DIR: OnceLock<tempfile::TempDir> = OnceLock::new();
    DIR.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let corpus = dir.path().join("corpus");
        let index = dir.path().join("index");
        let dump = fixtures().join("ekdb_posts.xml");
        let out = apr(&[
            "ingest",
            "--dump",
            dump.to_str().unwrap(),
            "--out",
            corpus.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let out = apr(&[
            "index",
            "--corpus",
            corpus.to_str().unwrap(),
            "--out",
            index.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        dir
    })
    .path()
}

fn recommend(spec: &Path, extra: &[&str]) -> Output {
    let index = index_dir().join("index");
    let mut args = vec![
        "recommend",
        "--spec",
        spec.to_str().unwrap(),
        "--index",
        index.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    apr(&args)
}

fn spec(name: &str) -> PathBuf {
    fixtures().join("specs").join(name)
}

#[test]
fn text_output_matches_golden() {
    let out = recommend(&spec("cms.json"), &[]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let golden = include_str!("golden/cms.txt");
    assert_eq!(String::from_utf8(out.stdout).unwrap(), golden);
}

#[test]
fn trace_adds_term_table() {
    let out = recommend(&spec("cms.json"), &["--trace"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for column in ["dd", "sd", "nfr", "obj", "act", "cst", "precon", "postcon", "flow"] {
        assert!(text.contains(column), "missing {column}");
    }
}

#[test]
fn machine_output_is_deterministic_json() {
    let a = recommend(&spec("shell_emulator.json"), &["--format", "machine"]);
    let b = recommend(&spec("shell_emulator.json"), &["--format", "machine"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["recommendations"][0]["pattern_name"], "Pipes-and-Filters");
}

#[test]
fn top_option_limits_rows() {
    let out = recommend(&spec("cms.json"), &["--top", "1", "--format", "machine"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["recommendations"].as_array().unwrap().len(), 1);
    let out = recommend(&spec("cms.json"), &["--top", "4"]);
    assert_eq!(code(&out), 4);
}

#[test]
fn conflicts_exit_with_resolution_code() {
    let out = recommend(&spec("cms_conflicting_nfrs.json"), &[]);
    assert_eq!(code(&out), 7);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("performance <-> security"), "{err}");

    let out = recommend(
        &spec("cms_conflicting_nfrs.json"),
        &["--priority", "performance=2", "--priority", "security=1"],
    );
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8(out.stdout).unwrap().contains("performance"));
}

#[test]
fn error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();

    let bad_json = dir.path().join("bad.json");
    std::fs::write(&bad_json, "{ \"short_description\": ").unwrap();
    assert_eq!(code(&recommend(&bad_json, &[])), 6);

    let invalid = dir.path().join("invalid.json");
    let mut v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(spec("cms.json")).unwrap()).unwrap();
    v["use_cases"] = serde_json::json!([]);
    std::fs::write(&invalid, v.to_string()).unwrap();
    let out = recommend(&invalid, &[]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8(out.stderr).unwrap().contains("use_cases"));

    assert_eq!(code(&recommend(&dir.path().join("missing.json"), &[])), 5);

    let out = apr(&[
        "recommend",
        "--spec",
        spec("cms.json").to_str().unwrap(),
        "--index",
        dir.path().join("no-index").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 5);

    assert_eq!(
        code(&recommend(&spec("cms.json"), &["--priority", "performance"])),
        2
    );
    assert_eq!(code(&apr(&["recommend"])), 2);
}

#[test]
fn eval_prints_rank_table() {
    let index = index_dir().join("index");
    let cases = fixtures().join("cases");
    let out = apr(&[
        "eval",
        "--cases",
        cases.to_str().unwrap(),
        "--index",
        index.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let table = String::from_utf8(out.stdout).unwrap();
    for needle in [
        "Expected Output",
        "Positive Sentiment",
        "Negative Sentiment",
        "1st rank",
        "2nd rank",
        "3rd rank",
    ] {
        assert!(table.contains(needle), "missing {needle}:\n{table}");
    }

    let out = apr(&[
        "eval",
        "--cases",
        cases.to_str().unwrap(),
        "--index",
        index.to_str().unwrap(),
        "--format",
        "machine",
    ]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["total_cases"], 15);
}
