//! End-to-end tests of the `msadl` binary: exit codes, output determinism
//! and file formats.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn msadl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msadl")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn models_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn shop() -> String {
    models_dir().join("shop.jsm").display().to_string()
}

const PERSON_LISTING: &str =
    "/// @entity { identity = [ SSN, country ] } \ntype Person { SSN: string, country: string( length(3) ), name: string }\n";

#[test]
fn validate_person_listing_is_silent_success() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("person.jsm");
    fs::write(&path, PERSON_LISTING).unwrap();
    let out = msadl(&["validate", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{out:?}");
    assert!(out.stdout.is_empty());
    assert!(out.stderr.is_empty());
}

#[test]
fn validate_empty_file_is_success() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.jsm");
    fs::write(&path, "").unwrap();
    let out = msadl(&["validate", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{out:?}");
}

#[test]
fn validate_reports_unresolved_reference() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.jsm");
    fs::write(
        &path,
        "service S {\n  inputPort p {\n    location: \"socket://h:1\"\n    protocol: http\n    interfaces: Foo\n  }\n}\n",
    )
    .unwrap();
    let out = msadl(&["validate", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("REF_UNRESOLVED"), "{}", stdout(&out));
}

#[test]
fn validate_accepts_the_bundled_models() {
    let pingpong = models_dir().join("pingpong.jsm").display().to_string();
    let out = msadl(&["validate", &shop(), &pingpong]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
}

fn person_value(ssn: &str, country: &str, name: &str) -> String {
    format!(
        r#"{{"$": null, "children": {{"SSN": [{{"$": "{ssn}"}}], "country": [{{"$": "{country}"}}], "name": [{{"$": "{name}"}}]}}}}"#
    )
}

#[test]
fn entity_register_conflict_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("person.jsm");
    fs::write(&model, PERSON_LISTING).unwrap();
    let registry = dir.path().join("registry.json");
    let base = |value: String| {
        vec![
            "entity".to_string(),
            "register".to_string(),
            "--model".to_string(),
            model.display().to_string(),
            "--type".to_string(),
            "Person".to_string(),
            "--registry".to_string(),
            registry.display().to_string(),
            "--salt".to_string(),
            "c0ffee".to_string(),
            "--value".to_string(),
            value,
        ]
    };

    let first = Command::new(env!("CARGO_BIN_EXE_msadl"))
        .args(base(person_value("123-45-6789", "USA", "Ada")))
        .output()
        .unwrap();
    assert_eq!(first.status.code(), Some(0), "{first:?}");

    let second = Command::new(env!("CARGO_BIN_EXE_msadl"))
        .args(base(person_value("123-45-6789", "USA", "Bob")))
        .output()
        .unwrap();
    assert_eq!(second.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&second.stdout).contains("Conflict"), "{second:?}");

    // registry on disk never holds the raw identity scalars
    let registry_text = fs::read_to_string(&registry).unwrap();
    assert!(!registry_text.contains("123-45-6789"));
    assert!(!registry_text.contains("USA"));
}

#[test]
fn check_value_accepts_and_rejects() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("person.jsm");
    fs::write(&model, PERSON_LISTING).unwrap();
    let model = model.display().to_string();

    let ok = msadl(&["check-value", "--model", &model, "--type", "Person", "--value", &person_value("1", "USA", "Ada")]);
    assert_eq!(code(&ok), 0, "{ok:?}");

    let bad = msadl(&["check-value", "--model", &model, "--type", "Person", "--value", &person_value("1", "US", "Ada")]);
    assert_eq!(code(&bad), 1);
    let text = stdout(&bad);
    assert!(text.contains("RefinementViolated") && text.contains("`country`"), "{text}");
}

#[test]
fn fmt_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("messy.jsm");
    fs::write(
        &path,
        "type   Person{SSN:string,country:string( length(3) ),name:string}\ninterface I{oneWay f(Person)}\n",
    )
    .unwrap();
    let out = msadl(&["fmt", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{out:?}");
    let once = fs::read(&path).unwrap();
    let out = msadl(&["fmt", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let twice = fs::read(&path).unwrap();
    assert_eq!(once, twice);
    assert!(String::from_utf8(once).unwrap().starts_with("view jolie\n"));
}

#[test]
fn simulate_output_is_byte_identical_across_runs() {
    let pingpong = models_dir().join("pingpong.jsm").display().to_string();
    let args = ["simulate", "--model", pingpong.as_str(), "--seed", "7", "--max-steps", "100"];
    let a = msadl(&args);
    let b = msadl(&args);
    assert_eq!(code(&a), 0, "{a:?}");
    assert_eq!(a.stdout, b.stdout);
    // each trace line is one JSON event
    let text = stdout(&a);
    let mut lines = text.lines().collect::<Vec<_>>();
    let summary = lines.pop().unwrap();
    assert!(summary.starts_with("terminated after"), "{summary}");
    for line in lines {
        let event: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(event.get("kind").is_some());
    }
}

#[test]
fn simulate_writes_trace_file_and_reports_deadlock() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.jsonl");
    let out = msadl(&["simulate", "--model", &shop(), "--seed", "0", "--max-steps", "50", "--trace", trace.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("STUCK_DEADLOCK"), "{}", stdout(&out));
    assert!(trace.exists());
}

#[test]
fn simulate_accepts_an_explicit_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let schedule = dir.path().join("schedule.json");
    fs::write(&schedule, "[0, 0, 0, 0, 0, 0]").unwrap();
    let pingpong = models_dir().join("pingpong.jsm").display().to_string();
    let out = msadl(&["simulate", "--model", &pingpong, "--explicit-schedule", schedule.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
}

#[test]
fn json_flag_emits_parseable_envelopes() {
    let out = msadl(&["--json", "validate", &shop()]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["command"], "validate");

    let pingpong = models_dir().join("pingpong.jsm").display().to_string();
    let out = msadl(&["--json", "simulate", "--model", &pingpong, "--seed", "1"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["trace"].is_array());
    assert_eq!(v["outcome"], "Terminated");
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("person.jsm");
    fs::write(&model, PERSON_LISTING).unwrap();
    let out = msadl(&[
        "entity",
        "assert-equals",
        "--model",
        model.to_str().unwrap(),
        "--type",
        "Person",
        "--value",
        &person_value("1", "USA", "Ada"),
    ]);
    assert_eq!(code(&out), 2, "{out:?}");

    let out = msadl(&["no-such-command"]);
    assert_eq!(code(&out), 2);

    let out = msadl(&["validate", "/definitely/not/here.jsm"]);
    assert_eq!(code(&out), 1); // unreadable input surfaces as a diagnostic
}

#[test]
fn transform_round_trips_through_interchange_json() {
    let dir = tempfile::tempdir().unwrap();
    let lemma_json = dir.path().join("shop.json");
    let out = msadl(&["transform", "--to", "lemma", "--in", &shop(), "--out", lemma_json.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&lemma_json).unwrap()).unwrap();
    assert_eq!(doc["formatVersion"], "1.0.0");
    assert_eq!(doc["view"], "lemma");

    let back = dir.path().join("shop_back.jsm");
    let out = msadl(&["transform", "--to", "jolie", "--in", lemma_json.to_str().unwrap(), "--out", back.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let restored = fs::read_to_string(&back).unwrap();
    assert!(restored.contains("service Storefront"));
}

#[test]
fn interchange_rejects_unknown_fields_and_bad_versions() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("doc.json");

    fs::write(
        &path,
        r#"{"formatVersion": "1.0.0", "view": "jolie", "payload": {"path": "x", "view": "jolie"}, "extra": 1}"#,
    )
    .unwrap();
    let out = msadl(&["validate", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("PARSE_ERROR"), "{}", stdout(&out));

    fs::write(&path, r#"{"formatVersion": "2.0.0", "view": "jolie", "payload": {"path": "x", "view": "jolie"}}"#).unwrap();
    let out = msadl(&["validate", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("FORMAT_VERSION_UNSUPPORTED"), "{}", stdout(&out));
}

#[test]
fn docs_person_page_has_constraint_and_identity_sentence() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("person.jsm");
    fs::write(&model, PERSON_LISTING).unwrap();
    let out_dir = dir.path().join("docs");
    let out = msadl(&["docs", "--model", model.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{out:?}");
    let page = fs::read_to_string(out_dir.join("types/Person.md")).unwrap();
    assert!(page.contains("exactly 3 characters"), "{page}");
    assert!(page.contains("identified by SSN, country"), "{page}");
}

#[test]
fn docs_index_has_empty_type_section_for_typeless_models() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("svc.jsm");
    fs::write(&model, "service Lone {\n}\n").unwrap();
    let out_dir = dir.path().join("docs");
    let out = msadl(&["docs", "--model", model.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{out:?}");
    let index = fs::read_to_string(out_dir.join("index.md")).unwrap();
    let types_section = index.split("## Types").nth(1).unwrap().split("## Services").next().unwrap();
    assert!(types_section.contains("None."), "{index}");
}

#[test]
fn color_env_var_toggles_ansi_codes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.jsm");
    fs::write(&path, "type T { x: Nope }\n").unwrap();

    let plain = Command::new(env!("CARGO_BIN_EXE_msadl"))
        .args(["validate", path.to_str().unwrap()])
        .env("MSADL_COLOR", "0")
        .output()
        .unwrap();
    assert!(!stdout(&plain).contains('\x1b'));

    let coloured = Command::new(env!("CARGO_BIN_EXE_msadl"))
        .args(["validate", path.to_str().unwrap()])
        .env("MSADL_COLOR", "1")
        .output()
        .unwrap();
    assert!(stdout(&coloured).contains("\x1b[31m"), "{}", stdout(&coloured));
}

#[test]
fn docs_bundle_matches_the_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = msadl(&["docs", "--model", &shop(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));

    let golden_root = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/docs");
    let mut golden_files = Vec::new();
    collect_files(&golden_root, &mut golden_files);
    assert!(!golden_files.is_empty());
    for golden in &golden_files {
        let relative = golden.strip_prefix(&golden_root).unwrap();
        let generated = dir.path().join(relative);
        let want = fs::read_to_string(golden).unwrap();
        let got = fs::read_to_string(&generated)
            .unwrap_or_else(|_| panic!("missing generated file {}", relative.display()));
        assert_eq!(got, want, "docs file {} drifted", relative.display());
    }

    // generated pieces parse in their own right
    for skeleton in ["skeletons/Storefront.jsm", "skeletons/Inventory.jsm", "skeletons/Audit.jsm"] {
        let text = fs::read_to_string(dir.path().join(skeleton)).unwrap();
        msadl_core::surface::parse_unit(&text, skeleton, None)
            .unwrap_or_else(|e| panic!("skeleton {skeleton} does not parse: {e:?}"));
    }
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) {
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            collect_files(&path, out);
        } else {
            out.push(path);
        }
    }
    out.sort();
}
