//! Acceptance suite. Each test exercises one acceptance criterion at its
//! stated tolerance and prints a PASS line (visible with
//! `cargo test --test acceptance -- --nocapture`).

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use msadl_core::ddd::{assert_equals, EntityRegistry, RegisterError};
use msadl_core::diag::has_errors;
use msadl_core::model::{DddPattern, ModelSet, View};
use msadl_core::resolve::resolve;
use msadl_core::sim::{enumerate_interleavings, run, rng::Xoshiro256StarStar, EventKind, Outcome, Schedule, Trace};
use msadl_core::surface::{parse_unit, serialize_unit, Declaration};
use msadl_core::testgen::ModelGen;
use msadl_core::validate::validate_model_set;
use msadl_core::value::{Scalar, ValueTree};

fn msadl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msadl")).args(args).output().expect("binary runs")
}

fn models_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn finish(criterion: u32, name: &str, started: Instant, budget: Duration) {
    let elapsed = started.elapsed();
    assert!(
        elapsed < budget,
        "criterion {criterion} exceeded its time budget: {elapsed:?} >= {budget:?}"
    );
    println!("ACCEPTANCE {criterion} ({name}): PASS in {elapsed:?}");
}

const PERSON_LISTING: &str =
    "/// @entity { identity = [ SSN, country ] } \ntype Person { SSN: string, country: string( length(3) ), name: string }\n";

fn person_json(ssn: &str, country: &str, name: &str) -> String {
    format!(
        r#"{{"$": null, "children": {{"SSN": [{{"$": "{ssn}"}}], "country": [{{"$": "{country}"}}], "name": [{{"$": "{name}"}}]}}}}"#
    )
}

/// Criterion 1 — parsing the Person corpus yields the annotated type, and
/// `check-value` accepts a conforming value while rejecting a two-letter
/// country with a refinement violation at path `country`. Budget: 1 s.
#[test]
fn acceptance_1_person_corpus() {
    let started = Instant::now();

    let unit = parse_unit(PERSON_LISTING, "person.jsm", Some(View::Jolie)).expect("listing parses");
    let Declaration::Type(t) = &unit.declarations[0] else { panic!("expected a type declaration") };
    assert_eq!(t.name, "Person");
    let names: Vec<&str> = t.nodes.iter().map(|n| n.name.as_str()).collect();
    assert_eq!(names, vec!["SSN", "country", "name"]);
    assert_eq!(
        t.annotations[0].pattern,
        DddPattern::Entity { identity_fields: vec!["SSN".into(), "country".into()] }
    );

    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("person.jsm");
    fs::write(&model, PERSON_LISTING).unwrap();
    let model = model.display().to_string();

    let ok = msadl(&["check-value", "--model", &model, "--type", "Person", "--value", &person_json("123-45-6789", "USA", "Ada")]);
    assert_eq!(ok.status.code(), Some(0), "{ok:?}");

    let rejected = msadl(&["check-value", "--model", &model, "--type", "Person", "--value", &person_json("123-45-6789", "US", "Ada")]);
    assert_eq!(rejected.status.code(), Some(1));
    let text = String::from_utf8(rejected.stdout).unwrap();
    assert!(text.contains("RefinementViolated") && text.contains("`country`"), "{text}");

    finish(1, "person corpus", started, Duration::from_secs(1));
}

/// Criterion 2 — the DDD constraint: equal identity with differing names is
/// exactly one conflict in either registration order, and identity equality
/// holds. 100 randomized cases. Budget: 5 s.
#[test]
fn acceptance_2_ddd_constraint() {
    let started = Instant::now();

    let unit = parse_unit(PERSON_LISTING, "person.jsm", Some(View::Jolie)).unwrap();
    let (set, diags) = resolve(std::slice::from_ref(&unit));
    assert!(diags.is_empty());
    let person_type = set.types["Person"].clone();

    let person = |ssn: &str, country: &str, name: &str| {
        ValueTree::unit()
            .with_child("SSN", ValueTree::leaf(Scalar::Str(ssn.into())))
            .with_child("country", ValueTree::leaf(Scalar::Str(country.into())))
            .with_child("name", ValueTree::leaf(Scalar::Str(name.into())))
    };

    let mut rng = Xoshiro256StarStar::from_seed(20_240_817);
    let countries = ["USA", "DNK", "DEU", "ITA", "FRA"];
    let names = ["Ada", "Bob", "Carol", "Dan", "Eve", "Mallory"];
    let mut failures = 0;
    for case in 0..100 {
        let ssn = format!("{:09}", rng.next_u64() % 1_000_000_000);
        let country = countries[(rng.next_u64() % countries.len() as u64) as usize];
        let first = names[(rng.next_u64() % names.len() as u64) as usize];
        let mut second = names[(rng.next_u64() % names.len() as u64) as usize];
        if second == first {
            second = if first == "Ada" { "Bob" } else { "Ada" };
        }
        let a = person(&ssn, country, first);
        let b = person(&ssn, country, second);
        let salt = rng.next_u64().to_be_bytes();

        for pair in [[&a, &b], [&b, &a]] {
            let mut registry = EntityRegistry::new(&salt);
            let conflicts = pair
                .iter()
                .filter(|v| matches!(registry.register(v, &person_type, &set, &salt), Err(RegisterError::Conflict(_))))
                .count();
            if conflicts != 1 {
                eprintln!("case {case}: expected exactly one conflict, saw {conflicts}");
                failures += 1;
            }
        }
        if !assert_equals(&a, &b, &person_type, &set).unwrap() {
            eprintln!("case {case}: identity equality failed");
            failures += 1;
        }
    }
    assert_eq!(failures, 0, "{failures} of 100 randomized cases failed");

    finish(2, "ddd constraint", started, Duration::from_secs(5));
}

/// Criterion 3 — jolie -> lemma -> jolie on the bundled three-service
/// architecture restores the formatted original byte-identically except
/// output-port locations, and the forward loss report holds exactly the
/// R4/R5 items. Budget: 1 s.
#[test]
fn acceptance_3_transform_round_trip() {
    let started = Instant::now();

    let dir = tempfile::tempdir().unwrap();
    let original = dir.path().join("shop.jsm");
    fs::copy(models_dir().join("shop.jsm"), &original).unwrap();

    // canonical baseline
    let out = msadl(&["fmt", original.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let baseline = fs::read_to_string(&original).unwrap();

    let lemma = dir.path().join("shop.lsm");
    let loss = dir.path().join("loss.json");
    let out = msadl(&[
        "transform", "--to", "lemma",
        "--in", original.to_str().unwrap(),
        "--out", lemma.to_str().unwrap(),
        "--loss-report", loss.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");

    // exactly the R4 and R5 items, nothing else
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&loss).unwrap()).unwrap();
    let items = report["items"].as_array().unwrap();
    let kind_of = |i: &serde_json::Value| i["kind"].as_str().unwrap().to_string();
    let r4 = items.iter().filter(|i| kind_of(i) == "dropped_access_point").count();
    let r5 = items.iter().filter(|i| kind_of(i) == "synthesized_default").count();
    assert_eq!(r4, 3, "one R4 item per output port: {items:?}");
    assert_eq!(r5, 3, "one R5 item per service: {items:?}");
    assert_eq!(items.len(), 6, "no items beyond R4/R5: {items:?}");

    let restored_path = dir.path().join("shop_back.jsm");
    let out = msadl(&[
        "transform", "--to", "jolie",
        "--in", lemma.to_str().unwrap(),
        "--out", restored_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let restored = fs::read_to_string(&restored_path).unwrap();

    let base_lines: Vec<&str> = baseline.lines().collect();
    let rest_lines: Vec<&str> = restored.lines().collect();
    assert_eq!(base_lines.len(), rest_lines.len(), "restored file has different shape");
    let mut in_output_port = false;
    let mut location_diffs = 0;
    for (a, b) in base_lines.iter().zip(&rest_lines) {
        if a.trim_start().starts_with("outputPort ") {
            in_output_port = true;
        } else if a.trim_start().starts_with("inputPort ") || a.trim_start().starts_with("main ") {
            in_output_port = false;
        }
        if a == b {
            continue;
        }
        assert!(in_output_port && a.trim_start().starts_with("location:"), "unexpected diff:\n  {a}\n  {b}");
        assert!(b.contains("socket://UNRESOLVED"));
        location_diffs += 1;
    }
    assert_eq!(location_diffs, 3, "exactly the three output-port locations differ");

    finish(3, "transform round trip", started, Duration::from_secs(1));
}

fn net(text: &str) -> ModelSet {
    let unit = parse_unit(text, "net.jsm", None).unwrap_or_else(|e| panic!("parse: {e:?}"));
    let (set, diags) = resolve(std::slice::from_ref(&unit));
    assert!(diags.is_empty(), "{diags:?}");
    let v = validate_model_set(&set);
    assert!(!has_errors(&v), "{v:?}");
    set
}

/// Criterion 4 — simulator semantics: (a) request-response blocks the
/// caller on every seed in 0..=255, (b) a one-way non-blocking witness
/// exists within seeds 0..=255, (c) seeds 0..=511 over a parallel of three
/// independent sends produce exactly the six enumerated traces.
/// Budget: 30 s total.
#[test]
fn acceptance_4_simulator_semantics() {
    let started = Instant::now();

    // (a) caller/callee pair with a competing local action
    let rr = net("view jolie\n\ninterface PingApi {\n  requestResponse ping(int) -> int\n}\n\ninterface LogApi {\n  oneWay log(int)\n}\n\nservice Server {\n  inputPort api {\n    location: \"socket://server:1\"\n    protocol: http\n    interfaces: PingApi\n  }\n  main {\n    receive ping(p) {\n      nil\n    } reply p\n  }\n}\n\nservice Logger {\n  inputPort l {\n    location: \"socket://logger:1\"\n    protocol: http\n    interfaces: LogApi\n  }\n}\n\nservice Client {\n  outputPort Server {\n    location: \"socket://server:1\"\n    protocol: http\n    interfaces: PingApi\n  }\n  outputPort Logger {\n    location: \"socket://logger:1\"\n    protocol: http\n    interfaces: LogApi\n  }\n  main {\n    invoke Server.ping(41) -> answer |\n    invoke Logger.log(7)\n  }\n}\n");
    for seed in 0..=255u64 {
        let result = run(&rr, Schedule::Seed(seed), 500).unwrap();
        assert_eq!(result.outcome, Outcome::Terminated, "seed {seed}");
        for (i, event) in result.trace.iter().enumerate() {
            if event.subject == "Client" && event.kind == EventKind::Send && event.call_id.is_some() {
                let end = result
                    .trace
                    .iter()
                    .position(|e| e.kind == EventKind::ReplyDelivered && e.call_id == event.call_id)
                    .expect("reply delivered");
                assert!(end > i);
                for mid in &result.trace[i + 1..end] {
                    assert_ne!(
                        mid.subject, "Client",
                        "seed {seed}: caller event between Send and ReplyDelivered: {:#?}",
                        result.trace
                    );
                }
            }
        }
    }

    // (b) one-way: some seed lets the sender's next event precede the
    // receiver's consumption of the message
    let ow = net("view jolie\n\ninterface FApi {\n  oneWay f(int)\n}\n\ninterface GApi {\n  oneWay g(int)\n}\n\nservice Receiver {\n  inputPort r {\n    location: \"socket://recv:1\"\n    protocol: http\n    interfaces: FApi\n  }\n  main {\n    receive f(x) {\n      nil\n    }\n  }\n}\n\nservice Sink {\n  inputPort s {\n    location: \"socket://sink:1\"\n    protocol: http\n    interfaces: GApi\n  }\n}\n\nservice Sender {\n  outputPort Receiver {\n    location: \"socket://recv:1\"\n    protocol: http\n    interfaces: FApi\n  }\n  outputPort Sink {\n    location: \"socket://sink:1\"\n    protocol: http\n    interfaces: GApi\n  }\n  main {\n    invoke Receiver.f(1) ;\n    invoke Sink.g(2)\n  }\n}\n");
    let mut witness = None;
    for seed in 0..=255u64 {
        let result = run(&ow, Schedule::Seed(seed), 500).unwrap();
        let second = result.trace.iter().position(|e| e.kind == EventKind::Send && e.operation.as_deref() == Some("g"));
        let consumed = result.trace.iter().position(|e| e.kind == EventKind::Deliver && e.operation.as_deref() == Some("f"));
        if let (Some(s), Some(c)) = (second, consumed) {
            if s < c {
                witness = Some(seed);
                break;
            }
        }
    }
    assert!(witness.is_some(), "no non-blocking witness in seeds 0..=255");

    // (c) three independent sends: seeded trace set == enumerated set == 3!
    let par3 = net("view jolie\n\ninterface SinkApi {\n  oneWay a(int)\n  oneWay b(int)\n  oneWay c(int)\n}\n\nservice Sink {\n  inputPort p {\n    location: \"socket://sink:1\"\n    protocol: http\n    interfaces: SinkApi\n  }\n}\n\nservice Sender {\n  outputPort Sink {\n    location: \"socket://sink:1\"\n    protocol: http\n    interfaces: SinkApi\n  }\n  main {\n    invoke Sink.a(1) |\n    invoke Sink.b(2) |\n    invoke Sink.c(3)\n  }\n}\n");
    let enumerated = enumerate_interleavings(&par3, 16).unwrap();
    assert_eq!(enumerated.len(), 6, "3! interleavings of three independent sends");
    let mut seeded: BTreeSet<Trace> = BTreeSet::new();
    for seed in 0..=511u64 {
        let result = run(&par3, Schedule::Seed(seed), 100).unwrap();
        assert!(enumerated.contains(&result.trace), "seed {seed} produced a non-enumerated trace");
        seeded.insert(result.trace);
    }
    assert_eq!(seeded, enumerated, "seeds 0..=511 must cover all six traces");

    finish(4, "simulator semantics", started, Duration::from_secs(30));
}

/// Criterion 5 — three messages into a guarded replication produce exactly
/// three Spawn events and leave the guard live. Budget: 1 s.
#[test]
fn acceptance_5_replication_count() {
    let started = Instant::now();

    let set = net("view jolie\n\ninterface FApi {\n  oneWay f(int)\n}\n\nservice Guard {\n  inputPort g {\n    location: \"socket://guard:1\"\n    protocol: http\n    interfaces: FApi\n  }\n  main {\n    replicate f(x) {\n      nil\n    }\n  }\n}\n\nservice Feeder {\n  outputPort Guard {\n    location: \"socket://guard:1\"\n    protocol: http\n    interfaces: FApi\n  }\n  main {\n    invoke Guard.f(1) ;\n    invoke Guard.f(2) ;\n    invoke Guard.f(3)\n  }\n}\n");
    let mut state = msadl_core::sim::NetworkState::build(&set, 42).unwrap();
    let result = msadl_core::sim::run_state(&mut state, Schedule::Seed(42), 500).unwrap();
    let spawns = result.trace.iter().filter(|e| e.kind == EventKind::Spawn).count();
    assert_eq!(spawns, 3, "exactly one Spawn per delivered message");
    assert!(matches!(result.outcome, Outcome::Stuck { .. }), "the guard persists: {:?}", result.outcome);
    assert_eq!(state.live_replication_guards(), vec![("Guard".to_string(), "f".to_string())]);

    finish(5, "replication count", started, Duration::from_secs(1));
}

/// Criterion 6 — 500 randomized valid models satisfy the parse/serialize
/// identity, and repeated CLI runs are byte-identical. Budget: 60 s.
#[test]
fn acceptance_6_roundtrip_and_determinism() {
    let started = Instant::now();

    let mut gen = ModelGen::new(0xC0FFEE);
    for i in 0..500 {
        let view = if i % 2 == 0 { View::Jolie } else { View::Lemma };
        let unit = gen.unit(view, &format!("model{i}.{}", view.extension()));
        let printed = serialize_unit(&unit);
        let reparsed = parse_unit(&printed, &unit.path, Some(view))
            .unwrap_or_else(|e| panic!("model {i} failed to reparse: {e:?}\n{printed}"));
        assert_eq!(reparsed.stripped(), unit.stripped(), "model {i}: parse(serialize(m)) != m\n{printed}");
        assert_eq!(serialize_unit(&reparsed), printed, "model {i}: serializer not a fixed point");
    }

    // repeated CLI runs: byte-identical stdout and output files
    let shop = models_dir().join("shop.jsm").display().to_string();
    let pingpong = models_dir().join("pingpong.jsm").display().to_string();
    let dir = tempfile::tempdir().unwrap();

    let transform_args = |n: u32| {
        let out = dir.path().join(format!("shop{n}.lsm"));
        let loss = dir.path().join(format!("loss{n}.json"));
        (out.clone(), loss.clone())
    };
    let mut outputs = Vec::new();
    for n in 0..2 {
        let (out_path, loss_path) = transform_args(n);
        let run1 = msadl(&["validate", &shop]);
        let run2 = msadl(&[
            "transform", "--to", "lemma", "--in", &shop,
            "--out", out_path.to_str().unwrap(),
            "--loss-report", loss_path.to_str().unwrap(),
        ]);
        let run3 = msadl(&["simulate", "--model", &pingpong, "--seed", "9", "--max-steps", "200"]);
        let run4 = msadl(&["--json", "simulate", "--model", &pingpong, "--seed", "9", "--max-steps", "200"]);
        outputs.push((
            run1.stdout,
            run2.stdout,
            run3.stdout,
            run4.stdout,
            fs::read(&out_path).unwrap(),
            fs::read(&loss_path).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1], "repeated CLI runs are not byte-identical");

    finish(6, "roundtrip and determinism", started, Duration::from_secs(60));
}
