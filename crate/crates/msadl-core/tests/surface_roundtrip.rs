//! Round-trip and canonical-form tests for the textual surfaces.

use msadl_core::diag::has_errors;
use msadl_core::model::View;
use msadl_core::resolve::resolve;
use msadl_core::surface::{parse_unit, serialize_unit, SourceUnit};
use msadl_core::testgen::ModelGen;
use msadl_core::validate::validate_model_set;

const PERSON_LISTING: &str =
    "/// @entity { identity = [ SSN, country ] } \ntype Person { SSN: string, country: string( length(3) ), name: string }\n";

fn reparse(unit: &SourceUnit) -> SourceUnit {
    let printed = serialize_unit(unit);
    parse_unit(&printed, &unit.path, Some(unit.view))
        .unwrap_or_else(|e| panic!("canonical text failed to parse: {e:?}\n---\n{printed}"))
}

#[test]
fn person_listing_survives_serialize_then_parse() {
    let unit = parse_unit(PERSON_LISTING, "person.jsm", Some(View::Jolie)).unwrap();
    assert_eq!(reparse(&unit).stripped(), unit.stripped());
}

#[test]
fn empty_unit_serialises_to_the_header_line() {
    let unit = SourceUnit::new("empty.jsm", View::Jolie);
    assert_eq!(serialize_unit(&unit), "view jolie\n");
    let lemma = SourceUnit::new("empty.lsm", View::Lemma);
    assert_eq!(serialize_unit(&lemma), "view lemma\n");
}

#[test]
fn input_port_service_matches_the_golden_file() {
    let text = "view jolie\n\ninterface GreetApi {\n  requestResponse greet(string) -> string\n}\n\nservice Greeter {\n  inputPort web {\n    location: \"socket://localhost:8080\"\n    protocol: http\n    format: json\n    interfaces: GreetApi\n  }\n}\n";
    let unit = parse_unit(text, "greeter.jsm", None).unwrap();
    let printed = serialize_unit(&unit);
    let golden = include_str!("golden/greeter.jsm");
    assert_eq!(printed, golden);
    // keys appear in canonical order
    let loc = printed.find("location:").unwrap();
    let proto = printed.find("protocol:").unwrap();
    let fmt = printed.find("format:").unwrap();
    let ifaces = printed.find("interfaces:").unwrap();
    assert!(loc < proto && proto < fmt && fmt < ifaces);
}

#[test]
fn generated_units_round_trip_and_validate() {
    let mut gen = ModelGen::new(0xA5A5);
    for i in 0..150 {
        let view = if i % 2 == 0 { View::Jolie } else { View::Lemma };
        let unit = gen.unit(view, &format!("gen{i}.{}", view.extension()));
        let printed = serialize_unit(&unit);

        let once = parse_unit(&printed, &unit.path, Some(view))
            .unwrap_or_else(|e| panic!("unit {i} failed to reparse: {e:?}\n{printed}"));
        assert_eq!(once.stripped(), unit.stripped(), "unit {i} changed across print/parse\n{printed}");

        // printing is a fixed point
        let twice = serialize_unit(&once);
        assert_eq!(printed, twice, "unit {i}: printer not idempotent");

        // generated units resolve and validate cleanly
        let (set, diags) = resolve(std::slice::from_ref(&once));
        assert!(diags.is_empty(), "unit {i} resolve: {diags:?}\n{printed}");
        let v = validate_model_set(&set);
        assert!(!has_errors(&v), "unit {i} validate: {v:?}\n{printed}");
    }
}

#[test]
fn round_trip_preserves_validity() {
    let mut gen = ModelGen::new(7);
    for i in 0..40 {
        let unit = gen.unit(View::Jolie, &format!("v{i}.jsm"));
        let (set, _) = resolve(std::slice::from_ref(&unit));
        let before = validate_model_set(&set);
        assert!(!has_errors(&before), "{before:?}");

        let once = reparse(&unit);
        let (set, _) = resolve(std::slice::from_ref(&once));
        let after = validate_model_set(&set);
        assert!(!has_errors(&after), "validity lost in round trip: {after:?}");
    }
}

#[test]
fn parse_error_spans_stay_within_input_bounds() {
    // truncate and mangle canonical texts; every reported span must point
    // into the input
    let mut gen = ModelGen::new(31);
    for i in 0..40 {
        let unit = gen.unit(View::Jolie, &format!("fz{i}.jsm"));
        let printed = serialize_unit(&unit);
        let cut = (i * 37 + 11) % printed.len().max(1);
        for text in [&printed[..cut], &printed.replace(':', " ")[..]] {
            if let Err(diags) = parse_unit(text, "fz.jsm", Some(View::Jolie)) {
                assert!(!diags.is_empty());
                let line_count = text.lines().count().max(1) as u32;
                for d in diags {
                    assert!(d.location.line >= 1 && d.location.line <= line_count + 1, "span out of bounds: {d}");
                    assert!(d.location.col >= 1);
                    assert!(d.location.end_col >= d.location.col);
                }
            }
        }
    }
}

#[test]
fn interchange_payload_round_trips_as_json() {
    let mut gen = ModelGen::new(99);
    for i in 0..30 {
        let view = if i % 2 == 0 { View::Jolie } else { View::Lemma };
        let unit = gen.unit(view, &format!("ij{i}.{}", view.extension()));
        let json = serde_json::to_string(&unit.stripped()).unwrap();
        let back: SourceUnit = serde_json::from_str(&json).unwrap();
        assert_eq!(back, unit.stripped(), "unit {i} changed across JSON round trip");
    }
}

#[test]
fn behaviour_extension_unit_round_trips() {
    let text = r#"import microservices from "example.services" as ExampleServices
import behaviour_language from "jolie.behaviour_language" as jolie
import technology from "jolie.technology" as jolie_interpreter

@behaviour_language(jolie)
@technology(jolie_interpreter)
ExampleServices::org.example.Microservice {
  operation1() { /* body elided */ }
}
"#;
    let unit = parse_unit(text, "ext.lsm", Some(View::Lemma)).unwrap();
    let printed = serialize_unit(&unit);
    let again = parse_unit(&printed, "ext.lsm", Some(View::Lemma)).unwrap();
    assert_eq!(again.stripped(), unit.stripped(), "{printed}");
    assert_eq!(serialize_unit(&again), printed);
}

#[test]
fn per_binding_annotations_survive_mixed_extensions() {
    // two bindings with different technologies keep per-binding annotations
    let text = "view lemma\n\nimport behaviour_language from \"jolie.behaviour_language\" as jolie\nimport technology from \"jolie.technology\" as jolie_interpreter\n\nmicroservice org.x.Svc {\n  interface I {\n    a(request: in async int)\n    b(request: in async int)\n  }\n  @behaviour_language(jolie)\n  @technology(jolie_interpreter)\n  a() {\n    nil\n  }\n  @behaviour_language(jolie)\n  @technology(jolie_interpreter)\n  b() {\n    nil\n  }\n}\n";
    let unit = parse_unit(text, "svc.lsm", None).unwrap();
    let printed = serialize_unit(&unit);
    let again = parse_unit(&printed, "svc.lsm", None).unwrap();
    assert_eq!(again.stripped(), unit.stripped(), "{printed}");
}

#[test]
fn models_and_states_transfer_across_threads() {
    fn assert_send_sync<T: Send + Sync>() {}
    assert_send_sync::<msadl_core::model::ModelSet>();
    assert_send_sync::<msadl_core::model::TypeDecl>();
    assert_send_sync::<msadl_core::surface::SourceUnit>();
    assert_send_sync::<msadl_core::sim::NetworkState>();
    assert_send_sync::<msadl_core::ddd::EntityRegistry>();
    assert_send_sync::<msadl_core::Diagnostic>();

    // parallel parsing of independent units is part of the contract
    let mut gen = ModelGen::new(5);
    let texts: Vec<String> = (0..8).map(|i| serialize_unit(&gen.unit(View::Jolie, &format!("t{i}.jsm")))).collect();
    let handles: Vec<_> = texts
        .into_iter()
        .enumerate()
        .map(|(i, text)| {
            std::thread::spawn(move || parse_unit(&text, &format!("t{i}.jsm"), Some(View::Jolie)).map(|u| u.declarations.len()))
        })
        .collect();
    for h in handles {
        assert!(h.join().unwrap().is_ok());
    }
}
