use hwlrp::instance::{
    case_study_desk_instance, case_study_instance, parse_instance, synth_instance, to_json, validate_instance,
    ParseError, Severity, SynthDims, SynthError, CASE_STUDY_TOTAL_DEMAND,
};
use proptest::prelude::*;

const MINIMAL: &str = include_str!("../../../data/minimal.json");

fn fatal(findings: &[hwlrp::instance::Finding]) -> Vec<String> {
    findings.iter().filter(|f| f.severity == Severity::Fatal).map(ToString::to_string).collect()
}

#[test]
fn minimal_document_parses_and_validates() {
    let inst = parse_instance(MINIMAL).unwrap();
    assert_eq!(inst.nodes.len(), 5);
    assert_eq!(inst.eps_constant, 1e-4);
    assert!(validate_instance(&inst).is_empty(), "{:?}", validate_instance(&inst));
}

#[test]
fn negative_demand_is_a_schema_error_on_demand() {
    let doc = MINIMAL.replace("\"G1\": 4.0", "\"G1\": -3.0");
    match parse_instance(&doc) {
        Err(ParseError::Schema { field, .. }) => assert!(field.contains("demand"), "{field}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn unknown_field_is_rejected() {
    let doc = MINIMAL.replacen("\"name\": \"minimal\"", "\"name\": \"minimal\", \"colour\": 1", 1);
    match parse_instance(&doc) {
        Err(ParseError::Schema { message, .. }) => assert!(message.contains("colour")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn duplicate_node_id_is_reported() {
    let doc = MINIMAL.replace("\"id\": \"R1\"", "\"id\": \"G1\"");
    match parse_instance(&doc) {
        Err(ParseError::DuplicateId { id, .. }) => assert_eq!(id, "G1"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn syntax_error_carries_position() {
    let doc = "{\n  \"name\": \"x\",\n  \"nodes\": [,]\n}";
    match parse_instance(doc) {
        Err(ParseError::Syntax { line, column, .. }) => {
            assert_eq!(line, 3);
            assert!(column > 0);
        }
        other => panic!("{other:?}"),
    }
    assert!(matches!(parse_instance(&format!("{MINIMAL} x")), Err(ParseError::Syntax { .. })));
}

#[test]
fn demand_above_vehicle_capacity_is_fatal() {
    let doc = MINIMAL.replace("\"G1\": 4.0", "\"G1\": 12.0");
    let inst = parse_instance(&doc).unwrap();
    let f = fatal(&validate_instance(&inst));
    assert!(f.iter().any(|m| m.contains("exceeds any single vehicle capacity")), "{f:?}");
}

#[test]
fn threshold_above_every_level_is_fatal() {
    let mut inst = parse_instance(MINIMAL).unwrap();
    inst.thresholds.disposal.insert("D1".into(), 25.0);
    let f = fatal(&validate_instance(&inst));
    assert!(f.iter().any(|m| m.contains("D1")), "{f:?}");
}

#[test]
fn serialization_round_trips() {
    for inst in [parse_instance(MINIMAL).unwrap(), case_study_instance(), synth_instance(3, &SynthDims::unit()).unwrap()] {
        let back = parse_instance(&to_json(&inst)).unwrap();
        assert_eq!(back, inst);
        assert_eq!(to_json(&back), to_json(&inst));
    }
}

#[test]
fn synth_rejects_zero_dims() {
    let dims = SynthDims { n_waste: 0, ..SynthDims::unit() };
    assert_eq!(synth_instance(1, &dims), Err(SynthError::ZeroDim("n_waste")));
}

#[test]
fn synth_unit_instance_is_valid() {
    let inst = synth_instance(1, &SynthDims::unit()).unwrap();
    assert!(validate_instance(&inst).iter().all(|f| f.severity != Severity::Fatal), "{:?}", validate_instance(&inst));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn synth_is_deterministic_and_valid(
        seed in 0u64..10_000,
        n_gen in 1usize..7, n_rec in 1usize..3, n_treat in 1usize..3, n_disp in 1usize..3,
        n_waste in 1usize..3, n_vehicles in 1usize..4, n_levels in 1usize..4,
    ) {
        let dims = SynthDims { n_gen, n_rec, n_treat, n_disp, n_waste, n_vehicles, n_levels };
        let a = synth_instance(seed, &dims).unwrap();
        let b = synth_instance(seed, &dims).unwrap();
        prop_assert_eq!(to_json(&a), to_json(&b));
        let fatal = fatal(&validate_instance(&a));
        prop_assert!(fatal.is_empty(), "{:?}", fatal);
    }
}

#[test]
fn case_instances_validate() {
    for inst in [case_study_instance(), case_study_desk_instance()] {
        let findings = validate_instance(&inst);
        assert!(findings.is_empty(), "{}: {findings:?}", inst.name);
    }
}

#[test]
fn case_study_shape() {
    let inst = case_study_instance();
    assert_eq!(inst.generation_nodes().count(), 13);
    assert_eq!(inst.vehicles.len(), 12);
    assert_eq!(inst.total_demand(), CASE_STUDY_TOTAL_DEMAND);
    for w in &inst.waste_types {
        assert_eq!(inst.vehicles.iter().filter(|k| k.waste() == Some(w.id.as_str())).count(), 3);
    }
}

#[test]
fn shipped_case_document_matches_builtin() {
    let shipped = include_str!("../../../data/case_study.json");
    assert_eq!(parse_instance(shipped).unwrap(), case_study_instance());
}
