//! Structural well-formedness checks: reference resolution, uniqueness,
//! cardinality and refinement sanity, behaviour shape checks.
//!
//! Validation is pure and idempotent: the same input always yields the same
//! diagnostic list, sorted by location. It never aborts — diagnostics are
//! the output.

use std::collections::BTreeSet;

use crate::diag::{codes, finish, Diagnostic, Location};
use crate::model::{
    BehaviourTerm, DddPattern, Interface, JolieServiceModel, LemmaServiceModel, ModelSet, Node, OperationShape,
    OperationSig, Port, PortDirection, Refinement, ShapeFamily, TypeDecl, TypeExpr, TypeRef, MAIN_BINDING,
};


/// Validate every declaration of a resolved model set.
pub fn validate_model_set(set: &ModelSet) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    for t in set.types.values() {
        validate_type_decl(t, set, &mut diags);
    }
    for i in set.interfaces.values() {
        validate_interface(i, set, None, &mut diags);
    }
    for s in set.jolie_services.values() {
        validate_jolie_service_inner(s, set, &mut diags);
    }
    for s in set.lemma_services.values() {
        validate_lemma_service_inner(s, set, &mut diags);
    }
    for t in set.technologies.values() {
        validate_technology(t, &mut diags);
    }
    for m in &set.mappings {
        validate_mapping(m, set, &mut diags);
    }
    finish(diags)
}

/// One service model against its context, per the metamodel contract.
pub fn validate_service(service: ServiceRef<'_>, set: &ModelSet) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    match service {
        ServiceRef::Jolie(s) => validate_jolie_service_inner(s, set, &mut diags),
        ServiceRef::Lemma(s) => validate_lemma_service_inner(s, set, &mut diags),
    }
    finish(diags)
}

#[derive(Debug, Clone, Copy)]
pub enum ServiceRef<'a> {
    Jolie(&'a JolieServiceModel),
    Lemma(&'a LemmaServiceModel),
}

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

fn validate_type_decl(t: &TypeDecl, set: &ModelSet, diags: &mut Vec<Diagnostic>) {
    validate_basic(&t.root, &t.loc, diags);
    validate_nodes(&t.nodes, set, diags);

    for ann in &t.annotations {
        match &ann.pattern {
            DddPattern::Entity { identity_fields } => {
                if identity_fields.is_empty() {
                    diags.push(Diagnostic::error(
                        codes::ANNOTATION_MALFORMED,
                        "`@entity` identity list must not be empty",
                        ann.loc.clone(),
                    ));
                }
                let mut seen = BTreeSet::new();
                for field in identity_fields {
                    if !seen.insert(field.as_str()) {
                        diags.push(Diagnostic::error(
                            codes::ANNOTATION_MALFORMED,
                            format!("identity field `{field}` listed twice"),
                            ann.loc.clone(),
                        ));
                    }
                    if t.node(field).is_none() {
                        diags.push(Diagnostic::error(
                            codes::DDD_IDENTITY_FIELD_MISSING,
                            format!("identity field `{field}` is not a node of type `{}`", t.name),
                            ann.loc.clone(),
                        ));
                    }
                }
            }
            DddPattern::Unknown { name } => {
                diags.push(Diagnostic::warning(
                    codes::ANNOTATION_UNKNOWN,
                    format!("unknown annotation `@{name}` is preserved but has no semantics"),
                    ann.loc.clone(),
                ));
            }
        }
    }
}

fn validate_nodes(nodes: &[Node], set: &ModelSet, diags: &mut Vec<Diagnostic>) {
    let mut seen = BTreeSet::new();
    for node in nodes {
        if !seen.insert(node.name.as_str()) {
            diags.push(Diagnostic::error(
                codes::DUPLICATE_NAME,
                format!("node `{}` is declared twice among its siblings", node.name),
                node.loc.clone(),
            ));
        }
        if let Some(max) = node.cardinality.max {
            if node.cardinality.min > max {
                diags.push(Diagnostic::error(
                    codes::CARDINALITY_INVALID,
                    format!("cardinality [{},{}] has min > max", node.cardinality.min, max),
                    node.loc.clone(),
                ));
            }
        }
        match &node.ty {
            TypeExpr::Basic(b) => validate_basic(b, &node.loc, diags),
            TypeExpr::Named(name) => {
                if !set.types.contains_key(name) {
                    diags.push(Diagnostic::error(
                        codes::REF_UNRESOLVED,
                        format!("type `{name}` is not declared"),
                        node.loc.clone(),
                    ));
                }
            }
            TypeExpr::Inline { root, nodes } => {
                validate_basic(root, &node.loc, diags);
                validate_nodes(nodes, set, diags);
            }
        }
    }
}

fn validate_basic(b: &crate::model::BasicType, loc: &Location, diags: &mut Vec<Diagnostic>) {
    let Some(r) = &b.refinement else { return };
    if !r.compatible_with(b.native) {
        diags.push(Diagnostic::error(
            codes::REFINEMENT_INCOMPATIBLE,
            format!("refinement `{}` does not apply to native type `{}`", r.keyword(), b.native),
            loc.clone(),
        ));
    }
    match r {
        Refinement::Length { min, max } => {
            if min > max {
                diags.push(Diagnostic::error(
                    codes::REFINEMENT_INVALID,
                    format!("length({min},{max}) has min > max"),
                    loc.clone(),
                ));
            }
        }
        Refinement::Range { lo, hi } => {
            if !lo.lte(*hi) {
                diags.push(Diagnostic::error(
                    codes::REFINEMENT_INVALID,
                    format!("range({lo}, {hi}) has lo > hi"),
                    loc.clone(),
                ));
            }
        }
        Refinement::Regex { pattern } => {
            if crate::check::compile_anchored(pattern).is_err() {
                diags.push(Diagnostic::error(
                    codes::REFINEMENT_INVALID,
                    format!("regex pattern {pattern:?} does not compile"),
                    loc.clone(),
                ));
            }
        }
        Refinement::EnumOf { values } => {
            if values.is_empty() {
                diags.push(Diagnostic::error(codes::REFINEMENT_INVALID, "enum() must not be empty", loc.clone()));
            }
            let mut seen = BTreeSet::new();
            for v in values {
                if !seen.insert(v.as_str()) {
                    diags.push(Diagnostic::error(
                        codes::REFINEMENT_INVALID,
                        format!("enum value {v:?} listed twice"),
                        loc.clone(),
                    ));
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Interfaces
// ---------------------------------------------------------------------------

fn validate_interface(i: &Interface, set: &ModelSet, expected: Option<ShapeFamily>, diags: &mut Vec<Diagnostic>) {
    let mut seen = BTreeSet::new();
    let mut family: Option<ShapeFamily> = expected;
    for op in &i.operations {
        if !seen.insert(op.name.as_str()) {
            diags.push(Diagnostic::error(
                codes::DUPLICATE_NAME,
                format!("operation `{}` is declared twice in interface `{}`", op.name, i.name),
                op.loc.clone(),
            ));
        }
        match family {
            None => family = Some(op.family()),
            Some(f) if f != op.family() => {
                diags.push(Diagnostic::error(
                    codes::INTERFACE_STYLE,
                    format!(
                        "operation `{}` mixes shape families in interface `{}` (all operations of one interface share one style)",
                        op.name, i.name
                    ),
                    op.loc.clone(),
                ));
            }
            _ => {}
        }
        validate_operation(op, set, diags);
    }
}

fn validate_operation(op: &OperationSig, set: &ModelSet, diags: &mut Vec<Diagnostic>) {
    let mut check_ref = |r: &TypeRef| {
        if let TypeRef::Named(name) = r {
            if !set.types.contains_key(name) {
                diags.push(Diagnostic::error(
                    codes::REF_UNRESOLVED,
                    format!("type `{name}` is not declared"),
                    op.loc.clone(),
                ));
            }
        }
    };
    match &op.shape {
        OperationShape::OneWay { request } => check_ref(request),
        OperationShape::RequestResponse { request, response } => {
            check_ref(request);
            check_ref(response);
        }
        OperationShape::Params(params) => {
            for p in params {
                check_ref(&p.ty);
            }
            let mut seen = BTreeSet::new();
            for p in params {
                if !seen.insert(p.name.as_str()) {
                    diags.push(Diagnostic::error(
                        codes::DUPLICATE_NAME,
                        format!("parameter `{}` is declared twice in operation `{}`", p.name, op.name),
                        op.loc.clone(),
                    ));
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Jolie services
// ---------------------------------------------------------------------------

fn validate_uri(location: &str, loc: &Location, diags: &mut Vec<Diagnostic>) {
    if url::Url::parse(location).is_err() {
        diags.push(Diagnostic::error(
            codes::URI_INVALID,
            format!("location {location:?} is not a valid URI"),
            loc.clone(),
        ));
    }
}

fn validate_jolie_service_inner(s: &JolieServiceModel, set: &ModelSet, diags: &mut Vec<Diagnostic>) {
    let mut seen = BTreeSet::new();
    for port in &s.ports {
        if !seen.insert(port.name.as_str()) {
            diags.push(Diagnostic::error(
                codes::DUPLICATE_NAME,
                format!("port `{}` is declared twice in service `{}`", port.name, s.name),
                port.loc.clone(),
            ));
        }
        validate_port(port, set, diags);
    }
    if let Some(behaviour) = &s.behaviour {
        validate_behaviour(behaviour, s, set, &s.loc, diags);
    }
}

fn validate_port(port: &Port, set: &ModelSet, diags: &mut Vec<Diagnostic>) {
    validate_uri(&port.location, &port.loc, diags);
    if port.interfaces.is_empty() {
        diags.push(Diagnostic::error(
            codes::ACCESS_POINT_INVALID,
            format!("port `{}` exposes no interfaces", port.name),
            port.loc.clone(),
        ));
    }
    for name in &port.interfaces {
        match set.interfaces.get(name) {
            None => diags.push(Diagnostic::error(
                codes::REF_UNRESOLVED,
                format!("interface `{name}` is not declared"),
                port.loc.clone(),
            )),
            Some(i) => {
                if i.operations.iter().any(|o| o.family() == ShapeFamily::LemmaStyle) {
                    diags.push(Diagnostic::error(
                        codes::INTERFACE_STYLE,
                        format!("interface `{name}` has parameter-style operations; ports require operation-style interfaces"),
                        port.loc.clone(),
                    ));
                }
            }
        }
    }
}

/// Operation lookup for behaviour checks: resolves an operation through the
/// interfaces of the ports with the given direction.
fn find_port_op<'a>(
    s: &'a JolieServiceModel,
    set: &'a ModelSet,
    direction: PortDirection,
    port: Option<&str>,
    op: &str,
) -> Option<&'a OperationSig> {
    s.ports
        .iter()
        .filter(|p| p.direction == direction && port.is_none_or(|name| p.name == name))
        .flat_map(|p| p.interfaces.iter())
        .filter_map(|name| set.interfaces.get(name))
        .find_map(|i| i.operation(op))
}

fn validate_behaviour(
    term: &BehaviourTerm,
    s: &JolieServiceModel,
    set: &ModelSet,
    loc: &Location,
    diags: &mut Vec<Diagnostic>,
) {
    match term {
        BehaviourTerm::Nil => {}
        BehaviourTerm::Invoke { port, op, response_var, .. } => {
            let Some(p) = s.port(port) else {
                diags.push(Diagnostic::error(
                    codes::REF_UNRESOLVED,
                    format!("behaviour invokes unknown port `{port}`"),
                    loc.clone(),
                ));
                return;
            };
            if p.direction != PortDirection::Output {
                diags.push(Diagnostic::error(
                    codes::BEHAVIOUR_INVALID,
                    format!("port `{port}` is an input port; operations are invoked through output ports"),
                    loc.clone(),
                ));
                return;
            }
            match find_port_op(s, set, PortDirection::Output, Some(port), op) {
                None => diags.push(Diagnostic::error(
                    codes::REF_UNRESOLVED,
                    format!("operation `{op}` is not part of port `{port}`'s interfaces"),
                    loc.clone(),
                )),
                Some(sig) => {
                    if sig.is_request_response() != response_var.is_some() {
                        diags.push(Diagnostic::error(
                            codes::BEHAVIOUR_INVALID,
                            if sig.is_request_response() {
                                format!("request-response invocation of `{op}` must bind a response variable")
                            } else {
                                format!("one-way invocation of `{op}` cannot bind a response variable")
                            },
                            loc.clone(),
                        ));
                    }
                }
            }
        }
        BehaviourTerm::Receive { op, body, reply, .. } => {
            match find_port_op(s, set, PortDirection::Input, None, op) {
                None => diags.push(Diagnostic::error(
                    codes::REF_UNRESOLVED,
                    format!("operation `{op}` is not exposed by any input port"),
                    loc.clone(),
                )),
                Some(sig) => {
                    if sig.is_request_response() != reply.is_some() {
                        diags.push(Diagnostic::error(
                            codes::BEHAVIOUR_INVALID,
                            if sig.is_request_response() {
                                format!("receive on request-response operation `{op}` must reply")
                            } else {
                                format!("receive on one-way operation `{op}` cannot reply")
                            },
                            loc.clone(),
                        ));
                    }
                }
            }
            validate_behaviour(body, s, set, loc, diags);
        }
        BehaviourTerm::GuardedReplication { op, body, .. } => {
            match find_port_op(s, set, PortDirection::Input, None, op) {
                None => diags.push(Diagnostic::error(
                    codes::REF_UNRESOLVED,
                    format!("operation `{op}` is not exposed by any input port"),
                    loc.clone(),
                )),
                Some(sig) => {
                    if sig.is_request_response() {
                        diags.push(Diagnostic::error(
                            codes::BEHAVIOUR_INVALID,
                            format!("guarded replication requires a one-way operation, but `{op}` is request-response"),
                            loc.clone(),
                        ));
                    }
                }
            }
            validate_behaviour(body, s, set, loc, diags);
        }
        BehaviourTerm::Sequence { first, second } => {
            validate_behaviour(first, s, set, loc, diags);
            validate_behaviour(second, s, set, loc, diags);
        }
        BehaviourTerm::Parallel { left, right } => {
            validate_behaviour(left, s, set, loc, diags);
            validate_behaviour(right, s, set, loc, diags);
        }
    }
}

// ---------------------------------------------------------------------------
// LEMMA services
// ---------------------------------------------------------------------------

fn validate_lemma_service_inner(s: &LemmaServiceModel, set: &ModelSet, diags: &mut Vec<Diagnostic>) {
    let mut names = BTreeSet::new();
    for i in &s.interfaces {
        if !names.insert(i.name.as_str()) {
            diags.push(Diagnostic::error(
                codes::DUPLICATE_NAME,
                format!("interface `{}` is declared twice in microservice `{}`", i.name, s.qualified_name),
                i.loc.clone(),
            ));
        }
        validate_interface(i, set, Some(ShapeFamily::LemmaStyle), diags);
    }

    let mut endpoint_names = BTreeSet::new();
    for e in &s.endpoints {
        if !endpoint_names.insert(e.name.as_str()) {
            diags.push(Diagnostic::error(
                codes::DUPLICATE_NAME,
                format!("endpoint `{}` is declared twice in microservice `{}`", e.name, s.qualified_name),
                e.loc.clone(),
            ));
        }
        validate_uri(&e.location, &e.loc, diags);
        if e.interfaces.is_empty() {
            diags.push(Diagnostic::error(
                codes::ACCESS_POINT_INVALID,
                format!("endpoint `{}` exposes no interfaces", e.name),
                e.loc.clone(),
            ));
        }
        for name in &e.interfaces {
            if s.interface(name).is_none() {
                diags.push(Diagnostic::error(
                    codes::REF_UNRESOLVED,
                    format!("endpoint `{}` references interface `{name}`, which `{}` does not own", e.name, s.qualified_name),
                    e.loc.clone(),
                ));
            }
        }
        if let (Some(p), Some(f)) = (&e.protocol, &e.data_format) {
            if p.technology != f.technology {
                diags.push(Diagnostic::error(
                    codes::ACCESS_POINT_INVALID,
                    format!("endpoint `{}` mixes technologies `{}` and `{}`", e.name, p.technology, f.technology),
                    e.loc.clone(),
                ));
            }
        }
        validate_endpoint_technology(s, e, set, diags);
    }

    let mut deps = BTreeSet::new();
    for dep in &s.requires {
        if !deps.insert(dep.as_str()) {
            diags.push(Diagnostic::error(
                codes::DUPLICATE_NAME,
                format!("microservice `{}` requires `{dep}` twice", s.qualified_name),
                s.loc.clone(),
            ));
        }
    }

    let mut bound = BTreeSet::new();
    for b in &s.behaviour_bindings {
        if !bound.insert(b.operation.as_str()) {
            diags.push(Diagnostic::error(
                codes::DUPLICATE_NAME,
                format!("operation `{}` has two behaviour bindings", b.operation),
                b.loc.clone(),
            ));
        }
        if b.operation != MAIN_BINDING && s.operation(&b.operation).is_none() {
            diags.push(Diagnostic::error(
                codes::REF_UNRESOLVED,
                format!(
                    "behaviour binding targets operation `{}`, which `{}` does not declare",
                    b.operation, s.qualified_name
                ),
                b.loc.clone(),
            ));
        }
        // binding bodies are quoted guest-language terms; they are validated
        // on the Jolie side of the transform
    }
}

/// Endpoint technology must resolve through direct references or a mapping
/// entry.
fn validate_endpoint_technology(
    s: &LemmaServiceModel,
    e: &crate::model::Endpoint,
    set: &ModelSet,
    diags: &mut Vec<Diagnostic>,
) {
    if let Some(proto) = &e.protocol {
        match set.technologies.get(&proto.technology) {
            None => diags.push(Diagnostic::error(
                codes::REF_UNRESOLVED,
                format!("technology model `{}` is not declared", proto.technology),
                e.loc.clone(),
            )),
            Some(tech) => {
                if tech.protocol(&proto.name).is_none() {
                    diags.push(Diagnostic::error(
                        codes::REF_UNRESOLVED,
                        format!("technology `{}` has no protocol `{}`", proto.technology, proto.name),
                        e.loc.clone(),
                    ));
                }
                if let Some(fmt) = &e.data_format {
                    if !tech.data_formats.contains(&fmt.name) {
                        diags.push(Diagnostic::error(
                            codes::REF_UNRESOLVED,
                            format!("technology `{}` has no data format `{}`", proto.technology, fmt.name),
                            e.loc.clone(),
                        ));
                    }
                }
            }
        }
        return;
    }
    // the mapping entry itself is validated separately
    if !set.mappings.iter().any(|m| m.service == s.qualified_name && m.endpoint == e.name) {
        diags.push(Diagnostic::error(
            codes::REF_UNRESOLVED,
            format!(
                "endpoint `{}` of `{}` has no technology: neither direct references nor a mapping entry",
                e.name, s.qualified_name
            ),
            e.loc.clone(),
        ));
    }
}

// ---------------------------------------------------------------------------
// Technology and mapping models
// ---------------------------------------------------------------------------

fn validate_technology(t: &crate::model::TechnologyModel, diags: &mut Vec<Diagnostic>) {
    let mut seen = BTreeSet::new();
    for p in &t.protocols {
        if !seen.insert(p.name.as_str()) {
            diags.push(Diagnostic::error(
                codes::DUPLICATE_NAME,
                format!("protocol `{}` is declared twice in technology `{}`", p.name, t.name),
                t.loc.clone(),
            ));
        }
        if let Some(fmt) = &p.default_format {
            if !t.data_formats.contains(fmt) {
                diags.push(Diagnostic::error(
                    codes::REF_UNRESOLVED,
                    format!("default format `{fmt}` of protocol `{}` is not among `{}`'s data formats", p.name, t.name),
                    t.loc.clone(),
                ));
            }
        }
    }
    let mut seen = BTreeSet::new();
    for f in &t.data_formats {
        if !seen.insert(f.as_str()) {
            diags.push(Diagnostic::error(
                codes::DUPLICATE_NAME,
                format!("data format `{f}` is declared twice in technology `{}`", t.name),
                t.loc.clone(),
            ));
        }
    }
}

fn validate_mapping(m: &crate::model::MappingEntry, set: &ModelSet, diags: &mut Vec<Diagnostic>) {
    match set.lemma_services.get(&m.service) {
        None => diags.push(Diagnostic::error(
            codes::REF_UNRESOLVED,
            format!("mapping references unknown microservice `{}`", m.service),
            m.loc.clone(),
        )),
        Some(s) => {
            if !s.endpoints.iter().any(|e| e.name == m.endpoint) {
                diags.push(Diagnostic::error(
                    codes::REF_UNRESOLVED,
                    format!("microservice `{}` has no endpoint `{}`", m.service, m.endpoint),
                    m.loc.clone(),
                ));
            }
        }
    }
    match set.technologies.get(&m.technology) {
        None => diags.push(Diagnostic::error(
            codes::REF_UNRESOLVED,
            format!("mapping references unknown technology `{}`", m.technology),
            m.loc.clone(),
        )),
        Some(tech) => {
            if tech.protocol(&m.protocol).is_none() {
                diags.push(Diagnostic::error(
                    codes::REF_UNRESOLVED,
                    format!("technology `{}` has no protocol `{}`", m.technology, m.protocol),
                    m.loc.clone(),
                ));
            }
            if !tech.data_formats.contains(&m.format) {
                diags.push(Diagnostic::error(
                    codes::REF_UNRESOLVED,
                    format!("technology `{}` has no data format `{}`", m.technology, m.format),
                    m.loc.clone(),
                ));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diag::Severity;
    use crate::model::{BasicType, Cardinality, DddAnnotation, NativeType};

    fn empty_set() -> ModelSet {
        ModelSet::new()
    }

    #[test]
    fn empty_model_set_is_valid() {
        assert!(validate_model_set(&empty_set()).is_empty());
    }

    #[test]
    fn empty_service_is_valid() {
        let mut set = empty_set();
        set.add_jolie_service(JolieServiceModel::new("S"));
        assert!(validate_model_set(&set).is_empty());
    }

    #[test]
    fn port_with_undeclared_interface() {
        let mut set = empty_set();
        let mut s = JolieServiceModel::new("S");
        s.ports.push(Port {
            name: "p".into(),
            direction: PortDirection::Input,
            location: "socket://localhost:1".into(),
            protocol: "http".into(),
            data_format: None,
            interfaces: vec!["Foo".into()],
            loc: Location::default(),
        });
        set.add_jolie_service(s);
        let diags = validate_model_set(&set);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, codes::REF_UNRESOLVED);
        assert_eq!(diags[0].severity, Severity::Error);
    }

    #[test]
    fn entity_identity_field_missing() {
        let mut set = empty_set();
        let mut t = TypeDecl::new("Person");
        t.nodes.push(Node::new("SSN", TypeExpr::basic(NativeType::String)));
        // `country` removed from the node list while the annotation keeps it
        t.annotations.push(DddAnnotation::entity(&["SSN", "country"]));
        set.add_type(t);
        let diags = validate_model_set(&set);
        assert!(diags.iter().any(|d| d.code == codes::DDD_IDENTITY_FIELD_MISSING), "{diags:?}");
    }

    #[test]
    fn entity_identity_field_missing_from_parsed_listing() {
        // the Person listing with the `country` node deleted, annotation intact
        let text = "/// @entity { identity = [ SSN, country ] }\ntype Person { SSN: string, name: string }\n";
        let unit = crate::surface::parse_unit(text, "person.jsm", Some(crate::model::View::Jolie)).unwrap();
        let (set, diags) = crate::resolve::resolve(std::slice::from_ref(&unit));
        assert!(diags.is_empty());
        let diags = validate_model_set(&set);
        let missing: Vec<_> = diags.iter().filter(|d| d.code == codes::DDD_IDENTITY_FIELD_MISSING).collect();
        assert_eq!(missing.len(), 1, "{diags:?}");
        assert_eq!(missing[0].severity, Severity::Error);
        assert!(missing[0].message.contains("country"));
    }

    #[test]
    fn validate_is_idempotent_and_pure() {
        let mut set = empty_set();
        let mut t = TypeDecl::new("T");
        t.nodes.push(Node {
            name: "xs".into(),
            cardinality: Cardinality::new(3, Some(1)),
            ty: TypeExpr::basic(NativeType::Int),
            loc: Location::default(),
        });
        set.add_type(t);
        let a = validate_model_set(&set);
        let b = validate_model_set(&set);
        assert_eq!(a, b);
        assert!(a.iter().any(|d| d.code == codes::CARDINALITY_INVALID));
    }

    #[test]
    fn mixed_shape_family_flagged() {
        let mut set = empty_set();
        set.add_interface(Interface {
            name: "I".into(),
            operations: vec![
                OperationSig {
                    name: "a".into(),
                    shape: OperationShape::OneWay { request: TypeRef::Native(NativeType::Void) },
                    loc: Location::default(),
                },
                OperationSig { name: "b".into(), shape: OperationShape::Params(vec![]), loc: Location::default() },
            ],
            loc: Location::default(),
        });
        let diags = validate_model_set(&set);
        assert!(diags.iter().any(|d| d.code == codes::INTERFACE_STYLE), "{diags:?}");
    }

    #[test]
    fn bad_uri_flagged() {
        let mut set = empty_set();
        set.add_interface(Interface {
            name: "I".into(),
            operations: vec![OperationSig {
                name: "f".into(),
                shape: OperationShape::OneWay { request: TypeRef::Native(NativeType::Void) },
                loc: Location::default(),
            }],
            loc: Location::default(),
        });
        let mut s = JolieServiceModel::new("S");
        s.ports.push(Port {
            name: "p".into(),
            direction: PortDirection::Input,
            location: "not a uri".into(),
            protocol: "http".into(),
            data_format: None,
            interfaces: vec!["I".into()],
            loc: Location::default(),
        });
        set.add_jolie_service(s);
        let diags = validate_model_set(&set);
        assert!(diags.iter().any(|d| d.code == codes::URI_INVALID), "{diags:?}");
    }

    #[test]
    fn void_refinement_rejected() {
        let mut set = empty_set();
        let mut t = TypeDecl::new("T");
        t.root = BasicType { native: NativeType::Void, refinement: Some(Refinement::Length { min: 1, max: 1 }) };
        set.add_type(t);
        let diags = validate_model_set(&set);
        assert!(diags.iter().any(|d| d.code == codes::REFINEMENT_INCOMPATIBLE));
    }
}
