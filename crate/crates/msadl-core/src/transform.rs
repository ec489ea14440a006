//! Bidirectional translation between the Jolie and LEMMA views with
//! explicit loss reports.
//!
//! Forward rules (jolie → lemma):
//!   R1  requestResponse(req, resp)  → params [(request, in, sync, req),
//!        (response, out, sync, resp)]
//!   R2  oneWay(req)                 → params [(request, in, async, req)]
//!   R3  each input port             → endpoint + synthesised technology
//!        model (`tech_<protocol>`) + mapping entry
//!   R4  each output port            → one dependency per distinct target,
//!        location/protocol of the callee dropped (loss item)
//!   R5  kind := functional           (synthesised default, loss item)
//!   R6  interfaces become owned; a loss item notes shared artefacts that
//!        were exposed by more than one service
//!
//! The reverse direction inverts R1/R2 by parameter shape, rebuilds input
//! ports from endpoints and their mappings, and synthesises one output port
//! per dependency with the placeholder location `socket://UNRESOLVED`.
//! Operations whose parameter multiset matches neither R1 nor R2 are
//! refused, reported, and skipped; everything else proceeds.

use serde::{Deserialize, Serialize};

use crate::diag::{codes, finish, Diagnostic};
use crate::model::{
    BehaviourBinding, Communication, Endpoint, Exchange, Interface, JolieServiceModel, LemmaServiceModel,
    MappingEntry, ModelSet, OperationShape, OperationSig, Parameter, Port, PortDirection, ProtocolDef, ServiceKind,
    TechnologyModel, TypeRef, JOLIE_BEHAVIOUR_LANGUAGE, JOLIE_TECHNOLOGY, MAIN_BINDING,
};

pub const UNRESOLVED_LOCATION: &str = "socket://UNRESOLVED";
pub const DEFAULT_FORMAT: &str = "json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    JolieToLemma,
    LemmaToJolie,
}

/// What a loss item records. `DroppedAccessPoint` covers R4's documented
/// drop of callee location/protocol when an output port collapses into a
/// dependency; `DroppedSharing` covers R6's loss of interface sharing when
/// a reusable artefact becomes owned per service.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    DroppedKind,
    DroppedDddSemantics,
    DroppedAccessPoint,
    DroppedSharing,
    SynthesizedDefault,
    AmbiguousParadigm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossItem {
    pub direction: Direction,
    pub element_path: String,
    pub kind: LossKind,
    pub detail: String,
}

/// Empty iff the transformation preserved all information for its input.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub items: Vec<LossItem>,
}

impl LossReport {
    pub fn is_lossless(&self) -> bool {
        self.items.is_empty()
    }

    fn push(&mut self, direction: Direction, element_path: String, kind: LossKind, detail: String) {
        self.items.push(LossItem { direction, element_path, kind, detail });
    }

    pub fn to_json_string(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("loss report serialises");
        text.push('\n');
        text
    }

    /// Plain-text table for CLI output.
    pub fn render_table(&self) -> String {
        if self.items.is_empty() {
            return "no loss items\n".to_string();
        }
        let mut rows = vec![("ELEMENT".to_string(), "KIND".to_string(), "DETAIL".to_string())];
        for item in &self.items {
            rows.push((item.element_path.clone(), format!("{:?}", item.kind), item.detail.clone()));
        }
        let w0 = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
        let w1 = rows.iter().map(|r| r.1.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (a, b, c) in rows {
            out.push_str(&format!("{a:<w0$}  {b:<w1$}  {c}\n"));
        }
        out
    }
}

pub struct JolieToLemmaOutput {
    pub service: LemmaServiceModel,
    pub technologies: Vec<TechnologyModel>,
    pub mappings: Vec<MappingEntry>,
    pub report: LossReport,
}

// ---------------------------------------------------------------------------
// Jolie -> LEMMA
// ---------------------------------------------------------------------------

fn lemma_shape_of(op: &OperationSig) -> OperationShape {
    match &op.shape {
        OperationShape::RequestResponse { request, response } => OperationShape::Params(vec![
            Parameter {
                name: "request".into(),
                exchange: Exchange::Incoming,
                communication: Communication::Synchronous,
                ty: request.clone(),
            },
            Parameter {
                name: "response".into(),
                exchange: Exchange::Outgoing,
                communication: Communication::Synchronous,
                ty: response.clone(),
            },
        ]),
        OperationShape::OneWay { request } => OperationShape::Params(vec![Parameter {
            name: "request".into(),
            exchange: Exchange::Incoming,
            communication: Communication::Asynchronous,
            ty: request.clone(),
        }]),
        already_lemma @ OperationShape::Params(_) => already_lemma.clone(),
    }
}

fn lemma_interface_of(interface: &Interface) -> Interface {
    Interface {
        name: interface.name.clone(),
        operations: interface
            .operations
            .iter()
            .map(|op| OperationSig { name: op.name.clone(), shape: lemma_shape_of(op), loc: Default::default() })
            .collect(),
        loc: Default::default(),
    }
}

/// The service (if any) whose input port listens at `location`.
fn target_of_location<'a>(set: &'a ModelSet, location: &str) -> Option<&'a JolieServiceModel> {
    set.jolie_services
        .values()
        .find(|s| s.input_ports().any(|p| p.location == location))
}

pub fn jolie_to_lemma(service: &JolieServiceModel, set: &ModelSet) -> JolieToLemmaOutput {
    let mut report = LossReport::default();
    let mut out = LemmaServiceModel::new(&service.name);

    // R5: the jolie view has no service kind
    out.kind = ServiceKind::Functional;
    report.push(
        Direction::JolieToLemma,
        service.name.clone(),
        LossKind::SynthesizedDefault,
        "kind `functional` synthesised (the source view has no service kinds)".into(),
    );

    // R6: input-exposed interfaces become owned by the microservice
    let mut owned: Vec<String> = Vec::new();
    for port in service.input_ports() {
        for name in &port.interfaces {
            if !owned.contains(name) {
                owned.push(name.clone());
            }
        }
    }
    for name in &owned {
        let Some(interface) = set.interfaces.get(name) else { continue };
        out.interfaces.push(lemma_interface_of(interface));
        let exposers = set
            .jolie_services
            .values()
            .filter(|s| s.input_ports().any(|p| p.interfaces.contains(name)))
            .count();
        if exposers > 1 {
            report.push(
                Direction::JolieToLemma,
                format!("{}/{}", service.name, name),
                LossKind::DroppedSharing,
                format!("interface `{name}` was a shared artefact exposed by {exposers} services; it is now owned per service"),
            );
        }
    }

    // R3: input ports -> endpoints + synthesised technology + mapping
    let mut technologies: Vec<TechnologyModel> = Vec::new();
    let mut mappings: Vec<MappingEntry> = Vec::new();
    for port in service.input_ports() {
        let format = match &port.data_format {
            Some(f) => f.clone(),
            None => {
                report.push(
                    Direction::JolieToLemma,
                    format!("{}/{}", service.name, port.name),
                    LossKind::SynthesizedDefault,
                    format!("data format defaulted to `{DEFAULT_FORMAT}` (the port names none)"),
                );
                DEFAULT_FORMAT.to_string()
            }
        };
        let tech_name = format!("tech_{}", port.protocol);
        match technologies.iter_mut().find(|t| t.name == tech_name) {
            Some(tech) => {
                if !tech.data_formats.contains(&format) {
                    tech.data_formats.push(format.clone());
                }
            }
            None => technologies.push(TechnologyModel {
                name: tech_name.clone(),
                protocols: vec![ProtocolDef { name: port.protocol.clone(), default_format: Some(format.clone()) }],
                data_formats: vec![format.clone()],
                loc: Default::default(),
            }),
        }
        out.endpoints.push(Endpoint {
            name: port.name.clone(),
            location: port.location.clone(),
            protocol: None,
            data_format: None,
            interfaces: port.interfaces.clone(),
            loc: Default::default(),
        });
        mappings.push(MappingEntry {
            service: out.qualified_name.clone(),
            endpoint: port.name.clone(),
            technology: tech_name,
            protocol: port.protocol.clone(),
            format,
            loc: Default::default(),
        });
    }

    // R4: output ports -> one dependency per distinct target
    for port in service.output_ports() {
        let target = target_of_location(set, &port.location)
            .map(|s| s.name.clone())
            .unwrap_or_else(|| port.name.clone());
        if !out.requires.contains(&target) {
            out.requires.push(target.clone());
        }
        report.push(
            Direction::JolieToLemma,
            format!("{}/{}", service.name, port.name),
            LossKind::DroppedAccessPoint,
            format!(
                "output port collapsed to a dependency on `{target}`; callee location `{}` and protocol `{}` dropped",
                port.location, port.protocol
            ),
        );
    }

    // behaviours survive as a binding on the reserved `main` operation
    if let Some(behaviour) = &service.behaviour {
        out.behaviour_bindings.push(BehaviourBinding {
            operation: MAIN_BINDING.into(),
            language: JOLIE_BEHAVIOUR_LANGUAGE.into(),
            technology: JOLIE_TECHNOLOGY.into(),
            body: behaviour.clone(),
            loc: Default::default(),
        });
    }

    JolieToLemmaOutput { service: out, technologies, mappings, report }
}

/// Transform every Jolie service of a set; types are carried over
/// bit-identically (shared type system).
pub fn model_set_to_lemma(set: &ModelSet) -> (ModelSet, LossReport) {
    let mut out = ModelSet::new();
    out.types = set.types.clone();
    out.technologies = set.technologies.clone();
    out.lemma_services = set.lemma_services.clone();
    out.mappings = set.mappings.clone();

    let mut report = LossReport::default();
    for service in set.jolie_services.values() {
        let result = jolie_to_lemma(service, set);
        for tech in result.technologies {
            if let Some(existing) = out.technologies.get_mut(&tech.name) {
                for fmt in tech.data_formats {
                    if !existing.data_formats.contains(&fmt) {
                        existing.data_formats.push(fmt);
                    }
                }
            } else {
                out.add_technology(tech);
            }
        }
        out.mappings.extend(result.mappings);
        out.add_lemma_service(result.service);
        report.items.extend(result.report.items);
    }
    (out, report)
}

// ---------------------------------------------------------------------------
// LEMMA -> Jolie
// ---------------------------------------------------------------------------

pub struct LemmaToJolieOutput {
    pub service: JolieServiceModel,
    /// Owned interfaces hoisted back to shared artefacts.
    pub interfaces: Vec<Interface>,
    pub report: LossReport,
    pub diagnostics: Vec<Diagnostic>,
}

/// Invert R1/R2 by parameter multiset. `None` when neither rule matches.
fn jolie_shape_of(params: &[Parameter]) -> Option<OperationShape> {
    match params {
        [] => Some(OperationShape::OneWay { request: TypeRef::Native(crate::model::NativeType::Void) }),
        [p] if p.exchange == Exchange::Incoming && p.communication == Communication::Asynchronous => {
            Some(OperationShape::OneWay { request: p.ty.clone() })
        }
        [a, b] => {
            let sync = |p: &Parameter| p.communication == Communication::Synchronous;
            let (req, resp) = match (a.exchange, b.exchange) {
                (Exchange::Incoming, Exchange::Outgoing) => (a, b),
                (Exchange::Outgoing, Exchange::Incoming) => (b, a),
                _ => return None,
            };
            if sync(req) && sync(resp) {
                Some(OperationShape::RequestResponse { request: req.ty.clone(), response: resp.ty.clone() })
            } else {
                None
            }
        }
        _ => None,
    }
}

pub fn lemma_to_jolie(service: &LemmaServiceModel, set: &ModelSet) -> LemmaToJolieOutput {
    let mut report = LossReport::default();
    let mut diagnostics = Vec::new();
    let local = service.local_name().to_string();
    let mut out = JolieServiceModel::new(&local);

    // kind cannot be expressed on the jolie side
    report.push(
        Direction::LemmaToJolie,
        service.qualified_name.clone(),
        LossKind::DroppedKind,
        format!("service kind `{}` dropped (the target view has no service kinds)", service.kind.keyword()),
    );

    // owned interfaces become shared artefacts with operation-style shapes
    let mut interfaces = Vec::new();
    for interface in &service.interfaces {
        let mut converted = Interface { name: interface.name.clone(), operations: Vec::new(), loc: Default::default() };
        for op in &interface.operations {
            let shape = match &op.shape {
                OperationShape::Params(params) => match jolie_shape_of(params) {
                    Some(shape) => shape,
                    None => {
                        report.push(
                            Direction::LemmaToJolie,
                            format!("{}/{}/{}", service.qualified_name, interface.name, op.name),
                            LossKind::AmbiguousParadigm,
                            "parameter multiset matches neither the request-response nor the one-way rule; operation refused".into(),
                        );
                        diagnostics.push(Diagnostic::error(
                            codes::AMBIGUOUS_PARADIGM,
                            format!(
                                "operation `{}` of `{}` has a parameter shape with no operation-paradigm equivalent",
                                op.name, interface.name
                            ),
                            op.loc.clone(),
                        ));
                        continue;
                    }
                },
                already_jolie => already_jolie.clone(),
            };
            converted.operations.push(OperationSig { name: op.name.clone(), shape, loc: Default::default() });
        }
        interfaces.push(converted);
    }

    // endpoints (with their technology assignments) become input ports
    for endpoint in &service.endpoints {
        match set.endpoint_technology(&service.qualified_name, endpoint) {
            Some((_tech, protocol, format)) => out.ports.push(Port {
                name: endpoint.name.clone(),
                direction: PortDirection::Input,
                location: endpoint.location.clone(),
                protocol,
                data_format: Some(format),
                interfaces: endpoint.interfaces.clone(),
                loc: Default::default(),
            }),
            None => diagnostics.push(Diagnostic::error(
                codes::REF_UNRESOLVED,
                format!(
                    "endpoint `{}` of `{}` has no technology assignment; input port skipped",
                    endpoint.name, service.qualified_name
                ),
                endpoint.loc.clone(),
            )),
        }
    }

    // dependencies become output ports with a placeholder location; the
    // callee's advertised endpoint (when in context) supplies protocol,
    // format and interfaces
    for dep in &service.requires {
        let port_name = dep.rsplit('.').next().unwrap_or(dep).to_string();
        let target = set.lemma_services.get(dep);
        let first_endpoint = target.and_then(|t| t.endpoints.first());
        let (protocol, data_format, port_interfaces) = match (target, first_endpoint) {
            (Some(t), Some(e)) => match set.endpoint_technology(&t.qualified_name, e) {
                Some((_, protocol, format)) => (protocol, Some(format), e.interfaces.clone()),
                None => ("unresolved".to_string(), None, e.interfaces.clone()),
            },
            _ => ("unresolved".to_string(), None, Vec::new()),
        };
        report.push(
            Direction::LemmaToJolie,
            format!("{}/{}", service.qualified_name, port_name),
            LossKind::SynthesizedDefault,
            format!("output port for dependency `{dep}` synthesised with placeholder location `{UNRESOLVED_LOCATION}`"),
        );
        if port_interfaces.is_empty() {
            diagnostics.push(Diagnostic::warning(
                codes::REF_UNRESOLVED,
                format!("dependency `{dep}` is not in context; synthesised output port `{port_name}` has no interfaces"),
                service.loc.clone(),
            ));
        }
        out.ports.push(Port {
            name: port_name,
            direction: PortDirection::Output,
            location: UNRESOLVED_LOCATION.to_string(),
            protocol,
            data_format,
            interfaces: port_interfaces,
            loc: Default::default(),
        });
    }

    // bindings: `main` becomes the service behaviour; operation-level
    // bindings are rendered as input-guarded replications
    let mut behaviour: Option<crate::model::BehaviourTerm> = None;
    for binding in &service.behaviour_bindings {
        let term = if binding.operation == MAIN_BINDING {
            binding.body.clone()
        } else {
            crate::model::BehaviourTerm::GuardedReplication {
                op: binding.operation.clone(),
                bind_var: "message".into(),
                body: Box::new(binding.body.clone()),
            }
        };
        behaviour = Some(match behaviour {
            None => term,
            Some(existing) => crate::model::BehaviourTerm::par(existing, term),
        });
    }
    out.behaviour = behaviour;

    LemmaToJolieOutput { service: out, interfaces, report, diagnostics }
}

/// Transform every LEMMA service of a set back to the Jolie view.
pub fn model_set_to_jolie(set: &ModelSet) -> (ModelSet, LossReport, Vec<Diagnostic>) {
    let mut out = ModelSet::new();
    out.types = set.types.clone();
    out.interfaces = set.interfaces.clone();
    out.jolie_services = set.jolie_services.clone();

    let mut report = LossReport::default();
    let mut diagnostics = Vec::new();
    for service in set.lemma_services.values() {
        let result = lemma_to_jolie(service, set);
        for interface in result.interfaces {
            if out.interfaces.contains_key(&interface.name) {
                diagnostics.push(Diagnostic::error(
                    codes::DUPLICATE_NAME,
                    format!(
                        "interface `{}` (owned by `{}`) clashes with an existing shared interface; keeping the first",
                        interface.name, service.qualified_name
                    ),
                    service.loc.clone(),
                ));
            } else {
                out.add_interface(interface);
            }
        }
        out.add_jolie_service(result.service);
        report.items.extend(result.report.items);
        diagnostics.extend(result.diagnostics);
    }
    (out, report, finish(diagnostics))
}
