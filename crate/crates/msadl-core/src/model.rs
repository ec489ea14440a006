//! Domain types of both metamodel views over a shared type system.
//!
//! The Jolie view describes a service as ports plus a behaviour, with
//! interfaces and types declared as reusable artefacts next to it. The LEMMA
//! view describes a microservice that owns its interfaces and reaches the
//! network through endpoints, with technology choices factored out into
//! technology and mapping models. Both views share [`TypeDecl`] trees, which
//! is what makes the transforms in [`crate::transform`] loss-trackable
//! instead of heuristic.
//!
//! Everything here is immutable after resolution and freely shareable across
//! threads; all operations over these types are pure functions.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::diag::Location;
use crate::value::Scalar;

/// Which metamodel a unit or document belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum View {
    Jolie,
    Lemma,
}

impl View {
    pub fn keyword(self) -> &'static str {
        match self {
            View::Jolie => "jolie",
            View::Lemma => "lemma",
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            View::Jolie => "jsm",
            View::Lemma => "lsm",
        }
    }
}

impl fmt::Display for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Primitive type of a tree root. `Double` and `Void` extend the classic
/// primitive list; `Void` is what one-way operations with empty payloads
/// exchange.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NativeType {
    Bool,
    Int,
    Double,
    String,
    Char,
    Void,
}

impl NativeType {
    pub const ALL: [NativeType; 6] = [
        NativeType::Bool,
        NativeType::Int,
        NativeType::Double,
        NativeType::String,
        NativeType::Char,
        NativeType::Void,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            NativeType::Bool => "bool",
            NativeType::Int => "int",
            NativeType::Double => "double",
            NativeType::String => "string",
            NativeType::Char => "char",
            NativeType::Void => "void",
        }
    }

    pub fn from_keyword(s: &str) -> Option<NativeType> {
        Self::ALL.into_iter().find(|n| n.keyword() == s)
    }
}

impl fmt::Display for NativeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Numeric bound of a range refinement. Integer bounds stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Int(i64),
    Double(f64),
}

impl Number {
    pub fn as_f64(self) -> f64 {
        match self {
            Number::Int(i) => i as f64,
            Number::Double(d) => d,
        }
    }

    pub fn lte(self, other: Number) -> bool {
        match (self, other) {
            (Number::Int(a), Number::Int(b)) => a <= b,
            (a, b) => a.as_f64() <= b.as_f64(),
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Int(i) => write!(f, "{i}"),
            Number::Double(d) => {
                let s = d.to_string();
                // keep doubles lexically distinct from ints so they re-lex as doubles
                if s.contains('.') || s.contains('e') || s.contains("inf") || s.contains("NaN") {
                    f.write_str(&s)
                } else {
                    write!(f, "{s}.0")
                }
            }
        }
    }
}

/// Predicate restricting the inhabitants of a native type.
///
/// Compatibility matrix: `Length`, `Regex` and `EnumOf` apply to `string`
/// only; `Range` applies to `int` and `double`; `void` admits no refinement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Refinement {
    Length { min: u64, max: u64 },
    Range { lo: Number, hi: Number },
    Regex { pattern: String },
    EnumOf { values: Vec<String> },
}

impl Refinement {
    pub fn keyword(&self) -> &'static str {
        match self {
            Refinement::Length { .. } => "length",
            Refinement::Range { .. } => "range",
            Refinement::Regex { .. } => "regex",
            Refinement::EnumOf { .. } => "enum",
        }
    }

    pub fn compatible_with(&self, native: NativeType) -> bool {
        match self {
            Refinement::Length { .. } | Refinement::Regex { .. } | Refinement::EnumOf { .. } => {
                native == NativeType::String
            }
            Refinement::Range { .. } => matches!(native, NativeType::Int | NativeType::Double),
        }
    }
}

/// A native type together with an optional refinement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasicType {
    pub native: NativeType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refinement: Option<Refinement>,
}

impl BasicType {
    pub fn plain(native: NativeType) -> Self {
        BasicType { native, refinement: None }
    }
}

/// Allowed occurrence range of a node. `max == None` means unbounded.
/// An unannotated node defaults to exactly-one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cardinality {
    pub min: u64,
    pub max: Option<u64>,
}

impl Default for Cardinality {
    fn default() -> Self {
        Cardinality { min: 1, max: Some(1) }
    }
}

impl Cardinality {
    pub const ONE: Cardinality = Cardinality { min: 1, max: Some(1) };

    pub fn new(min: u64, max: Option<u64>) -> Self {
        Cardinality { min, max }
    }

    pub fn accepts(&self, count: u64) -> bool {
        count >= self.min && self.max.is_none_or(|m| count <= m)
    }

    pub fn is_default(&self) -> bool {
        *self == Self::ONE
    }
}

impl fmt::Display for Cardinality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.max {
            Some(max) => write!(f, "[{},{}]", self.min, max),
            None => write!(f, "[{},*]", self.min),
        }
    }
}

/// Type position of a node: a basic type, a reference to a declared type,
/// or an anonymous inline subtree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TypeExpr {
    Basic(BasicType),
    Named(String),
    Inline { root: BasicType, nodes: Vec<Node> },
}

impl TypeExpr {
    pub fn basic(native: NativeType) -> Self {
        TypeExpr::Basic(BasicType::plain(native))
    }
}

/// A field of a tree type: named, ranged (cardinality) and typed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Node {
    pub name: String,
    #[serde(default, skip_serializing_if = "Cardinality::is_default")]
    pub cardinality: Cardinality,
    #[serde(rename = "type")]
    pub ty: TypeExpr,
    #[serde(skip, default)]
    pub loc: Location,
}

impl Node {
    pub fn new(name: &str, ty: TypeExpr) -> Self {
        Node { name: name.to_string(), cardinality: Cardinality::default(), ty, loc: Location::default() }
    }
}

/// DDD pattern carried by an annotation. Annotations with names the toolkit
/// does not know are preserved verbatim (and reported as warnings by
/// validation) instead of being dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DddPattern {
    Entity { identity_fields: Vec<String> },
    Unknown { name: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DddAnnotation {
    pub pattern: DddPattern,
    /// Canonical annotation text for known patterns, source text for
    /// unknown ones.
    pub raw: String,
    #[serde(skip, default)]
    pub loc: Location,
}

impl DddAnnotation {
    pub fn entity(fields: &[&str]) -> Self {
        let identity_fields: Vec<String> = fields.iter().map(|s| s.to_string()).collect();
        let raw = format!("@entity {{ identity = [ {} ] }}", identity_fields.join(", "));
        DddAnnotation {
            pattern: DddPattern::Entity { identity_fields },
            raw,
            loc: Location::default(),
        }
    }
}

/// Tree-shaped data type: a basic root plus named nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeDecl {
    pub name: String,
    pub root: BasicType,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nodes: Vec<Node>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub annotations: Vec<DddAnnotation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doc: Option<String>,
    #[serde(skip, default)]
    pub loc: Location,
}

impl TypeDecl {
    pub fn new(name: &str) -> Self {
        TypeDecl {
            name: name.to_string(),
            root: BasicType::plain(NativeType::Void),
            nodes: Vec::new(),
            annotations: Vec::new(),
            doc: None,
            loc: Location::default(),
        }
    }

    pub fn node(&self, name: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.name == name)
    }

    /// Identity fields of the first `@entity` annotation, if any.
    pub fn entity_identity_fields(&self) -> Option<&[String]> {
        self.annotations.iter().find_map(|a| match &a.pattern {
            DddPattern::Entity { identity_fields } => Some(identity_fields.as_slice()),
            DddPattern::Unknown { .. } => None,
        })
    }
}

/// Reference to a type from an operation: a native type or a declared name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TypeRef {
    Native(NativeType),
    Named(String),
}

impl fmt::Display for TypeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeRef::Native(n) => write!(f, "{n}"),
            TypeRef::Named(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exchange {
    Incoming,
    Outgoing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Communication {
    Synchronous,
    Asynchronous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameter {
    pub name: String,
    pub exchange: Exchange,
    pub communication: Communication,
    #[serde(rename = "type")]
    pub ty: TypeRef,
}

/// Shape of an operation. The Jolie view attributes the paradigm to the
/// operation (one-way vs request-response); the LEMMA view attributes it to
/// each parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperationShape {
    OneWay { request: TypeRef },
    RequestResponse { request: TypeRef, response: TypeRef },
    Params(Vec<Parameter>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeFamily {
    JolieStyle,
    LemmaStyle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperationSig {
    pub name: String,
    pub shape: OperationShape,
    #[serde(skip, default)]
    pub loc: Location,
}

impl OperationSig {
    pub fn family(&self) -> ShapeFamily {
        match self.shape {
            OperationShape::Params(_) => ShapeFamily::LemmaStyle,
            _ => ShapeFamily::JolieStyle,
        }
    }

    /// True for request-response (or, in the LEMMA style, for the parameter
    /// shape that maps to request-response).
    pub fn is_request_response(&self) -> bool {
        matches!(self.shape, OperationShape::RequestResponse { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interface {
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub operations: Vec<OperationSig>,
    #[serde(skip, default)]
    pub loc: Location,
}

impl Interface {
    pub fn operation(&self, name: &str) -> Option<&OperationSig> {
        self.operations.iter().find(|o| o.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PortDirection {
    Input,
    Output,
}

/// A Jolie access point: where and how the service is reached (input) or
/// reaches others (output).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Port {
    pub name: String,
    pub direction: PortDirection,
    pub location: String,
    pub protocol: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_format: Option<String>,
    pub interfaces: Vec<String>,
    #[serde(skip, default)]
    pub loc: Location,
}

// ---------------------------------------------------------------------------
// Behaviours
// ---------------------------------------------------------------------------

/// Payload and reply expressions: literals, variables and field projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expr {
    Lit(Scalar),
    Path { var: String, fields: Vec<String> },
}

impl Expr {
    pub fn var(name: &str) -> Self {
        Expr::Path { var: name.to_string(), fields: Vec::new() }
    }
}

impl Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        crate::value::ValueTree::leaf(self.clone()).to_json()["$"].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let v = serde_json::Value::deserialize(deserializer)?;
        let tree = serde_json::json!({ "$": v });
        Ok(crate::value::ValueTree::from_json(&tree).map_err(D::Error::custom)?.root)
    }
}

/// Workflow term. `Sequence` and `Parallel` are binary; n-ary surface forms
/// are right-nested sugar. `GuardedReplication` spawns a fresh instance of
/// its body per message consumed on the guarding operation and persists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BehaviourTerm {
    Nil,
    Invoke {
        port: String,
        op: String,
        payload: Expr,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        response_var: Option<String>,
    },
    Receive {
        op: String,
        bind_var: String,
        body: Box<BehaviourTerm>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reply: Option<Expr>,
    },
    Sequence {
        first: Box<BehaviourTerm>,
        second: Box<BehaviourTerm>,
    },
    Parallel {
        left: Box<BehaviourTerm>,
        right: Box<BehaviourTerm>,
    },
    GuardedReplication {
        op: String,
        bind_var: String,
        body: Box<BehaviourTerm>,
    },
}

impl BehaviourTerm {
    pub fn seq(first: BehaviourTerm, second: BehaviourTerm) -> Self {
        BehaviourTerm::Sequence { first: Box::new(first), second: Box::new(second) }
    }

    pub fn par(left: BehaviourTerm, right: BehaviourTerm) -> Self {
        BehaviourTerm::Parallel { left: Box::new(left), right: Box::new(right) }
    }
}

// ---------------------------------------------------------------------------
// Service models
// ---------------------------------------------------------------------------

/// The Jolie view of a service: access points and one optional behaviour.
/// Interfaces and types are reusable artefacts owned by the enclosing
/// [`ModelSet`], referenced by name from the ports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JolieServiceModel {
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ports: Vec<Port>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub behaviour: Option<BehaviourTerm>,
    #[serde(skip, default)]
    pub loc: Location,
}

impl JolieServiceModel {
    pub fn new(name: &str) -> Self {
        JolieServiceModel { name: name.to_string(), ports: Vec::new(), behaviour: None, loc: Location::default() }
    }

    pub fn input_ports(&self) -> impl Iterator<Item = &Port> {
        self.ports.iter().filter(|p| p.direction == PortDirection::Input)
    }

    pub fn output_ports(&self) -> impl Iterator<Item = &Port> {
        self.ports.iter().filter(|p| p.direction == PortDirection::Output)
    }

    pub fn port(&self, name: &str) -> Option<&Port> {
        self.ports.iter().find(|p| p.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ServiceKind {
    Functional,
    Utility,
    Infrastructure,
}

impl ServiceKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ServiceKind::Functional => "functional",
            ServiceKind::Utility => "utility",
            ServiceKind::Infrastructure => "infrastructure",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "functional" => Some(ServiceKind::Functional),
            "utility" => Some(ServiceKind::Utility),
            "infrastructure" => Some(ServiceKind::Infrastructure),
            _ => None,
        }
    }
}

/// Reference into a technology model: `(technology, protocol-or-format)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TechRef {
    pub technology: String,
    pub name: String,
}

/// The LEMMA access-point concept. Technology information is either
/// referenced directly or assigned by a [`MappingEntry`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Endpoint {
    pub name: String,
    pub location: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol: Option<TechRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_format: Option<TechRef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub interfaces: Vec<String>,
    #[serde(skip, default)]
    pub loc: Location,
}

/// A behaviour written in a guest behavioural language and bound to one
/// operation of a LEMMA microservice. The binding for the reserved operation
/// name `main` carries a whole-service behaviour, which is how the Jolie
/// view's `main` survives the view transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BehaviourBinding {
    pub operation: String,
    /// Import path of the behaviour language (alias-resolved).
    pub language: String,
    /// Import path of the execution technology (alias-resolved).
    pub technology: String,
    pub body: BehaviourTerm,
    #[serde(skip, default)]
    pub loc: Location,
}

pub const MAIN_BINDING: &str = "main";
pub const JOLIE_BEHAVIOUR_LANGUAGE: &str = "jolie.behaviour_language";
pub const JOLIE_TECHNOLOGY: &str = "jolie.technology";

/// The LEMMA view of a microservice: owned interfaces, endpoints,
/// dependencies on other microservices, and behaviour bindings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaServiceModel {
    pub qualified_name: String,
    pub kind: ServiceKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub interfaces: Vec<Interface>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub endpoints: Vec<Endpoint>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub requires: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub behaviour_bindings: Vec<BehaviourBinding>,
    #[serde(skip, default)]
    pub loc: Location,
}

impl LemmaServiceModel {
    pub fn new(qualified_name: &str) -> Self {
        LemmaServiceModel {
            qualified_name: qualified_name.to_string(),
            kind: ServiceKind::Functional,
            interfaces: Vec::new(),
            endpoints: Vec::new(),
            requires: Vec::new(),
            behaviour_bindings: Vec::new(),
            loc: Location::default(),
        }
    }

    pub fn interface(&self, name: &str) -> Option<&Interface> {
        self.interfaces.iter().find(|i| i.name == name)
    }

    pub fn operation(&self, name: &str) -> Option<&OperationSig> {
        self.interfaces.iter().find_map(|i| i.operation(name))
    }

    /// Last dot-segment of the qualified name; the Jolie-side service name.
    pub fn local_name(&self) -> &str {
        self.qualified_name.rsplit('.').next().unwrap_or(&self.qualified_name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolDef {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_format: Option<String>,
}

/// A LEMMA technology model: a named cluster of protocols and data formats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TechnologyModel {
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub protocols: Vec<ProtocolDef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub data_formats: Vec<String>,
    #[serde(skip, default)]
    pub loc: Location,
}

impl TechnologyModel {
    pub fn protocol(&self, name: &str) -> Option<&ProtocolDef> {
        self.protocols.iter().find(|p| p.name == name)
    }
}

/// A LEMMA mapping-model entry assigning technology to a service endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingEntry {
    pub service: String,
    pub endpoint: String,
    pub technology: String,
    pub protocol: String,
    pub format: String,
    #[serde(skip, default)]
    pub loc: Location,
}

// ---------------------------------------------------------------------------
// Resolved model set
// ---------------------------------------------------------------------------

/// Fully assembled declarations of a resolved set of units. Insertion order
/// is declaration order, which downstream serialisation preserves.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelSet {
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub types: IndexMap<String, TypeDecl>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub interfaces: IndexMap<String, Interface>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub jolie_services: IndexMap<String, JolieServiceModel>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub lemma_services: IndexMap<String, LemmaServiceModel>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub technologies: IndexMap<String, TechnologyModel>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mappings: Vec<MappingEntry>,
}

impl ModelSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_type(&mut self, t: TypeDecl) -> &mut Self {
        self.types.insert(t.name.clone(), t);
        self
    }

    pub fn add_interface(&mut self, i: Interface) -> &mut Self {
        self.interfaces.insert(i.name.clone(), i);
        self
    }

    pub fn add_jolie_service(&mut self, s: JolieServiceModel) -> &mut Self {
        self.jolie_services.insert(s.name.clone(), s);
        self
    }

    pub fn add_lemma_service(&mut self, s: LemmaServiceModel) -> &mut Self {
        self.lemma_services.insert(s.qualified_name.clone(), s);
        self
    }

    pub fn add_technology(&mut self, t: TechnologyModel) -> &mut Self {
        self.technologies.insert(t.name.clone(), t);
        self
    }

    /// Interface visible to a Jolie service (shared artefact) or owned by a
    /// LEMMA service.
    pub fn any_interface(&self, name: &str) -> Option<&Interface> {
        self.interfaces
            .get(name)
            .or_else(|| self.lemma_services.values().find_map(|s| s.interface(name)))
    }

    /// Technology assignment of a LEMMA endpoint: direct references first,
    /// then the mapping models.
    pub fn endpoint_technology(&self, service: &str, endpoint: &Endpoint) -> Option<(String, String, String)> {
        if let Some(proto) = &endpoint.protocol {
            let format = endpoint
                .data_format
                .as_ref()
                .map(|f| f.name.clone())
                .or_else(|| {
                    self.technologies
                        .get(&proto.technology)
                        .and_then(|t| t.protocol(&proto.name))
                        .and_then(|p| p.default_format.clone())
                })?;
            return Some((proto.technology.clone(), proto.name.clone(), format));
        }
        self.mappings
            .iter()
            .find(|m| m.service == service && m.endpoint == endpoint.name)
            .map(|m| (m.technology.clone(), m.protocol.clone(), m.format.clone()))
    }

    /// Drop every source location, leaving only structure. Round-trip tests
    /// compare stripped models because re-printing relocates declarations.
    pub fn strip_locations(&mut self) {
        for t in self.types.values_mut() {
            strip_type(t);
        }
        for i in self.interfaces.values_mut() {
            strip_interface(i);
        }
        for s in self.jolie_services.values_mut() {
            s.loc = Location::default();
            for p in &mut s.ports {
                p.loc = Location::default();
            }
        }
        for s in self.lemma_services.values_mut() {
            s.loc = Location::default();
            for i in &mut s.interfaces {
                strip_interface(i);
            }
            for e in &mut s.endpoints {
                e.loc = Location::default();
            }
            for b in &mut s.behaviour_bindings {
                b.loc = Location::default();
            }
        }
        for t in self.technologies.values_mut() {
            t.loc = Location::default();
        }
        for m in &mut self.mappings {
            m.loc = Location::default();
        }
    }
}

pub(crate) fn strip_type(t: &mut TypeDecl) {
    t.loc = Location::default();
    for a in &mut t.annotations {
        a.loc = Location::default();
    }
    for n in &mut t.nodes {
        strip_node(n);
    }
}

pub(crate) fn strip_node(n: &mut Node) {
    n.loc = Location::default();
    if let TypeExpr::Inline { nodes, .. } = &mut n.ty {
        for child in nodes {
            strip_node(child);
        }
    }
}

pub(crate) fn strip_interface(i: &mut Interface) {
    i.loc = Location::default();
    for o in &mut i.operations {
        o.loc = Location::default();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cardinality_defaults_to_exactly_one() {
        let n = Node::new("x", TypeExpr::basic(NativeType::String));
        assert_eq!(n.cardinality, Cardinality::ONE);
        assert!(n.cardinality.accepts(1));
        assert!(!n.cardinality.accepts(0));
        assert!(!n.cardinality.accepts(2));
    }

    #[test]
    fn unbounded_cardinality_accepts_everything_above_min() {
        let c = Cardinality::new(2, None);
        assert!(!c.accepts(1));
        assert!(c.accepts(2));
        assert!(c.accepts(1_000_000));
        assert_eq!(c.to_string(), "[2,*]");
    }

    #[test]
    fn refinement_compatibility_matrix() {
        let length = Refinement::Length { min: 3, max: 3 };
        let range = Refinement::Range { lo: Number::Int(0), hi: Number::Int(100) };
        let regex = Refinement::Regex { pattern: "a.c".into() };
        let enum_of = Refinement::EnumOf { values: vec!["a".into()] };
        assert!(length.compatible_with(NativeType::String));
        assert!(!length.compatible_with(NativeType::Int));
        assert!(range.compatible_with(NativeType::Int));
        assert!(range.compatible_with(NativeType::Double));
        assert!(!range.compatible_with(NativeType::String));
        assert!(regex.compatible_with(NativeType::String));
        assert!(!enum_of.compatible_with(NativeType::Void));
        for r in [&length, &range, &regex, &enum_of] {
            assert!(!r.compatible_with(NativeType::Void));
        }
    }

    #[test]
    fn number_display_keeps_doubles_lexically_double() {
        assert_eq!(Number::Double(1.0).to_string(), "1.0");
        assert_eq!(Number::Double(0.5).to_string(), "0.5");
        assert_eq!(Number::Int(7).to_string(), "7");
    }

    #[test]
    fn lemma_local_name_is_last_segment() {
        let m = LemmaServiceModel::new("org.example.Microservice");
        assert_eq!(m.local_name(), "Microservice");
        let single = LemmaServiceModel::new("Inventory");
        assert_eq!(single.local_name(), "Inventory");
    }
}
