//! msadl — a modeling toolkit for microservice architectures.
//!
//! The toolkit implements two views of a service architecture over one
//! shared type system: the Jolie view (services with ports and workflow
//! behaviours) and the LEMMA view (microservices with owned interfaces,
//! endpoints, technology and mapping models). It can translate between the
//! views with explicit loss reports, check concrete values against
//! refinement-typed tree types, enforce DDD entity identity semantics, and
//! execute workflow behaviours in a deterministic simulated network.

pub mod check;
pub mod ddd;
pub mod diag;
pub mod model;
pub mod resolve;
pub mod sim;
pub mod surface;
pub mod testgen;
pub mod transform;
pub mod validate;
pub mod value;

pub use check::{check_refinement, check_value, check_value_ref, CheckReport, Violation, ViolationRule};
pub use diag::{Diagnostic, Location, Severity};
pub use model::{
    BasicType, BehaviourTerm, Cardinality, DddAnnotation, DddPattern, Endpoint, Expr, Interface, JolieServiceModel,
    LemmaServiceModel, MappingEntry, ModelSet, NativeType, Node, Number, OperationShape, OperationSig, Parameter,
    Port, PortDirection, Refinement, ServiceKind, TechnologyModel, TypeDecl, TypeExpr, TypeRef, View,
};
pub use resolve::resolve;
pub use surface::{parse_type_expr, parse_unit, serialize_unit, SourceUnit};
pub use validate::{validate_model_set, validate_service};
