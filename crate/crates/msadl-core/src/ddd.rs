//! DDD Entity semantics: identity projection, identity-based equality,
//! privacy-preserving signatures, and the registry that enforces the static
//! constraint that no two entities with equal identity may differ in their
//! immutable (non-identity) values.
//!
//! Signatures are `SHA-256(salt ‖ canonical identity tuple)` with a
//! length-prefixed canonical encoding, so independently built registries
//! agree bit for bit. Raw identity scalars never reach a registry.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::check::check_value;
use crate::model::{ModelSet, NativeType, TypeDecl, TypeExpr};
use crate::value::{Scalar, ValueTree};

/// The identity of an entity value: the scalars of its identity fields, in
/// annotation order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityTuple {
    pub type_name: String,
    pub components: Vec<(String, Scalar)>,
}

/// Salted digest of an identity tuple. Equal identities yield equal
/// signatures; the raw identity values are not recoverable without the salt.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EntitySignature {
    pub digest: [u8; 32],
    pub type_name: String,
}

impl EntitySignature {
    pub fn hex(&self) -> String {
        hex::encode(self.digest)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DddError {
    #[error("type `{0}` has no @entity annotation")]
    NoAnnotation(String),
    #[error("identity field `{field}` of `{type_name}`: {reason}")]
    IdentityNotScalar { type_name: String, field: String, reason: String },
}

impl DddError {
    pub fn code(&self) -> &'static str {
        match self {
            DddError::NoAnnotation(_) => crate::diag::codes::DDD_NO_ANNOTATION,
            DddError::IdentityNotScalar { .. } => crate::diag::codes::DDD_IDENTITY_NOT_SCALAR,
        }
    }
}

/// Project the identity fields out of a checked value, in annotation order.
pub fn entity_identity(value: &ValueTree, ty: &TypeDecl, set: &ModelSet) -> Result<IdentityTuple, DddError> {
    let fields = ty
        .entity_identity_fields()
        .ok_or_else(|| DddError::NoAnnotation(ty.name.clone()))?;

    let mut components = Vec::with_capacity(fields.len());
    for field in fields {
        let not_scalar = |reason: &str| DddError::IdentityNotScalar {
            type_name: ty.name.clone(),
            field: field.clone(),
            reason: reason.to_string(),
        };
        let node = ty.node(field).ok_or_else(|| not_scalar("field is not a node of the type"))?;
        if node.cardinality != crate::model::Cardinality::ONE {
            return Err(not_scalar("identity fields must have cardinality (1,1)"));
        }
        // the field type must be scalar-rooted: a non-void root and no nodes
        let (native, child_count) = match &node.ty {
            TypeExpr::Basic(b) => (b.native, 0),
            TypeExpr::Inline { root, nodes } => (root.native, nodes.len()),
            TypeExpr::Named(name) => match set.types.get(name) {
                Some(decl) => (decl.root.native, decl.nodes.len()),
                None => return Err(not_scalar("field type is not declared")),
            },
        };
        if native == NativeType::Void || child_count > 0 {
            return Err(not_scalar("identity fields must have scalar-rooted types"));
        }
        let occurrence = value.child(field).ok_or_else(|| not_scalar("value has no occurrence of the field"))?;
        components.push((field.clone(), occurrence.root.clone()));
    }
    Ok(IdentityTuple { type_name: ty.name.clone(), components })
}

/// Identity-based equality: non-identity fields are ignored.
pub fn assert_equals(a: &ValueTree, b: &ValueTree, ty: &TypeDecl, set: &ModelSet) -> Result<bool, DddError> {
    Ok(entity_identity(a, ty, set)? == entity_identity(b, ty, set)?)
}

/// Canonical bytes of an identity tuple: the type name and each
/// `(field, tagged scalar)` pair as length-prefixed UTF-8 (u32 big-endian
/// lengths), concatenated in annotation order.
pub fn canonical_identity_bytes(tuple: &IdentityTuple) -> Vec<u8> {
    let mut out = Vec::new();
    let mut push = |text: &str| {
        out.extend_from_slice(&(text.len() as u32).to_be_bytes());
        out.extend_from_slice(text.as_bytes());
    };
    push(&tuple.type_name);
    for (field, scalar) in &tuple.components {
        push(field);
        push(&scalar.canonical_tagged());
    }
    out
}

/// `SHA-256(salt ‖ canonical(identity))`.
pub fn entity_signature(value: &ValueTree, ty: &TypeDecl, set: &ModelSet, salt: &[u8]) -> Result<EntitySignature, DddError> {
    let tuple = entity_identity(value, ty, set)?;
    let mut hasher = Sha256::new();
    hasher.update(salt);
    hasher.update(canonical_identity_bytes(&tuple));
    Ok(EntitySignature { digest: hasher.finalize().into(), type_name: ty.name.clone() })
}

/// Digest of the non-identity payload: the value with its identity fields
/// removed, canonically serialised, hashed.
pub fn payload_digest(value: &ValueTree, ty: &TypeDecl) -> [u8; 32] {
    let mut pruned = value.clone();
    if let Some(fields) = ty.entity_identity_fields() {
        for field in fields {
            pruned.children.remove(field);
        }
    }
    let mut hasher = Sha256::new();
    hasher.update(pruned.canonical_string().as_bytes());
    hasher.finalize().into()
}

/// The enforced static constraint: an already-registered identity whose
/// immutable payload differs.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("entity conflict for signature {signature}: registered payload {existing_payload} != new payload {new_payload}")]
pub struct Conflict {
    pub signature: String,
    pub existing_payload: String,
    pub new_payload: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegisterError {
    #[error(transparent)]
    Ddd(#[from] DddError),
    #[error(transparent)]
    Conflict(#[from] Conflict),
    #[error("value does not satisfy type `{0}`")]
    InvalidValue(String),
    #[error("registry was created with a different salt (salt id {expected}, got {got})")]
    SaltMismatch { expected: String, got: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegisterOutcome {
    Inserted,
    AlreadyRegistered,
}

/// Persistent store of signature → payload digest. Only digests are kept;
/// serialising the registry never reveals an identity scalar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityRegistry {
    salt_id: String,
    entries: BTreeMap<String, String>,
}

/// One-way tag identifying which salt a registry was built with.
pub fn salt_id(salt: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(b"msadl.salt.v1");
    hasher.update(salt);
    hex::encode(hasher.finalize())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistryFile {
    salt_id: String,
    entries: Vec<RegistryEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistryEntry {
    sig: String,
    payload: String,
}

impl EntityRegistry {
    pub fn new(salt: &[u8]) -> Self {
        EntityRegistry { salt_id: salt_id(salt), entries: BTreeMap::new() }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn salt_id(&self) -> &str {
        &self.salt_id
    }

    /// Register a checked entity value. Unseen signature: inserted. Seen
    /// with an equal payload digest: idempotent success. Seen with a
    /// different payload digest: the conflict the engine exists to catch.
    pub fn register(
        &mut self,
        value: &ValueTree,
        ty: &TypeDecl,
        set: &ModelSet,
        salt: &[u8],
    ) -> Result<RegisterOutcome, RegisterError> {
        if salt_id(salt) != self.salt_id {
            return Err(RegisterError::SaltMismatch { expected: self.salt_id.clone(), got: salt_id(salt) });
        }
        if !check_value(value, ty, set).ok {
            return Err(RegisterError::InvalidValue(ty.name.clone()));
        }
        let signature = entity_signature(value, ty, set, salt)?;
        let payload = hex::encode(payload_digest(value, ty));
        match self.entries.get(&signature.hex()) {
            None => {
                self.entries.insert(signature.hex(), payload);
                Ok(RegisterOutcome::Inserted)
            }
            Some(existing) if *existing == payload => Ok(RegisterOutcome::AlreadyRegistered),
            Some(existing) => Err(Conflict {
                signature: signature.hex(),
                existing_payload: existing.clone(),
                new_payload: payload,
            }
            .into()),
        }
    }

    pub fn contains(&self, signature: &EntitySignature) -> bool {
        self.entries.contains_key(&signature.hex())
    }

    /// JSON form: `{"salt_id": ..., "entries": [{"sig", "payload"}, ...]}`,
    /// entries sorted by signature.
    pub fn to_json_string(&self) -> String {
        let file = RegistryFile {
            salt_id: self.salt_id.clone(),
            entries: self
                .entries
                .iter()
                .map(|(sig, payload)| RegistryEntry { sig: sig.clone(), payload: payload.clone() })
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&file).expect("registry serialises");
        text.push('\n');
        text
    }

    pub fn from_json_str(text: &str) -> Result<Self, serde_json::Error> {
        let file: RegistryFile = serde_json::from_str(text)?;
        let mut entries = BTreeMap::new();
        for e in file.entries {
            entries.insert(e.sig, e.payload);
        }
        Ok(EntityRegistry { salt_id: file.salt_id, entries })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BasicType, DddAnnotation, Node, Refinement};
    use crate::sim::rng::Xoshiro256StarStar;

    fn person_type() -> TypeDecl {
        let mut t = TypeDecl::new("Person");
        t.nodes.push(Node::new("SSN", TypeExpr::basic(NativeType::String)));
        t.nodes.push(Node::new(
            "country",
            TypeExpr::Basic(BasicType {
                native: NativeType::String,
                refinement: Some(Refinement::Length { min: 3, max: 3 }),
            }),
        ));
        t.nodes.push(Node::new("name", TypeExpr::basic(NativeType::String)));
        t.annotations.push(DddAnnotation::entity(&["SSN", "country"]));
        t
    }

    fn person(ssn: &str, country: &str, name: &str) -> ValueTree {
        ValueTree::unit()
            .with_child("SSN", ValueTree::leaf(Scalar::Str(ssn.into())))
            .with_child("country", ValueTree::leaf(Scalar::Str(country.into())))
            .with_child("name", ValueTree::leaf(Scalar::Str(name.into())))
    }

    #[test]
    fn identity_projection_in_annotation_order() {
        let tuple = entity_identity(&person("123", "USA", "Ada"), &person_type(), &ModelSet::new()).unwrap();
        assert_eq!(tuple.type_name, "Person");
        assert_eq!(
            tuple.components,
            vec![("SSN".to_string(), Scalar::Str("123".into())), ("country".to_string(), Scalar::Str("USA".into()))]
        );
    }

    #[test]
    fn single_field_identity_is_a_one_tuple() {
        let mut t = TypeDecl::new("Tagged");
        t.nodes.push(Node::new("id", TypeExpr::basic(NativeType::Int)));
        t.annotations.push(DddAnnotation::entity(&["id"]));
        let v = ValueTree::unit().with_child("id", ValueTree::leaf(Scalar::Int(7)));
        let tuple = entity_identity(&v, &t, &ModelSet::new()).unwrap();
        assert_eq!(tuple.components, vec![("id".to_string(), Scalar::Int(7))]);
    }

    #[test]
    fn missing_annotation_is_an_error() {
        let mut t = person_type();
        t.annotations.clear();
        let err = entity_identity(&person("1", "USA", "Ada"), &t, &ModelSet::new()).unwrap_err();
        assert_eq!(err, DddError::NoAnnotation("Person".into()));
        assert_eq!(err.code(), crate::diag::codes::DDD_NO_ANNOTATION);
    }

    #[test]
    fn structured_identity_field_is_rejected() {
        let mut t = TypeDecl::new("Bad");
        t.nodes.push(Node::new(
            "id",
            TypeExpr::Inline {
                root: BasicType::plain(NativeType::String),
                nodes: vec![Node::new("x", TypeExpr::basic(NativeType::Int))],
            },
        ));
        t.annotations.push(DddAnnotation::entity(&["id"]));
        let v = ValueTree::unit().with_child("id", ValueTree::leaf(Scalar::Str("a".into())));
        let err = entity_identity(&v, &t, &ModelSet::new()).unwrap_err();
        assert!(matches!(err, DddError::IdentityNotScalar { .. }));
    }

    #[test]
    fn assert_equals_ignores_non_identity_fields() {
        let (t, set) = (person_type(), ModelSet::new());
        let ada = person("123", "USA", "Ada");
        let bob = person("123", "USA", "Bob");
        assert!(assert_equals(&ada, &bob, &t, &set).unwrap());
        assert!(assert_equals(&ada, &ada, &t, &set).unwrap());
        assert!(!assert_equals(&ada, &person("124", "USA", "Ada"), &t, &set).unwrap());
    }

    #[test]
    fn signature_is_deterministic_and_factors_through_identity() {
        let (t, set) = (person_type(), ModelSet::new());
        let ada = person("123", "USA", "Ada");
        let bob = person("123", "USA", "Bob");
        let s1 = entity_signature(&ada, &t, &set, b"salt").unwrap();
        let s2 = entity_signature(&ada, &t, &set, b"salt").unwrap();
        let s3 = entity_signature(&bob, &t, &set, b"salt").unwrap();
        assert_eq!(s1, s2);
        assert_eq!(s1, s3); // same identity, different payload

        let other_salt = entity_signature(&ada, &t, &set, b"pepper").unwrap();
        assert_ne!(s1, other_salt);
    }

    #[test]
    fn canonical_encoding_is_frozen() {
        // hand-computed: 4-byte BE lengths + "Person", "SSN", "s:123",
        // "country", "s:USA"
        let tuple = IdentityTuple {
            type_name: "Person".into(),
            components: vec![
                ("SSN".to_string(), Scalar::Str("123".into())),
                ("country".to_string(), Scalar::Str("USA".into())),
            ],
        };
        let mut expected = Vec::new();
        for part in ["Person", "SSN", "s:123", "country", "s:USA"] {
            expected.extend_from_slice(&(part.len() as u32).to_be_bytes());
            expected.extend_from_slice(part.as_bytes());
        }
        assert_eq!(canonical_identity_bytes(&tuple), expected);
    }

    #[test]
    fn distinct_salts_never_collide_in_ten_thousand_draws() {
        let (t, set) = (person_type(), ModelSet::new());
        let ada = person("123", "USA", "Ada");
        let mut rng = Xoshiro256StarStar::from_seed(99);
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..10_000 {
            let salt = rng.next_u64().to_be_bytes();
            let sig = entity_signature(&ada, &t, &set, &salt).unwrap();
            assert!(seen.insert(sig.digest), "salt collision");
        }
    }

    #[test]
    fn register_conflict_on_differing_names() {
        let (t, set) = (person_type(), ModelSet::new());
        let mut registry = EntityRegistry::new(b"s");
        assert_eq!(registry.register(&person("123", "USA", "Ada"), &t, &set, b"s").unwrap(), RegisterOutcome::Inserted);
        let err = registry.register(&person("123", "USA", "Bob"), &t, &set, b"s").unwrap_err();
        assert!(matches!(err, RegisterError::Conflict(_)), "{err:?}");
    }

    #[test]
    fn register_is_idempotent_for_identical_values() {
        let (t, set) = (person_type(), ModelSet::new());
        let mut registry = EntityRegistry::new(b"s");
        registry.register(&person("123", "USA", "Ada"), &t, &set, b"s").unwrap();
        let before = registry.clone();
        assert_eq!(
            registry.register(&person("123", "USA", "Ada"), &t, &set, b"s").unwrap(),
            RegisterOutcome::AlreadyRegistered
        );
        assert_eq!(registry, before);
    }

    #[test]
    fn distinct_identities_coexist() {
        let (t, set) = (person_type(), ModelSet::new());
        let mut registry = EntityRegistry::new(b"s");
        registry.register(&person("123", "USA", "Ada"), &t, &set, b"s").unwrap();
        registry.register(&person("456", "USA", "Carol"), &t, &set, b"s").unwrap();
        assert_eq!(registry.len(), 2);
    }

    #[test]
    fn conflict_is_order_independent() {
        let (t, set) = (person_type(), ModelSet::new());
        let ada = person("123", "USA", "Ada");
        let bob = person("123", "USA", "Bob");
        for pair in [[&ada, &bob], [&bob, &ada]] {
            let mut registry = EntityRegistry::new(b"s");
            let mut conflicts = 0;
            for value in pair {
                if let Err(RegisterError::Conflict(_)) = registry.register(value, &t, &set, b"s") {
                    conflicts += 1;
                }
            }
            assert_eq!(conflicts, 1);
        }
    }

    #[test]
    fn registry_file_never_contains_raw_identity_scalars() {
        let (t, set) = (person_type(), ModelSet::new());
        let mut registry = EntityRegistry::new(b"s");
        registry.register(&person("123-45-6789", "USA", "Ada"), &t, &set, b"s").unwrap();
        let text = registry.to_json_string();
        assert!(!text.contains("123-45-6789"));
        assert!(!text.contains("USA"));
        assert!(!text.contains("Ada"));
        let back = EntityRegistry::from_json_str(&text).unwrap();
        assert_eq!(back, registry);
    }

    #[test]
    fn salt_mismatch_is_detected() {
        let (t, set) = (person_type(), ModelSet::new());
        let mut registry = EntityRegistry::new(b"first");
        let err = registry.register(&person("123", "USA", "Ada"), &t, &set, b"second").unwrap_err();
        assert!(matches!(err, RegisterError::SaltMismatch { .. }));
    }

    #[test]
    fn invalid_value_is_rejected_before_registration() {
        let (t, set) = (person_type(), ModelSet::new());
        let mut registry = EntityRegistry::new(b"s");
        let err = registry.register(&person("123", "US", "Ada"), &t, &set, b"s").unwrap_err();
        assert!(matches!(err, RegisterError::InvalidValue(_)));
    }
}
