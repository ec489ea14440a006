//! Checks concrete value trees against resolved tree types: native kinds,
//! refinements, node cardinalities and recursive structure.
//!
//! Checking is strict and closed-world: children a type does not declare are
//! violations. Regex refinements use anchored full-match semantics, and
//! `Length` counts characters, not bytes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{BasicType, ModelSet, NativeType, Node, Refinement, TypeDecl, TypeExpr, TypeRef};
use crate::value::{Scalar, ValueTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationRule {
    NativeMismatch,
    RefinementViolated,
    CardinalityViolated,
    UnknownNode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub path: String,
    pub rule: ViolationRule,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl CheckReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        CheckReport { ok: violations.is_empty(), violations }
    }
}

/// The scalar's kind is outside the refinement's compatibility matrix.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("refinement `{refinement}` does not apply to a {scalar} scalar")]
pub struct RefinementIncompatible {
    pub refinement: &'static str,
    pub scalar: &'static str,
}

pub(crate) fn compile_anchored(pattern: &str) -> Result<regex::Regex, regex::Error> {
    regex::Regex::new(&format!("^(?:{pattern})$"))
}

/// Does the scalar satisfy the refinement? Errs when the matrix forbids the
/// combination (e.g. a length refinement on an int).
pub fn check_refinement(scalar: &Scalar, refinement: &Refinement) -> Result<bool, RefinementIncompatible> {
    let incompatible = || RefinementIncompatible { refinement: refinement.keyword(), scalar: scalar.kind_name() };
    match refinement {
        Refinement::Length { min, max } => match scalar {
            Scalar::Str(s) => {
                let n = s.chars().count() as u64;
                Ok(n >= *min && n <= *max)
            }
            _ => Err(incompatible()),
        },
        Refinement::Regex { pattern } => match scalar {
            Scalar::Str(s) => match compile_anchored(pattern) {
                Ok(re) => Ok(re.is_match(s)),
                Err(_) => Ok(false), // validation reports uncompilable patterns
            },
            _ => Err(incompatible()),
        },
        Refinement::EnumOf { values } => match scalar {
            Scalar::Str(s) => Ok(values.iter().any(|v| v == s)),
            _ => Err(incompatible()),
        },
        Refinement::Range { lo, hi } => {
            let v = match scalar {
                Scalar::Int(i) => *i as f64,
                Scalar::Double(d) => *d,
                _ => return Err(incompatible()),
            };
            Ok(lo.as_f64() <= v && v <= hi.as_f64())
        }
    }
}

/// Check a value tree against a resolved type declaration.
pub fn check_value(value: &ValueTree, ty: &TypeDecl, set: &ModelSet) -> CheckReport {
    let mut violations = Vec::new();
    check_against(value, &ty.root, &ty.nodes, set, "", &mut violations);
    CheckReport::from_violations(violations)
}

/// Check a value against an operation's type reference. Native references
/// accept exactly a leaf of that native kind.
pub fn check_value_ref(value: &ValueTree, ty: &TypeRef, set: &ModelSet) -> CheckReport {
    let mut violations = Vec::new();
    match ty {
        TypeRef::Native(native) => {
            check_against(value, &BasicType::plain(*native), &[], set, "", &mut violations)
        }
        TypeRef::Named(name) => match set.types.get(name) {
            Some(decl) => check_against(value, &decl.root, &decl.nodes, set, "", &mut violations),
            None => violations.push(Violation {
                path: "$".into(),
                rule: ViolationRule::UnknownNode,
                detail: format!("type `{name}` is not declared"),
            }),
        },
    }
    CheckReport::from_violations(violations)
}

fn join_path(prefix: &str, segment: &str) -> String {
    if prefix.is_empty() {
        segment.to_string()
    } else {
        format!("{prefix}.{segment}")
    }
}

fn root_path(prefix: &str) -> String {
    if prefix.is_empty() {
        "$".to_string()
    } else {
        prefix.to_string()
    }
}

fn check_against(
    value: &ValueTree,
    root: &BasicType,
    nodes: &[Node],
    set: &ModelSet,
    prefix: &str,
    violations: &mut Vec<Violation>,
) {
    if !value.root.matches_native(root.native) {
        violations.push(Violation {
            path: root_path(prefix),
            rule: ViolationRule::NativeMismatch,
            detail: format!("expected {} root, found {}", root.native, value.root.kind_name()),
        });
    } else if let Some(r) = &root.refinement {
        match check_refinement(&value.root, r) {
            Ok(true) => {}
            Ok(false) => violations.push(Violation {
                path: root_path(prefix),
                rule: ViolationRule::RefinementViolated,
                detail: format!("{} violates {}", value.root, crate::check::describe_refinement(r)),
            }),
            Err(e) => violations.push(Violation {
                path: root_path(prefix),
                rule: ViolationRule::RefinementViolated,
                detail: e.to_string(),
            }),
        }
    }

    for node in nodes {
        let occurrences = value.children.get(&node.name).map(Vec::as_slice).unwrap_or(&[]);
        let count = occurrences.len() as u64;
        if !node.cardinality.accepts(count) {
            violations.push(Violation {
                path: join_path(prefix, &node.name),
                rule: ViolationRule::CardinalityViolated,
                detail: format!("{count} occurrence(s) outside {}", node.cardinality),
            });
        }
        for (index, occurrence) in occurrences.iter().enumerate() {
            let path = if occurrences.len() > 1 {
                format!("{}[{index}]", join_path(prefix, &node.name))
            } else {
                join_path(prefix, &node.name)
            };
            match &node.ty {
                TypeExpr::Basic(b) => check_against(occurrence, b, &[], set, &path, violations),
                TypeExpr::Inline { root, nodes } => check_against(occurrence, root, nodes, set, &path, violations),
                TypeExpr::Named(name) => match set.types.get(name) {
                    Some(decl) => check_against(occurrence, &decl.root, &decl.nodes, set, &path, violations),
                    None => violations.push(Violation {
                        path,
                        rule: ViolationRule::UnknownNode,
                        detail: format!("type `{name}` is not declared"),
                    }),
                },
            }
        }
    }

    // closed world: children the type does not declare are violations
    for name in value.children.keys() {
        if !nodes.iter().any(|n| n.name == *name) {
            violations.push(Violation {
                path: join_path(prefix, name),
                rule: ViolationRule::UnknownNode,
                detail: format!("node `{name}` is not declared by the type"),
            });
        }
    }
}

pub(crate) fn describe_refinement(r: &Refinement) -> String {
    match r {
        Refinement::Length { min, max } if min == max => format!("length({min})"),
        Refinement::Length { min, max } => format!("length({min},{max})"),
        Refinement::Range { lo, hi } => format!("range({lo}, {hi})"),
        Refinement::Regex { pattern } => format!("regex({pattern:?})"),
        Refinement::EnumOf { values } => format!("enum({})", values.join(", ")),
    }
}

/// Deterministically generate a value inhabiting a type — the checker run
/// backwards. Used by randomized tests and by documentation examples.
pub fn generate_value(ty: &TypeDecl, set: &ModelSet, rng: &mut crate::sim::rng::Xoshiro256StarStar) -> ValueTree {
    generate_against(&ty.root, &ty.nodes, set, rng, 0)
}

fn generate_scalar(basic: &BasicType, rng: &mut crate::sim::rng::Xoshiro256StarStar) -> Scalar {
    match &basic.refinement {
        Some(Refinement::Length { min, max }) => {
            let span = max - min;
            let n = min + if span == 0 { 0 } else { rng.next_u64() % (span + 1) };
            let letters = ['a', 'b', 'c', 'd', 'e', 'f', 'g', 'h'];
            Scalar::Str((0..n).map(|_| letters[rng.pick(letters.len())]).collect())
        }
        Some(Refinement::Range { lo, hi }) => match basic.native {
            NativeType::Int => {
                let lo = lo.as_f64().ceil() as i64;
                let hi = hi.as_f64().floor() as i64;
                let span = (hi - lo).unsigned_abs();
                Scalar::Int(lo + (rng.next_u64() % (span + 1)) as i64)
            }
            _ => {
                let (lo, hi) = (lo.as_f64(), hi.as_f64());
                let t = (rng.next_u64() % 1000) as f64 / 1000.0;
                Scalar::Double(lo + (hi - lo) * t)
            }
        },
        Some(Refinement::EnumOf { values }) => Scalar::Str(values[rng.pick(values.len())].clone()),
        Some(Refinement::Regex { .. }) | None => match basic.native {
            NativeType::Bool => Scalar::Bool(rng.next_u64().is_multiple_of(2)),
            NativeType::Int => Scalar::Int((rng.next_u64() % 1000) as i64),
            NativeType::Double => Scalar::Double((rng.next_u64() % 1000) as f64 / 10.0),
            NativeType::String => {
                let letters = ['a', 'b', 'c', 'd', 'e', 'f', 'g', 'h'];
                let n = rng.next_u64() % 8;
                Scalar::Str((0..n).map(|_| letters[rng.pick(letters.len())]).collect())
            }
            NativeType::Char => {
                let letters = ['a', 'b', 'c', 'd', 'e', 'f', 'g', 'h'];
                Scalar::Char(letters[rng.pick(letters.len())])
            }
            NativeType::Void => Scalar::Unit,
        },
    }
}

fn generate_against(
    root: &BasicType,
    nodes: &[Node],
    set: &ModelSet,
    rng: &mut crate::sim::rng::Xoshiro256StarStar,
    depth: u32,
) -> ValueTree {
    // regex-refined strings cannot be generated generically; the generator
    // only supports the other refinements, which the tests stick to
    let mut tree = ValueTree::leaf(generate_scalar(root, rng));
    if depth > 4 {
        return tree;
    }
    for node in nodes {
        let max = node.cardinality.max.unwrap_or(node.cardinality.min + 2);
        let span = max.saturating_sub(node.cardinality.min);
        let count = node.cardinality.min + if span == 0 { 0 } else { rng.next_u64() % (span + 1) };
        for _ in 0..count {
            let child = match &node.ty {
                TypeExpr::Basic(b) => ValueTree::leaf(generate_scalar(b, rng)),
                TypeExpr::Inline { root, nodes } => generate_against(root, nodes, set, rng, depth + 1),
                TypeExpr::Named(name) => match set.types.get(name) {
                    Some(decl) => generate_against(&decl.root, &decl.nodes, set, rng, depth + 1),
                    None => ValueTree::unit(),
                },
            };
            tree.children.entry(node.name.clone()).or_default().push(child);
        }
    }
    tree
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Cardinality, Number};
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
        t
    }

    fn person(ssn: &str, country: &str, name: &str) -> ValueTree {
        ValueTree::unit()
            .with_child("SSN", ValueTree::leaf(Scalar::Str(ssn.into())))
            .with_child("country", ValueTree::leaf(Scalar::Str(country.into())))
            .with_child("name", ValueTree::leaf(Scalar::Str(name.into())))
    }

    #[test]
    fn valid_person_passes() {
        let report = check_value(&person("123-45-6789", "USA", "Ada"), &person_type(), &ModelSet::new());
        assert!(report.ok, "{report:?}");
    }

    #[test]
    fn short_country_violates_refinement_at_path() {
        let report = check_value(&person("123-45-6789", "US", "Ada"), &person_type(), &ModelSet::new());
        assert!(!report.ok);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].path, "country");
        assert_eq!(report.violations[0].rule, ViolationRule::RefinementViolated);
    }

    #[test]
    fn extra_child_is_unknown_node() {
        // oracle: the declared-node set difference is exactly {age}
        let ty = person_type();
        let declared: Vec<&str> = ty.nodes.iter().map(|n| n.name.as_str()).collect();
        let value = person("1", "USA", "Ada").with_child("age", ValueTree::leaf(Scalar::Int(3)));
        let extra: Vec<&str> = value.children.keys().map(String::as_str).filter(|k| !declared.contains(k)).collect();
        assert_eq!(extra, vec!["age"]);

        let report = check_value(&value, &person_type(), &ModelSet::new());
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].path, "age");
        assert_eq!(report.violations[0].rule, ViolationRule::UnknownNode);
    }

    #[test]
    fn refinement_examples() {
        assert_eq!(check_refinement(&Scalar::Str("USA".into()), &Refinement::Length { min: 3, max: 3 }), Ok(true));
        assert_eq!(
            check_refinement(&Scalar::Int(150), &Refinement::Range { lo: Number::Int(0), hi: Number::Int(100) }),
            Ok(false)
        );
        assert_eq!(check_refinement(&Scalar::Str("abc".into()), &Refinement::Regex { pattern: "a.c".into() }), Ok(true));
    }

    /// Tiny independent matcher for patterns made of literals and `.`,
    /// full-match semantics. Confirms the anchoring decision.
    fn reference_full_match(pattern: &str, input: &str) -> bool {
        let p: Vec<char> = pattern.chars().collect();
        let s: Vec<char> = input.chars().collect();
        p.len() == s.len() && p.iter().zip(&s).all(|(pc, sc)| *pc == '.' || pc == sc)
    }

    #[test]
    fn regex_is_anchored_full_match() {
        let cases = [("a.c", "abc"), ("a.c", "xabc"), ("a.c", "abcx"), ("a.c", "ac"), ("...", "abc"), ("ab", "ab")];
        for (pattern, input) in cases {
            let expected = reference_full_match(pattern, input);
            let got = check_refinement(&Scalar::Str(input.into()), &Refinement::Regex { pattern: pattern.into() });
            assert_eq!(got, Ok(expected), "pattern {pattern:?} input {input:?}");
        }
    }

    #[test]
    fn length_counts_characters_not_bytes() {
        // three characters, nine bytes
        assert_eq!(check_refinement(&Scalar::Str("ééé".into()), &Refinement::Length { min: 3, max: 3 }), Ok(true));
    }

    #[test]
    fn incompatible_matrix_is_an_error() {
        let err = check_refinement(&Scalar::Int(3), &Refinement::Length { min: 3, max: 3 }).unwrap_err();
        assert_eq!(err.refinement, "length");
        assert_eq!(err.scalar, "int");
    }

    #[test]
    fn void_type_accepts_exactly_the_empty_tree() {
        let ty = TypeDecl::new("Empty");
        assert!(check_value(&ValueTree::unit(), &ty, &ModelSet::new()).ok);
        assert!(!check_value(&ValueTree::leaf(Scalar::Int(1)), &ty, &ModelSet::new()).ok);
        assert!(!check_value(&ValueTree::unit().with_child("x", ValueTree::unit()), &ty, &ModelSet::new()).ok);
    }

    #[test]
    fn cardinality_violations_counted() {
        let mut t = TypeDecl::new("T");
        t.nodes.push(Node {
            name: "xs".into(),
            cardinality: Cardinality::new(2, Some(3)),
            ty: TypeExpr::basic(NativeType::Int),
            loc: Default::default(),
        });
        let set = ModelSet::new();
        let one = ValueTree::unit().with_child("xs", ValueTree::leaf(Scalar::Int(1)));
        let report = check_value(&one, &t, &set);
        assert_eq!(report.violations[0].rule, ViolationRule::CardinalityViolated);
        assert_eq!(report.violations[0].path, "xs");

        let mut four = ValueTree::unit();
        for i in 0..4 {
            four = four.with_child("xs", ValueTree::leaf(Scalar::Int(i)));
        }
        assert!(!check_value(&four, &t, &set).ok);

        let mut two = ValueTree::unit();
        for i in 0..2 {
            two = two.with_child("xs", ValueTree::leaf(Scalar::Int(i)));
        }
        assert!(check_value(&two, &t, &set).ok);
    }

    #[test]
    fn missing_default_node_is_cardinality_violation() {
        // an unannotated node has cardinality (1,1), so absence is a violation
        let report = check_value(&ValueTree::unit(), &person_type(), &ModelSet::new());
        assert_eq!(report.violations.len(), 3);
        assert!(report.violations.iter().all(|v| v.rule == ViolationRule::CardinalityViolated));
    }

    #[test]
    fn repeated_occurrences_get_indexed_paths() {
        let mut t = TypeDecl::new("T");
        t.nodes.push(Node {
            name: "xs".into(),
            cardinality: Cardinality::new(0, None),
            ty: TypeExpr::Basic(BasicType {
                native: NativeType::Int,
                refinement: Some(Refinement::Range { lo: Number::Int(0), hi: Number::Int(9) }),
            }),
            loc: Default::default(),
        });
        let value = ValueTree::unit()
            .with_child("xs", ValueTree::leaf(Scalar::Int(1)))
            .with_child("xs", ValueTree::leaf(Scalar::Int(99)));
        let report = check_value(&value, &t, &ModelSet::new());
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].path, "xs[1]");
    }

    #[test]
    fn removing_a_violating_subtree_removes_exactly_that_violation() {
        let mut value = person("1", "US", "Ada").with_child("age", ValueTree::leaf(Scalar::Int(3)));
        let before = check_value(&value, &person_type(), &ModelSet::new());
        assert_eq!(before.violations.len(), 2);

        value.children.remove("age");
        let after = check_value(&value, &person_type(), &ModelSet::new());
        assert_eq!(after.violations.len(), 1);
        assert_eq!(after.violations[0].path, "country");
        assert!(before.violations.contains(&after.violations[0]));
    }

    #[test]
    fn generated_values_always_pass() {
        let mut nested = TypeDecl::new("Outer");
        nested.root = BasicType { native: NativeType::String, refinement: Some(Refinement::Length { min: 1, max: 4 }) };
        nested.nodes.push(Node {
            name: "items".into(),
            cardinality: Cardinality::new(0, Some(5)),
            ty: TypeExpr::Named("Person".into()),
            loc: Default::default(),
        });
        nested.nodes.push(Node {
            name: "score".into(),
            cardinality: Cardinality::ONE,
            ty: TypeExpr::Basic(BasicType {
                native: NativeType::Double,
                refinement: Some(Refinement::Range { lo: Number::Double(0.0), hi: Number::Double(1.0) }),
            }),
            loc: Default::default(),
        });
        let mut set = ModelSet::new();
        set.add_type(person_type());
        set.add_type(nested.clone());

        let mut rng = Xoshiro256StarStar::from_seed(2024);
        for _ in 0..200 {
            let v = generate_value(&nested, &set, &mut rng);
            let report = check_value(&v, &nested, &set);
            assert!(report.ok, "generated value failed: {report:?}\n{v:?}");
        }
    }
}
