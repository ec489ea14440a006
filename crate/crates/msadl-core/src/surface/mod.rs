//! The two textual surfaces (`.jsm` Jolie view, `.lsm` LEMMA view) and the
//! canonical printer.
//!
//! Units are UTF-8, LF or CRLF; the printer always emits LF and a `view`
//! header line. Parsing either returns a [`SourceUnit`] or a non-empty list
//! of diagnostics, never both.

mod lexer;
mod parser;
mod printer;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::diag::{Diagnostic, Location};
use crate::model::{
    strip_interface, strip_type, BehaviourBinding, Interface, JolieServiceModel, LemmaServiceModel, MappingEntry,
    Number, TechnologyModel, TypeDecl, TypeExpr, View,
};

pub use printer::{print_unit, unit_from_model_set};

/// What an import brings into scope. The kind must match the referenced
/// symbol's category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImportKind {
    Types,
    Interfaces,
    Microservices,
    Technology,
    BehaviourLanguage,
}

impl ImportKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ImportKind::Types => "types",
            ImportKind::Interfaces => "interfaces",
            ImportKind::Microservices => "microservices",
            ImportKind::Technology => "technology",
            ImportKind::BehaviourLanguage => "behaviour_language",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "types" => Some(ImportKind::Types),
            "interfaces" => Some(ImportKind::Interfaces),
            "microservices" => Some(ImportKind::Microservices),
            "technology" => Some(ImportKind::Technology),
            "behaviour_language" => Some(ImportKind::BehaviourLanguage),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Import {
    pub kind: ImportKind,
    pub path: String,
    pub alias: String,
    #[serde(skip, default)]
    pub loc: Location,
}

/// A behaviour block attached to a microservice declared elsewhere:
/// `Alias::qualified.Name { op() { ... } }` under `@behaviour_language` /
/// `@technology` annotations. Resolution merges the bindings into the
/// target microservice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BehaviourExtension {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_alias: Option<String>,
    pub target: String,
    pub bindings: Vec<BehaviourBinding>,
    #[serde(skip, default)]
    pub loc: Location,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Declaration {
    Type(TypeDecl),
    Interface(Interface),
    JolieService(JolieServiceModel),
    LemmaService(LemmaServiceModel),
    Technology(TechnologyModel),
    Mapping(MappingEntry),
    BehaviourExtension(BehaviourExtension),
}

impl Declaration {
    pub fn name(&self) -> &str {
        match self {
            Declaration::Type(t) => &t.name,
            Declaration::Interface(i) => &i.name,
            Declaration::JolieService(s) => &s.name,
            Declaration::LemmaService(s) => &s.qualified_name,
            Declaration::Technology(t) => &t.name,
            Declaration::Mapping(m) => &m.service,
            Declaration::BehaviourExtension(b) => &b.target,
        }
    }

    pub fn loc(&self) -> &Location {
        match self {
            Declaration::Type(t) => &t.loc,
            Declaration::Interface(i) => &i.loc,
            Declaration::JolieService(s) => &s.loc,
            Declaration::LemmaService(s) => &s.loc,
            Declaration::Technology(t) => &t.loc,
            Declaration::Mapping(m) => &m.loc,
            Declaration::BehaviourExtension(b) => &b.loc,
        }
    }
}

/// One parsed file. Imports are normalised to sorted order at parse time so
/// that printing and re-parsing is a fixed point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceUnit {
    pub path: String,
    pub view: View,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub imports: Vec<Import>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub declarations: Vec<Declaration>,
}

impl SourceUnit {
    pub fn new(path: &str, view: View) -> Self {
        SourceUnit { path: path.to_string(), view, imports: Vec::new(), declarations: Vec::new() }
    }

    /// Logical name used to resolve import paths: the path without its
    /// extension, directory separators turned into dots.
    pub fn logical_name(&self) -> String {
        logical_name_of(&self.path)
    }

    pub fn strip_locations(&mut self) {
        for imp in &mut self.imports {
            imp.loc = Location::default();
        }
        for decl in &mut self.declarations {
            match decl {
                Declaration::Type(t) => strip_type(t),
                Declaration::Interface(i) => strip_interface(i),
                Declaration::JolieService(s) => {
                    s.loc = Location::default();
                    for p in &mut s.ports {
                        p.loc = Location::default();
                    }
                }
                Declaration::LemmaService(s) => {
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
                Declaration::Technology(t) => t.loc = Location::default(),
                Declaration::Mapping(m) => m.loc = Location::default(),
                Declaration::BehaviourExtension(b) => {
                    b.loc = Location::default();
                    for binding in &mut b.bindings {
                        binding.loc = Location::default();
                    }
                }
            }
        }
    }

    /// The unit with all source locations dropped, for structural comparison.
    pub fn stripped(&self) -> SourceUnit {
        let mut u = self.clone();
        u.strip_locations();
        u
    }
}

pub fn logical_name_of(path: &str) -> String {
    let no_ext = match path.rsplit_once('.') {
        Some((stem, ext)) if !stem.is_empty() && !ext.contains('/') => stem,
        _ => path,
    };
    no_ext.trim_start_matches("./").replace('/', ".")
}

/// Value of an annotation argument.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnnotationValue {
    Ident(String),
    Str(String),
    Num(Number),
    List(Vec<AnnotationValue>),
}

/// A parsed annotation: `@name { key = value, ... }` or `@name(value)`.
/// The parenthesised form stores its single value under the empty key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationToken {
    pub name: String,
    pub arguments: IndexMap<String, AnnotationValue>,
    #[serde(skip, default)]
    pub loc: Location,
}

/// Parse one unit. `view` is the caller's expectation (from the file
/// extension); a `view` header in the text overrides `None` and must agree
/// with `Some`.
pub fn parse_unit(text: &str, path: &str, view: Option<View>) -> Result<SourceUnit, Vec<Diagnostic>> {
    parser::parse_unit(text, path, view)
}

/// Parse a standalone type expression, e.g. `string( length(3) )`.
pub fn parse_type_expr(text: &str) -> Result<TypeExpr, Vec<Diagnostic>> {
    parser::parse_type_expr_text(text)
}

/// Canonical text of a unit: sorted imports, fixed two-space indentation,
/// normalised annotation spacing, LF line endings, `view` header first.
pub fn serialize_unit(unit: &SourceUnit) -> String {
    printer::print_unit(unit)
}
