//! Assembles parsed units into one resolved [`ModelSet`].
//!
//! Resolution checks three things validation cannot: import paths bind to
//! provided units (or to the built-in behaviour language), the import graph
//! is acyclic, and declaration names are globally unique per category. It
//! also enforces per-unit visibility — a declaration may only reference
//! symbols of its own unit or of units it imports with a matching kind —
//! and merges behaviour-extension blocks into their target microservices.

use std::collections::{BTreeMap, BTreeSet};

use crate::diag::{codes, finish, has_errors, Diagnostic, Location};
use crate::model::{
    BehaviourTerm, ModelSet, TypeExpr, TypeRef, JOLIE_BEHAVIOUR_LANGUAGE, JOLIE_TECHNOLOGY,
};
use crate::surface::{Declaration, ImportKind, SourceUnit};

/// Category of a referenced symbol, used to match import kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Category {
    Type,
    Interface,
    Service,
    Technology,
}

impl Category {
    fn accepts(self, kind: ImportKind) -> bool {
        matches!(
            (self, kind),
            (Category::Type, ImportKind::Types)
                | (Category::Interface, ImportKind::Interfaces)
                | (Category::Service, ImportKind::Microservices)
                | (Category::Technology, ImportKind::Technology)
        )
    }

    fn describe(self) -> &'static str {
        match self {
            Category::Type => "type",
            Category::Interface => "interface",
            Category::Service => "service",
            Category::Technology => "technology",
        }
    }
}

struct Resolver<'a> {
    units: &'a [SourceUnit],
    /// logical name -> unit index
    logical: BTreeMap<String, Vec<usize>>,
    /// unit index -> (kind, imported unit index)
    imported: Vec<Vec<(ImportKind, usize)>>,
    /// unit index -> alias -> imported unit index
    aliases: Vec<BTreeMap<String, usize>>,
    /// symbol (category, name) -> declaring unit index
    owners: BTreeMap<(Category, String), usize>,
    diags: Vec<Diagnostic>,
}

pub fn resolve(units: &[SourceUnit]) -> (ModelSet, Vec<Diagnostic>) {
    let mut logical: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, u) in units.iter().enumerate() {
        logical.entry(u.logical_name()).or_default().push(i);
    }
    let mut r = Resolver {
        units,
        logical,
        imported: vec![Vec::new(); units.len()],
        aliases: vec![BTreeMap::new(); units.len()],
        owners: BTreeMap::new(),
        diags: Vec::new(),
    };

    r.bind_imports();
    r.detect_cycles();
    let mut set = r.collect_declarations();
    r.check_visibility(&set);
    r.merge_extensions(&mut set);

    (set, finish(r.diags))
}

/// Like [`resolve`], but returns the set only when resolution raised no
/// errors.
pub fn resolve_strict(units: &[SourceUnit]) -> Result<ModelSet, Vec<Diagnostic>> {
    let (set, diags) = resolve(units);
    if has_errors(&diags) {
        Err(diags)
    } else {
        Ok(set)
    }
}

impl<'a> Resolver<'a> {
    fn find_unit(&self, path: &str) -> Option<usize> {
        if let Some(v) = self.logical.get(path) {
            if v.len() == 1 {
                return Some(v[0]);
            }
        }
        // fall back to a unique stem match (import "b" finds "dir/b.jsm")
        let matches: Vec<usize> = self
            .logical
            .iter()
            .filter(|(name, _)| name.as_str() == path || name.ends_with(&format!(".{path}")))
            .flat_map(|(_, v)| v.iter().copied())
            .collect();
        if matches.len() == 1 {
            Some(matches[0])
        } else {
            None
        }
    }

    fn bind_imports(&mut self) {
        for (i, unit) in self.units.iter().enumerate() {
            for imp in &unit.imports {
                match imp.kind {
                    ImportKind::BehaviourLanguage => {
                        if imp.path != JOLIE_BEHAVIOUR_LANGUAGE {
                            self.diags.push(Diagnostic::error(
                                codes::REF_UNRESOLVED,
                                format!(
                                    "unknown behaviour language {:?} (the toolkit embeds `{JOLIE_BEHAVIOUR_LANGUAGE}`)",
                                    imp.path
                                ),
                                imp.loc.clone(),
                            ));
                        }
                    }
                    ImportKind::Technology if imp.path == JOLIE_TECHNOLOGY => {
                        // built-in execution technology for embedded behaviours
                    }
                    _ => match self.find_unit(&imp.path) {
                        Some(target) => {
                            self.imported[i].push((imp.kind, target));
                            self.aliases[i].insert(imp.alias.clone(), target);
                        }
                        None => {
                            self.diags.push(Diagnostic::error(
                                codes::REF_UNRESOLVED,
                                format!("import {:?} does not match any provided unit", imp.path),
                                imp.loc.clone(),
                            ));
                        }
                    },
                }
            }
        }
    }

    fn detect_cycles(&mut self) {
        // DFS with an explicit colour map; one diagnostic per back edge
        const WHITE: u8 = 0;
        const GREY: u8 = 1;
        const BLACK: u8 = 2;
        let n = self.units.len();
        let mut colour = vec![WHITE; n];
        let mut reported: BTreeSet<(usize, usize)> = BTreeSet::new();

        fn visit(
            node: usize,
            stack: &mut Vec<usize>,
            colour: &mut [u8],
            imported: &[Vec<(ImportKind, usize)>],
            units: &[SourceUnit],
            reported: &mut BTreeSet<(usize, usize)>,
            diags: &mut Vec<Diagnostic>,
        ) {
            colour[node] = GREY;
            stack.push(node);
            for &(_, target) in &imported[node] {
                match colour[target] {
                    GREY => {
                        let start = stack.iter().position(|&u| u == target).unwrap_or(0);
                        let key = (node.min(target), node.max(target));
                        if reported.insert(key) {
                            let cycle: Vec<&str> =
                                stack[start..].iter().map(|&u| units[u].path.as_str()).collect();
                            diags.push(Diagnostic::error(
                                codes::IMPORT_CYCLE,
                                format!("import cycle: {} -> {}", cycle.join(" -> "), units[target].path),
                                Location { file: units[node].path.clone(), ..Default::default() },
                            ));
                        }
                    }
                    WHITE => visit(target, stack, colour, imported, units, reported, diags),
                    _ => {}
                }
            }
            stack.pop();
            colour[node] = BLACK;
        }

        for i in 0..n {
            if colour[i] == WHITE {
                visit(i, &mut Vec::new(), &mut colour, &self.imported, self.units, &mut reported, &mut self.diags);
            }
        }
    }

    fn claim(&mut self, category: Category, name: &str, unit: usize, loc: &Location) -> bool {
        if let Some(&owner) = self.owners.get(&(category, name.to_string())) {
            let first = self
                .units[owner]
                .declarations
                .iter()
                .find(|d| d.name() == name)
                .map(|d| d.loc().to_string())
                .unwrap_or_else(|| self.units[owner].path.clone());
            self.diags.push(Diagnostic::error(
                codes::DUPLICATE_NAME,
                format!("{} `{name}` is already declared at {first}", category.describe()),
                loc.clone(),
            ));
            false
        } else {
            self.owners.insert((category, name.to_string()), unit);
            true
        }
    }

    fn collect_declarations(&mut self) -> ModelSet {
        let mut set = ModelSet::new();
        for (i, unit) in self.units.iter().enumerate() {
            for decl in &unit.declarations {
                match decl {
                    Declaration::Type(t) => {
                        if self.claim(Category::Type, &t.name, i, &t.loc) {
                            set.add_type(t.clone());
                        }
                    }
                    Declaration::Interface(intf) => {
                        if self.claim(Category::Interface, &intf.name, i, &intf.loc) {
                            set.add_interface(intf.clone());
                        }
                    }
                    Declaration::JolieService(s) => {
                        if self.claim(Category::Service, &s.name, i, &s.loc) {
                            set.add_jolie_service(s.clone());
                        }
                    }
                    Declaration::LemmaService(s) => {
                        if self.claim(Category::Service, &s.qualified_name, i, &s.loc) {
                            let mut service = s.clone();
                            for binding in &mut service.behaviour_bindings {
                                self.resolve_binding_refs(i, binding);
                            }
                            set.add_lemma_service(service);
                        }
                    }
                    Declaration::Technology(t) => {
                        if self.claim(Category::Technology, &t.name, i, &t.loc) {
                            set.add_technology(t.clone());
                        }
                    }
                    Declaration::Mapping(m) => set.mappings.push(m.clone()),
                    Declaration::BehaviourExtension(_) => {}
                }
            }
        }
        set
    }

    /// Rewrite a binding's language/technology aliases to import paths.
    fn resolve_binding_refs(&mut self, unit: usize, binding: &mut crate::model::BehaviourBinding) {
        for (field, kind) in [
            (&mut binding.language, ImportKind::BehaviourLanguage),
            (&mut binding.technology, ImportKind::Technology),
        ] {
            if field.contains('.') {
                continue; // already a path (model-set built programmatically)
            }
            let target = self.units[unit]
                .imports
                .iter()
                .find(|imp| imp.kind == kind && imp.alias == *field)
                .map(|imp| imp.path.clone());
            match target {
                Some(path) => *field = path,
                None => self.diags.push(Diagnostic::error(
                    codes::REF_UNRESOLVED,
                    format!("`{field}` is not the alias of a {} import", kind.keyword()),
                    binding.loc.clone(),
                )),
            }
        }
    }

    fn merge_extensions(&mut self, set: &mut ModelSet) {
        for (i, unit) in self.units.iter().enumerate() {
            for decl in &unit.declarations {
                let Declaration::BehaviourExtension(ext) = decl else { continue };

                // alias-qualified targets must name a service declared in
                // the aliased unit; unqualified targets resolve globally
                let target_ok = match &ext.target_alias {
                    Some(alias) => match self.aliases[i].get(alias) {
                        Some(&target_unit) => self.units[target_unit]
                            .declarations
                            .iter()
                            .any(|d| matches!(d, Declaration::LemmaService(s) if s.qualified_name == ext.target)),
                        None => {
                            self.diags.push(Diagnostic::error(
                                codes::REF_UNRESOLVED,
                                format!("`{alias}` is not the alias of an import"),
                                ext.loc.clone(),
                            ));
                            continue;
                        }
                    },
                    None => set.lemma_services.contains_key(&ext.target),
                };
                if !target_ok || !set.lemma_services.contains_key(&ext.target) {
                    self.diags.push(Diagnostic::error(
                        codes::REF_UNRESOLVED,
                        format!("behaviour extension targets unknown microservice `{}`", ext.target),
                        ext.loc.clone(),
                    ));
                    continue;
                }

                let mut bindings = ext.bindings.clone();
                for binding in &mut bindings {
                    self.resolve_binding_refs(i, binding);
                }
                let service = set.lemma_services.get_mut(&ext.target).expect("target checked above");
                for binding in bindings {
                    if service.behaviour_bindings.iter().any(|b| b.operation == binding.operation) {
                        self.diags.push(Diagnostic::error(
                            codes::DUPLICATE_NAME,
                            format!("operation `{}` already has a behaviour binding", binding.operation),
                            binding.loc.clone(),
                        ));
                    } else {
                        service.behaviour_bindings.push(binding);
                    }
                }
            }
        }
    }

    // -- per-unit visibility ------------------------------------------------

    fn visible(&self, from: usize, category: Category, name: &str) -> Option<bool> {
        let &owner = self.owners.get(&(category, name.to_string()))?;
        Some(owner == from || self.imported[from].iter().any(|&(kind, target)| target == owner && category.accepts(kind)))
    }

    fn check_ref(&mut self, from: usize, category: Category, name: &str, loc: &Location) {
        match self.visible(from, category, name) {
            Some(true) => {}
            Some(false) => self.diags.push(Diagnostic::error(
                codes::REF_UNRESOLVED,
                format!(
                    "{} `{name}` is declared in another unit that this unit does not import (add `import {} from ... as ...`)",
                    category.describe(),
                    match category {
                        Category::Type => "types",
                        Category::Interface => "interfaces",
                        Category::Service => "microservices",
                        Category::Technology => "technology",
                    }
                ),
                loc.clone(),
            )),
            None => {} // undeclared anywhere; validation reports it
        }
    }

    fn check_type_expr(&mut self, from: usize, ty: &TypeExpr, loc: &Location) {
        match ty {
            TypeExpr::Basic(_) => {}
            TypeExpr::Named(name) => self.check_ref(from, Category::Type, name, loc),
            TypeExpr::Inline { nodes, .. } => {
                for n in nodes {
                    self.check_type_expr(from, &n.ty, &n.loc);
                }
            }
        }
    }

    fn check_type_ref(&mut self, from: usize, r: &TypeRef, loc: &Location) {
        if let TypeRef::Named(name) = r {
            self.check_ref(from, Category::Type, name, loc);
        }
    }

    fn check_visibility(&mut self, set: &ModelSet) {
        for (i, unit) in self.units.iter().enumerate() {
            for decl in &unit.declarations {
                match decl {
                    Declaration::Type(t) => {
                        for n in &t.nodes {
                            self.check_type_expr(i, &n.ty, &n.loc);
                        }
                    }
                    Declaration::Interface(intf) => {
                        for op in &intf.operations {
                            self.check_operation_refs(i, op);
                        }
                    }
                    Declaration::JolieService(s) => {
                        for p in &s.ports {
                            for name in &p.interfaces {
                                self.check_ref(i, Category::Interface, name, &p.loc);
                            }
                        }
                        if let Some(b) = &s.behaviour {
                            self.check_behaviour_refs(i, b, &s.loc, set);
                        }
                    }
                    Declaration::LemmaService(s) => {
                        for intf in &s.interfaces {
                            for op in &intf.operations {
                                self.check_operation_refs(i, op);
                            }
                        }
                        // endpoint interfaces are owned and checked by validation
                        for dep in &s.requires {
                            // dependencies may point outside the model set; only
                            // kind-check when the name is declared somewhere
                            if set.lemma_services.contains_key(dep) || set.jolie_services.contains_key(dep) {
                                self.check_ref(i, Category::Service, dep, &s.loc);
                            }
                        }
                    }
                    Declaration::Technology(_) => {}
                    Declaration::Mapping(m) => {
                        if set.lemma_services.contains_key(&m.service) {
                            self.check_ref(i, Category::Service, &m.service, &m.loc);
                        }
                        self.check_ref(i, Category::Technology, &m.technology, &m.loc);
                    }
                    Declaration::BehaviourExtension(_) => {}
                }
            }
        }
    }

    fn check_operation_refs(&mut self, from: usize, op: &crate::model::OperationSig) {
        use crate::model::OperationShape;
        match &op.shape {
            OperationShape::OneWay { request } => self.check_type_ref(from, request, &op.loc),
            OperationShape::RequestResponse { request, response } => {
                self.check_type_ref(from, request, &op.loc);
                self.check_type_ref(from, response, &op.loc);
            }
            OperationShape::Params(params) => {
                for p in params {
                    self.check_type_ref(from, &p.ty, &op.loc);
                }
            }
        }
    }

    fn check_behaviour_refs(&mut self, _from: usize, _term: &BehaviourTerm, _loc: &Location, _set: &ModelSet) {
        // behaviour operation references are service-local (ports of the
        // enclosing service); validation owns those checks
    }
}
