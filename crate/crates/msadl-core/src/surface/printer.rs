//! Canonical printer. `parse(print(parse(u)))` equals `parse(u)` and
//! printing is a fixed point, which is what `fmt` relies on.

use super::{BehaviourExtension, Declaration, Import, ImportKind, SourceUnit};
use crate::model::{
    BasicType, BehaviourBinding, BehaviourTerm, Communication, Endpoint, Exchange, Expr, Interface,
    JolieServiceModel, LemmaServiceModel, MappingEntry, ModelSet, NativeType, Node, OperationShape, Parameter, Port,
    PortDirection, Refinement, TechnologyModel, TypeDecl, TypeExpr, TypeRef, View, JOLIE_BEHAVIOUR_LANGUAGE,
    JOLIE_TECHNOLOGY,
};
use crate::value::Scalar;

pub fn print_unit(unit: &SourceUnit) -> String {
    let mut out = String::new();
    out.push_str("view ");
    out.push_str(unit.view.keyword());
    out.push('\n');

    if !unit.imports.is_empty() {
        out.push('\n');
        let mut imports = unit.imports.clone();
        imports.sort_by(|a, b| (&a.path, a.kind, &a.alias).cmp(&(&b.path, b.kind, &b.alias)));
        for imp in &imports {
            out.push_str(&format!(
                "import {} from {} as {}\n",
                imp.kind.keyword(),
                quote(&imp.path),
                imp.alias
            ));
        }
    }

    for decl in &unit.declarations {
        out.push('\n');
        print_declaration(&mut out, decl);
    }
    out
}

fn print_declaration(out: &mut String, decl: &Declaration) {
    match decl {
        Declaration::Type(t) => print_type_decl(out, t),
        Declaration::Interface(i) => print_interface_jolie(out, i),
        Declaration::JolieService(s) => print_jolie_service(out, s),
        Declaration::LemmaService(s) => print_lemma_service(out, s),
        Declaration::Technology(t) => print_technology(out, t),
        Declaration::Mapping(m) => print_mapping(out, m),
        Declaration::BehaviourExtension(e) => print_extension(out, e),
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            other => out.push(other),
        }
    }
    out.push('"');
    out
}

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

fn print_type_decl(out: &mut String, t: &TypeDecl) {
    if let Some(doc) = &t.doc {
        for line in doc.lines() {
            if line.is_empty() {
                out.push_str("///\n");
            } else {
                out.push_str(&format!("/// {line}\n"));
            }
        }
    }
    for ann in &t.annotations {
        out.push_str(&format!("/// {}\n", ann.raw));
    }
    out.push_str(&format!("type {}", t.name));
    if t.root.native != NativeType::Void || t.root.refinement.is_some() {
        out.push_str(": ");
        out.push_str(&basic_type_text(&t.root));
    }
    if !t.nodes.is_empty() {
        out.push_str(" {\n");
        print_nodes(out, &t.nodes, 2);
        out.push_str("}\n");
    } else {
        out.push('\n');
    }
}

fn print_nodes(out: &mut String, nodes: &[Node], indent: usize) {
    let pad = " ".repeat(indent);
    for (i, node) in nodes.iter().enumerate() {
        out.push_str(&pad);
        out.push_str(&node.name);
        if !node.cardinality.is_default() {
            out.push_str(&node.cardinality.to_string());
        }
        out.push_str(": ");
        print_type_expr(out, &node.ty, indent);
        if i + 1 < nodes.len() {
            out.push(',');
        }
        out.push('\n');
    }
}

fn print_type_expr(out: &mut String, ty: &TypeExpr, indent: usize) {
    match ty {
        TypeExpr::Basic(b) => out.push_str(&basic_type_text(b)),
        TypeExpr::Named(n) => out.push_str(n),
        TypeExpr::Inline { root, nodes } => {
            if root.native != NativeType::Void || root.refinement.is_some() {
                out.push_str(&basic_type_text(root));
                out.push(' ');
            }
            if nodes.is_empty() {
                out.push_str("{}");
            } else {
                out.push_str("{\n");
                print_nodes(out, nodes, indent + 2);
                out.push_str(&" ".repeat(indent));
                out.push('}');
            }
        }
    }
}

fn basic_type_text(b: &BasicType) -> String {
    match &b.refinement {
        None => b.native.keyword().to_string(),
        Some(r) => format!("{}( {} )", b.native.keyword(), refinement_text(r)),
    }
}

fn refinement_text(r: &Refinement) -> String {
    match r {
        Refinement::Length { min, max } if min == max => format!("length({min})"),
        Refinement::Length { min, max } => format!("length({min},{max})"),
        Refinement::Range { lo, hi } => format!("range({lo}, {hi})"),
        Refinement::Regex { pattern } => format!("regex({})", quote(pattern)),
        Refinement::EnumOf { values } => {
            let items: Vec<String> = values.iter().map(|v| quote(v)).collect();
            format!("enum({})", items.join(", "))
        }
    }
}

fn type_ref_text(r: &TypeRef) -> &str {
    match r {
        TypeRef::Native(n) => n.keyword(),
        TypeRef::Named(n) => n,
    }
}

// ---------------------------------------------------------------------------
// Jolie view
// ---------------------------------------------------------------------------

fn print_interface_jolie(out: &mut String, i: &Interface) {
    out.push_str(&format!("interface {} {{\n", i.name));
    for op in &i.operations {
        match &op.shape {
            OperationShape::OneWay { request } => {
                out.push_str(&format!("  oneWay {}({})\n", op.name, type_ref_text(request)));
            }
            OperationShape::RequestResponse { request, response } => {
                out.push_str(&format!(
                    "  requestResponse {}({}) -> {}\n",
                    op.name,
                    type_ref_text(request),
                    type_ref_text(response)
                ));
            }
            OperationShape::Params(params) => {
                // not expressible in the jolie surface; printed in the lemma style
                out.push_str(&format!("  {}({})\n", op.name, params_text(params)));
            }
        }
    }
    out.push_str("}\n");
}

fn print_jolie_service(out: &mut String, s: &JolieServiceModel) {
    out.push_str(&format!("service {} {{\n", s.name));
    for port in &s.ports {
        print_port(out, port);
    }
    if let Some(behaviour) = &s.behaviour {
        out.push_str("  main {\n");
        out.push_str(&render_behaviour(behaviour, 4));
        out.push('\n');
        out.push_str("  }\n");
    }
    out.push_str("}\n");
}

fn print_port(out: &mut String, port: &Port) {
    let kw = match port.direction {
        PortDirection::Input => "inputPort",
        PortDirection::Output => "outputPort",
    };
    out.push_str(&format!("  {kw} {} {{\n", port.name));
    out.push_str(&format!("    location: {}\n", quote(&port.location)));
    out.push_str(&format!("    protocol: {}\n", port.protocol));
    if let Some(fmt) = &port.data_format {
        out.push_str(&format!("    format: {fmt}\n"));
    }
    out.push_str(&format!("    interfaces: {}\n", port.interfaces.join(", ")));
    out.push_str("  }\n");
}

// ---------------------------------------------------------------------------
// Behaviours
// ---------------------------------------------------------------------------

/// Render a behaviour with a two-space indent per level. Sequence and
/// parallel chains are flattened along their right spine only, so the
/// printed text re-parses to the identical tree. Braces are inserted exactly
/// where precedence or left nesting requires them.
pub(crate) fn render_behaviour(term: &BehaviourTerm, indent: usize) -> String {
    let pad = " ".repeat(indent);
    match term {
        BehaviourTerm::Parallel { .. } => {
            let mut parts = Vec::new();
            let mut cur = term;
            while let BehaviourTerm::Parallel { left, right } = cur {
                parts.push(render_par_element(left, indent));
                cur = right;
            }
            parts.push(render_par_element(cur, indent));
            parts.join(" |\n")
        }
        BehaviourTerm::Sequence { .. } => {
            let mut parts = Vec::new();
            let mut cur = term;
            while let BehaviourTerm::Sequence { first, second } = cur {
                parts.push(render_seq_element(first, indent));
                cur = second;
            }
            parts.push(render_seq_element(cur, indent));
            parts.join(" ;\n")
        }
        BehaviourTerm::Nil => format!("{pad}nil"),
        BehaviourTerm::Invoke { port, op, payload, response_var } => {
            let mut line = format!("{pad}invoke {port}.{op}({})", expr_text(payload));
            if let Some(var) = response_var {
                line.push_str(&format!(" -> {var}"));
            }
            line
        }
        BehaviourTerm::Receive { op, bind_var, body, reply } => {
            let mut text = format!("{pad}receive {op}({bind_var}) {{\n");
            text.push_str(&render_behaviour(body, indent + 2));
            text.push_str(&format!("\n{pad}}}"));
            if let Some(r) = reply {
                text.push_str(&format!(" reply {}", expr_text(r)));
            }
            text
        }
        BehaviourTerm::GuardedReplication { op, bind_var, body } => {
            let mut text = format!("{pad}replicate {op}({bind_var}) {{\n");
            text.push_str(&render_behaviour(body, indent + 2));
            text.push_str(&format!("\n{pad}}}"));
            text
        }
    }
}

fn render_braced(term: &BehaviourTerm, indent: usize) -> String {
    let pad = " ".repeat(indent);
    format!("{pad}{{\n{}\n{pad}}}", render_behaviour(term, indent + 2))
}

fn render_par_element(term: &BehaviourTerm, indent: usize) -> String {
    // a left-nested parallel must keep its shape
    match term {
        BehaviourTerm::Parallel { .. } => render_braced(term, indent),
        _ => render_behaviour(term, indent),
    }
}

fn render_seq_element(term: &BehaviourTerm, indent: usize) -> String {
    // parallel binds looser than `;` and a left-nested sequence must keep
    // its shape, so both get braces
    match term {
        BehaviourTerm::Parallel { .. } | BehaviourTerm::Sequence { .. } => render_braced(term, indent),
        _ => render_behaviour(term, indent),
    }
}

fn expr_text(e: &Expr) -> String {
    match e {
        Expr::Lit(s) => scalar_literal_text(s),
        Expr::Path { var, fields } => {
            let mut text = var.clone();
            for f in fields {
                text.push('.');
                text.push_str(f);
            }
            text
        }
    }
}

fn scalar_literal_text(s: &Scalar) -> String {
    match s {
        Scalar::Bool(b) => b.to_string(),
        Scalar::Int(i) => i.to_string(),
        Scalar::Double(d) => {
            let text = d.to_string();
            if text.contains('.') || text.contains('e') {
                text
            } else {
                format!("{text}.0")
            }
        }
        Scalar::Str(s) => quote(s),
        Scalar::Char(c) => match c {
            '\n' => "'\\n'".to_string(),
            '\t' => "'\\t'".to_string(),
            '\r' => "'\\r'".to_string(),
            '\\' => "'\\\\'".to_string(),
            '\'' => "'\\''".to_string(),
            other => format!("'{other}'"),
        },
        Scalar::Unit => "void".to_string(),
    }
}

// ---------------------------------------------------------------------------
// LEMMA view
// ---------------------------------------------------------------------------

/// Canonical alias of a behaviour-language or technology import path.
pub(crate) fn alias_for_path(path: &str) -> String {
    match path {
        JOLIE_BEHAVIOUR_LANGUAGE => "jolie".to_string(),
        JOLIE_TECHNOLOGY => "jolie_interpreter".to_string(),
        other => other.replace('.', "_"),
    }
}

fn params_text(params: &[Parameter]) -> String {
    let rendered: Vec<String> = params
        .iter()
        .map(|p| {
            let ex = match p.exchange {
                Exchange::Incoming => "in",
                Exchange::Outgoing => "out",
            };
            let comm = match p.communication {
                Communication::Synchronous => "sync",
                Communication::Asynchronous => "async",
            };
            format!("{}: {ex} {comm} {}", p.name, type_ref_text(&p.ty))
        })
        .collect();
    rendered.join(", ")
}

fn print_lemma_service(out: &mut String, s: &LemmaServiceModel) {
    out.push_str(&format!("microservice {} kind {} {{\n", s.qualified_name, s.kind.keyword()));
    for i in &s.interfaces {
        out.push_str(&format!("  interface {} {{\n", i.name));
        for op in &i.operations {
            match &op.shape {
                OperationShape::Params(params) => {
                    out.push_str(&format!("    {}({})\n", op.name, params_text(params)));
                }
                OperationShape::OneWay { request } => {
                    out.push_str(&format!("    oneWay {}({})\n", op.name, type_ref_text(request)));
                }
                OperationShape::RequestResponse { request, response } => {
                    out.push_str(&format!(
                        "    requestResponse {}({}) -> {}\n",
                        op.name,
                        type_ref_text(request),
                        type_ref_text(response)
                    ));
                }
            }
        }
        out.push_str("  }\n");
    }
    for e in &s.endpoints {
        print_endpoint(out, e);
    }
    for dep in &s.requires {
        out.push_str(&format!("  requires {dep}\n"));
    }
    for binding in &s.behaviour_bindings {
        print_binding(out, binding, 2);
    }
    out.push_str("}\n");
}

fn print_endpoint(out: &mut String, e: &Endpoint) {
    out.push_str(&format!("  endpoint {} {{\n", e.name));
    out.push_str(&format!("    location: {}\n", quote(&e.location)));
    if let Some(proto) = &e.protocol {
        out.push_str(&format!("    technology: {}\n", proto.technology));
        out.push_str(&format!("    protocol: {}\n", proto.name));
        if let Some(fmt) = &e.data_format {
            out.push_str(&format!("    format: {}\n", fmt.name));
        }
    }
    out.push_str(&format!("    interfaces: {}\n", e.interfaces.join(", ")));
    out.push_str("  }\n");
}

fn print_binding(out: &mut String, binding: &BehaviourBinding, indent: usize) {
    let pad = " ".repeat(indent);
    out.push_str(&format!("{pad}@behaviour_language({})\n", alias_for_path(&binding.language)));
    out.push_str(&format!("{pad}@technology({})\n", alias_for_path(&binding.technology)));
    out.push_str(&format!("{pad}{}() {{\n", binding.operation));
    out.push_str(&render_behaviour(&binding.body, indent + 2));
    out.push('\n');
    out.push_str(&format!("{pad}}}\n"));
}

fn print_technology(out: &mut String, t: &TechnologyModel) {
    out.push_str(&format!("technology {} {{\n", t.name));
    let protocols: Vec<String> = t
        .protocols
        .iter()
        .map(|p| match &p.default_format {
            Some(fmt) => format!("{} default {fmt}", p.name),
            None => p.name.clone(),
        })
        .collect();
    out.push_str(&format!("  protocols {{ {} }}\n", protocols.join(", ")));
    out.push_str(&format!("  data formats {{ {} }}\n", t.data_formats.join(", ")));
    out.push_str("}\n");
}

fn print_mapping(out: &mut String, m: &MappingEntry) {
    out.push_str(&format!(
        "map service {} endpoint {} -> technology {} protocol {} format {}\n",
        m.service, m.endpoint, m.technology, m.protocol, m.format
    ));
}

fn print_extension(out: &mut String, e: &BehaviourExtension) {
    // annotations live on the bindings; hoist them to the block when shared
    let shared = match e.bindings.first() {
        Some(first) if e.bindings.iter().all(|b| b.language == first.language && b.technology == first.technology) => {
            Some((first.language.clone(), first.technology.clone()))
        }
        Some(_) => None,
        None => Some((JOLIE_BEHAVIOUR_LANGUAGE.to_string(), JOLIE_TECHNOLOGY.to_string())),
    };
    if let Some((lang, tech)) = &shared {
        out.push_str(&format!("@behaviour_language({})\n", alias_for_path(lang)));
        out.push_str(&format!("@technology({})\n", alias_for_path(tech)));
    }
    match &e.target_alias {
        Some(alias) => out.push_str(&format!("{alias}::{} {{\n", e.target)),
        None => out.push_str(&format!("{} {{\n", e.target)),
    }
    for binding in &e.bindings {
        if shared.is_some() {
            let pad = "  ";
            out.push_str(&format!("{pad}{}() {{\n", binding.operation));
            out.push_str(&render_behaviour(&binding.body, 4));
            out.push('\n');
            out.push_str(&format!("{pad}}}\n"));
        } else {
            print_binding(out, binding, 2);
        }
    }
    out.push_str("}\n");
}

// ---------------------------------------------------------------------------
// Model set -> unit
// ---------------------------------------------------------------------------

/// Assemble a printable unit from a resolved model set. Declarations are
/// emitted in canonical category order (types, interfaces/technologies,
/// services, mappings), preserving model order within each category.
/// Behaviour bindings get their language and technology imports synthesised.
pub fn unit_from_model_set(set: &ModelSet, view: View, path: &str) -> SourceUnit {
    let mut unit = SourceUnit::new(path, view);
    for t in set.types.values() {
        unit.declarations.push(Declaration::Type(t.clone()));
    }
    match view {
        View::Jolie => {
            for i in set.interfaces.values() {
                unit.declarations.push(Declaration::Interface(i.clone()));
            }
            for s in set.jolie_services.values() {
                unit.declarations.push(Declaration::JolieService(s.clone()));
            }
        }
        View::Lemma => {
            for t in set.technologies.values() {
                unit.declarations.push(Declaration::Technology(t.clone()));
            }
            let mut language_imports: Vec<(ImportKind, String)> = Vec::new();
            for s in set.lemma_services.values() {
                for b in &s.behaviour_bindings {
                    language_imports.push((ImportKind::BehaviourLanguage, b.language.clone()));
                    language_imports.push((ImportKind::Technology, b.technology.clone()));
                }
                unit.declarations.push(Declaration::LemmaService(s.clone()));
            }
            for m in &set.mappings {
                unit.declarations.push(Declaration::Mapping(m.clone()));
            }
            language_imports.sort();
            language_imports.dedup();
            for (kind, p) in language_imports {
                let alias = alias_for_path(&p);
                unit.imports.push(Import { kind, path: p, alias, loc: Default::default() });
            }
        }
    }
    unit.imports.sort_by(|a, b| (&a.path, a.kind, &a.alias).cmp(&(&b.path, b.kind, &b.alias)));
    unit
}
