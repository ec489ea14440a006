//! Documentation and skeleton generation: CommonMark pages per type and
//! per service, plus behaviour-stub skeletons in the toolkit's own DSL.

use std::fs;
use std::path::Path;

use msadl_core::model::{
    Cardinality, Interface, ModelSet, NativeType, OperationShape, PortDirection, Refinement, TypeExpr, TypeRef,
};

pub struct GeneratedFile {
    pub relative_path: String,
    pub content: String,
}

pub fn cardinality_prose(c: &Cardinality) -> String {
    match (c.min, c.max) {
        (1, Some(1)) => "exactly one".to_string(),
        (0, Some(1)) => "optional".to_string(),
        (0, None) => "any number".to_string(),
        (min, None) => format!("at least {min}"),
        (min, Some(max)) if min == max => format!("exactly {min}"),
        (min, Some(max)) => format!("between {min} and {max}"),
    }
}

pub fn refinement_prose(native: NativeType, r: &Refinement) -> String {
    match r {
        Refinement::Length { min, max } if min == max => format!("{native}, exactly {min} characters"),
        Refinement::Length { min, max } => format!("{native}, between {min} and {max} characters"),
        Refinement::Range { lo, hi } => format!("{native}, between {lo} and {hi}"),
        Refinement::Regex { pattern } => format!("{native} matching `{pattern}`"),
        Refinement::EnumOf { values } => {
            let quoted: Vec<String> = values.iter().map(|v| format!("\"{v}\"")).collect();
            format!("{native}, one of: {}", quoted.join(", "))
        }
    }
}

fn type_expr_prose(ty: &TypeExpr) -> String {
    match ty {
        TypeExpr::Basic(b) => match &b.refinement {
            Some(r) => refinement_prose(b.native, r),
            None => b.native.to_string(),
        },
        TypeExpr::Named(n) => format!("[{n}]({n}.md)"),
        TypeExpr::Inline { nodes, .. } => format!("inline record ({} fields)", nodes.len()),
    }
}

fn type_ref_text(r: &TypeRef) -> String {
    match r {
        TypeRef::Native(n) => n.to_string(),
        TypeRef::Named(n) => format!("[{n}](../types/{n}.md)"),
    }
}

fn push_operation_rows(out: &mut String, interface: &Interface) {
    for op in &interface.operations {
        match &op.shape {
            OperationShape::OneWay { request } => {
                out.push_str(&format!(
                    "| {} | `{}` | one-way | {} | — |\n",
                    interface.name,
                    op.name,
                    type_ref_text(request)
                ));
            }
            OperationShape::RequestResponse { request, response } => {
                out.push_str(&format!(
                    "| {} | `{}` | request-response | {} | {} |\n",
                    interface.name,
                    op.name,
                    type_ref_text(request),
                    type_ref_text(response)
                ));
            }
            OperationShape::Params(params) => {
                let rendered: Vec<String> = params
                    .iter()
                    .map(|p| {
                        format!(
                            "`{}` {} {} {}",
                            p.name,
                            match p.exchange {
                                msadl_core::model::Exchange::Incoming => "in",
                                msadl_core::model::Exchange::Outgoing => "out",
                            },
                            match p.communication {
                                msadl_core::model::Communication::Synchronous => "sync",
                                msadl_core::model::Communication::Asynchronous => "async",
                            },
                            type_ref_text(&p.ty)
                        )
                    })
                    .collect();
                out.push_str(&format!(
                    "| {} | `{}` | parameters | {} | |\n",
                    interface.name,
                    op.name,
                    if rendered.is_empty() { "—".to_string() } else { rendered.join(", ") }
                ));
            }
        }
    }
}

fn type_page(t: &msadl_core::model::TypeDecl) -> String {
    let mut out = format!("# Type `{}`\n\n", t.name);
    if let Some(doc) = &t.doc {
        out.push_str(doc);
        out.push_str("\n\n");
    }
    if let Some(fields) = t.entity_identity_fields() {
        out.push_str(&format!("Entity: identified by {}.\n\n", fields.join(", ")));
    }
    match &t.root.refinement {
        Some(r) => out.push_str(&format!("Root: {}.\n\n", refinement_prose(t.root.native, r))),
        None if t.root.native != NativeType::Void => out.push_str(&format!("Root: {}.\n\n", t.root.native)),
        None => {}
    }
    if t.nodes.is_empty() {
        out.push_str("No nodes.\n");
    } else {
        out.push_str("| Node | Occurrences | Type |\n|---|---|---|\n");
        for node in &t.nodes {
            out.push_str(&format!(
                "| `{}` | {} | {} |\n",
                node.name,
                cardinality_prose(&node.cardinality),
                type_expr_prose(&node.ty)
            ));
        }
    }
    out
}

fn jolie_service_page(s: &msadl_core::model::JolieServiceModel, set: &ModelSet) -> String {
    let mut out = format!("# Service `{}`\n\n", s.name);

    out.push_str("## Operations\n\n");
    let mut any = false;
    let mut table = String::from("| Interface | Operation | Paradigm | Request | Response |\n|---|---|---|---|---|\n");
    for port in s.input_ports() {
        for name in &port.interfaces {
            if let Some(interface) = set.interfaces.get(name) {
                any = true;
                push_operation_rows(&mut table, interface);
            }
        }
    }
    if any {
        out.push_str(&table);
    } else {
        out.push_str("None exposed.\n");
    }

    out.push_str("\n## Access points\n\n");
    if s.ports.is_empty() {
        out.push_str("None.\n");
    } else {
        out.push_str("| Port | Direction | Location | Protocol | Format | Interfaces |\n|---|---|---|---|---|---|\n");
        for port in &s.ports {
            out.push_str(&format!(
                "| `{}` | {} | `{}` | {} | {} | {} |\n",
                port.name,
                match port.direction {
                    PortDirection::Input => "input",
                    PortDirection::Output => "output",
                },
                port.location,
                port.protocol,
                port.data_format.as_deref().unwrap_or("—"),
                port.interfaces.join(", ")
            ));
        }
    }

    out.push_str("\n## Dependencies\n\n");
    let deps: Vec<String> = s
        .output_ports()
        .map(|p| {
            match set
                .jolie_services
                .values()
                .find(|t| t.input_ports().any(|ip| ip.location == p.location))
            {
                Some(target) => format!("- `{}` via port `{}` at `{}`\n", target.name, p.name, p.location),
                None => format!("- port `{}` at `{}` (target outside this model set)\n", p.name, p.location),
            }
        })
        .collect();
    if deps.is_empty() {
        out.push_str("None.\n");
    } else {
        for d in deps {
            out.push_str(&d);
        }
    }
    out
}

fn lemma_service_page(s: &msadl_core::model::LemmaServiceModel, set: &ModelSet) -> String {
    let mut out = format!("# Microservice `{}`\n\n", s.qualified_name);
    out.push_str(&format!("Kind: {}.\n\n", s.kind.keyword()));

    out.push_str("## Operations\n\n");
    if s.interfaces.is_empty() {
        out.push_str("None.\n");
    } else {
        out.push_str("| Interface | Operation | Paradigm | Parameters | |\n|---|---|---|---|---|\n");
        for interface in &s.interfaces {
            push_operation_rows(&mut out, interface);
        }
    }

    out.push_str("\n## Endpoints\n\n");
    if s.endpoints.is_empty() {
        out.push_str("None.\n");
    } else {
        out.push_str("| Endpoint | Location | Technology | Protocol | Format | Interfaces |\n|---|---|---|---|---|---|\n");
        for e in &s.endpoints {
            let (tech, protocol, format) = set
                .endpoint_technology(&s.qualified_name, e)
                .unwrap_or_else(|| ("—".into(), "—".into(), "—".into()));
            out.push_str(&format!(
                "| `{}` | `{}` | {tech} | {protocol} | {format} | {} |\n",
                e.name,
                e.location,
                e.interfaces.join(", ")
            ));
        }
    }

    out.push_str("\n## Dependencies\n\n");
    if s.requires.is_empty() {
        out.push_str("None.\n");
    } else {
        for dep in &s.requires {
            out.push_str(&format!("- `{dep}`\n"));
        }
    }
    out
}

/// Skeleton with one behaviour stub per exposed operation.
fn jolie_skeleton(s: &msadl_core::model::JolieServiceModel, set: &ModelSet) -> String {
    let mut out = String::from("view jolie\n\n");
    out.push_str(&format!("service {} {{\n", s.name));
    for port in &s.ports {
        let kw = match port.direction {
            PortDirection::Input => "inputPort",
            PortDirection::Output => "outputPort",
        };
        out.push_str(&format!("  {kw} {} {{\n", port.name));
        out.push_str(&format!("    location: \"{}\"\n", port.location));
        out.push_str(&format!("    protocol: {}\n", port.protocol));
        if let Some(fmt) = &port.data_format {
            out.push_str(&format!("    format: {fmt}\n"));
        }
        out.push_str(&format!("    interfaces: {}\n", port.interfaces.join(", ")));
        out.push_str("  }\n");
    }
    let mut stubs: Vec<String> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for port in s.input_ports() {
        for name in &port.interfaces {
            let Some(interface) = set.interfaces.get(name) else { continue };
            for op in &interface.operations {
                if !seen.insert(op.name.clone()) {
                    continue;
                }
                match &op.shape {
                    OperationShape::OneWay { .. } => stubs.push(format!(
                        "    // TODO: implement {}\n    receive {}(request) {{\n      nil\n    }}",
                        op.name, op.name
                    )),
                    OperationShape::RequestResponse { .. } => stubs.push(format!(
                        "    // TODO: implement {}\n    receive {}(request) {{\n      nil\n    }} reply void",
                        op.name, op.name
                    )),
                    OperationShape::Params(_) => {}
                }
            }
        }
    }
    if !stubs.is_empty() {
        out.push_str("  main {\n");
        out.push_str(&stubs.join(" ;\n"));
        out.push_str("\n  }\n");
    }
    out.push_str("}\n");
    out
}

fn lemma_skeleton(s: &msadl_core::model::LemmaServiceModel) -> String {
    let mut out = String::from("view lemma\n\n");
    out.push_str("import behaviour_language from \"jolie.behaviour_language\" as jolie\n");
    out.push_str("import technology from \"jolie.technology\" as jolie_interpreter\n\n");
    out.push_str("@behaviour_language(jolie)\n@technology(jolie_interpreter)\n");
    out.push_str(&format!("{} {{\n", s.qualified_name));
    let mut seen = std::collections::BTreeSet::new();
    for interface in &s.interfaces {
        for op in &interface.operations {
            if seen.insert(op.name.clone()) {
                out.push_str(&format!("  // TODO: implement {}\n  {}() {{\n    nil\n  }}\n", op.name, op.name));
            }
        }
    }
    out.push_str("}\n");
    out
}

/// Generate a documentation bundle. Deterministic: same set, same bytes.
pub fn generate(set: &ModelSet) -> Vec<GeneratedFile> {
    let mut files = Vec::new();

    let mut index = String::from("# Model documentation\n\n## Types\n\n");
    if set.types.is_empty() {
        index.push_str("None.\n");
    } else {
        for name in set.types.keys() {
            index.push_str(&format!("- [{name}](types/{name}.md)\n"));
        }
    }
    index.push_str("\n## Services\n\n");
    if set.jolie_services.is_empty() && set.lemma_services.is_empty() {
        index.push_str("None.\n");
    } else {
        for name in set.jolie_services.keys() {
            index.push_str(&format!("- [{name}](services/{name}.md)\n"));
        }
        for name in set.lemma_services.keys() {
            index.push_str(&format!("- [{name}](services/{name}.md)\n"));
        }
    }
    files.push(GeneratedFile { relative_path: "index.md".into(), content: index });

    for (name, t) in &set.types {
        files.push(GeneratedFile { relative_path: format!("types/{name}.md"), content: type_page(t) });
    }
    for (name, s) in &set.jolie_services {
        files.push(GeneratedFile { relative_path: format!("services/{name}.md"), content: jolie_service_page(s, set) });
        files.push(GeneratedFile { relative_path: format!("skeletons/{name}.jsm"), content: jolie_skeleton(s, set) });
    }
    for (name, s) in &set.lemma_services {
        files.push(GeneratedFile { relative_path: format!("services/{name}.md"), content: lemma_service_page(s, set) });
        files.push(GeneratedFile { relative_path: format!("skeletons/{name}.lsm"), content: lemma_skeleton(s) });
    }
    files
}

pub fn write_bundle(set: &ModelSet, out_dir: &Path) -> Result<Vec<String>, String> {
    let files = generate(set);
    let mut written = Vec::new();
    for file in &files {
        let path = out_dir.join(&file.relative_path);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| format!("cannot create {}: {e}", parent.display()))?;
        }
        fs::write(&path, &file.content).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        written.push(file.relative_path.clone());
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use msadl_core::model::Number;

    #[test]
    fn cardinality_prose_cases() {
        assert_eq!(cardinality_prose(&Cardinality::ONE), "exactly one");
        assert_eq!(cardinality_prose(&Cardinality::new(0, Some(1))), "optional");
        assert_eq!(cardinality_prose(&Cardinality::new(0, None)), "any number");
        assert_eq!(cardinality_prose(&Cardinality::new(2, None)), "at least 2");
        assert_eq!(cardinality_prose(&Cardinality::new(3, Some(3))), "exactly 3");
        assert_eq!(cardinality_prose(&Cardinality::new(2, Some(5))), "between 2 and 5");
    }

    #[test]
    fn refinement_prose_cases() {
        assert_eq!(
            refinement_prose(NativeType::String, &Refinement::Length { min: 3, max: 3 }),
            "string, exactly 3 characters"
        );
        assert_eq!(
            refinement_prose(NativeType::String, &Refinement::Length { min: 2, max: 5 }),
            "string, between 2 and 5 characters"
        );
        assert_eq!(
            refinement_prose(NativeType::Int, &Refinement::Range { lo: Number::Int(0), hi: Number::Int(100) }),
            "int, between 0 and 100"
        );
        assert_eq!(
            refinement_prose(NativeType::String, &Refinement::Regex { pattern: "a.c".into() }),
            "string matching `a.c`"
        );
        assert_eq!(
            refinement_prose(NativeType::String, &Refinement::EnumOf { values: vec!["a".into(), "b".into()] }),
            "string, one of: \"a\", \"b\""
        );
    }
}
