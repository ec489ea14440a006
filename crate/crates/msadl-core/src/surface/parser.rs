//! Recursive-descent parser for both views.
//!
//! Keywords are contextual, so declaration dispatch happens on the leading
//! identifier. Error recovery is first-error-per-declaration: on an error
//! the parser records one diagnostic and skips to the next top-level
//! declaration keyword.

use indexmap::IndexMap;

use super::lexer::{lex, Tok, Token};
use super::{AnnotationToken, AnnotationValue, BehaviourExtension, Declaration, Import, ImportKind, SourceUnit};
use crate::diag::{codes, Diagnostic, Location};
use crate::model::{
    BasicType, BehaviourBinding, BehaviourTerm, Cardinality, DddAnnotation, DddPattern, Endpoint, Expr, Interface,
    JolieServiceModel, LemmaServiceModel, MappingEntry, NativeType, Node, Number, OperationShape, OperationSig,
    Parameter, Port, PortDirection, ProtocolDef, Refinement, ServiceKind, TechRef, TechnologyModel, TypeDecl,
    TypeExpr, TypeRef, View,
};
use crate::value::Scalar;

type PResult<T> = Result<T, Diagnostic>;

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    file: &'a str,
    view: View,
}

const DECL_KEYWORDS: [&str; 8] = ["import", "type", "interface", "service", "microservice", "technology", "map", "view"];

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn peek_tok(&self) -> &Tok {
        &self.peek().tok
    }

    fn nth_tok(&self, n: usize) -> &Tok {
        &self.tokens[(self.pos + n).min(self.tokens.len() - 1)].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos.min(self.tokens.len() - 1)].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn loc_here(&self) -> Location {
        self.peek().location(self.file)
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek_tok(), Tok::Eof)
    }

    fn err(&self, expected: &str) -> Diagnostic {
        Diagnostic::error(
            codes::PARSE_ERROR,
            format!("expected {expected}, found {}", self.peek_tok().describe()),
            self.loc_here(),
        )
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek_tok(), Tok::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<Token> {
        if self.at_kw(kw) {
            Ok(self.bump())
        } else {
            Err(self.err(&format!("`{kw}`")))
        }
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> PResult<Token> {
        if *self.peek_tok() == tok {
            Ok(self.bump())
        } else {
            Err(self.err(expected))
        }
    }

    fn eat(&mut self, tok: Tok) -> bool {
        if *self.peek_tok() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self, expected: &str) -> PResult<(String, Location)> {
        match self.peek_tok().clone() {
            Tok::Ident(s) => {
                let loc = self.loc_here();
                self.bump();
                Ok((s, loc))
            }
            _ => Err(self.err(expected)),
        }
    }

    fn string(&mut self, expected: &str) -> PResult<String> {
        match self.peek_tok().clone() {
            Tok::Str(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.err(expected)),
        }
    }

    fn nat(&mut self, expected: &str) -> PResult<u64> {
        match *self.peek_tok() {
            Tok::Int(i) if i >= 0 => {
                self.bump();
                Ok(i as u64)
            }
            _ => Err(self.err(expected)),
        }
    }

    /// Dotted qualified name: `a.b.c`.
    fn qualified_name(&mut self, expected: &str) -> PResult<(String, Location)> {
        let (mut name, loc) = self.ident(expected)?;
        while *self.peek_tok() == Tok::Dot {
            self.bump();
            let (next, _) = self.ident("identifier after `.`")?;
            name.push('.');
            name.push_str(&next);
        }
        Ok((name, loc))
    }

    /// Skip to the next plausible top-level declaration start.
    fn recover(&mut self) {
        let mut depth = 0usize;
        if !self.at_eof() {
            self.bump();
        }
        while !self.at_eof() {
            match self.peek_tok() {
                Tok::LBrace => depth += 1,
                Tok::RBrace => depth = depth.saturating_sub(1),
                Tok::At if depth == 0 => return,
                Tok::DocLine(_) if depth == 0 => return,
                Tok::Ident(s) if depth == 0 && DECL_KEYWORDS.contains(&s.as_str()) => return,
                _ => {}
            }
            self.bump();
        }
    }
}

pub fn parse_unit(text: &str, path: &str, view: Option<View>) -> Result<SourceUnit, Vec<Diagnostic>> {
    let tokens = lex(text, path)?;
    // A `view` header, when present, settles the view before anything else.
    let header_view = match (&tokens.first().map(|t| &t.tok), &tokens.get(1).map(|t| &t.tok)) {
        (Some(Tok::Ident(v)), Some(Tok::Ident(w))) if v == "view" => match w.as_str() {
            "jolie" => Some(View::Jolie),
            "lemma" => Some(View::Lemma),
            _ => None,
        },
        _ => None,
    };
    let effective = match (view, header_view) {
        (Some(v), Some(h)) if v != h => {
            return Err(vec![Diagnostic::error(
                codes::VIEW_MISMATCH,
                format!("unit declares view `{h}` but was parsed as `{v}`"),
                tokens[1].location(path),
            )]);
        }
        (Some(v), _) => v,
        (None, Some(h)) => h,
        (None, None) => {
            return Err(vec![Diagnostic::error(
                codes::PARSE_ERROR,
                "cannot determine view: no `view` header and no view given by the file extension",
                Location::point(path, 1, 1),
            )]);
        }
    };

    let mut p = Parser { tokens, pos: 0, file: path, view: effective };
    if header_view.is_some() {
        p.bump();
        p.bump();
    }

    let mut unit = SourceUnit::new(path, effective);
    let mut diags: Vec<Diagnostic> = Vec::new();

    while !p.at_eof() {
        if p.at_kw("import") {
            match parse_import(&mut p) {
                Ok(imp) => unit.imports.push(imp),
                Err(d) => {
                    diags.push(d);
                    p.recover();
                }
            }
            continue;
        }
        match parse_declaration(&mut p) {
            Ok(decl) => unit.declarations.push(decl),
            Err(d) => {
                diags.push(d);
                p.recover();
            }
        }
    }

    if diags.is_empty() {
        unit.imports.sort_by(|a, b| (&a.path, a.kind, &a.alias).cmp(&(&b.path, b.kind, &b.alias)));
        Ok(unit)
    } else {
        Err(crate::diag::finish(diags))
    }
}

pub fn parse_type_expr_text(text: &str) -> Result<TypeExpr, Vec<Diagnostic>> {
    let tokens = lex(text, "<type-expr>")?;
    let mut p = Parser { tokens, pos: 0, file: "<type-expr>", view: View::Jolie };
    let expr = parse_type_expr(&mut p).map_err(|d| vec![d])?;
    if !p.at_eof() {
        return Err(vec![p.err("end of input")]);
    }
    Ok(expr)
}

fn parse_import(p: &mut Parser) -> PResult<Import> {
    let loc = p.loc_here();
    p.expect_kw("import")?;
    let (kind_word, kind_loc) = p.ident("an import kind (`types`, `interfaces`, `microservices`, `technology`, `behaviour_language`)")?;
    let kind = ImportKind::from_keyword(&kind_word).ok_or_else(|| {
        Diagnostic::error(codes::PARSE_ERROR, format!("unknown import kind `{kind_word}`"), kind_loc)
    })?;
    p.expect_kw("from")?;
    let path = p.string("a quoted import path")?;
    p.expect_kw("as")?;
    let (alias, _) = p.ident("an alias identifier")?;
    Ok(Import { kind, path, alias, loc })
}

fn parse_declaration(p: &mut Parser) -> PResult<Declaration> {
    // leading doc block, possibly carrying annotations
    let mut doc_lines: Vec<String> = Vec::new();
    while let Tok::DocLine(line) = p.peek_tok().clone() {
        doc_lines.push(line);
        p.bump();
    }

    if p.at_kw("type") {
        return parse_type_decl(p, &doc_lines).map(Declaration::Type);
    }

    match p.view {
        View::Jolie => {
            if p.at_kw("interface") {
                parse_interface_jolie(p).map(Declaration::Interface)
            } else if p.at_kw("service") {
                parse_jolie_service(p).map(Declaration::JolieService)
            } else {
                Err(p.err("a declaration (`import`, `type`, `interface`, `service`)"))
            }
        }
        View::Lemma => {
            if *p.peek_tok() == Tok::At {
                return parse_annotated_lemma(p);
            }
            if p.at_kw("microservice") {
                parse_microservice(p, &IndexMap::new()).map(Declaration::LemmaService)
            } else if p.at_kw("technology") {
                parse_technology(p).map(Declaration::Technology)
            } else if p.at_kw("map") {
                parse_mapping(p).map(Declaration::Mapping)
            } else {
                Err(p.err("a declaration (`import`, `type`, `microservice`, `technology`, `map`, or an annotated behaviour block)"))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

fn parse_type_decl(p: &mut Parser, doc_lines: &[String]) -> PResult<TypeDecl> {
    p.expect_kw("type")?;
    let (name, loc) = p.ident("a type name")?;

    let (doc, annotations) = split_doc_block(doc_lines, &loc)?;

    let root = if p.eat(Tok::Colon) {
        parse_basic_type(p)?
    } else {
        BasicType::plain(NativeType::Void)
    };

    let nodes = if *p.peek_tok() == Tok::LBrace { parse_node_block(p)? } else { Vec::new() };

    Ok(TypeDecl { name, root, nodes, annotations, doc, loc })
}

fn parse_node_block(p: &mut Parser) -> PResult<Vec<Node>> {
    p.expect(Tok::LBrace, "`{`")?;
    let mut nodes = Vec::new();
    if !p.eat(Tok::RBrace) {
        loop {
            nodes.push(parse_node(p)?);
            if p.eat(Tok::Comma) {
                continue;
            }
            p.expect(Tok::RBrace, "`,` or `}`")?;
            break;
        }
    }
    Ok(nodes)
}

fn parse_node(p: &mut Parser) -> PResult<Node> {
    let (name, loc) = p.ident("a node name")?;
    let cardinality = if *p.peek_tok() == Tok::LBracket {
        p.bump();
        let min = p.nat("a minimum occurrence count")?;
        p.expect(Tok::Comma, "`,`")?;
        let max = if p.eat(Tok::Star) { None } else { Some(p.nat("a maximum occurrence count or `*`")?) };
        p.expect(Tok::RBracket, "`]`")?;
        Cardinality::new(min, max)
    } else {
        Cardinality::default()
    };
    p.expect(Tok::Colon, "`:`")?;
    let ty = parse_type_expr(p)?;
    Ok(Node { name, cardinality, ty, loc })
}

fn parse_type_expr(p: &mut Parser) -> PResult<TypeExpr> {
    if *p.peek_tok() == Tok::LBrace {
        let nodes = parse_node_block(p)?;
        return Ok(TypeExpr::Inline { root: BasicType::plain(NativeType::Void), nodes });
    }
    let (word, loc) = match p.peek_tok().clone() {
        Tok::Ident(s) => (s, p.loc_here()),
        _ => return Err(p.err("a type expression")),
    };
    if NativeType::from_keyword(&word).is_some() {
        let basic = parse_basic_type(p)?;
        if *p.peek_tok() == Tok::LBrace {
            let nodes = parse_node_block(p)?;
            Ok(TypeExpr::Inline { root: basic, nodes })
        } else {
            Ok(TypeExpr::Basic(basic))
        }
    } else {
        p.bump();
        let _ = loc;
        Ok(TypeExpr::Named(word))
    }
}

fn parse_basic_type(p: &mut Parser) -> PResult<BasicType> {
    let (word, loc) = p.ident("a native type (`bool`, `int`, `double`, `string`, `char`, `void`)")?;
    let native = NativeType::from_keyword(&word)
        .ok_or_else(|| Diagnostic::error(codes::PARSE_ERROR, format!("unknown native type `{word}`"), loc.clone()))?;
    let refinement = if *p.peek_tok() == Tok::LParen {
        p.bump();
        let r = parse_refinement(p)?;
        p.expect(Tok::RParen, "`)`")?;
        Some(r)
    } else {
        None
    };
    if let Some(r) = &refinement {
        if !r.compatible_with(native) {
            return Err(Diagnostic::error(
                codes::REFINEMENT_INCOMPATIBLE,
                format!("refinement `{}` does not apply to native type `{native}`", r.keyword()),
                loc,
            ));
        }
    }
    Ok(BasicType { native, refinement })
}

fn parse_refinement(p: &mut Parser) -> PResult<Refinement> {
    let (word, loc) = p.ident("a refinement (`length`, `range`, `regex`, `enum`)")?;
    match word.as_str() {
        "length" => {
            p.expect(Tok::LParen, "`(`")?;
            let min = p.nat("a length")?;
            let max = if p.eat(Tok::Comma) { p.nat("a maximum length")? } else { min };
            p.expect(Tok::RParen, "`)`")?;
            Ok(Refinement::Length { min, max })
        }
        "range" => {
            p.expect(Tok::LParen, "`(`")?;
            let lo = parse_number(p)?;
            p.expect(Tok::Comma, "`,`")?;
            let hi = parse_number(p)?;
            p.expect(Tok::RParen, "`)`")?;
            Ok(Refinement::Range { lo, hi })
        }
        "regex" => {
            p.expect(Tok::LParen, "`(`")?;
            let pattern = p.string("a quoted pattern")?;
            p.expect(Tok::RParen, "`)`")?;
            Ok(Refinement::Regex { pattern })
        }
        "enum" => {
            p.expect(Tok::LParen, "`(`")?;
            let mut values = vec![p.string("a quoted enum value")?];
            while p.eat(Tok::Comma) {
                values.push(p.string("a quoted enum value")?);
            }
            p.expect(Tok::RParen, "`)`")?;
            Ok(Refinement::EnumOf { values })
        }
        other => Err(Diagnostic::error(codes::PARSE_ERROR, format!("unknown refinement `{other}`"), loc)),
    }
}

fn parse_number(p: &mut Parser) -> PResult<Number> {
    match *p.peek_tok() {
        Tok::Int(i) => {
            p.bump();
            Ok(Number::Int(i))
        }
        Tok::Double(d) => {
            p.bump();
            Ok(Number::Double(d))
        }
        _ => Err(p.err("a number")),
    }
}

fn parse_type_ref(p: &mut Parser) -> PResult<TypeRef> {
    let (word, _) = p.ident("a type name")?;
    Ok(match NativeType::from_keyword(&word) {
        Some(n) => TypeRef::Native(n),
        None => TypeRef::Named(word),
    })
}

// ---------------------------------------------------------------------------
// Doc blocks and annotations
// ---------------------------------------------------------------------------

/// Split a doc block into plain text and annotations. Annotation lines start
/// with `@`; unknown annotation names are preserved verbatim.
fn split_doc_block(lines: &[String], loc: &Location) -> PResult<(Option<String>, Vec<DddAnnotation>)> {
    let mut doc = Vec::new();
    let mut annotations = Vec::new();
    for line in lines {
        if line.trim_start().starts_with('@') {
            let token = parse_annotation_text(line.trim(), loc)?;
            annotations.push(annotation_to_ddd(token, line.trim(), loc)?);
        } else {
            doc.push(line.clone());
        }
    }
    let doc = if doc.is_empty() { None } else { Some(doc.join("\n")) };
    Ok((doc, annotations))
}

fn parse_annotation_text(text: &str, loc: &Location) -> PResult<AnnotationToken> {
    let tokens = lex(text, &loc.file).map_err(|mut ds| {
        let mut d = ds.remove(0);
        d.location = loc.clone();
        d.code = codes::ANNOTATION_MALFORMED.to_string();
        d
    })?;
    let mut p = Parser { tokens, pos: 0, file: &loc.file, view: View::Jolie };
    let token = parse_annotation(&mut p).map_err(|mut d| {
        d.location = loc.clone();
        d.code = codes::ANNOTATION_MALFORMED.to_string();
        d
    })?;
    if !p.at_eof() {
        return Err(Diagnostic::error(
            codes::ANNOTATION_MALFORMED,
            format!("trailing input after annotation `@{}`", token.name),
            loc.clone(),
        ));
    }
    Ok(token)
}

fn parse_annotation(p: &mut Parser) -> PResult<AnnotationToken> {
    let loc = p.loc_here();
    p.expect(Tok::At, "`@`")?;
    let (name, _) = p.ident("an annotation name")?;
    let mut arguments = IndexMap::new();
    if p.eat(Tok::LParen) {
        let value = parse_annotation_value(p)?;
        p.expect(Tok::RParen, "`)`")?;
        arguments.insert(String::new(), value);
    } else if p.eat(Tok::LBrace)
        && !p.eat(Tok::RBrace) {
            loop {
                let (key, _) = p.ident("an argument name")?;
                p.expect(Tok::Eq, "`=`")?;
                let value = parse_annotation_value(p)?;
                arguments.insert(key, value);
                if p.eat(Tok::Comma) {
                    continue;
                }
                p.expect(Tok::RBrace, "`,` or `}`")?;
                break;
            }
        }
    Ok(AnnotationToken { name, arguments, loc })
}

fn parse_annotation_value(p: &mut Parser) -> PResult<AnnotationValue> {
    match p.peek_tok().clone() {
        Tok::Ident(s) => {
            p.bump();
            Ok(AnnotationValue::Ident(s))
        }
        Tok::Str(s) => {
            p.bump();
            Ok(AnnotationValue::Str(s))
        }
        Tok::Int(i) => {
            p.bump();
            Ok(AnnotationValue::Num(Number::Int(i)))
        }
        Tok::Double(d) => {
            p.bump();
            Ok(AnnotationValue::Num(Number::Double(d)))
        }
        Tok::LBracket => {
            p.bump();
            let mut items = Vec::new();
            if !p.eat(Tok::RBracket) {
                loop {
                    items.push(parse_annotation_value(p)?);
                    if p.eat(Tok::Comma) {
                        continue;
                    }
                    p.expect(Tok::RBracket, "`,` or `]`")?;
                    break;
                }
            }
            Ok(AnnotationValue::List(items))
        }
        _ => Err(p.err("an annotation value")),
    }
}

fn annotation_to_ddd(token: AnnotationToken, raw: &str, loc: &Location) -> PResult<DddAnnotation> {
    if token.name == "entity" {
        let fields = match token.arguments.get("identity") {
            Some(AnnotationValue::List(items)) if !items.is_empty() => {
                let mut fields = Vec::with_capacity(items.len());
                for item in items {
                    match item {
                        AnnotationValue::Ident(s) => fields.push(s.clone()),
                        _ => {
                            return Err(Diagnostic::error(
                                codes::ANNOTATION_MALFORMED,
                                "`identity` entries must be node names",
                                loc.clone(),
                            ))
                        }
                    }
                }
                fields
            }
            _ => {
                return Err(Diagnostic::error(
                    codes::ANNOTATION_MALFORMED,
                    "`@entity` requires a non-empty `identity = [ ... ]` argument",
                    loc.clone(),
                ))
            }
        };
        let canonical = format!("@entity {{ identity = [ {} ] }}", fields.join(", "));
        Ok(DddAnnotation { pattern: DddPattern::Entity { identity_fields: fields }, raw: canonical, loc: loc.clone() })
    } else {
        Ok(DddAnnotation {
            pattern: DddPattern::Unknown { name: token.name },
            raw: raw.to_string(),
            loc: loc.clone(),
        })
    }
}

// ---------------------------------------------------------------------------
// Jolie view
// ---------------------------------------------------------------------------

fn parse_interface_jolie(p: &mut Parser) -> PResult<Interface> {
    p.expect_kw("interface")?;
    let (name, loc) = p.ident("an interface name")?;
    p.expect(Tok::LBrace, "`{`")?;
    let mut operations = Vec::new();
    while !p.eat(Tok::RBrace) {
        operations.push(parse_jolie_operation(p)?);
    }
    Ok(Interface { name, operations, loc })
}

fn parse_jolie_operation(p: &mut Parser) -> PResult<OperationSig> {
    let loc = p.loc_here();
    if p.eat_kw("oneWay") {
        let (name, _) = p.ident("an operation name")?;
        p.expect(Tok::LParen, "`(`")?;
        let request = parse_type_ref(p)?;
        p.expect(Tok::RParen, "`)`")?;
        Ok(OperationSig { name, shape: OperationShape::OneWay { request }, loc })
    } else if p.eat_kw("requestResponse") {
        let (name, _) = p.ident("an operation name")?;
        p.expect(Tok::LParen, "`(`")?;
        let request = parse_type_ref(p)?;
        p.expect(Tok::RParen, "`)`")?;
        p.expect(Tok::Arrow, "`->`")?;
        let response = parse_type_ref(p)?;
        Ok(OperationSig { name, shape: OperationShape::RequestResponse { request, response }, loc })
    } else {
        Err(p.err("`oneWay`, `requestResponse` or `}`"))
    }
}

fn parse_jolie_service(p: &mut Parser) -> PResult<JolieServiceModel> {
    p.expect_kw("service")?;
    let (name, loc) = p.ident("a service name")?;
    p.expect(Tok::LBrace, "`{`")?;
    let mut ports = Vec::new();
    let mut behaviour = None;
    loop {
        if p.at_kw("inputPort") || p.at_kw("outputPort") {
            ports.push(parse_port(p)?);
        } else if p.at_kw("main") {
            p.bump();
            p.expect(Tok::LBrace, "`{`")?;
            behaviour = Some(if *p.peek_tok() == Tok::RBrace { BehaviourTerm::Nil } else { parse_behaviour(p)? });
            p.expect(Tok::RBrace, "`}`")?;
            p.expect(Tok::RBrace, "`}` (main must be the last member of a service)")?;
            break;
        } else if p.eat(Tok::RBrace) {
            break;
        } else {
            return Err(p.err("`inputPort`, `outputPort`, `main` or `}`"));
        }
    }
    Ok(JolieServiceModel { name, ports, behaviour, loc })
}

fn parse_port(p: &mut Parser) -> PResult<Port> {
    let loc = p.loc_here();
    let direction = if p.eat_kw("inputPort") {
        PortDirection::Input
    } else {
        p.expect_kw("outputPort")?;
        PortDirection::Output
    };
    let (name, _) = p.ident("a port name")?;
    p.expect(Tok::LBrace, "`{`")?;
    p.expect_kw("location")?;
    p.expect(Tok::Colon, "`:`")?;
    let location = p.string("a quoted URI")?;
    p.expect_kw("protocol")?;
    p.expect(Tok::Colon, "`:`")?;
    let (protocol, _) = p.ident("a protocol name")?;
    let data_format = if p.at_kw("format") {
        p.bump();
        p.expect(Tok::Colon, "`:`")?;
        Some(p.ident("a data format name")?.0)
    } else {
        None
    };
    p.expect_kw("interfaces")?;
    p.expect(Tok::Colon, "`:`")?;
    let mut interfaces = vec![p.ident("an interface name")?.0];
    while p.eat(Tok::Comma) {
        interfaces.push(p.ident("an interface name")?.0);
    }
    p.expect(Tok::RBrace, "`}`")?;
    Ok(Port { name, direction, location, protocol, data_format, interfaces, loc })
}

// ---------------------------------------------------------------------------
// Behaviours
// ---------------------------------------------------------------------------

fn parse_behaviour(p: &mut Parser) -> PResult<BehaviourTerm> {
    // parallel binds loosest; both operators fold to the right
    let first = parse_behaviour_seq(p)?;
    if p.eat(Tok::Pipe) {
        let rest = parse_behaviour(p)?;
        Ok(BehaviourTerm::par(first, rest))
    } else {
        Ok(first)
    }
}

fn parse_behaviour_seq(p: &mut Parser) -> PResult<BehaviourTerm> {
    let first = parse_behaviour_prim(p)?;
    if p.eat(Tok::Semi) {
        let rest = parse_behaviour_seq(p)?;
        Ok(BehaviourTerm::seq(first, rest))
    } else {
        Ok(first)
    }
}

fn parse_behaviour_prim(p: &mut Parser) -> PResult<BehaviourTerm> {
    if p.eat_kw("nil") {
        return Ok(BehaviourTerm::Nil);
    }
    if p.eat(Tok::LBrace) {
        if p.eat(Tok::RBrace) {
            return Ok(BehaviourTerm::Nil);
        }
        let inner = parse_behaviour(p)?;
        p.expect(Tok::RBrace, "`}`")?;
        return Ok(inner);
    }
    if p.eat_kw("invoke") {
        let (port, _) = p.ident("an output port name")?;
        p.expect(Tok::Dot, "`.`")?;
        let (op, _) = p.ident("an operation name")?;
        p.expect(Tok::LParen, "`(`")?;
        let payload = parse_expr(p)?;
        p.expect(Tok::RParen, "`)`")?;
        let response_var = if p.eat(Tok::Arrow) { Some(p.ident("a response variable")?.0) } else { None };
        return Ok(BehaviourTerm::Invoke { port, op, payload, response_var });
    }
    if p.eat_kw("receive") {
        let (op, _) = p.ident("an operation name")?;
        p.expect(Tok::LParen, "`(`")?;
        let (bind_var, _) = p.ident("a binding variable")?;
        p.expect(Tok::RParen, "`)`")?;
        p.expect(Tok::LBrace, "`{`")?;
        let body = if *p.peek_tok() == Tok::RBrace { BehaviourTerm::Nil } else { parse_behaviour(p)? };
        p.expect(Tok::RBrace, "`}`")?;
        let reply = if p.eat_kw("reply") { Some(parse_expr(p)?) } else { None };
        return Ok(BehaviourTerm::Receive { op, bind_var, body: Box::new(body), reply });
    }
    if p.eat_kw("replicate") {
        let (op, _) = p.ident("an operation name")?;
        p.expect(Tok::LParen, "`(`")?;
        let (bind_var, _) = p.ident("a binding variable")?;
        p.expect(Tok::RParen, "`)`")?;
        p.expect(Tok::LBrace, "`{`")?;
        let body = if *p.peek_tok() == Tok::RBrace { BehaviourTerm::Nil } else { parse_behaviour(p)? };
        p.expect(Tok::RBrace, "`}`")?;
        return Ok(BehaviourTerm::GuardedReplication { op, bind_var, body: Box::new(body) });
    }
    Err(p.err("a behaviour term (`nil`, `invoke`, `receive`, `replicate` or `{`)"))
}

fn parse_expr(p: &mut Parser) -> PResult<Expr> {
    match p.peek_tok().clone() {
        Tok::Str(s) => {
            p.bump();
            Ok(Expr::Lit(Scalar::Str(s)))
        }
        Tok::Int(i) => {
            p.bump();
            Ok(Expr::Lit(Scalar::Int(i)))
        }
        Tok::Double(d) => {
            p.bump();
            Ok(Expr::Lit(Scalar::Double(d)))
        }
        Tok::Char(c) => {
            p.bump();
            Ok(Expr::Lit(Scalar::Char(c)))
        }
        Tok::Ident(word) => {
            match word.as_str() {
                "true" => {
                    p.bump();
                    return Ok(Expr::Lit(Scalar::Bool(true)));
                }
                "false" => {
                    p.bump();
                    return Ok(Expr::Lit(Scalar::Bool(false)));
                }
                "void" => {
                    p.bump();
                    return Ok(Expr::Lit(Scalar::Unit));
                }
                _ => {}
            }
            p.bump();
            let mut fields = Vec::new();
            while *p.peek_tok() == Tok::Dot {
                p.bump();
                fields.push(p.ident("a field name")?.0);
            }
            Ok(Expr::Path { var: word, fields })
        }
        _ => Err(p.err("an expression (literal, variable or projection)")),
    }
}

// ---------------------------------------------------------------------------
// LEMMA view
// ---------------------------------------------------------------------------

/// A run of `@name(arg)` annotation lines before a LEMMA declaration.
fn parse_bare_annotations(p: &mut Parser) -> PResult<IndexMap<String, (String, Location)>> {
    let mut anns = IndexMap::new();
    while *p.peek_tok() == Tok::At {
        let loc = p.loc_here();
        p.bump();
        let (name, name_loc) = p.ident("an annotation name")?;
        if name != "behaviour_language" && name != "technology" {
            return Err(Diagnostic::error(
                codes::ANNOTATION_MALFORMED,
                format!("unknown annotation `@{name}` (expected `@behaviour_language` or `@technology`)"),
                name_loc,
            ));
        }
        p.expect(Tok::LParen, "`(`")?;
        let (alias, _) = p.ident("an import alias")?;
        p.expect(Tok::RParen, "`)`")?;
        anns.insert(name, (alias, loc));
    }
    Ok(anns)
}

fn binding_pair(
    anns: &IndexMap<String, (String, Location)>,
    defaults: &IndexMap<String, (String, Location)>,
    loc: &Location,
) -> PResult<(String, String)> {
    let language = anns
        .get("behaviour_language")
        .or_else(|| defaults.get("behaviour_language"))
        .map(|(a, _)| a.clone())
        .ok_or_else(|| {
            Diagnostic::error(
                codes::ANNOTATION_MALFORMED,
                "behaviour binding requires a `@behaviour_language(...)` annotation",
                loc.clone(),
            )
        })?;
    let technology = anns
        .get("technology")
        .or_else(|| defaults.get("technology"))
        .map(|(a, _)| a.clone())
        .ok_or_else(|| {
            Diagnostic::error(
                codes::ANNOTATION_MALFORMED,
                "behaviour binding requires a `@technology(...)` annotation",
                loc.clone(),
            )
        })?;
    Ok((language, technology))
}

/// Annotated LEMMA declaration: either an annotated `microservice` or a
/// behaviour-extension block `Alias::qualified.Name { op() { ... } }`.
fn parse_annotated_lemma(p: &mut Parser) -> PResult<Declaration> {
    let anns = parse_bare_annotations(p)?;
    if p.at_kw("microservice") {
        return parse_microservice(p, &anns).map(Declaration::LemmaService);
    }

    let loc = p.loc_here();
    let (first, _) = p.ident("a microservice reference")?;
    let (target_alias, target) = if p.eat(Tok::ColonColon) {
        let (qname, _) = p.qualified_name("a qualified microservice name")?;
        (Some(first), qname)
    } else {
        let mut name = first;
        while *p.peek_tok() == Tok::Dot {
            p.bump();
            let (next, _) = p.ident("identifier after `.`")?;
            name.push('.');
            name.push_str(&next);
        }
        (None, name)
    };

    p.expect(Tok::LBrace, "`{`")?;
    let mut bindings = Vec::new();
    while !p.eat(Tok::RBrace) {
        bindings.push(parse_op_binding(p, &anns)?);
    }
    Ok(Declaration::BehaviourExtension(BehaviourExtension { target_alias, target, bindings, loc }))
}

fn parse_op_binding(p: &mut Parser, defaults: &IndexMap<String, (String, Location)>) -> PResult<BehaviourBinding> {
    let own = parse_bare_annotations(p)?;
    let loc = p.loc_here();
    let (operation, _) = p.ident("an operation name")?;
    p.expect(Tok::LParen, "`(`")?;
    p.expect(Tok::RParen, "`)`")?;
    let (language, technology) = binding_pair(&own, defaults, &loc)?;
    p.expect(Tok::LBrace, "`{`")?;
    let body = if *p.peek_tok() == Tok::RBrace { BehaviourTerm::Nil } else { parse_behaviour(p)? };
    p.expect(Tok::RBrace, "`}`")?;
    Ok(BehaviourBinding { operation, language, technology, body, loc })
}

fn parse_microservice(p: &mut Parser, defaults: &IndexMap<String, (String, Location)>) -> PResult<LemmaServiceModel> {
    p.expect_kw("microservice")?;
    let (qualified_name, loc) = p.qualified_name("a qualified microservice name")?;
    let kind = if p.eat_kw("kind") {
        let (word, kloc) = p.ident("`functional`, `utility` or `infrastructure`")?;
        ServiceKind::from_keyword(&word)
            .ok_or_else(|| Diagnostic::error(codes::PARSE_ERROR, format!("unknown service kind `{word}`"), kloc))?
    } else {
        ServiceKind::Functional
    };
    p.expect(Tok::LBrace, "`{`")?;

    let mut service = LemmaServiceModel::new(&qualified_name);
    service.kind = kind;
    service.loc = loc;

    loop {
        if p.at_kw("interface") {
            service.interfaces.push(parse_interface_lemma(p)?);
        } else if p.at_kw("endpoint") {
            service.endpoints.push(parse_endpoint(p)?);
        } else if p.at_kw("requires") {
            p.bump();
            let (dep, _) = p.qualified_name("a qualified microservice name")?;
            service.requires.push(dep);
        } else if *p.peek_tok() == Tok::At || matches!(p.peek_tok(), Tok::Ident(_) if *p.nth_tok(1) == Tok::LParen) {
            service.behaviour_bindings.push(parse_op_binding(p, defaults)?);
        } else if p.eat(Tok::RBrace) {
            break;
        } else {
            return Err(p.err("`interface`, `endpoint`, `requires`, a behaviour binding or `}`"));
        }
    }
    Ok(service)
}

fn parse_interface_lemma(p: &mut Parser) -> PResult<Interface> {
    p.expect_kw("interface")?;
    let (name, loc) = p.ident("an interface name")?;
    p.expect(Tok::LBrace, "`{`")?;
    let mut operations = Vec::new();
    while !p.eat(Tok::RBrace) {
        let oloc = p.loc_here();
        let (op_name, _) = p.ident("an operation name or `}`")?;
        p.expect(Tok::LParen, "`(`")?;
        let mut parameters = Vec::new();
        if !p.eat(Tok::RParen) {
            loop {
                parameters.push(parse_parameter(p)?);
                if p.eat(Tok::Comma) {
                    continue;
                }
                p.expect(Tok::RParen, "`,` or `)`")?;
                break;
            }
        }
        operations.push(OperationSig { name: op_name, shape: OperationShape::Params(parameters), loc: oloc });
    }
    Ok(Interface { name, operations, loc })
}

fn parse_parameter(p: &mut Parser) -> PResult<Parameter> {
    let (name, _) = p.ident("a parameter name")?;
    p.expect(Tok::Colon, "`:`")?;
    let (dir, dloc) = p.ident("`in` or `out`")?;
    let exchange = match dir.as_str() {
        "in" => crate::model::Exchange::Incoming,
        "out" => crate::model::Exchange::Outgoing,
        other => {
            return Err(Diagnostic::error(codes::PARSE_ERROR, format!("expected `in` or `out`, found `{other}`"), dloc))
        }
    };
    let (comm, cloc) = p.ident("`sync` or `async`")?;
    let communication = match comm.as_str() {
        "sync" => crate::model::Communication::Synchronous,
        "async" => crate::model::Communication::Asynchronous,
        other => {
            return Err(Diagnostic::error(codes::PARSE_ERROR, format!("expected `sync` or `async`, found `{other}`"), cloc))
        }
    };
    let ty = parse_type_ref(p)?;
    Ok(Parameter { name, exchange, communication, ty })
}

fn parse_endpoint(p: &mut Parser) -> PResult<Endpoint> {
    let loc = p.loc_here();
    p.expect_kw("endpoint")?;
    let (name, _) = p.ident("an endpoint name")?;
    p.expect(Tok::LBrace, "`{`")?;
    p.expect_kw("location")?;
    p.expect(Tok::Colon, "`:`")?;
    let location = p.string("a quoted URI")?;
    let (mut protocol, mut data_format) = (None, None);
    if p.at_kw("technology") {
        p.bump();
        p.expect(Tok::Colon, "`:`")?;
        let (tech, _) = p.ident("a technology model name")?;
        p.expect_kw("protocol")?;
        p.expect(Tok::Colon, "`:`")?;
        let (proto, _) = p.ident("a protocol name")?;
        protocol = Some(TechRef { technology: tech.clone(), name: proto });
        if p.at_kw("format") {
            p.bump();
            p.expect(Tok::Colon, "`:`")?;
            let (fmt, _) = p.ident("a data format name")?;
            data_format = Some(TechRef { technology: tech, name: fmt });
        }
    }
    p.expect_kw("interfaces")?;
    p.expect(Tok::Colon, "`:`")?;
    let mut interfaces = vec![p.ident("an interface name")?.0];
    while p.eat(Tok::Comma) {
        interfaces.push(p.ident("an interface name")?.0);
    }
    p.expect(Tok::RBrace, "`}`")?;
    Ok(Endpoint { name, location, protocol, data_format, interfaces, loc })
}

fn parse_technology(p: &mut Parser) -> PResult<TechnologyModel> {
    p.expect_kw("technology")?;
    let (name, loc) = p.ident("a technology model name")?;
    p.expect(Tok::LBrace, "`{`")?;
    p.expect_kw("protocols")?;
    p.expect(Tok::LBrace, "`{`")?;
    let mut protocols = Vec::new();
    if !p.eat(Tok::RBrace) {
        loop {
            let (pname, _) = p.ident("a protocol name")?;
            let default_format = if p.eat_kw("default") { Some(p.ident("a data format name")?.0) } else { None };
            protocols.push(ProtocolDef { name: pname, default_format });
            if p.eat(Tok::Comma) {
                continue;
            }
            p.expect(Tok::RBrace, "`,` or `}`")?;
            break;
        }
    }
    p.expect_kw("data")?;
    p.expect_kw("formats")?;
    p.expect(Tok::LBrace, "`{`")?;
    let mut data_formats = Vec::new();
    if !p.eat(Tok::RBrace) {
        loop {
            data_formats.push(p.ident("a data format name")?.0);
            if p.eat(Tok::Comma) {
                continue;
            }
            p.expect(Tok::RBrace, "`,` or `}`")?;
            break;
        }
    }
    p.expect(Tok::RBrace, "`}`")?;
    Ok(TechnologyModel { name, protocols, data_formats, loc })
}

fn parse_mapping(p: &mut Parser) -> PResult<MappingEntry> {
    let loc = p.loc_here();
    p.expect_kw("map")?;
    p.expect_kw("service")?;
    let (service, _) = p.qualified_name("a qualified microservice name")?;
    p.expect_kw("endpoint")?;
    let (endpoint, _) = p.ident("an endpoint name")?;
    p.expect(Tok::Arrow, "`->`")?;
    p.expect_kw("technology")?;
    let (technology, _) = p.ident("a technology model name")?;
    p.expect_kw("protocol")?;
    let (protocol, _) = p.ident("a protocol name")?;
    p.expect_kw("format")?;
    let (format, _) = p.ident("a data format name")?;
    Ok(MappingEntry { service, endpoint, technology, protocol, format, loc })
}
