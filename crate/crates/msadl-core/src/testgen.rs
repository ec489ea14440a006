//! Deterministic random model generation, seeded with xoshiro256**.
//!
//! Generated units are self-contained (no imports), resolve cleanly and
//! validate without errors. Round-trip and fuzz tests lean on this.

use crate::model::{
    BasicType, BehaviourBinding, BehaviourTerm, Cardinality, Communication, DddAnnotation, Endpoint, Exchange, Expr,
    Interface, JolieServiceModel, LemmaServiceModel, MappingEntry, NativeType, Node, Number, OperationShape,
    OperationSig, Parameter, Port, PortDirection, ProtocolDef, Refinement, ServiceKind, TechRef, TechnologyModel,
    TypeDecl, TypeExpr, TypeRef, View, JOLIE_BEHAVIOUR_LANGUAGE, JOLIE_TECHNOLOGY,
};
use crate::sim::rng::Xoshiro256StarStar;
use crate::surface::{Declaration, Import, ImportKind, SourceUnit};
use crate::value::Scalar;

pub struct ModelGen {
    rng: Xoshiro256StarStar,
    counter: u64,
}

impl ModelGen {
    pub fn new(seed: u64) -> Self {
        ModelGen { rng: Xoshiro256StarStar::from_seed(seed), counter: 0 }
    }

    fn fresh(&mut self, prefix: &str) -> String {
        self.counter += 1;
        format!("{prefix}{}", self.counter)
    }

    fn pick(&mut self, n: usize) -> usize {
        self.rng.pick(n)
    }

    fn chance(&mut self, percent: u64) -> bool {
        self.rng.next_u64() % 100 < percent
    }

    fn scalar_native(&mut self) -> NativeType {
        [NativeType::Bool, NativeType::Int, NativeType::Double, NativeType::String, NativeType::Char]
            [self.pick(5)]
    }

    fn refinement_for(&mut self, native: NativeType) -> Option<Refinement> {
        if !self.chance(40) {
            return None;
        }
        match native {
            NativeType::String => Some(match self.pick(3) {
                0 => {
                    let min = self.rng.next_u64() % 5;
                    Refinement::Length { min, max: min + self.rng.next_u64() % 5 }
                }
                1 => Refinement::Regex { pattern: ["[a-z]+", "a.c", "x*y?"][self.pick(3)].to_string() },
                _ => Refinement::EnumOf {
                    values: (0..1 + self.pick(3)).map(|i| format!("v{i}")).collect(),
                },
            }),
            NativeType::Int => {
                let lo = (self.rng.next_u64() % 100) as i64 - 50;
                Some(Refinement::Range { lo: Number::Int(lo), hi: Number::Int(lo + (self.rng.next_u64() % 100) as i64) })
            }
            NativeType::Double => {
                let lo = (self.rng.next_u64() % 1000) as f64 / 10.0;
                Some(Refinement::Range {
                    lo: Number::Double(lo),
                    hi: Number::Double(lo + (self.rng.next_u64() % 1000) as f64 / 10.0),
                })
            }
            _ => None,
        }
    }

    fn basic_type(&mut self) -> BasicType {
        let native = self.scalar_native();
        BasicType { native, refinement: self.refinement_for(native) }
    }

    fn cardinality(&mut self) -> Cardinality {
        match self.pick(5) {
            0 => Cardinality::new(0, Some(1)),
            1 => Cardinality::new(0, None),
            2 => {
                let min = self.rng.next_u64() % 3;
                Cardinality::new(min, Some(min + self.rng.next_u64() % 3))
            }
            _ => Cardinality::ONE,
        }
    }

    fn type_expr(&mut self, declared: &[String], depth: u32) -> TypeExpr {
        match self.pick(if depth == 0 { 4 } else { 3 }) {
            0 | 1 => TypeExpr::Basic(self.basic_type()),
            2 if !declared.is_empty() => TypeExpr::Named(declared[self.pick(declared.len())].clone()),
            2 => TypeExpr::Basic(self.basic_type()),
            _ => {
                let root = if self.chance(40) { self.basic_type() } else { BasicType::plain(NativeType::Void) };
                TypeExpr::Inline { root, nodes: self.nodes(declared, depth + 1) }
            }
        }
    }

    fn nodes(&mut self, declared: &[String], depth: u32) -> Vec<Node> {
        let count = if depth > 1 { self.pick(2) } else { 1 + self.pick(3) };
        (0..count)
            .map(|_| {
                let name = self.fresh("n");
                Node {
                    name,
                    cardinality: self.cardinality(),
                    ty: self.type_expr(declared, depth),
                    loc: Default::default(),
                }
            })
            .collect()
    }

    pub fn type_decl(&mut self, declared: &[String]) -> TypeDecl {
        let mut decl = TypeDecl::new(&self.fresh("Type"));
        if self.chance(30) {
            decl.root = self.basic_type();
        }
        decl.nodes = self.nodes(declared, 0);
        if self.chance(30) {
            decl.doc = Some(match self.pick(3) {
                0 => "Carries application data.".to_string(),
                1 => "Generated record.\nSecond line of prose.".to_string(),
                _ => "One-liner.".to_string(),
            });
        }
        // entity annotation over existing scalar-ish nodes
        if self.chance(25) {
            let scalar_nodes: Vec<&str> = decl
                .nodes
                .iter()
                .filter(|n| matches!(&n.ty, TypeExpr::Basic(_)) && n.cardinality == Cardinality::ONE)
                .map(|n| n.name.as_str())
                .collect();
            if !scalar_nodes.is_empty() {
                let take = 1 + self.pick(scalar_nodes.len().min(2));
                let fields: Vec<&str> = scalar_nodes.into_iter().take(take).collect();
                decl.annotations.push(DddAnnotation::entity(&fields));
            }
        }
        decl
    }

    fn type_ref(&mut self, declared: &[String]) -> TypeRef {
        if !declared.is_empty() && self.chance(60) {
            TypeRef::Named(declared[self.pick(declared.len())].clone())
        } else {
            TypeRef::Native([NativeType::Int, NativeType::String, NativeType::Bool, NativeType::Void][self.pick(4)])
        }
    }

    fn jolie_interface(&mut self, declared: &[String]) -> Interface {
        let name = self.fresh("Api");
        let ops = (0..1 + self.pick(3))
            .map(|_| {
                let op_name = self.fresh("op");
                let shape = if self.chance(50) {
                    OperationShape::OneWay { request: self.type_ref(declared) }
                } else {
                    OperationShape::RequestResponse {
                        request: self.type_ref(declared),
                        response: self.type_ref(declared),
                    }
                };
                OperationSig { name: op_name, shape, loc: Default::default() }
            })
            .collect();
        Interface { name, operations: ops, loc: Default::default() }
    }

    fn literal(&mut self) -> Expr {
        Expr::Lit(match self.pick(5) {
            0 => Scalar::Int((self.rng.next_u64() % 100) as i64),
            1 => Scalar::Str("payload".to_string()),
            2 => Scalar::Bool(true),
            3 => Scalar::Double((self.rng.next_u64() % 100) as f64 / 4.0),
            _ => Scalar::Unit,
        })
    }

    /// Invoke chain over an output port, response variables matching the
    /// operation paradigms.
    fn behaviour(&mut self, port: &Port, interfaces: &[&Interface]) -> BehaviourTerm {
        let ops: Vec<&OperationSig> = interfaces
            .iter()
            .filter(|i| port.interfaces.contains(&i.name))
            .flat_map(|i| i.operations.iter())
            .collect();
        if ops.is_empty() {
            return BehaviourTerm::Nil;
        }
        let mut term = BehaviourTerm::Nil;
        for _ in 0..1 + self.pick(3) {
            let op = ops[self.pick(ops.len())];
            let invoke = BehaviourTerm::Invoke {
                port: port.name.clone(),
                op: op.name.clone(),
                payload: self.literal(),
                response_var: op.is_request_response().then(|| self.fresh("r")),
            };
            term = match term {
                BehaviourTerm::Nil => invoke,
                t if self.chance(40) => BehaviourTerm::par(invoke, t),
                t => BehaviourTerm::seq(invoke, t),
            };
        }
        term
    }

    fn jolie_service(&mut self, interfaces: &[&Interface]) -> JolieServiceModel {
        let mut service = JolieServiceModel::new(&self.fresh("Service"));
        if interfaces.is_empty() {
            return service;
        }
        let port_count = 1 + self.pick(2);
        for p in 0..port_count {
            let interface = interfaces[self.pick(interfaces.len())];
            let direction = if p == 0 && self.chance(70) { PortDirection::Input } else { PortDirection::Output };
            service.ports.push(Port {
                name: self.fresh("port"),
                direction,
                location: {
                    let port_no = 1000 + self.pick(9000);
                    format!("socket://host{}:{port_no}", self.counter)
                },
                protocol: ["http", "sodep", "grpc"][self.pick(3)].to_string(),
                data_format: self.chance(60).then(|| ["json", "xml", "binary"][self.pick(3)].to_string()),
                interfaces: vec![interface.name.clone()],
                loc: Default::default(),
            });
        }
        if self.chance(60) {
            let output = service.ports.iter().find(|p| p.direction == PortDirection::Output).cloned();
            if let Some(port) = output {
                service.behaviour = Some(self.behaviour(&port, interfaces));
            }
        }
        service
    }

    fn lemma_interface(&mut self, declared: &[String]) -> Interface {
        let name = self.fresh("Facet");
        let ops = (0..1 + self.pick(3))
            .map(|_| {
                let op_name = self.fresh("op");
                let params = match self.pick(3) {
                    0 => vec![],
                    1 => vec![Parameter {
                        name: "request".into(),
                        exchange: Exchange::Incoming,
                        communication: Communication::Asynchronous,
                        ty: self.type_ref(declared),
                    }],
                    _ => vec![
                        Parameter {
                            name: "request".into(),
                            exchange: Exchange::Incoming,
                            communication: Communication::Synchronous,
                            ty: self.type_ref(declared),
                        },
                        Parameter {
                            name: "response".into(),
                            exchange: Exchange::Outgoing,
                            communication: Communication::Synchronous,
                            ty: self.type_ref(declared),
                        },
                    ],
                };
                OperationSig { name: op_name, shape: OperationShape::Params(params), loc: Default::default() }
            })
            .collect();
        Interface { name, operations: ops, loc: Default::default() }
    }

    fn technology(&mut self) -> TechnologyModel {
        let name = self.fresh("tech");
        let fmt = ["json", "xml", "binary"][self.pick(3)].to_string();
        TechnologyModel {
            name,
            protocols: vec![ProtocolDef { name: "http".into(), default_format: Some(fmt.clone()) }],
            data_formats: vec![fmt],
            loc: Default::default(),
        }
    }

    fn lemma_service(&mut self, declared: &[String], technologies: &[TechnologyModel]) -> (LemmaServiceModel, Vec<MappingEntry>) {
        let mut service = LemmaServiceModel::new(&format!("org.gen.{}", self.fresh("Micro")));
        service.kind = [ServiceKind::Functional, ServiceKind::Utility, ServiceKind::Infrastructure][self.pick(3)];
        let count = 1 + self.pick(2);
        for _ in 0..count {
            let interface = self.lemma_interface(declared);
            service.interfaces.push(interface);
        }
        let mut mappings = Vec::new();
        if self.chance(70) && !technologies.is_empty() {
            let tech = &technologies[self.pick(technologies.len())];
            let fmt = tech.data_formats[0].clone();
            let endpoint_name = self.fresh("ep");
            let direct = self.chance(50);
            service.endpoints.push(Endpoint {
                name: endpoint_name.clone(),
                location: {
                    let port_no = 1000 + self.pick(9000);
                    format!("socket://lemma{}:{port_no}", self.counter)
                },
                protocol: direct.then(|| TechRef { technology: tech.name.clone(), name: "http".into() }),
                data_format: direct.then(|| TechRef { technology: tech.name.clone(), name: fmt.clone() }),
                interfaces: vec![service.interfaces[0].name.clone()],
                loc: Default::default(),
            });
            if !direct {
                mappings.push(MappingEntry {
                    service: service.qualified_name.clone(),
                    endpoint: endpoint_name,
                    technology: tech.name.clone(),
                    protocol: "http".into(),
                    format: fmt,
                    loc: Default::default(),
                });
            }
        }
        if self.chance(40) {
            // source-level binding: aliases, resolved to paths by `resolve`
            service.behaviour_bindings.push(BehaviourBinding {
                operation: crate::model::MAIN_BINDING.into(),
                language: "jolie".into(),
                technology: "jolie_interpreter".into(),
                body: BehaviourTerm::Nil,
                loc: Default::default(),
            });
        }
        (service, mappings)
    }

    /// A self-contained unit of the given view.
    pub fn unit(&mut self, view: View, path: &str) -> SourceUnit {
        let mut unit = SourceUnit::new(path, view);
        let mut declared: Vec<String> = Vec::new();
        for _ in 0..1 + self.pick(3) {
            let decl = self.type_decl(&declared);
            declared.push(decl.name.clone());
            unit.declarations.push(Declaration::Type(decl));
        }
        match view {
            View::Jolie => {
                let mut interfaces = Vec::new();
                for _ in 0..1 + self.pick(2) {
                    interfaces.push(self.jolie_interface(&declared));
                }
                let refs: Vec<&Interface> = interfaces.iter().collect();
                let services: Vec<JolieServiceModel> =
                    (0..1 + self.pick(2)).map(|_| self.jolie_service(&refs)).collect();
                for i in interfaces.iter().cloned() {
                    unit.declarations.push(Declaration::Interface(i));
                }
                for s in services {
                    unit.declarations.push(Declaration::JolieService(s));
                }
            }
            View::Lemma => {
                let technologies: Vec<TechnologyModel> = (0..1 + self.pick(2)).map(|_| self.technology()).collect();
                for t in technologies.iter().cloned() {
                    unit.declarations.push(Declaration::Technology(t));
                }
                let mut all_mappings = Vec::new();
                let mut any_binding = false;
                for _ in 0..1 + self.pick(2) {
                    let (service, mappings) = self.lemma_service(&declared, &technologies);
                    any_binding |= !service.behaviour_bindings.is_empty();
                    unit.declarations.push(Declaration::LemmaService(service));
                    all_mappings.extend(mappings);
                }
                for m in all_mappings {
                    unit.declarations.push(Declaration::Mapping(m));
                }
                if any_binding {
                    unit.imports.push(Import {
                        kind: ImportKind::BehaviourLanguage,
                        path: JOLIE_BEHAVIOUR_LANGUAGE.into(),
                        alias: "jolie".into(),
                        loc: Default::default(),
                    });
                    unit.imports.push(Import {
                        kind: ImportKind::Technology,
                        path: JOLIE_TECHNOLOGY.into(),
                        alias: "jolie_interpreter".into(),
                        loc: Default::default(),
                    });
                    unit.imports.sort_by(|a, b| (&a.path, a.kind, &a.alias).cmp(&(&b.path, b.kind, &b.alias)));
                }
            }
        }
        unit
    }
}
