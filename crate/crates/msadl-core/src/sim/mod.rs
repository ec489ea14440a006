//! Deterministic small-step execution of workflow behaviours over a
//! simulated service network.
//!
//! Message delivery is reliable and FIFO per `(service, operation)` channel.
//! One-way invocations enqueue and continue; request-response invocations
//! suspend the whole calling instance until the reply is delivered. Guarded
//! replication spawns a fresh instance of its body per consumed message and
//! the guard persists. The scheduler draws uniformly from the canonically
//! ordered set of enabled actions with xoshiro256**, so a `(network, seed)`
//! pair reproduces its trace bit for bit on any platform.
//!
//! Consumption events: a plain receive emits `Deliver` for one-way messages
//! and `ProcessStart` for request-response messages; replication emits
//! `Spawn`. `Terminate` is the reaping of an instance that finished after
//! having acted; instances whose behaviour is `nil` from the start never
//! run and never appear in traces.

pub mod rng;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::check::check_value_ref;
use crate::diag::{codes, Diagnostic};
use crate::model::{BehaviourTerm, Expr, ModelSet, OperationShape, TypeRef};
use crate::value::ValueTree;
use rng::Xoshiro256StarStar;

pub type CallId = u64;
pub type InstanceId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Send,
    Deliver,
    ProcessStart,
    Reply,
    ReplyDelivered,
    Spawn,
    Terminate,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TraceEvent {
    pub step: u64,
    pub kind: EventKind,
    /// Service the event belongs to.
    pub subject: String,
    /// Instance within the service; 0 for events without a running instance.
    pub instance: InstanceId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub call_id: Option<CallId>,
}

pub type Trace = Vec<TraceEvent>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SimError {
    #[error("type error: {0}")]
    TypeError(String),
    #[error("invalid schedule: {0}")]
    ScheduleInvalid(String),
}

impl SimError {
    pub fn code(&self) -> &'static str {
        match self {
            SimError::TypeError(_) => codes::TYPE_ERROR,
            SimError::ScheduleInvalid(_) => codes::SCHEDULE_INVALID,
        }
    }
}

// ---------------------------------------------------------------------------
// Runtime terms
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum RtTerm {
    Nil,
    Invoke { port: String, op: String, payload: Expr, response_var: Option<String> },
    Receive { op: String, bind_var: String, body: Box<BehaviourTerm>, reply: Option<Expr> },
    Replicate { op: String, bind_var: String, body: Box<BehaviourTerm> },
    Seq(Box<RtTerm>, Box<RtTerm>),
    Par(Box<RtTerm>, Box<RtTerm>),
    /// Evaluate and route the reply of a request-response receive.
    EmitReply { call_id: CallId, expr: Expr },
    /// Suspension point of a request-response invocation.
    Await { call_id: CallId },
}

fn rt_of(term: &BehaviourTerm) -> RtTerm {
    match term {
        BehaviourTerm::Nil => RtTerm::Nil,
        BehaviourTerm::Invoke { port, op, payload, response_var } => RtTerm::Invoke {
            port: port.clone(),
            op: op.clone(),
            payload: payload.clone(),
            response_var: response_var.clone(),
        },
        BehaviourTerm::Receive { op, bind_var, body, reply } => RtTerm::Receive {
            op: op.clone(),
            bind_var: bind_var.clone(),
            body: body.clone(),
            reply: reply.clone(),
        },
        BehaviourTerm::GuardedReplication { op, bind_var, body } => {
            RtTerm::Replicate { op: op.clone(), bind_var: bind_var.clone(), body: body.clone() }
        }
        BehaviourTerm::Sequence { first, second } => RtTerm::Seq(Box::new(rt_of(first)), Box::new(rt_of(second))),
        BehaviourTerm::Parallel { left, right } => RtTerm::Par(Box::new(rt_of(left)), Box::new(rt_of(right))),
    }
}

/// Structural normalisation: completed prefixes and branches disappear.
fn normalize(term: RtTerm) -> RtTerm {
    match term {
        RtTerm::Seq(first, second) => {
            let first = normalize(*first);
            if first == RtTerm::Nil {
                normalize(*second)
            } else {
                RtTerm::Seq(Box::new(first), second)
            }
        }
        RtTerm::Par(left, right) => {
            let left = normalize(*left);
            let right = normalize(*right);
            match (left, right) {
                (RtTerm::Nil, r) => r,
                (l, RtTerm::Nil) => l,
                (l, r) => RtTerm::Par(Box::new(l), Box::new(r)),
            }
        }
        other => other,
    }
}

impl fmt::Display for RtTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RtTerm::Nil => write!(f, "nil"),
            RtTerm::Invoke { port, op, .. } => write!(f, "invoke {port}.{op}(..)"),
            RtTerm::Receive { op, .. } => write!(f, "receive {op}(..)"),
            RtTerm::Replicate { op, .. } => write!(f, "replicate {op}(..)"),
            RtTerm::Seq(a, b) => write!(f, "{a} ; {b}"),
            RtTerm::Par(a, b) => write!(f, "{{ {a} | {b} }}"),
            RtTerm::EmitReply { call_id, .. } => write!(f, "reply #{call_id}"),
            RtTerm::Await { call_id } => write!(f, "await #{call_id}"),
        }
    }
}

// ---------------------------------------------------------------------------
// Static network information
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct OpInfo {
    request_response: bool,
    request: TypeRef,
    response: Option<TypeRef>,
}

#[derive(Debug, Clone)]
struct ServiceInfo {
    name: String,
    /// Operations receivable through the service's input ports.
    ops: BTreeMap<String, OpInfo>,
    /// Output port name -> target service index.
    routes: BTreeMap<String, usize>,
}

#[derive(Debug)]
struct StaticNet {
    infos: Vec<ServiceInfo>,
    types: ModelSet,
}

// ---------------------------------------------------------------------------
// Dynamic state
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
struct Message {
    payload: ValueTree,
    call_id: Option<CallId>,
}

#[derive(Debug, Clone, PartialEq)]
struct Instance {
    id: InstanceId,
    term: RtTerm,
    store: BTreeMap<String, ValueTree>,
    blocked_on: Option<CallId>,
}

#[derive(Debug, Clone, PartialEq)]
struct PendingCall {
    caller_service: usize,
    caller_instance: InstanceId,
    response_var: Option<String>,
    operation: String,
}

/// Complete simulator configuration. Cloning a state forks the simulation,
/// which is how exhaustive interleaving enumeration explores branches.
#[derive(Clone)]
pub struct NetworkState {
    net: Arc<StaticNet>,
    instances: Vec<Vec<Instance>>,
    queues: BTreeMap<(usize, String), VecDeque<Message>>,
    pending_calls: BTreeMap<CallId, PendingCall>,
    ready_replies: BTreeMap<CallId, ValueTree>,
    clock: u64,
    rng: Xoshiro256StarStar,
    next_call_id: CallId,
    next_instance_id: InstanceId,
}

#[derive(Debug, Clone, PartialEq)]
enum Action {
    Fire { service: usize, slot: usize, path: Vec<u8> },
    Reap { service: usize, slot: usize },
    DeliverReply { call_id: CallId },
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepResult {
    Event(TraceEvent),
    Terminated,
    Stuck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StuckInstance {
    pub service: String,
    pub instance: InstanceId,
    pub term: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Outcome {
    Terminated,
    Stuck { remaining: Vec<StuckInstance> },
    MaxStepsExceeded,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub trace: Trace,
    pub outcome: Outcome,
    pub steps: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Schedule {
    Seed(u64),
    Explicit(Vec<usize>),
}

impl NetworkState {
    /// Build the initial state from the Jolie services of a resolved,
    /// validated model set. Every service participates (it may be the target
    /// of messages); only services with a behaviour get a root instance.
    pub fn build(set: &ModelSet, seed: u64) -> Result<NetworkState, Vec<Diagnostic>> {
        let mut diags = Vec::new();
        let services: Vec<_> = set.jolie_services.values().collect();
        let index_of_location = |location: &str| {
            services
                .iter()
                .position(|s| s.input_ports().any(|p| p.location == location))
        };

        let mut infos = Vec::with_capacity(services.len());
        for service in &services {
            let mut ops = BTreeMap::new();
            for port in service.input_ports() {
                for iname in &port.interfaces {
                    let Some(interface) = set.interfaces.get(iname) else { continue };
                    for op in &interface.operations {
                        let info = match &op.shape {
                            OperationShape::OneWay { request } => {
                                OpInfo { request_response: false, request: request.clone(), response: None }
                            }
                            OperationShape::RequestResponse { request, response } => OpInfo {
                                request_response: true,
                                request: request.clone(),
                                response: Some(response.clone()),
                            },
                            OperationShape::Params(_) => continue,
                        };
                        ops.insert(op.name.clone(), info);
                    }
                }
            }
            let mut routes = BTreeMap::new();
            for port in service.output_ports() {
                if let Some(target) = index_of_location(&port.location) {
                    routes.insert(port.name.clone(), target);
                }
            }
            infos.push(ServiceInfo { name: service.name.clone(), ops, routes });
        }

        // every port an existing behaviour invokes must route somewhere
        for (i, service) in services.iter().enumerate() {
            if let Some(behaviour) = &service.behaviour {
                let mut ports = BTreeSet::new();
                collect_invoked_ports(behaviour, &mut ports);
                for port in ports {
                    if !infos[i].routes.contains_key(port) {
                        diags.push(Diagnostic::error(
                            codes::REF_UNRESOLVED,
                            format!(
                                "output port `{port}` of service `{}` reaches no service in the network",
                                service.name
                            ),
                            service.loc.clone(),
                        ));
                    }
                }
            }
        }
        if !diags.is_empty() {
            return Err(diags);
        }

        let mut state = NetworkState {
            net: Arc::new(StaticNet { infos, types: set.clone() }),
            instances: vec![Vec::new(); services.len()],
            queues: BTreeMap::new(),
            pending_calls: BTreeMap::new(),
            ready_replies: BTreeMap::new(),
            clock: 0,
            rng: Xoshiro256StarStar::from_seed(seed),
            next_call_id: 1,
            next_instance_id: 1,
        };
        for (i, service) in services.iter().enumerate() {
            if let Some(behaviour) = &service.behaviour {
                let term = normalize(rt_of(behaviour));
                if term != RtTerm::Nil {
                    let id = state.next_instance_id;
                    state.next_instance_id += 1;
                    state.instances[i].push(Instance { id, term, store: BTreeMap::new(), blocked_on: None });
                }
            }
        }
        Ok(state)
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    fn no_instances(&self) -> bool {
        self.instances.iter().all(Vec::is_empty)
    }

    /// Live guarded-replication guards, as `(service, operation)` pairs.
    pub fn live_replication_guards(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (i, instances) in self.instances.iter().enumerate() {
            for instance in instances {
                let mut guards = Vec::new();
                collect_guards(&instance.term, &mut guards);
                for op in guards {
                    out.push((self.net.infos[i].name.clone(), op));
                }
            }
        }
        out
    }

    pub fn remaining(&self) -> Vec<StuckInstance> {
        let mut out = Vec::new();
        for (i, instances) in self.instances.iter().enumerate() {
            for instance in instances {
                out.push(StuckInstance {
                    service: self.net.infos[i].name.clone(),
                    instance: instance.id,
                    term: instance.term.to_string(),
                });
            }
        }
        out
    }

    /// Undelivered message counts per `(service, operation)` channel.
    pub fn queued_messages(&self) -> Vec<(String, String, usize)> {
        self.queues
            .iter()
            .filter(|(_, q)| !q.is_empty())
            .map(|((svc, op), q)| (self.net.infos[*svc].name.clone(), op.clone(), q.len()))
            .collect()
    }

    // -- enabled actions in canonical order ---------------------------------

    fn enabled_actions(&self) -> Vec<Action> {
        let mut actions = Vec::new();
        for (service, instances) in self.instances.iter().enumerate() {
            for (slot, instance) in instances.iter().enumerate() {
                if instance.blocked_on.is_some() {
                    continue;
                }
                if instance.term == RtTerm::Nil {
                    actions.push(Action::Reap { service, slot });
                    continue;
                }
                let mut atoms = Vec::new();
                collect_atoms(&instance.term, &mut Vec::new(), &mut atoms);
                for (path, atom) in atoms {
                    if self.atom_enabled(service, atom) {
                        actions.push(Action::Fire { service, slot, path });
                    }
                }
            }
        }
        for call_id in self.ready_replies.keys() {
            actions.push(Action::DeliverReply { call_id: *call_id });
        }
        actions
    }

    fn atom_enabled(&self, service: usize, atom: &RtTerm) -> bool {
        match atom {
            RtTerm::Invoke { .. } | RtTerm::EmitReply { .. } => true,
            RtTerm::Receive { op, .. } | RtTerm::Replicate { op, .. } => self
                .queues
                .get(&(service, op.clone()))
                .is_some_and(|q| !q.is_empty()),
            _ => false,
        }
    }

    pub fn enabled_action_count(&self) -> usize {
        self.enabled_actions().len()
    }

    // -- stepping ------------------------------------------------------------

    /// One small step under the seeded scheduler.
    pub fn step(&mut self) -> Result<StepResult, SimError> {
        let actions = self.enabled_actions();
        if actions.is_empty() {
            return Ok(if self.no_instances() { StepResult::Terminated } else { StepResult::Stuck });
        }
        let choice = self.rng.pick(actions.len());
        Ok(StepResult::Event(self.fire(&actions[choice])?))
    }

    /// One small step taking the `choice`-th enabled action.
    pub fn step_with_choice(&mut self, choice: usize) -> Result<StepResult, SimError> {
        let actions = self.enabled_actions();
        if actions.is_empty() {
            return Ok(if self.no_instances() { StepResult::Terminated } else { StepResult::Stuck });
        }
        if choice >= actions.len() {
            return Err(SimError::ScheduleInvalid(format!(
                "schedule entry {choice} out of range (0..{})",
                actions.len()
            )));
        }
        Ok(StepResult::Event(self.fire(&actions[choice])?))
    }

    fn emit(&mut self, kind: EventKind, service: usize, instance: InstanceId, operation: Option<String>, call_id: Option<CallId>) -> TraceEvent {
        let event = TraceEvent {
            step: self.clock,
            kind,
            subject: self.net.infos[service].name.clone(),
            instance,
            operation,
            call_id,
        };
        self.clock += 1;
        event
    }

    fn fire(&mut self, action: &Action) -> Result<TraceEvent, SimError> {
        match action {
            Action::Reap { service, slot } => {
                let instance = self.instances[*service].remove(*slot);
                Ok(self.emit(EventKind::Terminate, *service, instance.id, None, None))
            }
            Action::DeliverReply { call_id } => {
                let value = self.ready_replies.remove(call_id).expect("reply present");
                let pending = self.pending_calls.remove(call_id).expect("pending call present");
                let service = pending.caller_service;
                let instance = self.instances[service]
                    .iter_mut()
                    .find(|i| i.id == pending.caller_instance)
                    .expect("caller instance present");
                if let Some(var) = &pending.response_var {
                    instance.store.insert(var.clone(), value);
                }
                instance.blocked_on = None;
                let path = await_path(&instance.term, *call_id);
                replace_atom(&mut instance.term, &path, RtTerm::Nil);
                instance.term = normalize(std::mem::replace(&mut instance.term, RtTerm::Nil));
                let id = instance.id;
                Ok(self.emit(EventKind::ReplyDelivered, service, id, Some(pending.operation), Some(*call_id)))
            }
            Action::Fire { service, slot, path } => self.fire_atom(*service, *slot, path),
        }
    }

    fn fire_atom(&mut self, service: usize, slot: usize, path: &[u8]) -> Result<TraceEvent, SimError> {
        let atom = atom_at(&self.instances[service][slot].term, path).clone();
        match atom {
            RtTerm::Invoke { port, op, payload, response_var } => {
                let target = *self.net.infos[service].routes.get(&port).ok_or_else(|| {
                    SimError::TypeError(format!("output port `{port}` routes to no service"))
                })?;
                let info = self.net.infos[target].ops.get(&op).cloned().ok_or_else(|| {
                    SimError::TypeError(format!("operation `{op}` is not receivable at the target of port `{port}`"))
                })?;
                let value = eval_expr(&payload, &self.instances[service][slot].store)?;
                let report = check_value_ref(&value, &info.request, &self.net.types);
                if !report.ok {
                    return Err(SimError::TypeError(format!(
                        "payload of `{op}` does not satisfy its request type: {}",
                        report.violations[0].detail
                    )));
                }
                let (call_id, instance_id) = {
                    let instance = &mut self.instances[service][slot];
                    if info.request_response {
                        let call_id = self.next_call_id;
                        self.next_call_id += 1;
                        instance.blocked_on = Some(call_id);
                        replace_atom(&mut instance.term, path, RtTerm::Await { call_id });
                        (Some(call_id), instance.id)
                    } else {
                        replace_atom(&mut instance.term, path, RtTerm::Nil);
                        instance.term = normalize(std::mem::replace(&mut instance.term, RtTerm::Nil));
                        (None, instance.id)
                    }
                };
                if let Some(call_id) = call_id {
                    self.pending_calls.insert(
                        call_id,
                        PendingCall {
                            caller_service: service,
                            caller_instance: instance_id,
                            response_var,
                            operation: op.clone(),
                        },
                    );
                }
                self.queues
                    .entry((target, op.clone()))
                    .or_default()
                    .push_back(Message { payload: value, call_id });
                Ok(self.emit(EventKind::Send, service, instance_id, Some(op), call_id))
            }
            RtTerm::Receive { op, bind_var, body, reply } => {
                let message = self
                    .queues
                    .get_mut(&(service, op.clone()))
                    .and_then(VecDeque::pop_front)
                    .expect("enabled receive has a message");
                let instance = &mut self.instances[service][slot];
                instance.store.insert(bind_var, message.payload);
                let continuation = match (&reply, message.call_id) {
                    (Some(expr), Some(call_id)) => RtTerm::Seq(
                        Box::new(rt_of(&body)),
                        Box::new(RtTerm::EmitReply { call_id, expr: expr.clone() }),
                    ),
                    _ => rt_of(&body),
                };
                replace_atom(&mut instance.term, path, continuation);
                instance.term = normalize(std::mem::replace(&mut instance.term, RtTerm::Nil));
                let id = instance.id;
                let (kind, call_id) = match message.call_id {
                    Some(cid) => (EventKind::ProcessStart, Some(cid)),
                    None => (EventKind::Deliver, None),
                };
                Ok(self.emit(kind, service, id, Some(op), call_id))
            }
            RtTerm::Replicate { op, bind_var, body } => {
                let message = self
                    .queues
                    .get_mut(&(service, op.clone()))
                    .and_then(VecDeque::pop_front)
                    .expect("enabled replication has a message");
                let term = normalize(rt_of(&body));
                if term != RtTerm::Nil {
                    let id = self.next_instance_id;
                    self.next_instance_id += 1;
                    let mut store = BTreeMap::new();
                    store.insert(bind_var, message.payload);
                    self.instances[service].push(Instance { id, term, store, blocked_on: None });
                }
                let guard_id = self.instances[service][slot].id;
                Ok(self.emit(EventKind::Spawn, service, guard_id, Some(op), message.call_id))
            }
            RtTerm::EmitReply { call_id, expr } => {
                let pending = self.pending_calls.get(&call_id).expect("pending call for reply");
                let operation = pending.operation.clone();
                let value = eval_expr(&expr, &self.instances[service][slot].store)?;
                if let Some(info) = self.net.infos[service].ops.get(&operation) {
                    if let Some(response) = &info.response {
                        let report = check_value_ref(&value, response, &self.net.types);
                        if !report.ok {
                            return Err(SimError::TypeError(format!(
                                "reply of `{operation}` does not satisfy its response type: {}",
                                report.violations[0].detail
                            )));
                        }
                    }
                }
                self.ready_replies.insert(call_id, value);
                let instance = &mut self.instances[service][slot];
                replace_atom(&mut instance.term, path, RtTerm::Nil);
                instance.term = normalize(std::mem::replace(&mut instance.term, RtTerm::Nil));
                let id = instance.id;
                Ok(self.emit(EventKind::Reply, service, id, Some(operation), Some(call_id)))
            }
            other => unreachable!("not an atom: {other}"),
        }
    }
}

// ---------------------------------------------------------------------------
// Term walking helpers
// ---------------------------------------------------------------------------

fn collect_atoms<'a>(term: &'a RtTerm, path: &mut Vec<u8>, out: &mut Vec<(Vec<u8>, &'a RtTerm)>) {
    match term {
        RtTerm::Nil | RtTerm::Await { .. } => {}
        RtTerm::Seq(first, _) => {
            path.push(0);
            collect_atoms(first, path, out);
            path.pop();
        }
        RtTerm::Par(left, right) => {
            path.push(0);
            collect_atoms(left, path, out);
            path.pop();
            path.push(1);
            collect_atoms(right, path, out);
            path.pop();
        }
        atom => out.push((path.clone(), atom)),
    }
}

fn atom_at<'a>(term: &'a RtTerm, path: &[u8]) -> &'a RtTerm {
    match (term, path.split_first()) {
        (t, None) => t,
        (RtTerm::Seq(first, _), Some((0, rest))) => atom_at(first, rest),
        (RtTerm::Par(left, _), Some((0, rest))) => atom_at(left, rest),
        (RtTerm::Par(_, right), Some((1, rest))) => atom_at(right, rest),
        _ => unreachable!("invalid term path"),
    }
}

fn replace_atom(term: &mut RtTerm, path: &[u8], replacement: RtTerm) {
    match (term, path.split_first()) {
        (slot, None) => *slot = replacement,
        (RtTerm::Seq(first, _), Some((0, rest))) => replace_atom(first, rest, replacement),
        (RtTerm::Par(left, _), Some((0, rest))) => replace_atom(left, rest, replacement),
        (RtTerm::Par(_, right), Some((1, rest))) => replace_atom(right, rest, replacement),
        _ => unreachable!("invalid term path"),
    }
}

fn await_path(term: &RtTerm, call_id: CallId) -> Vec<u8> {
    fn walk(term: &RtTerm, call_id: CallId, path: &mut Vec<u8>) -> bool {
        match term {
            RtTerm::Await { call_id: c } if *c == call_id => true,
            RtTerm::Seq(first, _) => {
                path.push(0);
                if walk(first, call_id, path) {
                    return true;
                }
                path.pop();
                false
            }
            RtTerm::Par(left, right) => {
                path.push(0);
                if walk(left, call_id, path) {
                    return true;
                }
                path.pop();
                path.push(1);
                if walk(right, call_id, path) {
                    return true;
                }
                path.pop();
                false
            }
            _ => false,
        }
    }
    let mut path = Vec::new();
    assert!(walk(term, call_id, &mut path), "await point for call {call_id} present");
    path
}

fn collect_guards(term: &RtTerm, out: &mut Vec<String>) {
    match term {
        RtTerm::Replicate { op, .. } => out.push(op.clone()),
        RtTerm::Seq(a, b) | RtTerm::Par(a, b) => {
            collect_guards(a, out);
            collect_guards(b, out);
        }
        _ => {}
    }
}

fn collect_invoked_ports<'a>(term: &'a BehaviourTerm, out: &mut BTreeSet<&'a str>) {
    match term {
        BehaviourTerm::Invoke { port, .. } => {
            out.insert(port);
        }
        BehaviourTerm::Sequence { first, second } => {
            collect_invoked_ports(first, out);
            collect_invoked_ports(second, out);
        }
        BehaviourTerm::Parallel { left, right } => {
            collect_invoked_ports(left, out);
            collect_invoked_ports(right, out);
        }
        BehaviourTerm::Receive { body, .. } | BehaviourTerm::GuardedReplication { body, .. } => {
            collect_invoked_ports(body, out);
        }
        BehaviourTerm::Nil => {}
    }
}

fn eval_expr(expr: &Expr, store: &BTreeMap<String, ValueTree>) -> Result<ValueTree, SimError> {
    match expr {
        Expr::Lit(scalar) => Ok(ValueTree::leaf(scalar.clone())),
        Expr::Path { var, fields } => {
            let mut value = store
                .get(var)
                .ok_or_else(|| SimError::TypeError(format!("variable `{var}` is unbound")))?;
            for field in fields {
                value = value
                    .child(field)
                    .ok_or_else(|| SimError::TypeError(format!("`{var}` has no field `{field}`")))?;
            }
            Ok(value.clone())
        }
    }
}

// ---------------------------------------------------------------------------
// Runs and exhaustive enumeration
// ---------------------------------------------------------------------------

/// Run a network to completion, deadlock or the step bound.
pub fn run(set: &ModelSet, schedule: Schedule, max_steps: u64) -> Result<RunResult, Vec<Diagnostic>> {
    let seed = match &schedule {
        Schedule::Seed(seed) => *seed,
        Schedule::Explicit(_) => 0,
    };
    let mut state = NetworkState::build(set, seed)?;
    run_state(&mut state, schedule, max_steps).map_err(|e| {
        vec![Diagnostic::error(e.code(), e.to_string(), Default::default())]
    })
}

pub fn run_state(state: &mut NetworkState, schedule: Schedule, max_steps: u64) -> Result<RunResult, SimError> {
    let mut trace = Vec::new();
    let explicit = match schedule {
        Schedule::Explicit(choices) => Some(choices),
        Schedule::Seed(_) => None,
    };
    let mut steps = 0;
    while steps < max_steps {
        let result = match &explicit {
            None => state.step()?,
            Some(choices) => match choices.get(steps as usize) {
                Some(&choice) => state.step_with_choice(choice)?,
                None => {
                    if state.enabled_action_count() == 0 {
                        match state.step()? {
                            StepResult::Event(_) => unreachable!("no enabled actions"),
                            terminal => terminal,
                        }
                    } else {
                        return Err(SimError::ScheduleInvalid(format!(
                            "schedule exhausted after {steps} steps with actions still enabled"
                        )));
                    }
                }
            },
        };
        match result {
            StepResult::Event(event) => {
                trace.push(event);
                steps += 1;
            }
            StepResult::Terminated => {
                return Ok(RunResult { trace, outcome: Outcome::Terminated, steps });
            }
            StepResult::Stuck => {
                return Ok(RunResult { trace, outcome: Outcome::Stuck { remaining: state.remaining() }, steps });
            }
        }
    }
    // distinguish hitting the bound from natural termination
    if state.enabled_action_count() == 0 {
        let outcome = if state.no_instances() {
            Outcome::Terminated
        } else {
            Outcome::Stuck { remaining: state.remaining() }
        };
        return Ok(RunResult { trace, outcome, steps });
    }
    Ok(RunResult { trace, outcome: Outcome::MaxStepsExceeded, steps })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("exhaustive enumeration exceeded depth {max_depth}")]
pub struct DepthExceeded {
    pub max_depth: u64,
}

/// Exhaustive DFS over scheduler choices: the set of all maximal traces up
/// to `max_depth`. The test oracle for the seeded scheduler.
pub fn enumerate_interleavings(set: &ModelSet, max_depth: u64) -> Result<BTreeSet<Trace>, Vec<Diagnostic>> {
    let state = NetworkState::build(set, 0)?;
    enumerate_from(&state, max_depth).map_err(|e| {
        vec![Diagnostic::error(codes::DEPTH_EXCEEDED, e.to_string(), Default::default())]
    })
}

pub fn enumerate_from(state: &NetworkState, max_depth: u64) -> Result<BTreeSet<Trace>, DepthExceeded> {
    let mut out = BTreeSet::new();
    let mut trace = Vec::new();
    dfs(state, &mut trace, max_depth, max_depth, &mut out)?;
    Ok(out)
}

fn dfs(
    state: &NetworkState,
    trace: &mut Trace,
    depth_left: u64,
    max_depth: u64,
    out: &mut BTreeSet<Trace>,
) -> Result<(), DepthExceeded> {
    let count = state.enabled_actions().len();
    if count == 0 {
        out.insert(trace.clone());
        return Ok(());
    }
    if depth_left == 0 {
        return Err(DepthExceeded { max_depth });
    }
    for choice in 0..count {
        let mut branch = state.clone();
        match branch.step_with_choice(choice) {
            Ok(StepResult::Event(event)) => {
                trace.push(event);
                dfs(&branch, trace, depth_left - 1, max_depth, out)?;
                trace.pop();
            }
            Ok(_) => unreachable!("enabled actions exist"),
            Err(_) => {
                // a faulty branch (type error) is not a maximal trace
            }
        }
    }
    Ok(())
}
