//! `msadl` — batch CLI over the modeling toolkit: validate, transform,
//! check values, register entities, simulate behaviours, generate docs
//! and format model files.
//!
//! Exit codes: 0 success, 1 diagnostics with errors / entity conflict /
//! deadlock, 2 usage or I/O errors. Output is byte-deterministic for
//! identical inputs and flags.

mod docsgen;
mod io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use msadl_core::ddd::{EntityRegistry, RegisterError, RegisterOutcome};
use msadl_core::diag::{codes, finish, has_errors, Diagnostic, Severity};
use msadl_core::model::{ModelSet, View};
use msadl_core::sim::{run_state, NetworkState, Outcome, Schedule, TraceEvent};
use msadl_core::surface::{unit_from_model_set, SourceUnit};
use msadl_core::transform::{model_set_to_jolie, model_set_to_lemma, LossReport};
use msadl_core::value::ValueTree;
use msadl_core::{resolve, validate_model_set};

const EXIT_OK: u8 = 0;
const EXIT_DIAGNOSTICS: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "msadl", version, about = "Microservice architecture modeling toolkit")]
struct Cli {
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ViewArg {
    Jolie,
    Lemma,
}

impl From<ViewArg> for View {
    fn from(v: ViewArg) -> View {
        match v {
            ViewArg::Jolie => View::Jolie,
            ViewArg::Lemma => View::Lemma,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse, resolve and validate model files.
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Translate a model between the two views.
    Transform {
        #[arg(long, value_enum)]
        to: ViewArg,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        output: PathBuf,
        /// Write the loss report as JSON to this file.
        #[arg(long)]
        loss_report: Option<PathBuf>,
    },
    /// Check a JSON value tree against a declared type.
    CheckValue {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "type")]
        type_name: String,
        /// Value tree as inline JSON: {"$": ..., "children": {...}}.
        #[arg(long)]
        value: String,
    },
    /// DDD entity operations over a persistent registry.
    Entity {
        #[command(subcommand)]
        command: EntityCommand,
    },
    /// Execute behaviours in the simulated network.
    Simulate {
        #[arg(long = "model", required = true, num_args = 1..)]
        models: Vec<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        max_steps: u64,
        /// Write the trace as JSON lines to this file instead of stdout.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// JSON array of action indices replacing the seeded scheduler.
        #[arg(long)]
        explicit_schedule: Option<PathBuf>,
    },
    /// Generate documentation pages and behaviour-stub skeletons.
    Docs {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rewrite model files in canonical form.
    Fmt {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct EntityArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long = "type")]
    type_name: String,
    #[arg(long)]
    registry: Option<PathBuf>,
    /// Hex-encoded salt for privacy-preserving signatures.
    #[arg(long)]
    salt: Option<String>,
    #[arg(long)]
    value: String,
    #[arg(long)]
    value2: Option<String>,
}

#[derive(Subcommand)]
enum EntityCommand {
    /// Register an entity value, enforcing the identity constraint.
    Register(EntityArgs),
    /// Identity-based equality of two values.
    AssertEquals(EntityArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let printer = Printer { json: cli.json, color: std::env::var("MSADL_COLOR").as_deref() == Ok("1") };
    ExitCode::from(dispatch(cli.command, &printer))
}

struct Printer {
    json: bool,
    color: bool,
}

impl Printer {
    fn diagnostics(&self, diags: &[Diagnostic]) {
        if self.json {
            return; // carried in the JSON envelope instead
        }
        for d in diags {
            if self.color {
                let colour = match d.severity {
                    Severity::Error => "\x1b[31m",
                    Severity::Warning => "\x1b[33m",
                    Severity::Info => "\x1b[36m",
                };
                println!("{colour}{}\x1b[0m[{}] {}: {}", d.severity, d.code, d.location, d.message);
            } else {
                println!("{d}");
            }
        }
    }

    fn envelope(&self, command: &str, diags: &[Diagnostic], extra: serde_json::Value) {
        if !self.json {
            return;
        }
        let mut body = json!({ "command": command, "diagnostics": diags });
        if let (Some(obj), Some(more)) = (body.as_object_mut(), extra.as_object()) {
            for (k, v) in more {
                obj.insert(k.clone(), v.clone());
            }
        }
        println!("{}", serde_json::to_string_pretty(&body).expect("envelope serialises"));
    }
}

fn usage_error(message: &str) -> u8 {
    eprintln!("error: {message}");
    EXIT_USAGE
}

/// Load, resolve and validate a list of files. Diagnostics from all stages
/// are merged and sorted.
fn load_models(files: &[PathBuf]) -> (Vec<SourceUnit>, ModelSet, Vec<Diagnostic>) {
    let mut units = Vec::new();
    let mut diags = Vec::new();
    for path in files {
        match io::load_unit(path) {
            Ok(unit) => units.push(unit),
            Err(mut ds) => diags.append(&mut ds),
        }
    }
    let (set, mut resolve_diags) = resolve(&units);
    diags.append(&mut resolve_diags);
    diags.extend(validate_model_set(&set));
    (units, set, finish(diags))
}

fn dispatch(command: Command, printer: &Printer) -> u8 {
    match command {
        Command::Validate { files } => cmd_validate(&files, printer),
        Command::Transform { to, input, output, loss_report } => {
            cmd_transform(to.into(), &input, &output, loss_report.as_deref(), printer)
        }
        Command::CheckValue { model, type_name, value } => cmd_check_value(&model, &type_name, &value, printer),
        Command::Entity { command } => match command {
            EntityCommand::Register(args) => cmd_entity_register(&args, printer),
            EntityCommand::AssertEquals(args) => cmd_entity_assert_equals(&args, printer),
        },
        Command::Simulate { models, seed, max_steps, trace, explicit_schedule } => {
            cmd_simulate(&models, seed, max_steps, trace.as_deref(), explicit_schedule.as_deref(), printer)
        }
        Command::Docs { model, out } => cmd_docs(&model, &out, printer),
        Command::Fmt { files } => cmd_fmt(&files, printer),
    }
}

fn cmd_validate(files: &[PathBuf], printer: &Printer) -> u8 {
    let (_, _, diags) = load_models(files);
    printer.diagnostics(&diags);
    printer.envelope("validate", &diags, json!({}));
    if has_errors(&diags) {
        EXIT_DIAGNOSTICS
    } else {
        EXIT_OK
    }
}

fn cmd_transform(to: View, input: &Path, output: &Path, loss_report: Option<&Path>, printer: &Printer) -> u8 {
    let (_, set, diags) = load_models(std::slice::from_ref(&input.to_path_buf()));
    if has_errors(&diags) {
        printer.diagnostics(&diags);
        printer.envelope("transform", &diags, json!({}));
        return EXIT_DIAGNOSTICS;
    }

    let (out_set, report, mut diags): (ModelSet, LossReport, Vec<Diagnostic>) = match to {
        View::Lemma => {
            let (out_set, report) = model_set_to_lemma(&set);
            (out_set, report, diags)
        }
        View::Jolie => {
            let (out_set, report, transform_diags) = model_set_to_jolie(&set);
            let mut all = diags;
            all.extend(transform_diags);
            (out_set, report, finish(all))
        }
    };
    diags = finish(std::mem::take(&mut diags));

    let unit = unit_from_model_set(&out_set, to, &output.display().to_string());
    if let Err(e) = io::write_unit(&unit, output) {
        return usage_error(&e);
    }
    if let Some(path) = loss_report {
        if let Err(e) = std::fs::write(path, report.to_json_string()) {
            return usage_error(&format!("cannot write {}: {e}", path.display()));
        }
    }

    printer.diagnostics(&diags);
    if !printer.json {
        print!("{}", report.render_table());
    }
    printer.envelope("transform", &diags, json!({ "lossReport": report, "output": output.display().to_string() }));
    if has_errors(&diags) {
        EXIT_DIAGNOSTICS
    } else {
        EXIT_OK
    }
}

fn cmd_check_value(model: &Path, type_name: &str, value: &str, printer: &Printer) -> u8 {
    let (_, set, diags) = load_models(std::slice::from_ref(&model.to_path_buf()));
    if has_errors(&diags) {
        printer.diagnostics(&diags);
        printer.envelope("check-value", &diags, json!({}));
        return EXIT_DIAGNOSTICS;
    }
    let parsed: serde_json::Value = match serde_json::from_str(value) {
        Ok(v) => v,
        Err(e) => return usage_error(&format!("--value is not valid JSON: {e}")),
    };
    let tree = match ValueTree::from_json(&parsed) {
        Ok(t) => t,
        Err(e) => return usage_error(&format!("--value is not a value tree: {e}")),
    };
    let Some(decl) = set.types.get(type_name) else {
        let d = Diagnostic::error(codes::REF_UNRESOLVED, format!("type `{type_name}` is not declared"), Default::default());
        printer.diagnostics(std::slice::from_ref(&d));
        printer.envelope("check-value", std::slice::from_ref(&d), json!({}));
        return EXIT_DIAGNOSTICS;
    };
    let report = msadl_core::check_value(&tree, decl, &set);
    if !printer.json {
        for v in &report.violations {
            println!("{:?} at `{}`: {}", v.rule, v.path, v.detail);
        }
    }
    printer.envelope("check-value", &[], json!({ "report": report }));
    if report.ok {
        EXIT_OK
    } else {
        EXIT_DIAGNOSTICS
    }
}

fn parse_value_arg(text: &str) -> Result<ValueTree, String> {
    let parsed: serde_json::Value = serde_json::from_str(text).map_err(|e| format!("not valid JSON: {e}"))?;
    ValueTree::from_json(&parsed)
}

fn cmd_entity_register(args: &EntityArgs, printer: &Printer) -> u8 {
    let Some(registry_path) = &args.registry else {
        return usage_error("entity register requires --registry");
    };
    let Some(salt_hex) = &args.salt else {
        return usage_error("entity register requires --salt");
    };
    let salt = match hex::decode(salt_hex) {
        Ok(s) => s,
        Err(_) => return usage_error("--salt must be hex-encoded bytes"),
    };
    let value = match parse_value_arg(&args.value) {
        Ok(v) => v,
        Err(e) => return usage_error(&format!("--value: {e}")),
    };

    let (_, set, diags) = load_models(std::slice::from_ref(&args.model));
    if has_errors(&diags) {
        printer.diagnostics(&diags);
        printer.envelope("entity-register", &diags, json!({}));
        return EXIT_DIAGNOSTICS;
    }
    let Some(decl) = set.types.get(&args.type_name) else {
        return type_not_found(&args.type_name, "entity-register", printer);
    };

    let mut registry = if registry_path.exists() {
        let text = match std::fs::read_to_string(registry_path) {
            Ok(t) => t,
            Err(e) => return usage_error(&format!("cannot read {}: {e}", registry_path.display())),
        };
        match EntityRegistry::from_json_str(&text) {
            Ok(r) => r,
            Err(e) => return usage_error(&format!("{} is not a registry: {e}", registry_path.display())),
        }
    } else {
        EntityRegistry::new(&salt)
    };

    match registry.register(&value, decl, &set, &salt) {
        Ok(outcome) => {
            if let Err(e) = std::fs::write(registry_path, registry.to_json_string()) {
                return usage_error(&format!("cannot write {}: {e}", registry_path.display()));
            }
            let word = match outcome {
                RegisterOutcome::Inserted => "registered",
                RegisterOutcome::AlreadyRegistered => "already registered",
            };
            if !printer.json {
                println!("{word}");
            }
            printer.envelope("entity-register", &[], json!({ "outcome": word, "entries": registry.len() }));
            EXIT_OK
        }
        Err(err) => {
            let code = match &err {
                RegisterError::Conflict(_) => codes::DDD_CONFLICT,
                RegisterError::Ddd(e) => e.code(),
                RegisterError::SaltMismatch { .. } => codes::SALT_MISMATCH,
                RegisterError::InvalidValue(_) => codes::TYPE_ERROR,
            };
            let d = Diagnostic::error(code, err.to_string(), Default::default());
            if !printer.json {
                if matches!(err, RegisterError::Conflict(_)) {
                    println!("Conflict: {err}");
                } else {
                    printer.diagnostics(std::slice::from_ref(&d));
                }
            }
            printer.envelope("entity-register", std::slice::from_ref(&d), json!({}));
            EXIT_DIAGNOSTICS
        }
    }
}

fn type_not_found(type_name: &str, command: &str, printer: &Printer) -> u8 {
    let d = Diagnostic::error(codes::REF_UNRESOLVED, format!("type `{type_name}` is not declared"), Default::default());
    printer.diagnostics(std::slice::from_ref(&d));
    printer.envelope(command, std::slice::from_ref(&d), json!({}));
    EXIT_DIAGNOSTICS
}

fn cmd_entity_assert_equals(args: &EntityArgs, printer: &Printer) -> u8 {
    let Some(value2_text) = &args.value2 else {
        return usage_error("entity assert-equals requires --value2");
    };
    let a = match parse_value_arg(&args.value) {
        Ok(v) => v,
        Err(e) => return usage_error(&format!("--value: {e}")),
    };
    let b = match parse_value_arg(value2_text) {
        Ok(v) => v,
        Err(e) => return usage_error(&format!("--value2: {e}")),
    };
    let (_, set, diags) = load_models(std::slice::from_ref(&args.model));
    if has_errors(&diags) {
        printer.diagnostics(&diags);
        printer.envelope("entity-assert-equals", &diags, json!({}));
        return EXIT_DIAGNOSTICS;
    }
    let Some(decl) = set.types.get(&args.type_name) else {
        return type_not_found(&args.type_name, "entity-assert-equals", printer);
    };
    match msadl_core::ddd::assert_equals(&a, &b, decl, &set) {
        Ok(equal) => {
            if !printer.json {
                println!("{equal}");
            }
            printer.envelope("entity-assert-equals", &[], json!({ "equal": equal }));
            EXIT_OK
        }
        Err(err) => {
            let d = Diagnostic::error(err.code(), err.to_string(), Default::default());
            printer.diagnostics(std::slice::from_ref(&d));
            printer.envelope("entity-assert-equals", std::slice::from_ref(&d), json!({}));
            EXIT_DIAGNOSTICS
        }
    }
}

fn render_trace_jsonl(trace: &[TraceEvent]) -> String {
    let mut out = String::new();
    for event in trace {
        out.push_str(&serde_json::to_string(event).expect("trace event serialises"));
        out.push('\n');
    }
    out
}

fn cmd_simulate(
    models: &[PathBuf],
    seed: u64,
    max_steps: u64,
    trace_path: Option<&Path>,
    explicit_schedule: Option<&Path>,
    printer: &Printer,
) -> u8 {
    let (_, set, diags) = load_models(models);
    if has_errors(&diags) {
        printer.diagnostics(&diags);
        printer.envelope("simulate", &diags, json!({}));
        return EXIT_DIAGNOSTICS;
    }

    // the simulator runs the Jolie view; LEMMA services join via the transform
    let set = if set.lemma_services.is_empty() {
        set
    } else {
        let (converted, _, transform_diags) = model_set_to_jolie(&set);
        if has_errors(&transform_diags) {
            printer.diagnostics(&transform_diags);
            printer.envelope("simulate", &transform_diags, json!({}));
            return EXIT_DIAGNOSTICS;
        }
        converted
    };

    let schedule = match explicit_schedule {
        None => Schedule::Seed(seed),
        Some(path) => {
            let text = match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => return usage_error(&format!("cannot read {}: {e}", path.display())),
            };
            match serde_json::from_str::<Vec<usize>>(&text) {
                Ok(choices) => Schedule::Explicit(choices),
                Err(e) => return usage_error(&format!("{} must be a JSON array of indices: {e}", path.display())),
            }
        }
    };

    let mut state = match NetworkState::build(&set, seed) {
        Ok(s) => s,
        Err(diags) => {
            printer.diagnostics(&diags);
            printer.envelope("simulate", &diags, json!({}));
            return EXIT_DIAGNOSTICS;
        }
    };

    let result = match run_state(&mut state, schedule, max_steps) {
        Ok(r) => r,
        Err(e) => {
            let d = Diagnostic::error(e.code(), e.to_string(), Default::default());
            printer.diagnostics(std::slice::from_ref(&d));
            printer.envelope("simulate", std::slice::from_ref(&d), json!({}));
            return EXIT_DIAGNOSTICS;
        }
    };

    if let Some(path) = trace_path {
        if let Err(e) = std::fs::write(path, render_trace_jsonl(&result.trace)) {
            return usage_error(&format!("cannot write {}: {e}", path.display()));
        }
    }

    let mut diags = Vec::new();
    match &result.outcome {
        Outcome::Terminated => {}
        Outcome::Stuck { remaining } => {
            let detail: Vec<String> = remaining
                .iter()
                .map(|r| format!("{}#{}: {}", r.service, r.instance, r.term))
                .collect();
            diags.push(Diagnostic::error(
                codes::STUCK_DEADLOCK,
                format!("no rule applies but instances remain: {}", detail.join("; ")),
                Default::default(),
            ));
        }
        Outcome::MaxStepsExceeded => {
            diags.push(Diagnostic::error(
                codes::MAX_STEPS_EXCEEDED,
                format!("simulation did not settle within {max_steps} steps"),
                Default::default(),
            ));
        }
    }

    if !printer.json {
        if trace_path.is_none() {
            print!("{}", render_trace_jsonl(&result.trace));
        }
        printer.diagnostics(&diags);
        let outcome = match &result.outcome {
            Outcome::Terminated => "terminated",
            Outcome::Stuck { .. } => "stuck",
            Outcome::MaxStepsExceeded => "max-steps-exceeded",
        };
        println!("{outcome} after {} steps", result.steps);
    }
    printer.envelope(
        "simulate",
        &diags,
        json!({ "trace": result.trace, "steps": result.steps, "outcome": result.outcome }),
    );
    if diags.is_empty() {
        EXIT_OK
    } else {
        EXIT_DIAGNOSTICS
    }
}

fn cmd_docs(model: &Path, out: &Path, printer: &Printer) -> u8 {
    let (_, set, diags) = load_models(std::slice::from_ref(&model.to_path_buf()));
    if has_errors(&diags) {
        printer.diagnostics(&diags);
        printer.envelope("docs", &diags, json!({}));
        return EXIT_DIAGNOSTICS;
    }
    match docsgen::write_bundle(&set, out) {
        Ok(files) => {
            if !printer.json {
                for f in &files {
                    println!("{}", out.join(f).display());
                }
            }
            printer.envelope("docs", &diags, json!({ "files": files }));
            EXIT_OK
        }
        Err(e) => usage_error(&e),
    }
}

fn cmd_fmt(files: &[PathBuf], printer: &Printer) -> u8 {
    let mut diags = Vec::new();
    for path in files {
        match io::load_unit(path) {
            Ok(unit) => {
                if let Err(e) = io::write_unit(&unit, path) {
                    return usage_error(&e);
                }
            }
            Err(mut ds) => diags.append(&mut ds),
        }
    }
    let diags = finish(diags);
    printer.diagnostics(&diags);
    printer.envelope("fmt", &diags, json!({}));
    if has_errors(&diags) {
        EXIT_DIAGNOSTICS
    } else {
        EXIT_OK
    }
}
