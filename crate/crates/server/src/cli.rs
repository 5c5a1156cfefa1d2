//! The `docasm` command line.
//!
//! Exit codes: 0 success, 1 validation failure, 2 input error.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use docasm_core::config::{
    askable_predicates, build_config, collect_dependencies, serialize_config, BuildRequest, LoadedConfig,
};
use docasm_core::facts::parse_fact_document;
use docasm_core::graph::{export_dot, export_json};
use docasm_core::logic::notation::{parse_literal, parse_theory, serialize_ground};
use docasm_core::logic::{
    ground_theory, Atom, Conclusion, ConflictDeclaration, DefeatReason, ProofRecord, Reasoner, Tag, Theory,
};
use docasm_core::rulebase::{load_rulebase, parse_fact_atoms, RulebaseError};
use docasm_core::session::{AnswerInput, Session};
use docasm_core::template::{parse_template, validate_output};

use crate::api::{router, AppState};
use crate::catalog::Catalog;
use crate::store::SessionStore;

pub const LOG_ENV: &str = "DOCASM_LOG";

#[derive(Debug, Parser)]
#[command(name = "docasm", version, about = "Knowledge-based legal document assembly")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a rule-base, config or template and report invariant violations.
    Validate { file: PathBuf },
    /// Ground a rule-base over facts and print the ground theory and conclusions.
    Prove {
        rulebase: PathBuf,
        /// RuleML atoms (`<facts><ruleml:Atom>…`) or notation `fact` lines.
        facts: PathBuf,
        /// Conflict declaration `predicate@position`; repeatable.
        #[arg(long = "conflicts", value_name = "PRED@POS")]
        conflicts: Vec<String>,
        /// Print the proof trace of a conclusion, e.g. `jurisdiction_level(o1, higher)`.
        #[arg(long, value_name = "LITERAL")]
        explain: Vec<String>,
        /// Only print conclusions with a `+` tag.
        #[arg(long)]
        positive: bool,
    },
    /// Print the predicates a goal depends on.
    Deps {
        rulebase: PathBuf,
        goal: String,
        /// Only list predicates that must be asked.
        #[arg(long)]
        askable: bool,
    },
    /// Build config XML from a TOML assignments file.
    BuildConfig {
        assignments: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Answer a whole interview from a fact list and write the document and graph.
    Assemble {
        config: PathBuf,
        answers: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long, value_enum, default_value_t = GraphFormat::Both)]
        graph: GraphFormat,
        /// Write a draft instead of failing when steps are unanswered.
        #[arg(long)]
        allow_draft: bool,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        configs: PathBuf,
        #[arg(long)]
        store: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphFormat {
    Dot,
    Json,
    Both,
}

/// A failed command and the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    Validation(anyhow::Error),
    Input(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Input(_) => 2,
        }
    }
}

fn input(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Input(e.into())
}

fn invalid(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Validation(e.into())
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(input)
}

fn rulebase_failure(e: RulebaseError) -> Failure {
    match e {
        RulebaseError::Io { .. } => input(e),
        other => invalid(other),
    }
}

fn load_theory(path: &Path) -> Result<Theory, Failure> {
    let (theory, warnings) = load_rulebase(path).map_err(rulebase_failure)?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    Ok(theory)
}

pub fn init_logging(default: &str) {
    let filter = tracing_subscriber::EnvFilter::try_from_env(LOG_ENV)
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new(default));
    let _ = tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .try_init();
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let serving = matches!(cli.command, Command::Serve { .. });
    init_logging(if serving { "info" } else { "warn" });
    match run(cli.command, &mut std::io::stdout()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Validation(e) | Failure::Input(e)) = &f;
            let mut message = String::new();
            for cause in e.chain().map(ToString::to_string) {
                if !message.contains(&cause) {
                    if !message.is_empty() {
                        message.push_str(": ");
                    }
                    message.push_str(&cause);
                }
            }
            eprintln!("error: {message}");
            ExitCode::from(f.code())
        }
    }
}

pub fn run(command: Command, out: &mut dyn std::io::Write) -> Result<(), Failure> {
    let mut text = String::new();
    match command {
        Command::Validate { file } => validate(&file, &mut text)?,
        Command::Prove {
            rulebase,
            facts,
            conflicts,
            explain,
            positive,
        } => prove(&rulebase, &facts, &conflicts, &explain, positive, &mut text)?,
        Command::Deps {
            rulebase,
            goal,
            askable,
        } => {
            let theory = load_theory(&rulebase)?;
            let deps = collect_dependencies(&theory, &goal).map_err(invalid)?;
            let shown = if askable {
                askable_predicates(&theory, &deps)
            } else {
                deps
            };
            for p in shown {
                writeln!(text, "{p}").unwrap();
            }
        }
        Command::BuildConfig { assignments, output } => {
            let xml = build(&assignments)?;
            match output {
                Some(path) => std::fs::write(&path, xml)
                    .with_context(|| format!("writing {}", path.display()))
                    .map_err(input)?,
                None => text.push_str(&xml),
            }
        }
        Command::Assemble {
            config,
            answers,
            out_dir,
            graph,
            allow_draft,
        } => assemble(&config, &answers, &out_dir, graph, allow_draft, &mut text)?,
        Command::Serve {
            configs,
            store,
            port,
            host,
        } => serve(&configs, &store, &host, port)?,
    }
    out.write_all(text.as_bytes()).map_err(input)
}

fn validate(path: &Path, out: &mut String) -> Result<(), Failure> {
    let text = read(path)?;
    if text.contains("<assembly_config") {
        let loaded = LoadedConfig::load(path).map_err(invalid)?;
        for w in &loaded.warnings {
            eprintln!("warning: {w}");
        }
        writeln!(
            out,
            "ok: config `{}` with {} steps over {} rules",
            loaded.config.id,
            loaded.config.steps.len(),
            loaded.theory.rules.len()
        )
        .unwrap();
    } else if text.trim_start().starts_with("<element") {
        let t = parse_template(&text).map_err(invalid)?;
        writeln!(out, "ok: template naming {} entries", t.required_entries().len()).unwrap();
    } else if text.contains("<akomaNtoso") {
        let report = validate_output(text.as_bytes());
        if !report.is_valid() {
            return Err(invalid(anyhow!("{}", report.violations.join("; "))));
        }
        writeln!(out, "ok: document envelope").unwrap();
    } else {
        let theory = load_theory(path)?;
        ground_theory(&theory).map_err(invalid)?;
        writeln!(
            out,
            "ok: {} rules, {} superiorities, {} conflict declarations, {} facts",
            theory.rules.len(),
            theory.superiorities.len(),
            theory.conflicts.len(),
            theory.facts.len()
        )
        .unwrap();
    }
    Ok(())
}

fn parse_conflict(raw: &str) -> Result<ConflictDeclaration, Failure> {
    let (pred, pos) = raw
        .split_once('@')
        .ok_or_else(|| input(anyhow!("conflict `{raw}` is not PRED@POS")))?;
    let pos: usize = pos
        .parse()
        .map_err(|_| input(anyhow!("conflict `{raw}` has a bad position")))?;
    Ok(ConflictDeclaration::new(pred, pos))
}

fn read_facts(path: &Path) -> Result<Vec<Atom>, Failure> {
    let text = read(path)?;
    if text.trim_start().starts_with('<') {
        parse_fact_atoms(&text).map_err(invalid)
    } else {
        let theory = parse_theory(&text).map_err(invalid)?;
        if !theory.rules.is_empty() {
            return Err(invalid(anyhow!("facts file contains rules")));
        }
        Ok(theory.facts)
    }
}

fn prove(
    rulebase: &Path,
    facts: &Path,
    conflicts: &[String],
    explain: &[String],
    positive: bool,
    out: &mut String,
) -> Result<(), Failure> {
    let mut theory = load_theory(rulebase)?;
    theory.facts.extend(read_facts(facts)?);
    for c in conflicts {
        theory.conflicts.push(parse_conflict(c)?);
    }
    let ground = ground_theory(&theory).map_err(invalid)?;
    let reasoner = Reasoner::new(&ground);
    out.push_str("# ground theory\n");
    out.push_str(&serialize_ground(&ground));
    out.push_str("# conclusions\n");
    for c in reasoner.conclusions().iter() {
        if !positive || matches!(c.tag, Tag::PlusDelta | Tag::PlusPartial) {
            writeln!(out, "{c}").unwrap();
        }
    }
    for target in explain {
        let literal = parse_literal(target).map_err(|e| input(anyhow!(e)))?;
        let conclusions = reasoner.conclusions();
        let tag = [Tag::PlusDelta, Tag::PlusPartial]
            .into_iter()
            .rev()
            .find(|t| conclusions.contains(*t, &literal))
            .ok_or_else(|| invalid(anyhow!("`{literal}` is not provable")))?;
        let record = reasoner.trace(&Conclusion::new(tag, literal)).map_err(invalid)?;
        out.push_str("# proof\n");
        write_trace(&record, 0, out);
    }
    Ok(())
}

/// Indented proof tree in debug notation.
pub fn write_trace(record: &ProofRecord, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match &record.supporting_rule {
        Some(r) => writeln!(out, "{pad}{} via {} ({})", record.conclusion, r.id, r.source).unwrap(),
        None => writeln!(out, "{pad}{} fact", record.conclusion).unwrap(),
    }
    for p in &record.premises {
        write_trace(p, depth + 1, out);
    }
    for d in &record.defeated_attackers {
        match &d.reason {
            DefeatReason::DefeatedBy(w) => writeln!(out, "{pad}  defeated {} by {}", d.attacker.id, w.id).unwrap(),
            DefeatReason::UnprovablePremise => {
                writeln!(out, "{pad}  defeated {} by unprovable premise", d.attacker.id).unwrap()
            }
        }
    }
}

fn build(assignments: &Path) -> Result<String, Failure> {
    let request: BuildRequest = toml::from_str(&read(assignments)?)
        .with_context(|| format!("parsing {}", assignments.display()))
        .map_err(input)?;
    let base = assignments.parent().unwrap_or(Path::new("."));
    let theory = load_theory(&base.join(&request.rulebase))?;
    let template_path = base.join(&request.template);
    parse_template(&read(&template_path)?)
        .with_context(|| format!("template {}", template_path.display()))
        .map_err(invalid)?;
    let config = build_config(&request, &theory).map_err(invalid)?;
    Ok(serialize_config(&config))
}

fn assemble(
    config: &Path,
    answers: &Path,
    out_dir: &Path,
    graph: GraphFormat,
    allow_draft: bool,
    out: &mut String,
) -> Result<(), Failure> {
    let loaded = Arc::new(LoadedConfig::load(config).map_err(|e| match e {
        docasm_core::config::ConfigError::Io { .. } => input(e),
        other => invalid(other),
    })?);
    let facts = parse_fact_document(&read(answers)?).map_err(invalid)?;
    let mut by_order = BTreeMap::new();
    for entry in facts.entries() {
        let step = loaded
            .config
            .steps
            .iter()
            .find(|s| s.entry == entry.name)
            .ok_or_else(|| invalid(anyhow!("answer `{}` matches no interview step", entry.name)))?;
        let value = docasm_core::session::coerce_answer(step, &AnswerInput::from(&entry.value)).map_err(invalid)?;
        by_order.insert(step.order, value);
    }

    let session = Session::restore("batch", loaded.clone(), by_order).map_err(invalid)?;
    let snapshot = session.snapshot();
    if !session.is_complete() && !allow_draft {
        let missing: Vec<_> = snapshot
            .progress
            .iter()
            .filter(|p| !p.answered)
            .map(|p| p.entry.as_str())
            .collect();
        return Err(invalid(anyhow!("unanswered steps: {}", missing.join(", "))));
    }

    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))
        .map_err(input)?;
    let id = &loaded.config.id;
    let mut written = vec![(out_dir.join(format!("{id}.xml")), snapshot.document.clone())];
    if matches!(graph, GraphFormat::Dot | GraphFormat::Both) {
        written.push((out_dir.join(format!("{id}.graph.dot")), export_dot(&snapshot.graph)));
    }
    if matches!(graph, GraphFormat::Json | GraphFormat::Both) {
        written.push((out_dir.join(format!("{id}.graph.json")), export_json(&snapshot.graph)));
    }
    for (path, content) in written {
        std::fs::write(&path, content)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(input)?;
        writeln!(out, "{}", path.display()).unwrap();
    }
    Ok(())
}

fn serve(configs: &Path, store: &Path, host: &str, port: u16) -> Result<(), Failure> {
    if !configs.is_dir() {
        return Err(input(anyhow!("{} is not a directory", configs.display())));
    }
    let catalog = Catalog::scan(configs);
    for e in catalog.errors() {
        eprintln!("warning: {e}");
    }
    let store = SessionStore::open(store).map_err(input)?;
    let known = store.scan().map_err(input)?;
    tracing::info!(sessions = known.len(), "store opened");
    let addr: SocketAddr = format!("{host}:{port}")
        .parse()
        .map_err(|e| input(anyhow!("bad address {host}:{port}: {e}")))?;
    let state = Arc::new(AppState::new(catalog, store));
    let runtime = tokio::runtime::Runtime::new().map_err(input)?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("binding {addr}"))
            .map_err(input)?;
        tracing::info!(%addr, "listening");
        axum::serve(listener, router(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(input)
    })
}
