//! Command-line front end. [`run`] is the whole program minus process I/O,
//! so it can be driven from tests.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::Ratio;
use serde_json::{json, Value};

use crate::graph::{export_flow_graph, FlowGraph};
use crate::inconsistency::Analyzer;
use crate::mcs::{enumerate_equilibria, is_consistent, local_consistency_warnings, BeliefState};
use crate::pmcs::{self, PmcsSystem, StratifiedBeliefState};
use crate::rule_id::RuleId;
use crate::{dsl, Config, Error, SearchMode};

/// Environment variable capping worker threads (`0` = sequential).
pub const WORKERS_ENV: &str = "PMCS_MAX_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "pmcs",
    version,
    about = "Reason about preferential multi-context systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Emit a structured JSON report.
    #[arg(long, global = true)]
    pub json: bool,
    /// Cap on the number of bridge rules.
    #[arg(long, global = true, value_name = "N")]
    pub max_rules: Option<usize>,
    /// Cap on the number of atoms per context signature.
    #[arg(long, global = true, value_name = "N")]
    pub max_atoms: Option<usize>,
    /// Find the maximal level by a linear scan over all cuts.
    #[arg(long, global = true)]
    pub linear_scan: bool,
    /// Report wall-clock time.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exit 0 if the system has an equilibrium, 1 otherwise.
    Check { file: PathBuf },
    /// List equilibria in canonical order.
    Equilibria {
        file: PathBuf,
        #[arg(long, value_name = "N")]
        limit: Option<usize>,
    },
    /// Maximal consistent level, degree of inconsistency, section and witness.
    Analyze { file: PathBuf },
    /// List diagnoses.
    Diagnose {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = DiagnoseFamily::Min)]
        family: DiagnoseFamily,
    },
    /// List inconsistency explanations.
    Explain {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = ExplainFamily::Min)]
        family: ExplainFamily,
    },
    /// Check the union identities between diagnoses and explanations.
    Duality { file: PathBuf },
    /// Information-flow graph.
    Graph {
        file: PathBuf,
        /// Write DOT to this path (`-` for stdout).
        #[arg(long, value_name = "PATH")]
        dot: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Check { .. } => "check",
            Command::Equilibria { .. } => "equilibria",
            Command::Analyze { .. } => "analyze",
            Command::Diagnose { .. } => "diagnose",
            Command::Explain { .. } => "explain",
            Command::Duality { .. } => "duality",
            Command::Graph { .. } => "graph",
        }
    }

    fn file(&self) -> &PathBuf {
        match self {
            Command::Check { file }
            | Command::Equilibria { file, .. }
            | Command::Analyze { file }
            | Command::Diagnose { file, .. }
            | Command::Explain { file, .. }
            | Command::Duality { file }
            | Command::Graph { file, .. } => file,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DiagnoseFamily {
    Full,
    Min,
    SMin,
    C,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExplainFamily {
    Min,
    SMin,
    C,
}

fn family_name<T: ValueEnum>(v: T) -> String {
    v.to_possible_value()
        .map(|p| p.get_name().to_string())
        .unwrap_or_default()
}

/// Result of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn fail(stderr: String) -> Self {
        Outcome {
            code: 2,
            stdout: String::new(),
            stderr,
        }
    }
}

/// Parses arguments (including the program name) and runs the command,
/// reading the worker cap from the environment.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome::fail(text)
            };
        }
    };
    let workers = match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) => Some(n),
            Err(_) => {
                return Outcome::fail(format!(
                    "error: {WORKERS_ENV} must be a non-negative integer, got `{v}`\n"
                ))
            }
        },
        Err(_) => None,
    };
    run_cli(&cli, workers)
}

/// Runs a parsed command with an explicit worker setting.
pub fn run_cli(cli: &Cli, workers: Option<usize>) -> Outcome {
    let defaults = Config::default();
    let cfg = Config {
        max_rules: cli.max_rules.unwrap_or(defaults.max_rules),
        max_atoms: cli.max_atoms.unwrap_or(defaults.max_atoms),
        workers,
        search: if cli.linear_scan {
            SearchMode::Linear
        } else {
            SearchMode::Binary
        },
    };
    let path = cli.command.file();
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return Outcome::fail(format!("error: cannot read {}: {e}\n", path.display())),
    };
    let system = match dsl::parse(&text) {
        Ok(p) => p,
        Err(errors) => {
            let mut stderr = String::new();
            for e in &errors {
                stderr.push_str(&format!("{}:{e}\n", path.display()));
            }
            stderr.push_str(&format!(
                "error: {} error(s) in {}\n",
                errors.len(),
                path.display()
            ));
            return Outcome::fail(stderr);
        }
    };
    let started = Instant::now();
    let result = execute(&cli.command, &system, &cfg);
    let elapsed = started.elapsed();
    let mut out = match result {
        Ok(out) => out,
        Err(e) => return Outcome::fail(format!("error: {e}\n")),
    };
    if cli.json {
        let mut meta = json!({
            "max_rules": cfg.max_rules,
            "max_atoms": cfg.max_atoms,
            "workers": cfg.workers,
            "search": if cli.linear_scan { "linear" } else { "binary" },
        });
        if cli.timing {
            meta["timing_ms"] = json!(elapsed.as_secs_f64() * 1000.0);
        }
        let report = json!({
            "command": {
                "name": cli.command.name(),
                "file": path.display().to_string(),
                "args": command_args(&cli.command),
            },
            "system": system_summary(&system),
            "result": out.json,
            "meta": meta,
        });
        out.text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    }
    let mut stderr = out
        .warnings
        .iter()
        .map(|w| format!("warning: {w}\n"))
        .collect::<String>();
    if cli.timing {
        stderr.push_str(&format!("time: {:.3} ms\n", elapsed.as_secs_f64() * 1000.0));
    }
    Outcome {
        code: out.code,
        stdout: out.text,
        stderr,
    }
}

struct CommandOutput {
    code: i32,
    text: String,
    json: Value,
    warnings: Vec<String>,
}

impl CommandOutput {
    fn ok(text: String, json: Value) -> Self {
        CommandOutput {
            code: 0,
            text,
            json,
            warnings: Vec::new(),
        }
    }
}

fn command_args(cmd: &Command) -> Value {
    match cmd {
        Command::Equilibria { limit, .. } => json!({ "limit": limit }),
        Command::Diagnose { family, .. } => json!({ "family": family_name(*family) }),
        Command::Explain { family, .. } => json!({ "family": family_name(*family) }),
        Command::Graph { dot, .. } => {
            json!({ "dot": dot.as_ref().map(|p| p.display().to_string()) })
        }
        _ => json!({}),
    }
}

fn system_summary(p: &PmcsSystem) -> Value {
    let names = |ks: &[usize]| -> Vec<String> {
        ks.iter()
            .map(|&k| p.base().contexts()[k - 1].name.clone())
            .collect()
    };
    json!({
        "contexts": p.base().contexts().iter().map(|c| json!({
            "name": c.name,
            "logic": c.logic(),
            "signature": c.signature().atoms().collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "strata": p.strata().iter().map(|s| names(s)).collect::<Vec<_>>(),
        "rules": p.base().rule_count(),
    })
}

fn set_text(rules: &BTreeSet<RuleId>) -> String {
    let ids: Vec<&str> = rules.iter().map(RuleId::as_str).collect();
    format!("{{{}}}", ids.join(", "))
}

/// Decimal expansion with at most six fractional digits.
pub fn decimal(r: &Ratio<u64>) -> String {
    let (num, den) = (*r.numer(), *r.denom());
    let mut s = (num / den).to_string();
    let mut rem = num % den;
    if rem != 0 {
        s.push('.');
        for _ in 0..6 {
            rem *= 10;
            s.push(char::from(b'0' + (rem / den) as u8));
            rem %= den;
            if rem == 0 {
                break;
            }
        }
    }
    s
}

fn ratio_json(r: &Ratio<u64>) -> Value {
    json!({ "num": r.numer(), "den": r.denom(), "decimal": decimal(r) })
}

fn execute(cmd: &Command, p: &PmcsSystem, cfg: &Config) -> crate::Result<CommandOutput> {
    let m = p.base();
    match cmd {
        Command::Check { .. } => {
            let consistent = is_consistent(m, cfg)?;
            let mut out = CommandOutput::ok(
                if consistent {
                    "consistent\n"
                } else {
                    "inconsistent\n"
                }
                .to_string(),
                json!({ "consistent": consistent }),
            );
            out.code = if consistent { 0 } else { 1 };
            out.warnings = local_consistency_warnings(m, cfg)?;
            Ok(out)
        }
        Command::Equilibria { limit, .. } => {
            let eqs: Vec<BeliefState> = enumerate_equilibria(m, *limit, cfg)?;
            let mut text = String::new();
            if eqs.is_empty() {
                text.push_str("no equilibria\n");
            }
            for (i, s) in eqs.iter().enumerate() {
                text.push_str(&format!("S{} = {s}\n", i + 1));
            }
            Ok(CommandOutput::ok(
                text,
                json!({ "count": eqs.len(), "equilibria": eqs }),
            ))
        }
        Command::Analyze { .. } => analyze(p, cfg),
        Command::Diagnose { family, .. } => diagnose(p, cfg, *family),
        Command::Explain { family, .. } => explain(p, cfg, *family),
        Command::Duality { .. } => {
            let report = Analyzer::new(p, cfg)?.duality_check()?;
            let mut text = String::new();
            for c in &report.checks {
                text.push_str(&format!(
                    "{}: {} ({} = {})\n",
                    c.name,
                    if c.holds { "holds" } else { "VIOLATED" },
                    set_text(&c.diagnoses),
                    set_text(&c.explanations)
                ));
            }
            let mut out = CommandOutput::ok(
                text,
                json!({ "holds": report.holds(), "checks": report.checks }),
            );
            out.code = if report.holds() { 0 } else { 1 };
            Ok(out)
        }
        Command::Graph { dot, .. } => {
            let g = FlowGraph::of(p);
            let dot_text = export_flow_graph(p);
            let edges: Vec<Value> = g
                .named_edges()
                .into_iter()
                .map(|(a, b)| json!([a, b]))
                .collect();
            let text = match dot {
                Some(path) if path.as_os_str() != "-" => {
                    std::fs::write(path, &dot_text).map_err(|e| {
                        Error::Domain(format!("cannot write {}: {e}", path.display()))
                    })?;
                    g.named_edges()
                        .iter()
                        .map(|(a, b)| format!("{a} -> {b}\n"))
                        .collect()
                }
                _ => dot_text.clone(),
            };
            Ok(CommandOutput::ok(
                text,
                json!({ "nodes": g.nodes, "edges": edges, "dot": dot_text }),
            ))
        }
    }
}

fn stratified_json(s: &StratifiedBeliefState) -> Value {
    json!(s.0)
}

fn analyze(p: &PmcsSystem, cfg: &Config) -> crate::Result<CommandOutput> {
    let r = pmcs::analyze(p, cfg)?;
    let names = |k: usize| -> Vec<String> {
        p.base().contexts()[..p.contexts_in_cut(k)]
            .iter()
            .map(|c| c.name.clone())
            .collect()
    };
    let mut text = format!(
        "strata: {}\nmaximal level: {}\ndegree of inconsistency: {} ({})\n",
        r.strata,
        r.level,
        r.di,
        decimal(&r.di)
    );
    if r.level == 0 {
        text.push_str("maximal consistent section: none\n");
    } else {
        text.push_str(&format!(
            "maximal consistent section: strata 1..{}, contexts {}\n",
            r.level,
            names(r.level).join(", ")
        ));
    }
    if let Some(w) = &r.witness {
        text.push_str(&format!(
            "witness{}:\n",
            if w.suffix_unconstrained {
                " (suffix unconstrained)"
            } else {
                ""
            }
        ));
        for (i, stratum) in w.state.0.iter().enumerate() {
            let sets: Vec<String> = stratum.iter().map(|s| s.to_string()).collect();
            text.push_str(&format!("  stratum {}: ({})\n", i + 1, sets.join(", ")));
        }
    }
    let json = json!({
        "level": r.level,
        "strata": r.strata,
        "consistent": r.consistent,
        "di": ratio_json(&r.di),
        "section": (r.level > 0).then(|| json!({ "level": r.level, "contexts": names(r.level) })),
        "witness": r.witness.as_ref().map(|w| json!({
            "strata": stratified_json(&w.state),
            "suffix_unconstrained": w.suffix_unconstrained,
        })),
    });
    Ok(CommandOutput::ok(text, json))
}

fn sets_output(sets: Vec<BTreeSet<RuleId>>, kind: &str, family: String) -> CommandOutput {
    let mut text = String::new();
    if sets.is_empty() {
        text.push_str(&format!("no {kind}\n"));
    }
    for s in &sets {
        text.push_str(&set_text(s));
        text.push('\n');
    }
    CommandOutput::ok(
        text,
        json!({ "family": family, "count": sets.len(), kind: sets }),
    )
}

fn pairs_output(
    pairs: Vec<(BTreeSet<RuleId>, BTreeSet<RuleId>)>,
    kind: &str,
    keys: [&str; 2],
    family: String,
) -> CommandOutput {
    let mut text = String::new();
    if pairs.is_empty() {
        text.push_str(&format!("no {kind}\n"));
    }
    for (a, b) in &pairs {
        text.push_str(&format!("({}, {})\n", set_text(a), set_text(b)));
    }
    let items: Vec<Value> = pairs
        .iter()
        .map(|(a, b)| json!({ keys[0]: a, keys[1]: b }))
        .collect();
    CommandOutput::ok(
        text,
        json!({ "family": family, "count": pairs.len(), kind: items }),
    )
}

fn diagnose(p: &PmcsSystem, cfg: &Config, family: DiagnoseFamily) -> crate::Result<CommandOutput> {
    let a = Analyzer::new(p, cfg)?;
    let name = family_name(family);
    let keys = ["remove", "unconditional"];
    Ok(match family {
        DiagnoseFamily::Full | DiagnoseFamily::Min => {
            let ds = if family == DiagnoseFamily::Full {
                a.all_diagnoses()?
            } else {
                a.minimal_diagnoses()?
            };
            pairs_output(
                ds.into_iter()
                    .map(|d| (d.remove, d.unconditional))
                    .collect(),
                "diagnoses",
                keys,
                name,
            )
        }
        DiagnoseFamily::SMin => sets_output(
            a.s_diagnoses_min()?.into_iter().map(|d| d.rules).collect(),
            "diagnoses",
            name,
        ),
        DiagnoseFamily::C => sets_output(
            a.c_diagnoses()?.into_iter().map(|d| d.rules).collect(),
            "diagnoses",
            name,
        ),
    })
}

fn explain(p: &PmcsSystem, cfg: &Config, family: ExplainFamily) -> crate::Result<CommandOutput> {
    let a = Analyzer::new(p, cfg)?;
    let name = family_name(family);
    Ok(match family {
        ExplainFamily::Min => pairs_output(
            a.minimal_explanations()?
                .into_iter()
                .map(|e| (e.cause, e.protected))
                .collect(),
            "explanations",
            ["cause", "protected"],
            name,
        ),
        ExplainFamily::SMin => sets_output(
            a.s_explanations_min()?
                .into_iter()
                .map(|e| e.rules)
                .collect(),
            "explanations",
            name,
        ),
        ExplainFamily::C => sets_output(
            a.c_explanations_min()?
                .into_iter()
                .map(|e| e.rules)
                .collect(),
            "explanations",
            name,
        ),
    })
}
