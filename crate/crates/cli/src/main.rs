//! Command-line front end: term handling, translation, simulation,
//! proof search, certificate checking, and the IMLL compiler.
//!
//! Exit codes: 0 success, 1 negative answer (not provable, not
//! equivalent, not linear), 2 usage or input syntax errors, 3 internal
//! check failures. Verdicts and certificates go to stdout; statistics and
//! diagnostics go to stderr so stdout stays byte-stable across runs.

use std::collections::BTreeSet;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use seqren_core::atom::AtomName;
use seqren_core::canonical::{canonicalize, equiv};
use seqren_core::cert::{Certificate, SimulationSidecar};
use seqren_core::imll::{compile_proof, ImllProof};
use seqren_core::lambda::{
    alpha_eq, check_linear, parse_lam, reduce, LamTerm, Strategy, TraceEnd,
};
use seqren_core::parse::parse_structure;
use seqren_core::prover::{prove, SearchBudget, SearchOutcome};
use seqren_core::rules::{
    check_affinity, check_derivation_detailed, down_fragment, full_system, RuleName,
};
use seqren_core::simulate::simulate_trace;
use seqren_core::structure::Structure;
use seqren_core::translate::{translate, ChannelSupply};

#[derive(Parser)]
#[command(name = "seqren", version, about = "Deep-inference proof kernel for SBVr/BVr")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a linear term from a file (or `-` for stdin) and print it
    ParseTerm { file: String },
    /// Reduce a term under a strategy, optionally recording the trace
    Reduce {
        term: String,
        #[arg(long, value_enum, default_value_t = StrategyArg::LeftmostOutermost)]
        strategy: StrategyArg,
        #[arg(long)]
        max_steps: Option<usize>,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Translate a term to a structure
    Translate {
        term: String,
        #[arg(long, default_value = "ch_o")]
        out_channel: String,
    },
    /// Compile a reduction into a checked derivation certificate
    Simulate {
        term: String,
        #[arg(long)]
        to: Option<String>,
        #[arg(long)]
        cert: Option<PathBuf>,
        #[arg(long, default_value = "ch_o")]
        out_channel: String,
    },
    /// Prove a structure in the down fragment
    Prove {
        structure: String,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Prove that the first term reduces to the second
    ProveReduction {
        term_m: String,
        term_n: String,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long, default_value = "ch_o")]
        out_channel: String,
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Check a derivation certificate against a rule set
    Check {
        cert: PathBuf,
        #[arg(long, default_value = "sbvr")]
        allow: String,
    },
    /// Structure utilities
    #[command(subcommand)]
    Struct(StructCmd),
    /// IMLL proof utilities
    #[command(subcommand)]
    Imll(ImllCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    LeftmostOutermost,
    RightmostInnermost,
}

#[derive(Args)]
struct BudgetArgs {
    #[arg(long, default_value_t = 16)]
    max_depth: usize,
    #[arg(long, default_value_t = 5_000_000)]
    max_states: usize,
    #[arg(long, default_value_t = 60)]
    timeout_secs: u64,
}

impl BudgetArgs {
    fn budget(&self) -> SearchBudget {
        SearchBudget {
            max_depth: self.max_depth,
            max_states: self.max_states,
            wall_clock: std::time::Duration::from_secs(self.timeout_secs),
        }
    }
}

#[derive(Subcommand)]
enum StructCmd {
    /// Congruence test on two structures
    Eq { left: String, right: String },
    /// Print the canonical form
    Normalize { structure: String },
    /// Print the size measure
    Size { structure: String },
    /// Legality: every atom occurs at most twice
    Legal { structure: String },
}

#[derive(Subcommand)]
enum ImllCmd {
    /// Compile an IMLL proof tree (JSON) into a derivation certificate
    Compile {
        proof: PathBuf,
        #[arg(long)]
        cert: Option<PathBuf>,
    },
}

const EXIT_NO: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.code)
        }
    }
}

struct CliError {
    code: u8,
    msg: String,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.msg)
    }
}

fn usage(msg: impl std::fmt::Display) -> CliError {
    CliError { code: EXIT_USAGE, msg: msg.to_string() }
}

fn negative(msg: impl std::fmt::Display) -> CliError {
    CliError { code: EXIT_NO, msg: msg.to_string() }
}

fn internal(msg: impl std::fmt::Display) -> CliError {
    CliError { code: EXIT_INTERNAL, msg: msg.to_string() }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::ParseTerm { file } => {
            let text = read_input(&file)?;
            let term = parse_lam(text.trim()).map_err(usage)?;
            check_linear(&term).map_err(negative)?;
            println!("{term}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Reduce { term, strategy, max_steps, trace } => {
            let m = parse_term_arg(&term)?;
            let bound = max_steps.unwrap_or_else(|| seqren_core::lambda::default_step_bound(&m));
            let strat = match strategy {
                StrategyArg::LeftmostOutermost => Strategy::LeftmostOutermost,
                StrategyArg::RightmostInnermost => Strategy::RightmostInnermost,
            };
            let t = reduce(&m, &strat, bound).map_err(internal)?;
            for (site, term) in &t.steps {
                eprintln!("{:>14} @{:?}: {term}", site.rule.as_str(), site.path);
            }
            println!("{}", t.terminal());
            if let Some(path) = trace {
                let doc = trace_json(&t);
                write_text(&path, &doc)?;
            }
            match t.end {
                TraceEnd::StepLimit => Err(negative("step limit reached before a normal form")),
                _ => Ok(ExitCode::SUCCESS),
            }
        }
        Command::Translate { term, out_channel } => {
            let m = parse_term_arg(&term)?;
            let o = atom_name(&out_channel)?;
            let s = translate(&m, &o, &mut ChannelSupply::new()).map_err(negative)?;
            println!("{s}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate { term, to, cert, out_channel } => {
            let m = parse_term_arg(&term)?;
            let o = atom_name(&out_channel)?;
            let trace = match &to {
                None => reduce(&m, &Strategy::LeftmostOutermost,
                    seqren_core::lambda::default_step_bound(&m))
                    .map_err(internal)?,
                Some(target_src) => {
                    let target = parse_term_arg(target_src)?;
                    trace_to(&m, &target)?
                }
            };
            let d = simulate_trace(&trace, &o, &ChannelSupply::new()).map_err(internal)?;
            let mut allowed = down_fragment();
            allowed.insert(RuleName::QUp);
            check_derivation_detailed(&d, &allowed)
                .map_err(|e| internal(format!("self-check failed: {e}")))?;
            check_affinity(&d).map_err(|e| internal(format!("affinity failed: {e}")))?;
            eprintln!(
                "simulated {} beta steps into {} rule instances",
                trace.len(),
                d.steps.len()
            );
            let certificate = Certificate::from_derivation(&d);
            println!("premise: {}", d.premise());
            if let Some(path) = cert {
                write_text(&path, &certificate.to_json_string())?;
                let sidecar = SimulationSidecar {
                    term: m.to_string(),
                    reduct: trace.terminal().to_string(),
                    output: o.text().to_string(),
                };
                let mut sidecar_text =
                    serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
                sidecar_text.push('\n');
                write_text(&sidecar_path(&path), &sidecar_text)?;
            } else {
                print!("{}", certificate.to_json_string());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Prove { structure, budget, cert } => {
            let goal = parse_structure_arg(&structure)?;
            let (outcome, stats) = prove(&goal, &budget.budget());
            eprintln!("{}", serde_json::to_string(&stats).expect("stats"));
            finish_prove(outcome, cert)
        }
        Command::ProveReduction { term_m, term_n, budget, out_channel, cert } => {
            let m = parse_term_arg(&term_m)?;
            let n = parse_term_arg(&term_n)?;
            let o = atom_name(&out_channel)?;
            let goal = seqren_core::prover::reduction_goal(&m, &n, &o).map_err(negative)?;
            let (outcome, stats) = prove(&goal, &budget.budget());
            eprintln!("{}", serde_json::to_string(&stats).expect("stats"));
            finish_prove(outcome, cert)
        }
        Command::Check { cert, allow } => {
            let text = std::fs::read_to_string(&cert)
                .map_err(|e| usage(format!("{}: {e}", cert.display())))?;
            let certificate = Certificate::from_json_str(&text).map_err(usage)?;
            let d = certificate.to_derivation().map_err(usage)?;
            let allowed = rule_set(&allow)?;
            match check_derivation_detailed(&d, &allowed) {
                Ok(()) => {
                    println!("ok: {} steps from {}", d.steps.len(), d.premise());
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    let census = d.census();
                    eprintln!("rule census:");
                    for (rule, count) in &census {
                        let mark = if allowed.contains(rule) { " " } else { "!" };
                        eprintln!("  {mark} {rule}: {count}");
                    }
                    Err(negative(format!("certificate rejected: {e}")))
                }
            }
        }
        Command::Struct(cmd) => run_struct(cmd),
        Command::Imll(cmd) => run_imll(cmd),
    }
}

fn run_struct(cmd: StructCmd) -> Result<ExitCode, CliError> {
    match cmd {
        StructCmd::Eq { left, right } => {
            let l = parse_structure_arg(&left)?;
            let r = parse_structure_arg(&right)?;
            if equiv(&l, &r) {
                println!("true");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("false");
                Ok(ExitCode::from(EXIT_NO))
            }
        }
        StructCmd::Normalize { structure } => {
            let s = parse_structure_arg(&structure)?;
            println!("{}", canonicalize(&s));
            Ok(ExitCode::SUCCESS)
        }
        StructCmd::Size { structure } => {
            let s = parse_structure_arg(&structure)?;
            println!("{}", s.size());
            Ok(ExitCode::SUCCESS)
        }
        StructCmd::Legal { structure } => {
            let s = parse_structure_arg(&structure)?;
            if s.is_legal() {
                println!("true");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("false");
                Ok(ExitCode::from(EXIT_NO))
            }
        }
    }
}

fn run_imll(cmd: ImllCmd) -> Result<ExitCode, CliError> {
    match cmd {
        ImllCmd::Compile { proof, cert } => {
            let text = std::fs::read_to_string(&proof)
                .map_err(|e| usage(format!("{}: {e}", proof.display())))?;
            let tree = ImllProof::from_json_str(&text).map_err(usage)?;
            let d = compile_proof(&tree).map_err(negative)?;
            check_derivation_detailed(&d, &full_system())
                .map_err(|e| internal(format!("self-check failed: {e}")))?;
            println!("conclusion: {}", d.conclusion);
            println!("premise: {}", d.premise());
            let certificate = Certificate::from_derivation(&d);
            match cert {
                Some(path) => write_text(&path, &certificate.to_json_string())?,
                None => print!("{}", certificate.to_json_string()),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn finish_prove(outcome: SearchOutcome, cert: Option<PathBuf>) -> Result<ExitCode, CliError> {
    match outcome {
        SearchOutcome::Proved(d) => {
            check_derivation_detailed(&d, &down_fragment())
                .map_err(|e| internal(format!("self-check failed: {e}")))?;
            check_affinity(&d).map_err(|e| internal(format!("affinity failed: {e}")))?;
            println!("proved in {} steps", d.steps.len());
            let certificate = Certificate::from_derivation(&d);
            match cert {
                Some(path) => write_text(&path, &certificate.to_json_string())?,
                None => print!("{}", certificate.to_json_string()),
            }
            Ok(ExitCode::SUCCESS)
        }
        SearchOutcome::ExhaustedComplete => {
            println!("unprovable");
            Ok(ExitCode::from(EXIT_NO))
        }
        SearchOutcome::BudgetHit => {
            println!("no verdict within budget");
            Ok(ExitCode::from(EXIT_NO))
        }
    }
}

fn trace_to(
    m: &LamTerm,
    target: &LamTerm,
) -> Result<seqren_core::lambda::ReductionTrace, CliError> {
    let bound = seqren_core::lambda::default_step_bound(m);
    let full = reduce(m, &Strategy::LeftmostOutermost, bound).map_err(internal)?;
    let mut cut = seqren_core::lambda::ReductionTrace {
        start: full.start.clone(),
        steps: Vec::new(),
        end: TraceEnd::ScriptComplete,
    };
    if alpha_eq(m, target) {
        return Ok(cut);
    }
    for (site, term) in &full.steps {
        cut.steps.push((site.clone(), term.clone()));
        if alpha_eq(term, target) {
            return Ok(cut);
        }
    }
    Err(negative("the leftmost-outermost trace never reaches the target term"))
}

fn trace_json(t: &seqren_core::lambda::ReductionTrace) -> String {
    #[derive(serde::Serialize)]
    struct StepDoc {
        rule: &'static str,
        path: Vec<usize>,
        term: String,
    }
    #[derive(serde::Serialize)]
    struct TraceDoc {
        start: String,
        steps: Vec<StepDoc>,
        end: &'static str,
    }
    let doc = TraceDoc {
        start: t.start.to_string(),
        steps: t
            .steps
            .iter()
            .map(|(site, term)| StepDoc {
                rule: site.rule.as_str(),
                path: site.path.clone(),
                term: term.to_string(),
            })
            .collect(),
        end: match t.end {
            TraceEnd::NormalForm => "normal_form",
            TraceEnd::StepLimit => "step_limit",
            TraceEnd::ScriptComplete => "script_complete",
        },
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("trace serializes");
    s.push('\n');
    s
}

fn rule_set(spec: &str) -> Result<BTreeSet<RuleName>, CliError> {
    match spec {
        "down" => Ok(down_fragment()),
        "sbvr" => Ok(full_system()),
        list => {
            let mut out = BTreeSet::new();
            for part in list.split(',') {
                let rule = RuleName::parse(part.trim())
                    .ok_or_else(|| usage(format!("unknown rule `{part}`")))?;
                out.insert(rule);
            }
            Ok(out)
        }
    }
}

fn parse_term_arg(src: &str) -> Result<LamTerm, CliError> {
    let term = parse_lam(src).map_err(usage)?;
    check_linear(&term).map_err(negative)?;
    Ok(term)
}

fn parse_structure_arg(src: &str) -> Result<Structure, CliError> {
    parse_structure(src).map_err(usage)
}

fn atom_name(src: &str) -> Result<AtomName, CliError> {
    if !seqren_core::atom::is_valid_name(src) {
        return Err(usage(format!("invalid channel name `{src}`")));
    }
    Ok(AtomName::new(src))
}

fn read_input(file: &str) -> Result<String, CliError> {
    if file == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| usage(format!("stdin: {e}")))?;
        Ok(buf)
    } else {
        std::fs::read_to_string(file).map_err(|e| usage(format!("{file}: {e}")))
    }
}

fn write_text(path: &PathBuf, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| internal(format!("{}: {e}", path.display())))
}

fn sidecar_path(cert: &PathBuf) -> PathBuf {
    let mut os = cert.clone().into_os_string();
    os.push(".sidecar.json");
    PathBuf::from(os)
}
