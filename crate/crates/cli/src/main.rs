//! `t2m`: validate, run and transform machines, check reductions, run
//! the model demonstrations and evaluate circuits.
//!
//! Exit codes: 0 success or passing check, 1 failing check, 2 usage or
//! parse/validation error, 3 divergence (a query computation or oracle
//! machine did not settle).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use t2m_core::circuits::{
    compile_to_machine, count_test_gates, decode_plan_output, eval_circuit, parse_circuit,
};
use t2m_core::dsl::{parse_file, print_machine};
use t2m_core::machine::{run_traced, MachineGraph, Output, RunStatus};
use t2m_core::models::{
    halting_demo, max_by_lpo_loop, revising_decode, simulate_lpo_by_revising, Certificate,
    ModelsError,
};
use t2m_core::oracle::{
    computable_oracle, coproduct_oracle, identity_oracle, lpo, max_oracle_unary,
    parallel_finite_oracle, power_oracle, product_oracle, run_with_oracle, Oracle, OracleError,
};
use t2m_core::seq::EvSeq;
use t2m_core::transform::separate_layers;
use t2m_core::weihrauch::{
    catalog, check_bc, check_bf, check_f, check_hat, check_weihrauch, CheckReport, Problem,
    ReductionWitness, WeihrauchError,
};

#[derive(Parser)]
#[command(name = "t2m", version, about = "Type-2 oracle machine toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunConfig {
    /// Step budget shared across all nested query computations.
    #[arg(long, default_value_t = 1_000_000)]
    fuel: u64,
    /// Query depth budget.
    #[arg(long, default_value_t = 1)]
    depth: u32,
    /// Output prefix length for printing and comparisons.
    #[arg(long, default_value_t = 64)]
    prefix: usize,
    /// Abort once this many oracle calls were made.
    #[arg(long)]
    call_limit: Option<u64>,
    /// Emit machine-readable JSON instead of human text.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a machine file.
    Validate { file: PathBuf },
    /// Run a machine on an input, optionally under an oracle.
    Run {
        file: PathBuf,
        /// Input sequence literal, e.g. `1101:0`.
        #[arg(long)]
        input: EvSeq,
        /// Oracle spec: lpo, max, id, machine:<file>, product:<a>,<b>,
        /// power:<a>^<n>, coproduct:<a>;<b>, parfin:<a>*<n>.
        #[arg(long)]
        oracle: Option<String>,
        /// Emit one JSON trace record per step (plain runs only).
        #[arg(long)]
        trace: bool,
        #[command(flatten)]
        config: RunConfig,
    },
    /// Machine-to-machine transformations.
    Transform {
        #[command(subcommand)]
        kind: TransformKind,
    },
    /// Verify a reduction witness over sample inputs.
    CheckReduction {
        /// One of: W, bc:<n>, bf:<n>, f:<k>, hat:<k>.
        #[arg(long)]
        relation: String,
        /// Outer problem: a catalog name (lpo, max, max-unary, id) or a
        /// machine file used as a single-valued problem.
        #[arg(long)]
        f: String,
        /// Inner problem, same forms as --f.
        #[arg(long)]
        g: String,
        /// Witness machine files: answer machine, then inner-input
        /// machine (`F.t2m,G.t2m`).
        #[arg(long)]
        witness: String,
        /// Sample file: one sequence literal per line.
        #[arg(long)]
        samples: Option<PathBuf>,
        #[command(flatten)]
        config: RunConfig,
    },
    /// Model demonstrations.
    Demo {
        #[command(subcommand)]
        kind: DemoKind,
    },
    /// Circuit evaluation and compilation.
    Circuit {
        #[command(subcommand)]
        kind: CircuitKind,
    },
}

#[derive(Subcommand)]
enum TransformKind {
    /// Separate query layers: `separate-layers in.t2m --n 2 -o out.t2m`.
    SeparateLayers {
        file: PathBuf,
        #[arg(long)]
        n: u32,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum DemoKind {
    /// Compute MAX by a loop of LPO calls.
    MaxByLpo {
        #[arg(long)]
        input: EvSeq,
        #[arg(long, default_value_t = 64)]
        budget: u32,
        #[arg(long)]
        json: bool,
    },
    /// Simulate a depth-1 LPO machine by finitely revising computation.
    Revising {
        #[arg(long)]
        machine: PathBuf,
        #[arg(long)]
        input: EvSeq,
        #[arg(long, default_value_t = 1_000_000)]
        fuel: u64,
        #[arg(long, default_value_t = 64)]
        call_budget: u64,
        #[arg(long)]
        json: bool,
    },
    /// Decide halting from a certificate through one LPO call.
    Halting {
        #[arg(long)]
        machine: PathBuf,
        /// `halts:<step>` or `loops`.
        #[arg(long)]
        certificate: String,
        #[arg(long, default_value_t = 1_000_000)]
        fuel: u64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum CircuitKind {
    /// Evaluate a circuit file directly.
    Eval {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Compile to an LPO-calling plan, run it at depth 1, and report
    /// the call accounting.
    Compile {
        file: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        fuel: u64,
        #[arg(long)]
        json: bool,
    },
}

const EXIT_OK: u8 = 0;
const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DIVERGED: u8 = 3;

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn diverged(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_DIVERGED,
            message: message.into(),
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        Failure::diverged(e.to_string())
    }
}

impl From<WeihrauchError> for Failure {
    fn from(e: WeihrauchError) -> Self {
        match e {
            WeihrauchError::WitnessDiverged { .. } | WeihrauchError::Oracle(_) => {
                Failure::diverged(e.to_string())
            }
            other => Failure::usage(other.to_string()),
        }
    }
}

fn load_machine(path: &Path) -> Result<MachineGraph, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let machines =
        parse_file(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    Ok(machines.into_iter().next().expect("parse_file is nonempty"))
}

fn load_samples(path: &Path) -> Result<Vec<EvSeq>, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let seq = line.parse::<EvSeq>().map_err(|e| {
            Failure::usage(format!("{}:{}: {e}", path.display(), lineno + 1))
        })?;
        out.push(seq);
    }
    if out.is_empty() {
        return Err(Failure::usage(format!(
            "{}: no samples",
            path.display()
        )));
    }
    Ok(out)
}

/// Splits `text` on `sep` at paren depth zero.
fn split_top_level(text: &str, sep: char) -> Vec<String> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut current = String::new();
    for c in text.chars() {
        match c {
            '(' => {
                depth += 1;
                current.push(c);
            }
            ')' => {
                depth = depth.saturating_sub(1);
                current.push(c);
            }
            c if c == sep && depth == 0 => {
                parts.push(std::mem::take(&mut current));
            }
            c => current.push(c),
        }
    }
    parts.push(current);
    parts
}

fn parse_oracle(spec: &str, fuel: u64) -> Result<Oracle, Failure> {
    let spec = spec.trim();
    if let Some(inner) = spec.strip_prefix('(') {
        if let Some(inner) = inner.strip_suffix(')') {
            return parse_oracle(inner, fuel);
        }
    }
    match spec {
        "lpo" => return Ok(lpo()),
        "max" => return Ok(max_oracle_unary()),
        "id" => return Ok(identity_oracle()),
        _ => {}
    }
    if let Some(path) = spec.strip_prefix("machine:") {
        let g = load_machine(Path::new(path.trim()))?;
        return Ok(computable_oracle(&g, fuel).map_err(|e| Failure::usage(e.to_string()))?);
    }
    if let Some(args) = spec.strip_prefix("product:") {
        let parts = split_top_level(args, ',');
        if parts.len() != 2 {
            return Err(Failure::usage(format!(
                "product takes two components, found {}",
                parts.len()
            )));
        }
        let a = parse_oracle(&parts[0], fuel)?;
        let b = parse_oracle(&parts[1], fuel)?;
        return Ok(product_oracle(&a, &b));
    }
    if let Some(args) = spec.strip_prefix("power:") {
        let (base, n) = args
            .rsplit_once('^')
            .ok_or_else(|| Failure::usage("power spec must look like power:<a>^<n>"))?;
        let n: u32 = n
            .trim()
            .parse()
            .map_err(|_| Failure::usage(format!("bad power exponent {n:?}")))?;
        if n == 0 {
            return Err(Failure::usage("power exponent must be at least 1"));
        }
        return Ok(power_oracle(&parse_oracle(base, fuel)?, n));
    }
    if let Some(args) = spec.strip_prefix("coproduct:") {
        let components = split_top_level(args, ';')
            .iter()
            .map(|p| parse_oracle(p, fuel))
            .collect::<Result<Vec<_>, _>>()?;
        if components.is_empty() {
            return Err(Failure::usage("coproduct needs at least one component"));
        }
        return Ok(coproduct_oracle(components));
    }
    if let Some(args) = spec.strip_prefix("parfin:") {
        let (base, n) = args
            .rsplit_once('*')
            .ok_or_else(|| Failure::usage("parfin spec must look like parfin:<a>*<n>"))?;
        let n: usize = n
            .trim()
            .parse()
            .map_err(|_| Failure::usage(format!("bad parallelization count {n:?}")))?;
        if n == 0 {
            return Err(Failure::usage("parallelization count must be at least 1"));
        }
        return Ok(parallel_finite_oracle(&parse_oracle(base, fuel)?, n));
    }
    Err(Failure::usage(format!("unknown oracle spec {spec:?}")))
}

fn load_problem(spec: &str, samples: Option<&[EvSeq]>, fuel: u64) -> Result<Problem, Failure> {
    let problem = if let Some(p) = catalog(spec) {
        p
    } else if Path::new(spec).exists() || spec.ends_with(".t2m") {
        let g = load_machine(Path::new(spec))?;
        let name = format!("machine:{}", g.name());
        let err_name = name.clone();
        Problem::new(name, Vec::new(), true, false, move |x| {
            let r = t2m_core::machine::run(&g, x, fuel);
            match r.status {
                RunStatus::Accepted => Ok(vec![r.output.zero_extended()]),
                status => Err(WeihrauchError::OutsideDomain {
                    problem: err_name.clone(),
                    input: x.clone(),
                    reason: status.to_string(),
                }),
            }
        })
    } else {
        return Err(Failure::usage(format!(
            "{spec:?} is neither a catalog problem nor a machine file"
        )));
    };
    Ok(match samples {
        Some(s) => problem.with_samples(s.to_vec()),
        None => {
            if problem.domain_samples().is_empty() {
                return Err(Failure::usage(format!(
                    "problem {spec:?} needs --samples"
                )));
            }
            problem
        }
    })
}

#[derive(Serialize)]
struct RunReport<'a> {
    status: &'a RunStatus,
    prefix: String,
    steps_used: u64,
    total_calls: u64,
    max_nesting: u32,
    approximate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    full_output: Option<String>,
}

fn prefix_string(output: &Output, k: usize) -> String {
    let cells = match output {
        Output::Full(s) => s.first(k),
        Output::Prefix(p) => {
            let mut p = p.clone();
            p.truncate(k);
            p
        }
    };
    if cells.iter().any(|&s| s > 9) {
        cells
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(",")
    } else {
        cells.iter().map(|s| s.to_string()).collect()
    }
}

fn cmd_run(
    file: &Path,
    input: &EvSeq,
    oracle_spec: Option<&str>,
    trace: bool,
    config: &RunConfig,
) -> Result<u8, Failure> {
    let m = load_machine(file)?;
    if trace {
        if oracle_spec.is_some() {
            return Err(Failure::usage("--trace applies to plain runs only"));
        }
        let (result, records) = run_traced(&m, input, config.fuel);
        for record in &records {
            println!("{}", serde_json::to_string(record).expect("trace serializes"));
        }
        if config.json {
            println!(
                "{}",
                serde_json::json!({
                    "status": result.status,
                    "prefix": prefix_string(&result.output, config.prefix),
                    "steps_used": result.steps_used,
                })
            );
        } else {
            println!("{}", prefix_string(&result.output, config.prefix));
        }
        return Ok(EXIT_OK);
    }

    let oracle = match oracle_spec {
        Some(spec) => parse_oracle(spec, config.fuel)?,
        None => lpo(),
    };
    let depth = if oracle_spec.is_some() { config.depth } else { 0 };
    let result = run_with_oracle(&m, &oracle, input, depth, config.fuel, config.call_limit)?;
    let full_output = match (&result.status, &result.output) {
        (RunStatus::Accepted, Output::Full(s)) => Some(s.to_string()),
        _ => None,
    };
    if config.json {
        let report = RunReport {
            status: &result.status,
            prefix: prefix_string(&result.output, config.prefix),
            steps_used: result.steps_used,
            total_calls: result.total_calls,
            max_nesting: result.max_nesting,
            approximate: result.approximate,
            full_output,
        };
        println!("{}", serde_json::to_string(&report).expect("report serializes"));
    } else {
        println!("{}", prefix_string(&result.output, config.prefix));
        if !matches!(result.status, RunStatus::Accepted | RunStatus::FuelExhausted) {
            eprintln!("status: {}", result.status);
        }
    }
    Ok(match result.status {
        RunStatus::Accepted | RunStatus::FuelExhausted => EXIT_OK,
        RunStatus::CallLimitExceeded => EXIT_DIVERGED,
        _ => EXIT_DIVERGED,
    })
}

fn parse_relation(text: &str) -> Result<RelationSpec, Failure> {
    if text == "W" {
        return Ok(RelationSpec::W);
    }
    if let Some(n) = text.strip_prefix("bc:") {
        let n = n
            .parse::<u32>()
            .map_err(|_| Failure::usage(format!("bad bc bound {n:?}")))?;
        return Ok(RelationSpec::Bc(n));
    }
    if let Some(n) = text.strip_prefix("bf:") {
        let n = n
            .parse::<u32>()
            .map_err(|_| Failure::usage(format!("bad bf bound {n:?}")))?;
        return Ok(RelationSpec::Bf(n));
    }
    if let Some(k) = text.strip_prefix("f:") {
        let k = k
            .parse::<usize>()
            .map_err(|_| Failure::usage(format!("bad component count {k:?}")))?;
        return Ok(RelationSpec::F(k));
    }
    if let Some(k) = text.strip_prefix("hat:") {
        let k = k
            .parse::<usize>()
            .map_err(|_| Failure::usage(format!("bad truncation {k:?}")))?;
        return Ok(RelationSpec::Hat(k));
    }
    Err(Failure::usage(format!(
        "unknown relation {text:?} (expected W, bc:<n>, bf:<n>, f:<k> or hat:<k>)"
    )))
}

enum RelationSpec {
    W,
    Bc(u32),
    Bf(u32),
    F(usize),
    Hat(usize),
}

fn print_check_report(report: &CheckReport, json: bool) {
    if json {
        println!("{}", serde_json::to_string(report).expect("report serializes"));
        return;
    }
    println!(
        "{} <= {} [{:?}]: {}",
        report.outer,
        report.inner,
        report.relation,
        if report.passed { "pass" } else { "FAIL" }
    );
    for sample in &report.per_sample {
        let mark = if sample.pass { "ok  " } else { "FAIL" };
        println!(
            "  {mark} {}  ({} answer choices{})",
            sample.input,
            sample.produced.len(),
            if sample.g_output_exact { "" } else { ", approx emitted input" }
        );
        if let Some(note) = &sample.note {
            println!("       note: {note}");
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_check_reduction(
    relation: &str,
    f_spec: &str,
    g_spec: &str,
    witness_spec: &str,
    samples: Option<&Path>,
    config: &RunConfig,
) -> Result<u8, Failure> {
    let samples = samples.map(load_samples).transpose()?;
    let outer = load_problem(f_spec, samples.as_deref(), config.fuel)?;
    let inner = load_problem(g_spec, None, config.fuel)?;
    let (f_path, g_path) = witness_spec
        .split_once(',')
        .ok_or_else(|| Failure::usage("--witness takes F.t2m,G.t2m"))?;
    let f_machine = load_machine(Path::new(f_path.trim()))?;
    let g_machine = load_machine(Path::new(g_path.trim()))?;
    let witness = ReductionWitness::from_graphs(&f_machine, &g_machine)?;
    let report = match parse_relation(relation)? {
        RelationSpec::W => {
            check_weihrauch(&outer, &inner, &witness, config.prefix, config.fuel)?
        }
        RelationSpec::Bc(n) => {
            check_bc(&outer, &inner, n, &witness, config.prefix, config.fuel)?
        }
        RelationSpec::Bf(n) => {
            check_bf(&outer, &inner, n, &witness, config.prefix, config.fuel)?
        }
        RelationSpec::F(k) => check_f(&outer, &inner, k, &witness, config.prefix, config.fuel)?,
        RelationSpec::Hat(k) => {
            check_hat(&outer, &inner, k, &witness, config.prefix, config.fuel)?
        }
    };
    print_check_report(&report, config.json);
    Ok(if report.passed { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn cmd_transform(kind: &TransformKind) -> Result<u8, Failure> {
    match kind {
        TransformKind::SeparateLayers { file, n, output } => {
            if *n == 0 {
                return Err(Failure::usage("--n must be at least 1"));
            }
            let m = load_machine(file)?;
            let layered = separate_layers(&m, *n);
            let text =
                print_machine(&layered.graph).map_err(|e| Failure::usage(e.to_string()))?;
            match output {
                Some(path) => fs::write(path, &text)
                    .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?,
                None => print!("{text}"),
            }
            Ok(EXIT_OK)
        }
    }
}

fn cmd_demo(kind: &DemoKind) -> Result<u8, Failure> {
    match kind {
        DemoKind::MaxByLpo { input, budget, json } => {
            let result = max_by_lpo_loop(input, *budget)
                .map_err(|e| Failure::diverged(e.to_string()))?;
            if *json {
                println!("{}", serde_json::to_string(&result).expect("serializes"));
            } else {
                println!("max = {}, lpo calls = {}", result.value, result.calls_used);
                for call in &result.trace {
                    println!(
                        "  threshold {}: query {} -> answer {}",
                        call.threshold, call.query, call.answer
                    );
                }
            }
            Ok(EXIT_OK)
        }
        DemoKind::Revising {
            machine,
            input,
            fuel,
            call_budget,
            json,
        } => {
            let m = load_machine(machine)?;
            let sim = simulate_lpo_by_revising(&m, input, *fuel, *call_budget)
                .map_err(|e| Failure::diverged(e.to_string()))?;
            let decoded = revising_decode(&sim.stream);
            let direct = run_with_oracle(&m, &lpo(), input, 1, *fuel, None)?;
            let agrees = direct.output.first(64) == Some(decoded.first(64));
            if *json {
                println!(
                    "{}",
                    serde_json::json!({
                        "stream": sim.stream.symbols().to_string(),
                        "marks": sim.stream.mark_count(),
                        "revisions": sim.revisions,
                        "calls_made": sim.calls_made,
                        "decoded": decoded.to_string(),
                        "depth1_agrees": agrees,
                    })
                );
            } else {
                println!("stream : {}", sim.stream.symbols());
                println!("decoded: {decoded}");
                println!(
                    "depth-1 oracle run agrees to prefix 64: {}",
                    if agrees { "yes" } else { "NO" }
                );
            }
            Ok(if agrees { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
        DemoKind::Halting {
            machine,
            certificate,
            fuel,
            json,
        } => {
            let m = load_machine(machine)?;
            let cert = if certificate == "loops" {
                Certificate::Loops
            } else if let Some(step) = certificate.strip_prefix("halts:") {
                let step = step
                    .parse::<u64>()
                    .map_err(|_| Failure::usage(format!("bad step count {step:?}")))?;
                Certificate::Halts(step)
            } else {
                return Err(Failure::usage(
                    "certificate must be halts:<step> or loops",
                ));
            };
            match halting_demo(&m, cert, *fuel) {
                Ok(verdict) => {
                    if *json {
                        println!("{}", serde_json::json!({ "verdict": verdict }));
                    } else {
                        println!("{verdict:?}");
                    }
                    Ok(EXIT_OK)
                }
                Err(e @ ModelsError::CertificateUnverifiable { .. }) => {
                    Err(Failure::diverged(e.to_string()))
                }
                Err(e) => Err(Failure {
                    code: EXIT_CHECK_FAILED,
                    message: e.to_string(),
                }),
            }
        }
    }
}

fn cmd_circuit(kind: &CircuitKind) -> Result<u8, Failure> {
    match kind {
        CircuitKind::Eval { file, json } => {
            let text = fs::read_to_string(file)
                .map_err(|e| Failure::usage(format!("{}: {e}", file.display())))?;
            let circuit =
                parse_circuit(&text).map_err(|e| Failure::usage(format!("{}: {e}", file.display())))?;
            let values = eval_circuit(&circuit, &BTreeMap::new())
                .map_err(|e| Failure::usage(e.to_string()))?;
            if *json {
                println!("{}", serde_json::to_string(&values).expect("serializes"));
            } else {
                for (name, set) in &values {
                    println!("{name} = {set}");
                }
            }
            Ok(EXIT_OK)
        }
        CircuitKind::Compile { file, fuel, json } => {
            let text = fs::read_to_string(file)
                .map_err(|e| Failure::usage(format!("{}: {e}", file.display())))?;
            let circuit =
                parse_circuit(&text).map_err(|e| Failure::usage(format!("{}: {e}", file.display())))?;
            let (plan, lpo_calls, level_bound) = compile_to_machine(&circuit);
            let result = run_with_oracle(&plan, &lpo(), &EvSeq::zeros(), 1, *fuel, None)?;
            let cells = result.output.zero_extended();
            let horizon = cells.prefix_len() + 2 * circuit.outputs().len() + 2;
            let outputs = decode_plan_output(&circuit, &cells.first(horizon))
                .map_err(|e| Failure::diverged(e.to_string()))?;
            debug_assert_eq!(lpo_calls, count_test_gates(&circuit));
            if *json {
                println!(
                    "{}",
                    serde_json::json!({
                        "lpo_calls": lpo_calls,
                        "level_bound": level_bound,
                        "observed_calls": result.total_calls,
                        "outputs": outputs,
                    })
                );
            } else {
                println!("test gates / lpo calls: {lpo_calls}");
                println!("level bound 2^n      : {level_bound}");
                println!("observed oracle calls: {}", result.total_calls);
                for (name, set) in &outputs {
                    println!("{name} = {set}");
                }
            }
            Ok(EXIT_OK)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<u8, Failure> {
    match &cli.command {
        Command::Validate { file } => {
            let m = load_machine(file)?;
            println!(
                "ok: machine {} with {} vertices",
                m.name(),
                m.vertex_count()
            );
            Ok(EXIT_OK)
        }
        Command::Run {
            file,
            input,
            oracle,
            trace,
            config,
        } => cmd_run(file, input, oracle.as_deref(), *trace, config),
        Command::Transform { kind } => cmd_transform(kind),
        Command::CheckReduction {
            relation,
            f,
            g,
            witness,
            samples,
            config,
        } => cmd_check_reduction(relation, f, g, witness, samples.as_deref(), config),
        Command::Demo { kind } => cmd_demo(kind),
        Command::Circuit { kind } => cmd_circuit(kind),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
