use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};

use interdiction::dot::export_dot;
use interdiction::evaluator::check_schedule;
use interdiction::planner::cost_table;
use interdiction::{
    all_pairs_shortest, build_layered, build_milp, emit_lp, generate_strategies, oracle_best, parse_network,
    parse_solution, plan_defender, plan_multi, utility, DefenderSchedule, MilpConfig, MixedStrategy, Network,
    OracleConfig, PlanError,
};

#[derive(Parser)]
#[command(
    name = "interdict",
    version,
    about = "Plan police interdiction against a mixed escape strategy"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan defender paths with the layered-network heuristic.
    Plan(PlanArgs),
    /// Time the planner over repeated trials, optionally against the oracle.
    Bench(BenchArgs),
    /// Sample a seeded mixed attacker strategy.
    GenStrategies(GenArgs),
    /// Score defender schedules against a mixed strategy.
    Evaluate(EvalArgs),
    /// Exhaustive optimum for small instances.
    Oracle(OracleArgs),
    /// Write the benchmark MILP in LP format.
    ExportLp(LpArgs),
    /// Read a solver solution back and check it.
    ImportSolution(ImportArgs),
    /// Write the layered network as Graphviz DOT.
    ExportDot(DotArgs),
}

#[derive(Args)]
struct Inputs {
    #[arg(long)]
    network: PathBuf,
    #[arg(long)]
    strategies: PathBuf,
}

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    inputs: Inputs,
    /// Number of defenders, taken from the police list in order.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    defenders: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    trials: u32,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    defenders: u32,
    /// Also run the exhaustive oracle once.
    #[arg(long)]
    oracle: bool,
    /// Run trials concurrently.
    #[arg(long)]
    parallel: bool,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    network: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    count: u32,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    inputs: Inputs,
    /// JSON file with a plan result, a list of triples, or a list of such lists.
    #[arg(long)]
    schedule: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    defenders: u32,
    /// Largest joint schedule space to enumerate.
    #[arg(long, default_value_t = OracleConfig::default().cap)]
    cap: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MilpArgs {
    /// Defaults to every police start.
    #[arg(long)]
    defenders: Option<usize>,
    #[arg(long)]
    l_max: Option<usize>,
    #[arg(long)]
    delta: Option<u32>,
    #[arg(long)]
    big_m: Option<f64>,
    /// Keep defenders off exit nodes.
    #[arg(long)]
    strict_exit_domain: bool,
}

#[derive(Args)]
struct LpArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[command(flatten)]
    milp: MilpArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ImportArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[command(flatten)]
    milp: MilpArgs,
    #[arg(long)]
    solution: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DotArgs {
    #[arg(long)]
    network: PathBuf,
    /// Annotate nodes with exact and heuristic costs.
    #[arg(long)]
    strategies: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn other(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    fn no_path(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write_or_print(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_file(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::input(format!("{}: {e}", p.display()))),
        None => Ok(()),
    }
}

fn load_network(path: &Path) -> Result<Network, Failure> {
    parse_network(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load(inputs: &Inputs) -> Result<(Network, MixedStrategy), Failure> {
    let net = load_network(&inputs.network)?;
    let text = read(&inputs.strategies)?;
    let mix = MixedStrategy::from_json(&net, &text)
        .map_err(|e| Failure::input(format!("{}: {e}", inputs.strategies.display())))?;
    Ok((net, mix))
}

fn starts(net: &Network, defenders: u32) -> Result<Vec<u32>, Failure> {
    let m = defenders as usize;
    if m > net.police().len() {
        return Err(Failure::other(format!(
            "{m} defenders requested but the network has {} police starts",
            net.police().len()
        )));
    }
    Ok(net.police()[..m].to_vec())
}

fn fmt_schedules(scheds: &[DefenderSchedule]) -> String {
    scheds.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
}

fn cmd_plan(args: PlanArgs) -> Outcome {
    let (net, mix) = load(&args.inputs)?;
    let starts = starts(&net, args.defenders)?;
    let layered = build_layered(&net);
    if starts.len() == 1 {
        let plan = plan_defender(&net, &layered, &mix, starts[0]).map_err(plan_failure)?;
        println!("path: {}", plan.path_string());
        println!("schedule: {}", plan.schedule);
        println!("proxy utility: {}", plan.proxy_utility);
        println!("evaluated utility: {}", plan.evaluated_utility);
        return write_file(args.out.as_deref(), &plan.to_json());
    }
    let multi = plan_multi(&net, &layered, &mix, &starts).map_err(plan_failure)?;
    if multi.plans.iter().all(Option::is_none) {
        return Err(Failure::no_path(
            "NO_PATH: no defender can reach an exit copy at the horizon",
        ));
    }
    for (start, plan) in starts.iter().zip(&multi.plans) {
        match plan {
            Some(p) => println!("defender {start}: {} | {}", p.path_string(), p.schedule),
            None => println!("defender {start}: NO_PATH"),
        }
    }
    println!("combined utility: {}", multi.combined_utility);
    write_file(args.out.as_deref(), &multi.to_json())
}

fn plan_failure(e: PlanError) -> Failure {
    match e {
        PlanError::NoPath { .. } => Failure::no_path(e.to_string()),
        other => Failure::other(other.to_string()),
    }
}

struct Trial {
    schedule: String,
    utility: f64,
    seconds: f64,
}

fn run_trial(net: &Network, mix: &MixedStrategy, starts: &[u32]) -> Result<Trial, PlanError> {
    let clock = Instant::now();
    let layered = build_layered(net);
    let (scheds, u) = if starts.len() == 1 {
        let p = plan_defender(net, &layered, mix, starts[0])?;
        (vec![p.schedule], p.evaluated_utility)
    } else {
        let m = plan_multi(net, &layered, mix, starts)?;
        (m.schedules(), m.combined_utility)
    };
    let seconds = clock.elapsed().as_secs_f64();
    Ok(Trial {
        schedule: fmt_schedules(&scheds),
        utility: u,
        seconds,
    })
}

fn cmd_bench(args: BenchArgs) -> Outcome {
    let (net, mix) = load(&args.inputs)?;
    let starts = starts(&net, args.defenders)?;
    let trials: Vec<Result<Trial, PlanError>> = if args.parallel {
        (0..args.trials)
            .into_par_iter()
            .map(|_| run_trial(&net, &mix, &starts))
            .collect()
    } else {
        (0..args.trials).map(|_| run_trial(&net, &mix, &starts)).collect()
    };
    let trials: Vec<Trial> = trials.into_iter().collect::<Result<_, _>>().map_err(plan_failure)?;

    let oracle = if args.oracle {
        let clock = Instant::now();
        let best = oracle_best(&net, &mix, starts.len(), &OracleConfig::default())
            .map_err(|e| Failure::other(e.to_string()))?;
        Some((best.utility, clock.elapsed().as_secs_f64()))
    } else {
        None
    };
    let (o_u, o_s) = match oracle {
        Some((u, s)) => (u.to_string(), format!("{s:.6}")),
        None => (String::new(), String::new()),
    };

    let mut csv = String::from("trial,schedule,planner_utility,planner_seconds,oracle_utility,oracle_seconds\n");
    for (i, t) in trials.iter().enumerate() {
        let _ = writeln!(
            csv,
            "{},\"{}\",{},{:.6},{o_u},{o_s}",
            i + 1,
            t.schedule,
            t.utility,
            t.seconds
        );
    }
    write_file(args.out.as_deref(), &csv)?;

    println!(
        "{:>5}  {:<40}  {:>7}  {:>10}",
        "trial", "schedule", "utility", "seconds"
    );
    for (i, t) in trials.iter().enumerate() {
        println!(
            "{:>5}  {:<40}  {:>7.4}  {:>10.6}",
            i + 1,
            t.schedule,
            t.utility,
            t.seconds
        );
    }
    let n = trials.len() as f64;
    let mean_u = trials.iter().map(|t| t.utility).sum::<f64>() / n;
    let mean_s = trials.iter().map(|t| t.seconds).sum::<f64>() / n;
    println!("{:>5}  {:<40}  {:>7.4}  {:>10.6}", "mean", "", mean_u, mean_s);
    if let Some((u, s)) = oracle {
        println!("{:>5}  {:<40}  {:>7.4}  {:>10.6}", "opt", "oracle", u, s);
    }
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Outcome {
    let net = load_network(&args.network)?;
    let mix = generate_strategies(&net, args.count as usize, args.seed).map_err(|e| Failure::other(e.to_string()))?;
    write_or_print(args.out.as_deref(), &(mix.to_json() + "\n"))
}

fn parse_triples(v: &Value) -> Option<DefenderSchedule> {
    let triples = v
        .as_array()?
        .iter()
        .map(|t| {
            let t = t.as_array()?;
            if t.len() != 3 {
                return None;
            }
            let n = |i: usize| t[i].as_u64().and_then(|x| u32::try_from(x).ok());
            Some((n(0)?, n(1)?, n(2)?))
        })
        .collect::<Option<Vec<_>>>()?;
    Some(DefenderSchedule::from_triples(&triples))
}

/// Accepts a single-defender plan, a multi-defender plan, one triple list or
/// a list of triple lists.
fn parse_schedules(v: &Value) -> Option<Vec<DefenderSchedule>> {
    if let Some(s) = v.get("schedule") {
        return Some(vec![parse_triples(s)?]);
    }
    if let Some(plans) = v.get("plans").and_then(Value::as_array) {
        return plans
            .iter()
            .map(|p| match p {
                Value::Null => Some(DefenderSchedule::default()),
                p => parse_triples(p.get("schedule")?),
            })
            .collect();
    }
    if let Some(s) = parse_triples(v) {
        return Some(vec![s]);
    }
    v.as_array()?.iter().map(parse_triples).collect()
}

fn cmd_evaluate(args: EvalArgs) -> Outcome {
    let (net, mix) = load(&args.inputs)?;
    let text = read(&args.schedule)?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", args.schedule.display())))?;
    let scheds = parse_schedules(&value)
        .ok_or_else(|| Failure::input(format!("{}: not a schedule file", args.schedule.display())))?;
    if scheds.len() > net.police().len() {
        return Err(Failure::input(format!(
            "{} schedules but only {} police starts",
            scheds.len(),
            net.police().len()
        )));
    }
    let dist = all_pairs_shortest(&net);
    for (k, (s, &start)) in scheds.iter().zip(net.police()).enumerate() {
        if s.is_empty() {
            continue;
        }
        check_schedule(&net, &dist, start, s).map_err(|e| Failure::input(format!("schedule {k}: {e}")))?;
    }
    let u = utility(&scheds, &mix);
    println!("utility: {u}");
    let report = json!({
        "schedules": scheds.iter().map(DefenderSchedule::to_triples).collect::<Vec<_>>(),
        "utility": u,
    });
    write_file(args.out.as_deref(), &serde_json::to_string_pretty(&report).unwrap())
}

fn cmd_oracle(args: OracleArgs) -> Outcome {
    let (net, mix) = load(&args.inputs)?;
    let m = args.defenders as usize;
    let clock = Instant::now();
    let best =
        oracle_best(&net, &mix, m, &OracleConfig { cap: args.cap }).map_err(|e| Failure::other(e.to_string()))?;
    let seconds = clock.elapsed().as_secs_f64();
    println!("utility: {}", best.utility);
    println!("schedule: {}", fmt_schedules(&best.schedules));
    println!("candidates: {}", best.enumerated);
    println!("seconds: {seconds:.6}");
    let report = json!({
        "schedules": best.schedules.iter().map(DefenderSchedule::to_triples).collect::<Vec<_>>(),
        "utility": best.utility,
        "candidates": best.enumerated.to_string(),
    });
    write_file(args.out.as_deref(), &serde_json::to_string_pretty(&report).unwrap())
}

fn milp_config(net: &Network, a: &MilpArgs) -> MilpConfig {
    let d = MilpConfig::for_network(net);
    MilpConfig {
        defenders: a.defenders.unwrap_or(d.defenders),
        l_max: a.l_max.unwrap_or(d.l_max),
        delta: a.delta.unwrap_or(d.delta),
        big_m: a.big_m.unwrap_or(d.big_m),
        strict_exit_domain: a.strict_exit_domain,
    }
}

fn cmd_export_lp(args: LpArgs) -> Outcome {
    let (net, mix) = load(&args.inputs)?;
    let model = build_milp(&net, &mix, milp_config(&net, &args.milp)).map_err(|e| Failure::other(e.to_string()))?;
    let c = model.counts();
    eprintln!(
        "variables: s={} w={} t_in={} t_out={} k={} alpha={} beta={} gamma={} z={}; rows={}",
        c.s,
        c.omega,
        c.t_in,
        c.t_out,
        c.k,
        c.alpha,
        c.beta,
        c.gamma,
        c.z,
        model.rows().len()
    );
    write_or_print(args.out.as_deref(), &emit_lp(&model))
}

fn cmd_import(args: ImportArgs) -> Outcome {
    let (net, mix) = load(&args.inputs)?;
    let model = build_milp(&net, &mix, milp_config(&net, &args.milp)).map_err(|e| Failure::other(e.to_string()))?;
    let text = read(&args.solution)?;
    let sol =
        parse_solution(&model, &mix, &text).map_err(|e| Failure::input(format!("{}: {e}", args.solution.display())))?;
    println!("objective: {}", sol.objective);
    println!("utility: {}", sol.utility);
    println!("schedule: {}", fmt_schedules(&sol.schedules));
    let report = json!({
        "objective": sol.objective,
        "utility": sol.utility,
        "schedules": sol.schedules.iter().map(DefenderSchedule::to_triples).collect::<Vec<_>>(),
        "intercepted": sol.z,
    });
    write_file(args.out.as_deref(), &serde_json::to_string_pretty(&report).unwrap())
}

fn cmd_export_dot(args: DotArgs) -> Outcome {
    let net = load_network(&args.network)?;
    let layered = build_layered(&net);
    let costs = match &args.strategies {
        Some(p) => {
            let mix = MixedStrategy::from_json(&net, &read(p)?)
                .map_err(|e| Failure::input(format!("{}: {e}", p.display())))?;
            Some(cost_table(&layered, mix.strategies(), mix.probs()).map_err(|e| Failure::other(e.to_string()))?)
        }
        None => None,
    };
    write_or_print(args.out.as_deref(), &export_dot(&layered, costs.as_ref()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Plan(a) => cmd_plan(a),
        Command::Bench(a) => cmd_bench(a),
        Command::GenStrategies(a) => cmd_gen(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::ExportLp(a) => cmd_export_lp(a),
        Command::ImportSolution(a) => cmd_import(a),
        Command::ExportDot(a) => cmd_export_dot(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
