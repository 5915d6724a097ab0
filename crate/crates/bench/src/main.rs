use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use online_mapf::SearchLimits;
use online_mapf_bench::config::parse_mode;
use online_mapf_bench::{
    cmd_ratio, cmd_reduce, cmd_solve, cmd_sweep, cmd_validate, BenchError, ExperimentConfig,
    Family, GridShape, PolicyChoice, Source,
};

/// Online multi-agent path finding experiments.
#[derive(Parser)]
#[command(name = "omapf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a policy and write its plan and rationality report.
    Solve(RunArgs),
    /// Run a policy and compare it with the full-knowledge optimum.
    Ratio(RunArgs),
    /// Tabulate costs and ratios over several instance sizes.
    Sweep(SweepArgs),
    /// Reduce a DIMACS formula to an online MAPF instance.
    ReduceSat {
        cnf: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse and check a world, scenario and optional plan.
    Validate {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        scen: PathBuf,
        #[arg(long)]
        plan: Option<PathBuf>,
    },
}

#[derive(Args)]
struct FamilyArgs {
    /// Number of agents (line: even m, also the strip length).
    #[arg(long, default_value_t = 4)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    height: usize,
    #[arg(long, default_value_t = 8)]
    width: usize,
    #[arg(long, default_value_t = 0.1)]
    density: f64,
    #[arg(long, default_value_t = 10)]
    max_release: i64,
}

impl FamilyArgs {
    fn grid(&self) -> GridShape {
        GridShape {
            height: self.height,
            width: self.width,
            density: self.density,
            max_release: self.max_release,
        }
    }
}

#[derive(Args)]
struct PolicyArgs {
    /// sequence, opt-rational, custom-irrational or wasteful.
    #[arg(long, default_value = "sequence")]
    policy: String,
    #[arg(long, default_value = "new")]
    mode: String,
    /// flowtime, makespan or latency.
    #[arg(long, default_value = "flowtime")]
    objective: String,
    #[arg(long)]
    rationalize: bool,
    #[arg(long)]
    node_budget: Option<u64>,
    /// Run the optimal oracle beyond its size guard.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    map: Option<PathBuf>,
    #[arg(long)]
    scen: Option<PathBuf>,
    /// line, grid-random or 2x2-adversary.
    #[arg(long)]
    family: Option<String>,
    #[command(flatten)]
    family_args: FamilyArgs,
    #[command(flatten)]
    policy: PolicyArgs,
    /// Directory for report.csv, rationality.csv and plan.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    family: String,
    /// Sizes, comma-separated.
    #[arg(long = "m", value_delimiter = ',', required = true)]
    ms: Vec<usize>,
    /// Policy (`kind` or `kind/mode`); repeatable.
    #[arg(long = "policy")]
    policies: Vec<String>,
    #[arg(long, default_value = "new")]
    mode: String,
    #[arg(long)]
    rationalize: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    node_budget: Option<u64>,
    #[arg(long)]
    force: bool,
    /// File to write the CSV table to, in addition to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn limits(node_budget: Option<u64>) -> SearchLimits {
    node_budget.map_or_else(SearchLimits::default, SearchLimits::with_node_budget)
}

fn experiment(args: RunArgs) -> Result<ExperimentConfig, BenchError> {
    let source = match (args.family, args.map, args.scen) {
        (Some(family), None, None) => Source::Family {
            family: family.parse()?,
            m: args.family_args.m,
            seed: args.family_args.seed,
            grid: args.family_args.grid(),
        },
        (None, Some(map), Some(scen)) => Source::Files { map, scen },
        _ => {
            return Err(BenchError::Config(
                "give exactly one source: --family, or --map together with --scen".into(),
            ))
        }
    };
    let p = args.policy;
    Ok(ExperimentConfig {
        source,
        policy: PolicyChoice::parse(&p.policy, parse_mode(&p.mode)?, p.rationalize)?,
        objective: p.objective.parse()?,
        limits: limits(p.node_budget),
        out: args.out,
        force: p.force,
    })
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Solve(args) => {
            let report = cmd_solve(&experiment(args)?)?;
            println!("{}", report.summary());
        }
        Command::Ratio(args) => {
            let report = cmd_ratio(&experiment(args)?)?;
            println!("{}", report.summary());
        }
        Command::Sweep(args) => {
            let family: Family = args.family.parse()?;
            let mode = parse_mode(&args.mode)?;
            let policies = args
                .policies
                .iter()
                .map(|p| PolicyChoice::parse(p, mode, args.rationalize))
                .collect::<Result<Vec<_>, _>>()?;
            let table = cmd_sweep(
                family,
                &args.ms,
                &policies,
                args.seed,
                GridShape::default(),
                &limits(args.node_budget),
                args.force,
            )?;
            let csv = table.to_csv()?;
            print!("{csv}");
            if let Some(out) = &args.out {
                std::fs::write(out, &csv).with_context(|| format!("writing {}", out.display()))?;
            }
            if !table.growth_failures.is_empty() {
                return Err(BenchError::Validation(table.growth_failures.join("; ")).into());
            }
        }
        Command::ReduceSat { cnf, out } => {
            let s = cmd_reduce(&cnf, &out)?;
            println!(
                "vertices={} edges={} agents={} distance-3 audit: {}",
                s.vertices,
                s.edges,
                s.agents,
                if s.distances_ok { "ok" } else { "FAILED" }
            );
            if !s.distances_ok {
                return Err(BenchError::Validation("distance audit failed".into()).into());
            }
        }
        Command::Validate { map, scen, plan } => {
            let s = cmd_validate(&map, &scen, plan.as_deref())?;
            print!("ok: vertices={} agents={}", s.vertices, s.agents);
            if let Some(m) = s.plan {
                print!(" flowtime={} makespan={} latency={}", m.flowtime, m.makespan, m.latency);
            }
            println!();
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err.downcast_ref::<BenchError>().map_or(2, BenchError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
