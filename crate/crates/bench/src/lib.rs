//! Experiment harness: runs online policies on instance files, generated
//! families or adaptive adversaries, compares them with full-knowledge
//! optima, and writes CSV reports.

pub mod config;
mod report;

use std::fs;
use std::path::Path as FsPath;
use std::sync::Arc;

use online_mapf::adversary::{
    gen_2x2_adversary, gen_line, gen_random, line_closed_forms, line_witness_plan, reduce_sat,
    RandomSpec,
};
use online_mapf::formats::{read_dimacs, read_scenario, read_world, write_graph, write_labels, write_scenario};
use online_mapf::online::{
    rationalize_wrap, run, ControllabilityMode, FixedSource, OnlinePolicy, ReplayHook,
    SimulationTrace, WastefulHook,
};
use online_mapf::{
    detect_conflicts, offline_optimal, DynamicObstacleSet, Metrics, OnlineInstance, Plan,
    RatioReport, SearchLimits,
};

pub use config::{
    ExperimentConfig, Family, GridShape, Metric, PolicyChoice, PolicyKind, Source,
    ORACLE_MAX_AGENTS, ORACLE_MAX_VERTICES,
};
pub use report::{Ratio, Report, SnapshotRow, SweepRow, SweepTable, SWEEP_HEADER};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("{0}")]
    Config(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] online_mapf::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl BenchError {
    /// 1 for failed checks and exhausted searches, 2 for bad input or configuration.
    pub fn exit_code(&self) -> i32 {
        use online_mapf::Error as E;
        match self {
            BenchError::Validation(_) => 1,
            BenchError::Core(
                E::InvalidPath { .. }
                | E::UnplannedAgent(_)
                | E::PolicyViolation(_)
                | E::ProtocolViolation(_)
                | E::NotMakespanThree(_)
                | E::NonIntegerResult { .. }
                | E::BudgetExhausted { .. },
            ) => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;

enum Prepared {
    Fixed { instance: OnlineInstance, line_m: Option<usize> },
    Adversary,
}

fn prepare(source: &Source) -> Result<Prepared> {
    Ok(match source {
        Source::Files { map, scen } => {
            let graph = Arc::new(read_world(map)?);
            Prepared::Fixed {
                instance: read_scenario(scen, graph)?,
                line_m: None,
            }
        }
        Source::Family { family: Family::Line, m, .. } => Prepared::Fixed {
            instance: gen_line(*m)?,
            line_m: Some(*m),
        },
        Source::Family { family: Family::GridRandom, m, seed, grid } => Prepared::Fixed {
            instance: gen_random(&RandomSpec {
                height: grid.height,
                width: grid.width,
                density: grid.density,
                agents: *m,
                max_release: grid.max_release,
                seed: *seed,
            })?,
            line_m: None,
        },
        Source::Family { family: Family::TwoByTwoAdversary, .. } => Prepared::Adversary,
    })
}

/// Full-knowledge optimum, refused beyond the size guard unless forced.
fn guarded_oracle(inst: &OnlineInstance, metric: Metric, limits: &SearchLimits, force: bool) -> Result<Plan> {
    if !force && !oracle_tractable(inst) {
        return Err(BenchError::Config(format!(
            "oracle limited to {ORACLE_MAX_AGENTS} agents and {ORACLE_MAX_VERTICES} vertices \
             (instance has {} and {}); pass --force to run it anyway",
            inst.agent_count(),
            inst.graph.vertex_count()
        )));
    }
    Ok(offline_optimal(
        &inst.graph,
        inst.agents(),
        &DynamicObstacleSet::new(),
        metric.planner_objective(),
        limits,
    )?)
}

fn oracle_tractable(inst: &OnlineInstance) -> bool {
    inst.agent_count() <= ORACLE_MAX_AGENTS && inst.graph.vertex_count() <= ORACLE_MAX_VERTICES
}

fn build_policy(choice: &PolicyChoice, metric: Metric, prepared: &Prepared, limits: &SearchLimits, force: bool) -> Result<OnlinePolicy> {
    let policy = match choice.kind {
        PolicyKind::Sequence => OnlinePolicy::sequence(),
        PolicyKind::OptRational => OnlinePolicy::opt_rational(choice.mode, metric.planner_objective()),
        PolicyKind::Wasteful => OnlinePolicy::custom(choice.mode, Arc::new(WastefulHook)),
        PolicyKind::CustomIrrational => {
            let plan = match prepared {
                Prepared::Fixed { line_m: Some(m), .. } => line_witness_plan(*m)?,
                Prepared::Fixed { instance, .. } => guarded_oracle(instance, metric, limits, force)?,
                Prepared::Adversary => {
                    return Err(BenchError::Config(
                        "custom-irrational replays a precomputed plan and needs a fixed instance".into(),
                    ))
                }
            };
            OnlinePolicy::custom(choice.mode, Arc::new(ReplayHook::new(plan)))
        }
    };
    Ok(if choice.rationalize {
        rationalize_wrap(policy)
    } else {
        policy
    })
}

fn execute(prepared: &Prepared, policy: &OnlinePolicy, limits: &SearchLimits) -> Result<SimulationTrace> {
    Ok(match prepared {
        Prepared::Fixed { instance, .. } => run(&mut FixedSource::new(instance.clone()), policy, limits)?,
        Prepared::Adversary => run(&mut gen_2x2_adversary(), policy, limits)?,
    })
}

fn solve_prepared(config: &ExperimentConfig, prepared: &Prepared) -> Result<Report> {
    let policy = build_policy(&config.policy, config.objective, prepared, &config.limits, config.force)?;
    let trace = execute(prepared, &policy, &config.limits)?;
    let conflicts = detect_conflicts(&trace.plan).len();
    if conflicts > 0 {
        return Err(BenchError::Validation(format!("{conflicts} conflicts in the final plan")));
    }
    if trace.plan.len() != trace.instance.agent_count() {
        return Err(BenchError::Validation("final plan misses agents".into()));
    }
    Ok(Report::from_trace(config.policy.label(), config.objective, trace, conflicts))
}

/// Optimal cost of `metric` on the revealed instance and where it came from.
fn optimal_cost(prepared: &Prepared, inst: &OnlineInstance, metric: Metric, limits: &SearchLimits, force: bool) -> Result<(i64, &'static str)> {
    if let Prepared::Fixed { line_m: Some(m), .. } = prepared {
        if !force && !oracle_tractable(inst) {
            let f = line_closed_forms(*m)?;
            let cost = match metric {
                Metric::Flowtime => f.opt_flow,
                Metric::Makespan => f.opt_make,
                Metric::Latency => f.opt_flow - inst.total_dist(),
            };
            return Ok((cost, "closed-form"));
        }
    }
    let plan = guarded_oracle(inst, metric, limits, force)?;
    let m = Metrics::of_plan(&plan, inst)?;
    Ok((pick(&m, metric), "oracle"))
}

fn pick(m: &Metrics, metric: Metric) -> i64 {
    match metric {
        Metric::Flowtime => m.flowtime,
        Metric::Makespan => m.makespan,
        Metric::Latency => m.latency,
    }
}

fn write_outputs(report: &Report, out: Option<&FsPath>) -> Result<()> {
    if let Some(dir) = out {
        report.write_dir(dir)?;
    }
    Ok(())
}

/// Runs the configured policy and validates the resulting plan.
pub fn cmd_solve(config: &ExperimentConfig) -> Result<Report> {
    let prepared = prepare(&config.source)?;
    let report = solve_prepared(config, &prepared)?;
    write_outputs(&report, config.out.as_deref())?;
    Ok(report)
}

/// Like [`cmd_solve`], plus the ratio against the full-knowledge optimum of
/// the revealed instance.
pub fn cmd_ratio(config: &ExperimentConfig) -> Result<Report> {
    let prepared = prepare(&config.source)?;
    let mut report = solve_prepared(config, &prepared)?;
    let (opt, basis) = optimal_cost(&prepared, &report.instance, config.objective, &config.limits, config.force)?;
    let alg = pick(&report.metrics, config.objective);
    report.ratio = Some(Ratio {
        report: RatioReport::new(alg, opt),
        basis,
    });
    write_outputs(&report, config.out.as_deref())?;
    Ok(report)
}

/// Flowtime and makespan ratios of every policy at every `m`.
///
/// On the line family, ratios of policies that only plan new agents must
/// grow strictly with `m` from `m = 4` on; violations are collected in
/// [`SweepTable::growth_failures`].
pub fn cmd_sweep(
    family: Family,
    ms: &[usize],
    policies: &[PolicyChoice],
    seed: u64,
    grid: GridShape,
    limits: &SearchLimits,
    force: bool,
) -> Result<SweepTable> {
    let mut table = SweepTable::default();
    for policy in policies {
        let mut previous: Option<(usize, f64, f64)> = None;
        for &m in ms {
            let source = Source::Family { family, m, seed, grid };
            let prepared = prepare(&source)?;
            let config = ExperimentConfig {
                source,
                policy: *policy,
                objective: Metric::Flowtime,
                limits: *limits,
                out: None,
                force,
            };
            let report = solve_prepared(&config, &prepared)?;
            let inst = &report.instance;
            let (opt_flow, _) = optimal_cost(&prepared, inst, Metric::Flowtime, limits, force)?;
            let (opt_make, _) = optimal_cost(&prepared, inst, Metric::Makespan, limits, force)?;
            let row = SweepRow {
                m,
                policy: policy.label(),
                flowtime: report.metrics.flowtime,
                makespan: report.metrics.makespan,
                ratio_flow: RatioReport::new(report.metrics.flowtime, opt_flow).ratio,
                ratio_make: RatioReport::new(report.metrics.makespan, opt_make).ratio,
            };
            let checked = family == Family::Line && policy.mode != ControllabilityMode::All && m >= 4;
            let (rf, rm) = (row.ratio_flow.as_f64(), row.ratio_make.as_f64());
            if checked {
                if let Some((pm, pf, pmk)) = previous {
                    if !(rf > pf && rm > pmk) {
                        table.growth_failures.push(format!(
                            "{}: ratios at m={m} ({rf:.4}, {rm:.4}) do not exceed m={pm} ({pf:.4}, {pmk:.4})",
                            row.policy
                        ));
                    }
                }
                previous = Some((m, rf, rm));
            }
            table.rows.push(row);
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReduceSummary {
    pub vertices: usize,
    pub edges: usize,
    pub agents: usize,
    /// Every agent's shortest distance is 3.
    pub distances_ok: bool,
}

/// Reduces a DIMACS formula and writes `graph.txt`, `scenario.txt` and
/// `labels.txt` into `out_dir`.
pub fn cmd_reduce(cnf: &FsPath, out_dir: &FsPath) -> Result<ReduceSummary> {
    let sat = read_dimacs(cnf)?;
    let out = reduce_sat(&sat)?;
    let inst = &out.instance;
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("graph.txt"), write_graph(&inst.graph))?;
    fs::write(out_dir.join("scenario.txt"), write_scenario(inst))?;
    fs::write(out_dir.join("labels.txt"), write_labels(&out))?;
    Ok(ReduceSummary {
        vertices: inst.graph.vertex_count(),
        edges: inst.graph.edge_count(),
        agents: inst.agent_count(),
        distances_ok: inst.agents().iter().all(|a| inst.dist(a.id) == 3),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidateSummary {
    pub vertices: usize,
    pub agents: usize,
    /// Metrics of the plan file, if one was given.
    pub plan: Option<Metrics>,
}

/// Parses the world and scenario (and optionally a plan CSV) and checks all
/// invariants: a plan must be complete, valid and collision-free.
pub fn cmd_validate(map: &FsPath, scen: &FsPath, plan: Option<&FsPath>) -> Result<ValidateSummary> {
    let graph = Arc::new(read_world(map)?);
    let inst = read_scenario(scen, graph)?;
    let metrics = match plan {
        None => None,
        Some(path) => {
            let text = fs::read_to_string(path)?;
            let plan = online_mapf::formats::parse_plan_csv(&text, &path.display().to_string())?;
            plan.validate(&inst).map_err(|e| BenchError::Validation(e.to_string()))?;
            if let Some(a) = inst.agents().iter().find(|a| !plan.contains(a.id)) {
                return Err(BenchError::Validation(format!("agent {} has no path", a.id)));
            }
            if let Some(c) = detect_conflicts(&plan).first() {
                return Err(BenchError::Validation(format!(
                    "agents {} and {} collide at time {} ({:?})",
                    c.agents.0, c.agents.1, c.time, c.kind
                )));
            }
            Some(Metrics::of_plan(&plan, &inst)?)
        }
    };
    Ok(ValidateSummary {
        vertices: inst.graph.vertex_count(),
        agents: inst.agent_count(),
        plan: metrics,
    })
}
