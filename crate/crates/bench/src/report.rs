use std::fs;
use std::path::Path as FsPath;

use online_mapf::formats::write_plan_csv;
use online_mapf::online::SimulationTrace;
use online_mapf::{CompetitiveRatio, Metrics, OnlineInstance, Plan, RatioReport, Time};

use crate::config::Metric;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub report: RatioReport,
    /// `oracle` or `closed-form`.
    pub basis: &'static str,
}

/// Rationality check at one release time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SnapshotRow {
    pub k: usize,
    pub release: Time,
    pub agents: usize,
    pub flowtime: i64,
    pub makespan: i64,
    pub flow_bound: i64,
    pub make_bound: i64,
    pub rational: bool,
    pub fallback: bool,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub policy: String,
    pub objective: Metric,
    pub instance: OnlineInstance,
    pub plan: Plan,
    pub metrics: Metrics,
    pub conflicts: usize,
    pub snapshots: Vec<SnapshotRow>,
    pub ratio: Option<Ratio>,
}

const REPORT_HEADER: [&str; 13] = [
    "policy",
    "objective",
    "agents",
    "flowtime",
    "makespan",
    "latency",
    "conflicts",
    "rational",
    "alg_cost",
    "opt_cost",
    "ratio",
    "ratio_value",
    "additive_gap",
];

const RATIONALITY_HEADER: [&str; 9] = [
    "k",
    "release",
    "agents",
    "flowtime",
    "makespan",
    "flow_bound",
    "make_bound",
    "rational",
    "fallback",
];

fn ratio_value(r: &CompetitiveRatio) -> String {
    match r {
        CompetitiveRatio::Infinite => "inf".into(),
        finite => format!("{:.4}", finite.as_f64()),
    }
}

fn to_string(buf: Vec<u8>) -> String {
    String::from_utf8(buf).expect("csv output is UTF-8")
}

impl Report {
    pub(crate) fn from_trace(policy: String, objective: Metric, trace: SimulationTrace, conflicts: usize) -> Report {
        let snapshots = trace
            .snapshots
            .iter()
            .map(|s| SnapshotRow {
                k: s.k,
                release: s.release,
                agents: s.plan.len(),
                flowtime: s.metrics.flowtime,
                makespan: s.metrics.makespan,
                flow_bound: s.bounds.flow_bound,
                make_bound: s.bounds.make_bound,
                rational: s.rational,
                fallback: s.fallback,
            })
            .collect();
        Report {
            policy,
            objective,
            instance: trace.instance,
            plan: trace.plan,
            metrics: trace.metrics,
            conflicts,
            snapshots,
            ratio: None,
        }
    }

    pub fn rational_everywhere(&self) -> bool {
        self.snapshots.iter().all(|s| s.rational)
    }

    pub fn report_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(REPORT_HEADER)?;
        let (alg, opt, ratio, value, gap) = match &self.ratio {
            Some(r) => (
                r.report.algorithm_cost.to_string(),
                r.report.optimal_cost.to_string(),
                r.report.ratio.to_string(),
                ratio_value(&r.report.ratio),
                r.report.additive_gap.to_string(),
            ),
            None => Default::default(),
        };
        w.write_record([
            self.policy.clone(),
            self.objective.to_string(),
            self.instance.agent_count().to_string(),
            self.metrics.flowtime.to_string(),
            self.metrics.makespan.to_string(),
            self.metrics.latency.to_string(),
            self.conflicts.to_string(),
            self.rational_everywhere().to_string(),
            alg,
            opt,
            ratio,
            value,
            gap,
        ])?;
        Ok(to_string(w.into_inner().map_err(|e| e.into_error())?))
    }

    pub fn rationality_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(RATIONALITY_HEADER)?;
        for s in &self.snapshots {
            w.write_record([
                s.k.to_string(),
                s.release.to_string(),
                s.agents.to_string(),
                s.flowtime.to_string(),
                s.makespan.to_string(),
                s.flow_bound.to_string(),
                s.make_bound.to_string(),
                s.rational.to_string(),
                s.fallback.to_string(),
            ])?;
        }
        Ok(to_string(w.into_inner().map_err(|e| e.into_error())?))
    }

    pub fn plan_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        write_plan_csv(&self.plan, &self.instance, &mut buf)?;
        Ok(to_string(buf))
    }

    /// Writes `report.csv`, `rationality.csv` and `plan.csv`.
    pub fn write_dir(&self, dir: &FsPath) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.csv"), self.report_csv()?)?;
        fs::write(dir.join("rationality.csv"), self.rationality_csv()?)?;
        fs::write(dir.join("plan.csv"), self.plan_csv()?)?;
        Ok(())
    }

    /// One-line human-readable summary.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "{}: agents={} flowtime={} makespan={} latency={} conflicts={} rational={}",
            self.policy,
            self.instance.agent_count(),
            self.metrics.flowtime,
            self.metrics.makespan,
            self.metrics.latency,
            self.conflicts,
            self.rational_everywhere()
        );
        if let Some(r) = &self.ratio {
            s.push_str(&format!(
                " ratio({})={} ({}) gap={} [{}]",
                self.objective,
                r.report.ratio,
                ratio_value(&r.report.ratio),
                r.report.additive_gap,
                r.basis
            ));
        }
        s
    }
}

pub const SWEEP_HEADER: [&str; 6] = ["m", "policy", "flowtime", "makespan", "ratio_flow", "ratio_make"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepRow {
    pub m: usize,
    pub policy: String,
    pub flowtime: i64,
    pub makespan: i64,
    pub ratio_flow: CompetitiveRatio,
    pub ratio_make: CompetitiveRatio,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub growth_failures: Vec<String>,
}

impl SweepTable {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(SWEEP_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.m.to_string(),
                r.policy.clone(),
                r.flowtime.to_string(),
                r.makespan.to_string(),
                ratio_value(&r.ratio_flow),
                ratio_value(&r.ratio_make),
            ])?;
        }
        Ok(to_string(w.into_inner().map_err(|e| e.into_error())?))
    }
}
