use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use online_mapf::online::ControllabilityMode;
use online_mapf::{Objective, SearchLimits, Time};

use crate::BenchError;

/// Instance families that need no input files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Line,
    GridRandom,
    TwoByTwoAdversary,
}

impl FromStr for Family {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "line" => Ok(Family::Line),
            "grid-random" => Ok(Family::GridRandom),
            "2x2-adversary" => Ok(Family::TwoByTwoAdversary),
            _ => Err(BenchError::Config(format!(
                "unknown family {s:?} (expected line, grid-random, 2x2-adversary)"
            ))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Line => "line",
            Family::GridRandom => "grid-random",
            Family::TwoByTwoAdversary => "2x2-adversary",
        })
    }
}

/// Shape of `grid-random` instances; the agent count comes from `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridShape {
    pub height: usize,
    pub width: usize,
    pub density: f64,
    pub max_release: Time,
}

impl Default for GridShape {
    fn default() -> Self {
        GridShape {
            height: 8,
            width: 8,
            density: 0.1,
            max_release: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Files { map: PathBuf, scen: PathBuf },
    Family { family: Family, m: usize, seed: u64, grid: GridShape },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    Sequence,
    OptRational,
    /// Replays the full-knowledge optimum; cheap but not rational.
    CustomIrrational,
    /// Delays every agent far beyond the rationality bounds.
    Wasteful,
}

impl FromStr for PolicyKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sequence" => Ok(PolicyKind::Sequence),
            "opt-rational" => Ok(PolicyKind::OptRational),
            "custom-irrational" => Ok(PolicyKind::CustomIrrational),
            "wasteful" => Ok(PolicyKind::Wasteful),
            _ => Err(BenchError::Config(format!(
                "unknown policy {s:?} (expected sequence, opt-rational, custom-irrational, wasteful)"
            ))),
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolicyKind::Sequence => "sequence",
            PolicyKind::OptRational => "opt-rational",
            PolicyKind::CustomIrrational => "custom-irrational",
            PolicyKind::Wasteful => "wasteful",
        })
    }
}

pub fn parse_mode(s: &str) -> Result<ControllabilityMode, BenchError> {
    match s {
        "new-single" => Ok(ControllabilityMode::NewSingle),
        "new" => Ok(ControllabilityMode::New),
        "all" => Ok(ControllabilityMode::All),
        _ => Err(BenchError::Config(format!(
            "unknown mode {s:?} (expected new-single, new, all)"
        ))),
    }
}

pub fn mode_name(mode: ControllabilityMode) -> &'static str {
    match mode {
        ControllabilityMode::NewSingle => "new-single",
        ControllabilityMode::New => "new",
        ControllabilityMode::All => "all",
    }
}

/// Cost measure reported and optimized. Latency is optimized as flowtime,
/// since the two differ by a constant on a fixed instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Flowtime,
    Makespan,
    Latency,
}

impl Metric {
    pub fn planner_objective(self) -> Objective {
        match self {
            Metric::Makespan => Objective::Makespan,
            Metric::Flowtime | Metric::Latency => Objective::Flowtime,
        }
    }
}

impl FromStr for Metric {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "flowtime" => Ok(Metric::Flowtime),
            "makespan" => Ok(Metric::Makespan),
            "latency" => Ok(Metric::Latency),
            _ => Err(BenchError::Config(format!(
                "unknown objective {s:?} (expected flowtime, makespan, latency)"
            ))),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Flowtime => "flowtime",
            Metric::Makespan => "makespan",
            Metric::Latency => "latency",
        })
    }
}

/// A policy as selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolicyChoice {
    pub kind: PolicyKind,
    pub mode: ControllabilityMode,
    pub rationalize: bool,
}

impl PolicyChoice {
    /// `kind` or `kind/mode`; SEQUENCE always runs in mode new-single.
    pub fn parse(s: &str, default_mode: ControllabilityMode, rationalize: bool) -> Result<Self, BenchError> {
        let (kind, mode) = match s.split_once('/') {
            Some((k, m)) => (k.parse()?, parse_mode(m)?),
            None => (s.parse()?, default_mode),
        };
        let mode = if kind == PolicyKind::Sequence {
            ControllabilityMode::NewSingle
        } else {
            mode
        };
        Ok(PolicyChoice {
            kind,
            mode,
            rationalize,
        })
    }

    pub fn label(&self) -> String {
        let base = format!("{}/{}", self.kind, mode_name(self.mode));
        if self.rationalize {
            format!("rationalized-{base}")
        } else {
            base
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub source: Source,
    pub policy: PolicyChoice,
    pub objective: Metric,
    pub limits: SearchLimits,
    pub out: Option<PathBuf>,
    /// Lift the size guard on the full-knowledge oracle.
    pub force: bool,
}

/// Largest instance the full-knowledge oracle is run on without `force`.
pub const ORACLE_MAX_AGENTS: usize = 4;
pub const ORACLE_MAX_VERTICES: usize = 25;
