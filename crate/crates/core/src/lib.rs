//! Online multi-agent path finding.
//!
//! Agents are revealed over time at release times, enter the graph at their
//! start vertex whenever they choose to start, and disappear upon reaching
//! their goal. This crate provides the environment model, timed paths and
//! plans with collision semantics, space-time and joint planners, the online
//! execution loop with its controllability regimes, and generators for the
//! adversarial instance families used in competitive analysis.

pub mod adversary;
pub mod error;
pub mod formats;
pub mod model;
pub mod online;
pub mod search;
pub mod world;

pub use error::{Error, Result};
pub use model::{
    detect_conflicts, evaluate, is_rational_at, occupancy, partition_by_release,
    rationality_bounds, Agent, AgentId, CompetitiveRatio, Conflict, ConflictKind, Metrics,
    OnlineInstance, Path, Plan, RatioReport, RationalityBounds, ReleaseGroup, ReleaseGroups,
    Time,
};
pub use search::{
    build_obstacles, offline_optimal, plan_min_arrival, DynamicObstacleSet, Objective,
    SearchLimits,
};
pub use world::{build_graph, build_grid, shortest_dist, Graph, GridMap, VertexId};
