//! Space-time planners: single-agent minimum arrival against dynamic
//! obstacles, and exact joint planning for small agent sets.

mod joint;
mod obstacles;
mod single;

pub use joint::JointAgent;
pub use obstacles::{build_obstacles, DynamicObstacleSet};
pub use single::{plan_min_arrival, Origin};

use crate::error::Result;
use crate::model::{Agent, Plan, Time};
use crate::world::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    Flowtime,
    Makespan,
}

/// Bounds on a single search call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimits {
    /// Latest admissible arrival time. `None` derives it from the problem; a
    /// value below the completeness bound is raised to that bound.
    pub horizon_bound: Option<Time>,
    /// Maximum number of search states expanded.
    pub node_budget: u64,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            horizon_bound: None,
            node_budget: 10_000_000,
        }
    }
}

impl SearchLimits {
    pub fn with_node_budget(node_budget: u64) -> Self {
        SearchLimits {
            node_budget,
            ..Self::default()
        }
    }

    /// Arrival bound for one agent entering at or after `earliest`: once every
    /// obstacle has vanished a shortest path needs fewer than `|V|` steps.
    pub fn single_horizon(&self, graph: &Graph, obstacles: &DynamicObstacleSet, earliest: Time) -> Time {
        let floor = obstacles.horizon().max(earliest) + graph.vertex_count() as Time;
        self.horizon_bound.map_or(floor, |h| h.max(floor))
    }

    /// Arrival bound for a joint plan: sequential routing after the obstacles
    /// and the last release finishes within the summed distances, and an
    /// optimal plan never delays any agent beyond the total cost of that plan.
    pub fn joint_horizon(&self, graph: &Graph, obstacles: &DynamicObstacleSet, agents: &[JointAgent]) -> Time {
        let latest = agents
            .iter()
            .map(|a| a.origin.time().max(a.agent.release))
            .max()
            .unwrap_or(0);
        let total: Time = agents
            .iter()
            .map(|a| Time::from(graph.distance(a.agent.start, a.agent.goal)))
            .sum();
        let floor = obstacles.horizon().max(latest)
            + (agents.len() as Time + 1) * total.max(1)
            + graph.vertex_count() as Time;
        self.horizon_bound.map_or(floor, |h| h.max(floor))
    }
}

/// Jointly plans agents (all starting off-graph, entering at or after their
/// release) so that the objective over them is minimal, avoiding `frozen`.
pub fn offline_optimal(
    graph: &Graph,
    agents: &[Agent],
    frozen: &DynamicObstacleSet,
    objective: Objective,
    limits: &SearchLimits,
) -> Result<Plan> {
    let joint: Vec<JointAgent> = agents
        .iter()
        .map(|&agent| JointAgent {
            agent,
            origin: Origin::OffGraph {
                earliest: agent.release,
            },
        })
        .collect();
    let plan = plan_joint(graph, &joint, frozen, objective, limits)?;
    Ok(plan.into_iter().collect())
}

/// Joint plan for agents with arbitrary origins. Paths of on-graph agents
/// start at their origin time and vertex.
pub fn plan_joint(
    graph: &Graph,
    agents: &[JointAgent],
    frozen: &DynamicObstacleSet,
    objective: Objective,
    limits: &SearchLimits,
) -> Result<Vec<(crate::model::AgentId, crate::model::Path)>> {
    if agents.is_empty() {
        return Ok(Vec::new());
    }
    let horizon = limits.joint_horizon(graph, frozen, agents);
    joint::solve(graph, agents, frozen, objective, horizon, limits.node_budget)
}
