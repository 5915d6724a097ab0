//! Custom planning policies plugged into the online loop.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{Agent, AgentId, Plan, Time};
use crate::search::{build_obstacles, plan_min_arrival, SearchLimits};
use crate::world::Graph;

/// What a custom policy sees at a release time.
pub struct HookContext<'a> {
    pub graph: &'a Graph,
    /// Every agent revealed so far, including the new ones.
    pub revealed: &'a [Agent],
    pub new_agents: &'a [AgentId],
    /// Agents the policy must return paths for.
    pub controllable: &'a [AgentId],
    /// Plan committed before this release time.
    pub committed: &'a Plan,
    pub now: Time,
    pub limits: &'a SearchLimits,
}

impl HookContext<'_> {
    pub fn agent(&self, id: AgentId) -> &Agent {
        &self.revealed[id.0 as usize - 1]
    }
}

/// A planner for the controllable set. Returned paths must be valid for their
/// agents and must not collide with each other or with committed paths of
/// non-controllable agents; the online loop rejects plans that do.
pub trait PlanningHook: Send + Sync {
    fn name(&self) -> &str;
    fn plan(&self, ctx: &HookContext<'_>) -> Result<Plan>;
}

impl fmt::Debug for dyn PlanningHook {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PlanningHook({})", self.name())
    }
}

/// Replays a precomputed plan, e.g. an offline optimum. With full knowledge
/// baked in it can beat every rational policy while itself being irrational.
#[derive(Debug, Clone)]
pub struct ReplayHook {
    plan: Plan,
}

impl ReplayHook {
    pub fn new(plan: Plan) -> Self {
        ReplayHook { plan }
    }
}

impl PlanningHook for ReplayHook {
    fn name(&self) -> &str {
        "replay"
    }

    fn plan(&self, ctx: &HookContext<'_>) -> Result<Plan> {
        ctx.controllable
            .iter()
            .map(|&id| {
                let path = ctx
                    .committed
                    .get(id)
                    .or_else(|| self.plan.get(id))
                    .ok_or(Error::UnplannedAgent(id))?;
                Ok((id, path.clone()))
            })
            .collect()
    }
}

/// Delays every new agent by `|revealed| * sum(dist) + 1` steps before
/// entering, then takes its earliest collision-free path. Previously planned
/// controllable agents keep their committed paths.
#[derive(Debug, Clone, Copy, Default)]
pub struct WastefulHook;

impl PlanningHook for WastefulHook {
    fn name(&self) -> &str {
        "wasteful"
    }

    fn plan(&self, ctx: &HookContext<'_>) -> Result<Plan> {
        let total: Time = ctx
            .revealed
            .iter()
            .map(|a| Time::from(ctx.graph.distance(a.start, a.goal)))
            .sum();
        let delay = ctx.revealed.len() as Time * total + 1;
        let new: BTreeSet<AgentId> = ctx.new_agents.iter().copied().collect();
        let mut out = Plan::new();
        for &id in ctx.controllable.iter().filter(|id| !new.contains(id)) {
            let path = ctx.committed.get(id).ok_or(Error::UnplannedAgent(id))?;
            out.insert(id, path.clone());
        }
        let mut known = ctx.committed.clone();
        for &id in ctx.controllable.iter().filter(|id| new.contains(id)) {
            let obstacles = build_obstacles(&known, &BTreeSet::new());
            let agent = ctx.agent(id);
            let path = plan_min_arrival(ctx.graph, agent, &obstacles, ctx.now + delay, ctx.limits)?;
            known.insert(id, path.clone());
            out.insert(id, path);
        }
        Ok(out)
    }
}
