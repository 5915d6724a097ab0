//! The online execution loop: agents are revealed at release times and the
//! policy commits paths under one of three controllability regimes.

mod hooks;
mod sequence;

pub use hooks::{HookContext, PlanningHook, ReplayHook, WastefulHook};
pub use sequence::{sequence_step, SequenceState};

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{
    detect_conflicts, evaluate, partition_by_release, Agent, AgentId, Metrics, OnlineInstance,
    Plan, RationalityBounds, Time,
};
use crate::search::{build_obstacles, plan_joint, plan_min_arrival, JointAgent, Objective, Origin, SearchLimits};
use crate::world::Graph;
use sequence::sequential_from;

/// Which agents a policy may (re)plan at a release time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControllabilityMode {
    /// Each newly revealed agent, one at a time in index order.
    NewSingle,
    /// All newly revealed agents jointly.
    New,
    /// Every revealed agent; executed prefixes stay fixed.
    All,
}

#[derive(Debug, Clone)]
pub enum Planner {
    Sequence,
    OptRational(Objective),
    Custom(Arc<dyn PlanningHook>),
}

#[derive(Debug, Clone)]
pub struct OnlinePolicy {
    pub mode: ControllabilityMode,
    pub planner: Planner,
    pub rationalized: bool,
}

impl OnlinePolicy {
    pub fn sequence() -> Self {
        OnlinePolicy {
            mode: ControllabilityMode::NewSingle,
            planner: Planner::Sequence,
            rationalized: false,
        }
    }

    pub fn opt_rational(mode: ControllabilityMode, objective: Objective) -> Self {
        OnlinePolicy {
            mode,
            planner: Planner::OptRational(objective),
            rationalized: false,
        }
    }

    pub fn custom(mode: ControllabilityMode, hook: Arc<dyn PlanningHook>) -> Self {
        OnlinePolicy {
            mode,
            planner: Planner::Custom(hook),
            rationalized: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if matches!(self.planner, Planner::Sequence) && self.mode != ControllabilityMode::NewSingle {
            return Err(Error::InvalidPolicy(format!(
                "SEQUENCE requires mode NewSingle, got {:?}",
                self.mode
            )));
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        let base = match &self.planner {
            Planner::Sequence => "sequence".to_string(),
            Planner::OptRational(Objective::Flowtime) => "opt-rational-flowtime".to_string(),
            Planner::OptRational(Objective::Makespan) => "opt-rational-makespan".to_string(),
            Planner::Custom(h) => h.name().to_string(),
        };
        let mode = match self.mode {
            ControllabilityMode::NewSingle => "new-single",
            ControllabilityMode::New => "new",
            ControllabilityMode::All => "all",
        };
        if self.rationalized {
            format!("rationalized-{base}/{mode}")
        } else {
            format!("{base}/{mode}")
        }
    }
}

/// Wraps `policy` so that every committed snapshot satisfies the rationality
/// bounds, falling back to sequential routing of the new agents otherwise.
pub fn rationalize_wrap(policy: OnlinePolicy) -> OnlinePolicy {
    OnlinePolicy {
        rationalized: true,
        ..policy
    }
}

/// Agents revealed at one release time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Batch {
    pub release: Time,
    pub agents: Vec<Agent>,
}

/// Reveals agents to the online loop. Adaptive sources may inspect the plan
/// committed so far.
pub trait RevealSource {
    fn graph(&self) -> Arc<Graph>;
    fn next_batch(&mut self, committed: &Plan) -> Result<Option<Batch>>;
}

/// Reveals a fixed instance group by group.
#[derive(Debug, Clone)]
pub struct FixedSource {
    instance: OnlineInstance,
    next: usize,
}

impl FixedSource {
    pub fn new(instance: OnlineInstance) -> Self {
        FixedSource { instance, next: 0 }
    }
}

impl RevealSource for FixedSource {
    fn graph(&self) -> Arc<Graph> {
        self.instance.graph.clone()
    }

    fn next_batch(&mut self, _committed: &Plan) -> Result<Option<Batch>> {
        let groups = partition_by_release(&self.instance);
        let Some(group) = groups.groups.get(self.next) else {
            return Ok(None);
        };
        self.next += 1;
        Ok(Some(Batch {
            release: group.release,
            agents: group
                .agents
                .iter()
                .map(|&id| *self.instance.agent(id))
                .collect(),
        }))
    }
}

/// State committed at one release time.
#[derive(Debug, Clone)]
pub struct Snapshot {
    /// Release group index, 0-based.
    pub k: usize,
    pub release: Time,
    /// Paths of every agent revealed so far.
    pub plan: Plan,
    pub bounds: RationalityBounds,
    pub metrics: Metrics,
    pub rational: bool,
    /// Whether the rationalization fallback replaced the policy's plan.
    pub fallback: bool,
}

#[derive(Debug, Clone)]
pub struct SimulationTrace {
    pub instance: OnlineInstance,
    pub snapshots: Vec<Snapshot>,
    pub plan: Plan,
    pub metrics: Metrics,
}

impl SimulationTrace {
    pub fn rational_everywhere(&self) -> bool {
        self.snapshots.iter().all(|s| s.rational)
    }

    pub fn fallbacks(&self) -> usize {
        self.snapshots.iter().filter(|s| s.fallback).count()
    }
}

/// Runs `policy` against the agents revealed by `source`.
pub fn run(source: &mut dyn RevealSource, policy: &OnlinePolicy, limits: &SearchLimits) -> Result<SimulationTrace> {
    policy.validate()?;
    let graph = source.graph();
    let mut revealed: Vec<Agent> = Vec::new();
    let mut committed = Plan::new();
    let mut snapshots = Vec::new();
    while let Some(batch) = source.next_batch(&committed)? {
        if batch.agents.is_empty() {
            return Err(Error::ProtocolViolation("empty batch".into()));
        }
        if let Some(prev) = snapshots.last().map(|s: &Snapshot| s.release) {
            if batch.release <= prev {
                return Err(Error::ProtocolViolation(format!(
                    "batch released at {} after {}",
                    batch.release, prev
                )));
            }
        }
        if let Some(a) = batch.agents.iter().find(|a| a.release != batch.release) {
            return Err(Error::ProtocolViolation(format!(
                "agent {} has release {} in batch {}",
                a.id, a.release, batch.release
            )));
        }
        let new_ids: Vec<AgentId> = batch.agents.iter().map(|a| a.id).collect();
        revealed.extend(batch.agents);
        let inst = OnlineInstance::new(graph.clone(), revealed.clone())?;
        let k = snapshots.len();
        let step = Step {
            graph: &graph,
            inst: &inst,
            new_ids: &new_ids,
            committed: &committed,
            now: batch.release,
            limits,
        };
        let (plan, fallback) = step.execute(policy)?;
        step.check(&plan, policy.mode)?;

        let ids: Vec<AgentId> = inst.agents().iter().map(|a| a.id).collect();
        let metrics = evaluate(&plan, &inst, &ids)?;
        let bounds = RationalityBounds::for_agents(&graph, inst.agents());
        let rational = metrics.flowtime <= bounds.flow_bound && metrics.makespan <= bounds.make_bound;
        snapshots.push(Snapshot {
            k,
            release: batch.release,
            plan: plan.clone(),
            bounds,
            metrics,
            rational,
            fallback,
        });
        committed = plan;
    }
    if revealed.is_empty() {
        return Err(Error::InvalidAgent("source revealed no agents".into()));
    }
    let instance = OnlineInstance::new(graph, revealed)?;
    let metrics = Metrics::of_plan(&committed, &instance)?;
    Ok(SimulationTrace {
        instance,
        snapshots,
        plan: committed,
        metrics,
    })
}

/// Whether the final plan meets the global flowtime and makespan bounds.
pub fn check_global_bounds(trace: &SimulationTrace, inst: &OnlineInstance) -> (bool, bool) {
    let bounds = RationalityBounds::for_agents(&inst.graph, inst.agents());
    (
        trace.metrics.flowtime <= bounds.flow_bound,
        trace.metrics.makespan <= bounds.make_bound,
    )
}

struct Step<'a> {
    graph: &'a Graph,
    inst: &'a OnlineInstance,
    new_ids: &'a [AgentId],
    committed: &'a Plan,
    now: Time,
    limits: &'a SearchLimits,
}

impl Step<'_> {
    fn execute(&self, policy: &OnlinePolicy) -> Result<(Plan, bool)> {
        if policy.mode == ControllabilityMode::NewSingle {
            return self.new_single(policy);
        }
        let plan = match policy.mode {
            ControllabilityMode::New => self.new_group(&policy.planner)?,
            _ => self.replan_all(&policy.planner)?,
        };
        if !policy.rationalized || self.is_rational(&plan)? {
            return Ok((plan, false));
        }
        // Keep the previous commitments and route the new agents sequentially
        // once everything planned so far has finished.
        let begin = if self.committed.is_empty() {
            self.now
        } else {
            self.now.max(self.committed.makespan())
        };
        let agents: Vec<Agent> = self.new_ids.iter().map(|&id| *self.inst.agent(id)).collect();
        let mut fallback = self.committed.clone();
        for (a, path) in agents.iter().zip(sequential_from(self.graph, begin, &agents)) {
            fallback.insert(a.id, path);
        }
        Ok((fallback, true))
    }

    fn is_rational(&self, plan: &Plan) -> Result<bool> {
        let ids: Vec<AgentId> = self.inst.agents().iter().map(|a| a.id).collect();
        let m = evaluate(plan, self.inst, &ids)?;
        let b = RationalityBounds::for_agents(self.graph, self.inst.agents());
        Ok(m.flowtime <= b.flow_bound && m.makespan <= b.make_bound)
    }

    fn context<'b>(&'b self, controllable: &'b [AgentId], committed: &'b Plan) -> HookContext<'b> {
        HookContext {
            graph: self.graph,
            revealed: self.inst.agents(),
            new_agents: self.new_ids,
            controllable,
            committed,
            now: self.now,
            limits: self.limits,
        }
    }

    fn hook_paths(&self, hook: &dyn PlanningHook, controllable: &[AgentId], committed: &Plan) -> Result<Plan> {
        let out = hook.plan(&self.context(controllable, committed))?;
        let wanted: BTreeSet<AgentId> = controllable.iter().copied().collect();
        let got: BTreeSet<AgentId> = out.agent_ids().collect();
        if wanted != got {
            return Err(Error::PolicyViolation(format!(
                "{} planned {:?}, expected {:?}",
                hook.name(),
                got,
                wanted
            )));
        }
        Ok(out)
    }

    fn new_single(&self, policy: &OnlinePolicy) -> Result<(Plan, bool)> {
        let mut plan = self.committed.clone();
        let mut fallback = false;
        for &id in self.new_ids {
            let agent = self.inst.agent(id);
            // SEQUENCE start rule for this agent given everything planned so far.
            let mut state = SequenceState {
                previous_arrival: plan.makespan(),
            };
            let candidate = match &policy.planner {
                Planner::Sequence => sequence_step(self.graph, &mut state, agent),
                Planner::OptRational(_) => {
                    let obstacles = build_obstacles(&plan, &BTreeSet::new());
                    plan_min_arrival(self.graph, agent, &obstacles, self.now, self.limits)?
                }
                Planner::Custom(hook) => {
                    let mut out = self.hook_paths(hook.as_ref(), &[id], &plan)?;
                    out.remove(id).ok_or(Error::UnplannedAgent(id))?
                }
            };
            let limit = agent.release.max(state.previous_arrival) + self.inst.dist(id);
            let path = if policy.rationalized && candidate.arrival_time() > limit {
                fallback = true;
                sequence_step(self.graph, &mut state, agent)
            } else {
                candidate
            };
            plan.insert(id, path);
        }
        Ok((plan, fallback))
    }

    fn new_group(&self, planner: &Planner) -> Result<Plan> {
        let mut plan = self.committed.clone();
        match planner {
            Planner::Sequence => unreachable!("rejected by OnlinePolicy::validate"),
            Planner::OptRational(objective) => {
                let frozen = build_obstacles(self.committed, &BTreeSet::new());
                let agents: Vec<JointAgent> = self
                    .new_ids
                    .iter()
                    .map(|&id| JointAgent {
                        agent: *self.inst.agent(id),
                        origin: Origin::OffGraph { earliest: self.now },
                    })
                    .collect();
                for (id, path) in plan_joint(self.graph, &agents, &frozen, *objective, self.limits)? {
                    plan.insert(id, path);
                }
            }
            Planner::Custom(hook) => {
                for (id, path) in self.hook_paths(hook.as_ref(), self.new_ids, self.committed)?.iter() {
                    plan.insert(id, path.clone());
                }
            }
        }
        Ok(plan)
    }

    fn replan_all(&self, planner: &Planner) -> Result<Plan> {
        let active: Vec<AgentId> = self
            .committed
            .iter()
            .filter(|(_, p)| p.arrival_time() > self.now)
            .map(|(id, _)| id)
            .collect();
        let mut controllable = active.clone();
        controllable.extend_from_slice(self.new_ids);
        let mut plan: Plan = self
            .committed
            .iter()
            .filter(|(_, p)| p.arrival_time() <= self.now)
            .map(|(id, p)| (id, p.clone()))
            .collect();
        match planner {
            Planner::Sequence => unreachable!("rejected by OnlinePolicy::validate"),
            Planner::OptRational(objective) => {
                let frozen = build_obstacles(&plan, &BTreeSet::new());
                let agents: Vec<JointAgent> = controllable
                    .iter()
                    .map(|&id| {
                        let origin = match self.committed.get(id) {
                            Some(p) if p.start_time <= self.now => Origin::OnGraph {
                                vertex: p.position(self.now).expect("active agent"),
                                time: self.now,
                            },
                            _ => Origin::OffGraph { earliest: self.now },
                        };
                        JointAgent {
                            agent: *self.inst.agent(id),
                            origin,
                        }
                    })
                    .collect();
                for (id, suffix) in plan_joint(self.graph, &agents, &frozen, *objective, self.limits)? {
                    let path = match self.committed.get(id) {
                        Some(p) if p.start_time <= self.now => p.splice(self.now, &suffix),
                        _ => suffix,
                    };
                    plan.insert(id, path);
                }
            }
            Planner::Custom(hook) => {
                for (id, path) in self.hook_paths(hook.as_ref(), &controllable, self.committed)?.iter() {
                    plan.insert(id, path.clone());
                }
            }
        }
        Ok(plan)
    }

    /// Validates a plan produced at this step: complete, valid paths,
    /// collision-free, and consistent with earlier commitments.
    fn check(&self, plan: &Plan, mode: ControllabilityMode) -> Result<()> {
        plan.validate(self.inst)?;
        if let Some(c) = detect_conflicts(plan).first() {
            return Err(Error::PolicyViolation(format!(
                "agents {} and {} collide at {} ({:?})",
                c.agents.0, c.agents.1, c.time, c.kind
            )));
        }
        for (id, old) in self.committed.iter() {
            let new = plan.get(id).ok_or(Error::UnplannedAgent(id))?;
            let consistent = match mode {
                ControllabilityMode::All if old.start_time > self.now => true,
                ControllabilityMode::All => {
                    new.start_time == old.start_time
                        && (old.start_time..=self.now.min(old.arrival_time()))
                            .all(|t| new.position(t) == old.position(t))
                        && (old.arrival_time() > self.now || new == old)
                }
                _ => new == old,
            };
            if !consistent {
                return Err(Error::PolicyViolation(format!(
                    "agent {id} deviates from its commitment at time {}",
                    self.now
                )));
            }
        }
        Ok(())
    }
}
