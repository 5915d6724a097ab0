//! Exact joint planning for small agent sets.
//!
//! Independence detection plans every agent alone, then repeatedly merges the
//! groups of the first conflicting pair and replans the merged group jointly.
//! Joint groups are solved by A* with operator decomposition over states
//! `(time, status per agent)` where a status is off-graph-pending, a vertex,
//! or done. Costs are compared lexicographically as (primary, secondary)
//! objective.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use super::obstacles::DynamicObstacleSet;
use super::single::{self, Origin};
use super::Objective;
use crate::error::{Error, Result};
use crate::model::{detect_conflicts, Agent, AgentId, Path, Plan, Time};
use crate::world::{Graph, VertexId};

/// An agent to plan together with where its plan begins.
#[derive(Debug, Clone, Copy)]
pub struct JointAgent {
    pub agent: Agent,
    pub origin: Origin,
}

const PENDING: u32 = u32::MAX - 1;
const DONE: u32 = u32::MAX;

/// Plans `agents` jointly against `frozen`, minimizing `objective`.
///
/// Paths for on-graph origins start at the origin time and vertex; callers
/// splice them onto the executed prefix.
pub(crate) fn solve(
    graph: &Graph,
    agents: &[JointAgent],
    frozen: &DynamicObstacleSet,
    objective: Objective,
    horizon: Time,
    budget: u64,
) -> Result<Vec<(AgentId, Path)>> {
    let mut agents = agents.to_vec();
    agents.sort_by_key(|a| a.agent.id);
    let mut spent = 0u64;
    let mut groups: Vec<Vec<usize>> = (0..agents.len()).map(|i| vec![i]).collect();
    let mut plans: Vec<Vec<Path>> = Vec::with_capacity(groups.len());
    for group in &groups {
        plans.push(solve_group(graph, &agents, group, frozen, objective, horizon, budget, &mut spent)?);
    }
    loop {
        let mut combined = Plan::new();
        let mut group_of: HashMap<AgentId, usize> = HashMap::new();
        for (gi, (group, paths)) in groups.iter().zip(&plans).enumerate() {
            for (&i, path) in group.iter().zip(paths) {
                combined.insert(agents[i].agent.id, path.clone());
                group_of.insert(agents[i].agent.id, gi);
            }
        }
        let clash = detect_conflicts(&combined)
            .into_iter()
            .find(|c| group_of[&c.agents.0] != group_of[&c.agents.1]);
        let Some(clash) = clash else {
            return Ok(combined.iter().map(|(id, p)| (id, p.clone())).collect());
        };
        let (a, b) = (group_of[&clash.agents.0], group_of[&clash.agents.1]);
        let (keep, drop) = (a.min(b), a.max(b));
        let moved = groups.remove(drop);
        plans.remove(drop);
        groups[keep].extend(moved);
        groups[keep].sort_unstable();
        plans[keep] = solve_group(graph, &agents, &groups[keep], frozen, objective, horizon, budget, &mut spent)?;
    }
}

#[allow(clippy::too_many_arguments)]
fn solve_group(
    graph: &Graph,
    agents: &[JointAgent],
    members: &[usize],
    frozen: &DynamicObstacleSet,
    objective: Objective,
    horizon: Time,
    budget: u64,
    spent: &mut u64,
) -> Result<Vec<Path>> {
    let remaining = budget.saturating_sub(*spent);
    if let [only] = members {
        let a = &agents[*only];
        let out = single::search(
            graph,
            a.agent.start,
            a.agent.goal,
            a.origin,
            frozen,
            horizon,
            remaining,
        )?;
        *spent += out.expanded;
        return Ok(vec![out.path]);
    }
    let group: Vec<JointAgent> = members.iter().map(|&i| agents[i]).collect();
    let mut search = OdSearch::new(graph, &group, frozen, objective, horizon, remaining);
    let result = search.run();
    *spent += search.expanded;
    result
}

struct Node {
    t: Time,
    idx: usize,
    cur: Box<[u32]>,
    next: Box<[u32]>,
    flow: i64,
    last_arrival: Time,
    parent: u32,
}

struct OdSearch<'a> {
    graph: &'a Graph,
    agents: &'a [JointAgent],
    frozen: &'a DynamicObstacleSet,
    objective: Objective,
    horizon: Time,
    budget: u64,
    expanded: u64,
    t0: Time,
    to_goal: Vec<&'a [u32]>,
    nodes: Vec<Node>,
    best: HashMap<Box<[u32]>, i64>,
    open: BinaryHeap<Reverse<(i64, i64, Reverse<i64>, u64, u32)>>,
    seq: u64,
}

impl<'a> OdSearch<'a> {
    fn new(
        graph: &'a Graph,
        agents: &'a [JointAgent],
        frozen: &'a DynamicObstacleSet,
        objective: Objective,
        horizon: Time,
        budget: u64,
    ) -> Self {
        let t0 = agents.iter().map(|a| a.origin.time()).min().unwrap_or(0);
        OdSearch {
            graph,
            agents,
            frozen,
            objective,
            horizon,
            budget,
            expanded: 0,
            t0,
            to_goal: agents.iter().map(|a| graph.distances_from(a.agent.goal)).collect(),
            nodes: Vec::new(),
            best: HashMap::new(),
            open: BinaryHeap::new(),
            seq: 0,
        }
    }

    fn earliest(&self, i: usize) -> Time {
        match self.agents[i].origin {
            Origin::OffGraph { earliest } => earliest.max(self.agents[i].agent.release),
            Origin::OnGraph { time, .. } => time,
        }
    }

    fn run(&mut self) -> Result<Vec<Path>> {
        let n = self.agents.len();
        // Virtual root one step before t0: the first expansion places on-graph
        // agents and lets pending agents enter at t0.
        let cur: Box<[u32]> = (0..n)
            .map(|i| match self.agents[i].origin {
                Origin::OnGraph { vertex, .. } => vertex.0,
                Origin::OffGraph { .. } => PENDING,
            })
            .collect();
        let root = Node {
            t: self.t0 - 1,
            idx: 0,
            next: vec![PENDING; n].into_boxed_slice(),
            cur,
            flow: 0,
            last_arrival: self.t0,
            parent: u32::MAX,
        };
        self.push(root);
        while let Some(Reverse((_, _, _, _, id))) = self.open.pop() {
            let node = &self.nodes[id as usize];
            if node.idx == 0 && node.t >= self.t0 && node.cur.iter().all(|&s| s == DONE) {
                return Ok(self.reconstruct(id));
            }
            if self.best.get(&self.key(node)).is_some_and(|&g| g < node.flow) {
                continue;
            }
            if self.expanded >= self.budget {
                return Err(Error::BudgetExhausted {
                    expanded: self.expanded,
                    horizon: self.horizon,
                });
            }
            self.expanded += 1;
            self.expand(id);
        }
        Err(Error::BudgetExhausted {
            expanded: self.expanded,
            horizon: self.horizon,
        })
    }

    fn key(&self, node: &Node) -> Box<[u32]> {
        let mut key = Vec::with_capacity(2 + node.cur.len() + node.idx);
        key.push((node.t - self.t0 + 1) as u32);
        key.push(node.idx as u32);
        key.extend_from_slice(&node.cur);
        key.extend_from_slice(&node.next[..node.idx]);
        key.into_boxed_slice()
    }

    fn push(&mut self, node: Node) {
        let key = self.key(&node);
        match self.best.get(&key) {
            Some(&g) if g <= node.flow => return,
            _ => {
                self.best.insert(key, node.flow);
            }
        }
        let (flow_f, make_f) = self.estimate(&node);
        let (f1, f2) = match self.objective {
            Objective::Flowtime => (flow_f, make_f),
            Objective::Makespan => (make_f, flow_f),
        };
        let depth = (node.t - self.t0 + 1) * self.agents.len() as i64 + node.idx as i64;
        let id = self.nodes.len() as u32;
        self.nodes.push(node);
        self.seq += 1;
        self.open.push(Reverse((f1, f2, Reverse(depth), self.seq, id)));
    }

    /// Lower bounds on (final flowtime, final makespan) through `node`.
    fn estimate(&self, node: &Node) -> (i64, i64) {
        let mut flow = node.flow;
        let mut make = node.last_arrival;
        for i in 0..self.agents.len() {
            let (status, tau) = if i < node.idx {
                (node.next[i], node.t + 1)
            } else {
                (node.cur[i], node.t)
            };
            let a = &self.agents[i].agent;
            match status {
                DONE => {}
                PENDING => {
                    let enter = (tau + 1).max(self.earliest(i));
                    let arrive = enter + i64::from(self.to_goal[i][a.start.index()]);
                    flow += arrive - tau.max(a.release).max(self.t0);
                    make = make.max(arrive);
                }
                v => {
                    let d = i64::from(self.to_goal[i][v as usize]);
                    flow += d;
                    make = make.max(tau + d);
                }
            }
        }
        (flow, make)
    }

    fn expand(&mut self, id: u32) {
        let node = &self.nodes[id as usize];
        let t = node.t;
        let virtual_step = t < self.t0;
        if t + 1 > self.horizon {
            return;
        }
        let mut next = node.next.to_vec();
        let mut flow = node.flow;
        let mut last_arrival = node.last_arrival;
        let cur = node.cur.clone();
        let mut i = node.idx;
        // Agents with a single option are applied in place.
        loop {
            if i == self.agents.len() {
                let child = Node {
                    t: t + 1,
                    idx: 0,
                    next: vec![PENDING; next.len()].into_boxed_slice(),
                    cur: next.into_boxed_slice(),
                    flow,
                    last_arrival,
                    parent: id,
                };
                self.push(child);
                return;
            }
            let options = self.options(i, &cur, &next[..i], t, virtual_step);
            let a = &self.agents[i].agent;
            let charged = !virtual_step && cur[i] != DONE && a.release <= t;
            let step_flow = flow + i64::from(charged);
            match options.len() {
                0 => return,
                1 => {
                    next[i] = options[0];
                    flow = step_flow;
                    if options[0] == DONE && cur[i] != DONE {
                        last_arrival = t + 1;
                    }
                    i += 1;
                }
                _ => {
                    for &opt in &options {
                        let mut child_next = next.clone();
                        child_next[i] = opt;
                        let arrival = if opt == DONE && cur[i] != DONE {
                            t + 1
                        } else {
                            last_arrival
                        };
                        let child = if i + 1 == self.agents.len() {
                            Node {
                                t: t + 1,
                                idx: 0,
                                next: vec![PENDING; child_next.len()].into_boxed_slice(),
                                cur: child_next.into_boxed_slice(),
                                flow: step_flow,
                                last_arrival: arrival,
                                parent: id,
                            }
                        } else {
                            Node {
                                t,
                                idx: i + 1,
                                next: child_next.into_boxed_slice(),
                                cur: cur.clone(),
                                flow: step_flow,
                                last_arrival: arrival,
                                parent: id,
                            }
                        };
                        self.push(child);
                    }
                    return;
                }
            }
        }
    }

    /// Feasible statuses at `t + 1` for agent `i`, given earlier agents' choices.
    fn options(&self, i: usize, cur: &[u32], assigned: &[u32], t: Time, virtual_step: bool) -> Vec<u32> {
        let a = &self.agents[i].agent;
        let vertex_ok = |u: u32| {
            self.frozen.is_vertex_free(VertexId(u), t + 1) && !assigned.contains(&u)
        };
        match cur[i] {
            DONE => vec![DONE],
            PENDING => {
                let mut out = vec![PENDING];
                if self.earliest(i) <= t + 1 && vertex_ok(a.start.0) {
                    out.push(a.start.0);
                }
                out
            }
            v if virtual_step => {
                if vertex_ok(v) {
                    vec![v]
                } else {
                    Vec::new()
                }
            }
            v => {
                let from = VertexId(v);
                let mut targets: Vec<VertexId> = self.graph.neighbors(from).to_vec();
                targets.push(from);
                targets.sort_unstable();
                targets
                    .into_iter()
                    .filter(|&to| !self.frozen.blocks_move(from, to, t))
                    .filter(|&to| to == from || !self.swaps(cur, assigned, from, to))
                    .filter_map(|to| {
                        if to == a.goal {
                            Some(DONE)
                        } else if vertex_ok(to.0) {
                            Some(to.0)
                        } else {
                            None
                        }
                    })
                    .collect()
            }
        }
    }

    /// Whether some already-assigned agent moves `to -> from` in this step.
    fn swaps(&self, cur: &[u32], assigned: &[u32], from: VertexId, to: VertexId) -> bool {
        assigned.iter().enumerate().any(|(j, &nj)| {
            cur[j] == to.0 && {
                let target = if nj == DONE {
                    self.agents[j].agent.goal.0
                } else {
                    nj
                };
                target == from.0
            }
        })
    }

    fn reconstruct(&self, terminal: u32) -> Vec<Path> {
        let mut states: Vec<(Time, &[u32])> = Vec::new();
        let mut id = terminal;
        while id != u32::MAX {
            let node = &self.nodes[id as usize];
            if node.idx == 0 && node.t >= self.t0 {
                states.push((node.t, &node.cur));
            }
            id = node.parent;
        }
        states.reverse();
        (0..self.agents.len())
            .map(|i| {
                let goal = self.agents[i].agent.goal;
                let mut start = None;
                let mut vertices = Vec::new();
                for &(t, statuses) in &states {
                    match statuses[i] {
                        PENDING => {}
                        DONE => {
                            if start.is_some() {
                                vertices.push(goal);
                                break;
                            }
                        }
                        v => {
                            start.get_or_insert(t);
                            vertices.push(VertexId(v));
                        }
                    }
                }
                Path::new(start.expect("agent entered the graph"), vertices)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::build_grid;

    fn v(i: u32) -> VertexId {
        VertexId(i)
    }

    fn offline(a: Agent) -> JointAgent {
        JointAgent {
            agent: a,
            origin: Origin::OffGraph { earliest: a.release },
        }
    }

    #[test]
    fn corridor_swap_needs_sequencing() {
        // Two agents exchanging ends of a 1x3 corridor cannot pass each other.
        let g = build_grid(1, 3, &Default::default()).unwrap();
        let agents = [
            offline(Agent::new(1, v(0), v(2), 0)),
            offline(Agent::new(2, v(2), v(0), 0)),
        ];
        let out = solve(&g, &agents, &DynamicObstacleSet::new(), Objective::Flowtime, 50, 1_000_000)
            .unwrap();
        let plan: Plan = out.into_iter().collect();
        assert!(detect_conflicts(&plan).is_empty());
        let flow: i64 = plan.iter().map(|(_, p)| p.arrival_time()).sum();
        // One agent goes first (2 steps); the other can stand on its own start
        // until that agent arrives there, then walk 2 steps: arrival 4.
        assert_eq!(flow, 2 + 4);
    }

    #[test]
    fn two_by_two_full_knowledge() {
        let g = build_grid(2, 2, &Default::default()).unwrap();
        let agents = [
            offline(Agent::new(1, v(0), v(3), 0)),
            offline(Agent::new(2, v(1), v(0), 1)),
        ];
        for objective in [Objective::Flowtime, Objective::Makespan] {
            let out = solve(&g, &agents, &DynamicObstacleSet::new(), objective, 50, 1_000_000)
                .unwrap();
            let plan: Plan = out.into_iter().collect();
            assert!(detect_conflicts(&plan).is_empty());
            assert_eq!(plan.makespan(), 2);
            let flow = plan.get(AgentId(1)).unwrap().arrival_time()
                + plan.get(AgentId(2)).unwrap().arrival_time()
                - 1;
            assert_eq!(flow, 3);
        }
    }
}
