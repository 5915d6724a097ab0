//! Instances, timed paths, plans, collision detection and objectives.
//!
//! An agent occupies its path's vertex at every time step in
//! `[start_time, arrival_time - 1]`. At its arrival time it has already been
//! removed from the graph, so another agent may stand on its goal vertex at
//! that step. The move into the goal is still an edge traversal and takes
//! part in swap detection.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::world::{Graph, VertexId};

/// Discrete time step.
pub type Time = i64;

/// 1-based agent index, equal to the agent's position in release order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(pub u32);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Agent {
    pub id: AgentId,
    pub start: VertexId,
    pub goal: VertexId,
    pub release: Time,
}

impl Agent {
    pub fn new(id: u32, start: VertexId, goal: VertexId, release: Time) -> Self {
        Agent {
            id: AgentId(id),
            start,
            goal,
            release,
        }
    }
}

/// A graph together with a finite agent sequence sorted by release time.
#[derive(Debug, Clone)]
pub struct OnlineInstance {
    pub graph: Arc<Graph>,
    agents: Vec<Agent>,
}

impl OnlineInstance {
    /// Validates and wraps an agent list. Agents must already carry ids `1..=m`
    /// in list order with non-decreasing releases.
    pub fn new(graph: Arc<Graph>, agents: Vec<Agent>) -> Result<Self> {
        let mut prev_release = 0;
        for (i, a) in agents.iter().enumerate() {
            if a.id != AgentId(i as u32 + 1) {
                return Err(Error::InvalidAgent(format!(
                    "agent at position {} has id {}, expected {}",
                    i + 1,
                    a.id,
                    i + 1
                )));
            }
            for v in [a.start, a.goal] {
                if !graph.contains(v) {
                    return Err(Error::InvalidVertex(v.index()));
                }
            }
            if a.start == a.goal {
                return Err(Error::InvalidAgent(format!("agent {} has start = goal", a.id)));
            }
            if a.release < 0 {
                return Err(Error::InvalidAgent(format!(
                    "agent {} has negative release {}",
                    a.id, a.release
                )));
            }
            if a.release < prev_release {
                return Err(Error::InvalidAgent(format!(
                    "agent {} released at {} before its predecessor ({})",
                    a.id, a.release, prev_release
                )));
            }
            prev_release = a.release;
        }
        Ok(OnlineInstance { graph, agents })
    }

    /// Sorts `(start, goal, release)` triples by release (stable) and assigns ids.
    pub fn from_unsorted(
        graph: Arc<Graph>,
        mut triples: Vec<(VertexId, VertexId, Time)>,
    ) -> Result<Self> {
        triples.sort_by_key(|&(_, _, r)| r);
        let agents = triples
            .into_iter()
            .enumerate()
            .map(|(i, (s, g, r))| Agent::new(i as u32 + 1, s, g, r))
            .collect();
        Self::new(graph, agents)
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn agent(&self, id: AgentId) -> &Agent {
        &self.agents[id.0 as usize - 1]
    }

    pub fn dist(&self, id: AgentId) -> i64 {
        let a = self.agent(id);
        i64::from(self.graph.distance(a.start, a.goal))
    }

    pub fn total_dist(&self) -> i64 {
        self.agents.iter().map(|a| self.dist(a.id)).sum()
    }

    pub fn max_release(&self) -> Time {
        self.agents.last().map_or(0, |a| a.release)
    }

    /// The instance restricted to the first `count` agents.
    pub fn prefix(&self, count: usize) -> OnlineInstance {
        OnlineInstance {
            graph: Arc::clone(&self.graph),
            agents: self.agents[..count].to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReleaseGroup {
    pub release: Time,
    pub agents: Vec<AgentId>,
}

/// Agents partitioned by distinct release time, in increasing release order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReleaseGroups {
    pub groups: Vec<ReleaseGroup>,
}

impl ReleaseGroups {
    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Number of agents revealed up to and including group `k` (0-based).
    pub fn revealed_count(&self, k: usize) -> usize {
        self.groups[..=k].iter().map(|g| g.agents.len()).sum()
    }

    /// Agents revealed by group `k`, i.e. the union of groups `0..=k`.
    pub fn revealed(&self, k: usize) -> Vec<AgentId> {
        self.groups[..=k]
            .iter()
            .flat_map(|g| g.agents.iter().copied())
            .collect()
    }

    /// Agents revealed strictly before group `k`.
    pub fn previously_revealed(&self, k: usize) -> Vec<AgentId> {
        self.groups[..k]
            .iter()
            .flat_map(|g| g.agents.iter().copied())
            .collect()
    }
}

pub fn partition_by_release(inst: &OnlineInstance) -> ReleaseGroups {
    let mut groups: Vec<ReleaseGroup> = Vec::new();
    for a in inst.agents() {
        match groups.last_mut() {
            Some(g) if g.release == a.release => g.agents.push(a.id),
            _ => groups.push(ReleaseGroup {
                release: a.release,
                agents: vec![a.id],
            }),
        }
    }
    ReleaseGroups { groups }
}

/// A timed vertex sequence: `vertices[j]` is the position at `start_time + j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    pub start_time: Time,
    pub vertices: Vec<VertexId>,
}

impl Path {
    pub fn new(start_time: Time, vertices: Vec<VertexId>) -> Self {
        debug_assert!(!vertices.is_empty());
        Path {
            start_time,
            vertices,
        }
    }

    pub fn arrival_time(&self) -> Time {
        self.start_time + self.vertices.len() as Time - 1
    }

    pub fn first(&self) -> VertexId {
        self.vertices[0]
    }

    pub fn last(&self) -> VertexId {
        *self.vertices.last().expect("nonempty path")
    }

    /// Position at `t` for `t` in `[start_time, arrival_time]`, including the
    /// arrival step at which the agent is already off the graph.
    pub fn position(&self, t: Time) -> Option<VertexId> {
        if t < self.start_time {
            return None;
        }
        self.vertices.get((t - self.start_time) as usize).copied()
    }

    /// Vertex the agent occupies at `t`, or `None` when it is not in the graph.
    pub fn occupancy(&self, t: Time) -> Option<VertexId> {
        if t >= self.start_time && t < self.arrival_time() {
            Some(self.vertices[(t - self.start_time) as usize])
        } else {
            None
        }
    }

    /// Moves `(departure, from, to)` with `from != to`, including the final move.
    pub fn moves(&self) -> impl Iterator<Item = (Time, VertexId, VertexId)> + '_ {
        self.vertices
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[0] != w[1])
            .map(move |(j, w)| (self.start_time + j as Time, w[0], w[1]))
    }

    pub fn wait_count(&self) -> usize {
        self.vertices.windows(2).filter(|w| w[0] == w[1]).count()
    }

    /// The path up to and including time `t`, then `suffix` (which must start at `t`
    /// at this path's position there).
    pub fn splice(&self, t: Time, suffix: &Path) -> Path {
        debug_assert_eq!(suffix.start_time, t);
        debug_assert_eq!(self.position(t), Some(suffix.first()));
        let keep = (t - self.start_time) as usize;
        let mut vertices = self.vertices[..keep].to_vec();
        vertices.extend_from_slice(&suffix.vertices);
        Path::new(self.start_time, vertices)
    }

    /// Checks the path conditions for `agent` on `graph`.
    pub fn validate(&self, graph: &Graph, agent: &Agent) -> Result<()> {
        let bad = |reason: String| Error::InvalidPath {
            agent: agent.id,
            reason,
        };
        if self.vertices.len() < 2 {
            return Err(bad(format!("{} vertices", self.vertices.len())));
        }
        if self.start_time < agent.release {
            return Err(bad(format!(
                "starts at {} before release {}",
                self.start_time, agent.release
            )));
        }
        if self.first() != agent.start {
            return Err(bad(format!("starts at vertex {}", self.first())));
        }
        if self.last() != agent.goal {
            return Err(bad(format!("ends at vertex {}", self.last())));
        }
        if let Some(j) = self.vertices[..self.vertices.len() - 1]
            .iter()
            .position(|&v| v == agent.goal)
        {
            return Err(bad(format!(
                "reaches its goal at {} before arrival",
                self.start_time + j as Time
            )));
        }
        for (j, w) in self.vertices.windows(2).enumerate() {
            if !graph.contains(w[1]) {
                return Err(Error::InvalidVertex(w[1].index()));
            }
            if w[0] != w[1] && !graph.is_adjacent(w[0], w[1]) {
                return Err(bad(format!(
                    "jumps {} -> {} at {}",
                    w[0],
                    w[1],
                    self.start_time + j as Time
                )));
            }
        }
        Ok(())
    }
}

/// Vertex occupied by `path` at `t` (`None` is the null vertex).
pub fn occupancy(path: &Path, t: Time) -> Option<VertexId> {
    path.occupancy(t)
}

/// Paths for a subset of agents.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Plan {
    paths: BTreeMap<AgentId, Path>,
}

impl Plan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: AgentId, path: Path) -> Option<Path> {
        self.paths.insert(id, path)
    }

    pub fn get(&self, id: AgentId) -> Option<&Path> {
        self.paths.get(&id)
    }

    pub fn remove(&mut self, id: AgentId) -> Option<Path> {
        self.paths.remove(&id)
    }

    pub fn contains(&self, id: AgentId) -> bool {
        self.paths.contains_key(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (AgentId, &Path)> {
        self.paths.iter().map(|(&id, p)| (id, p))
    }

    pub fn agent_ids(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.paths.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Latest arrival time, 0 for an empty plan.
    pub fn makespan(&self) -> Time {
        self.paths.values().map(Path::arrival_time).max().unwrap_or(0)
    }

    /// Checks every path against its agent.
    pub fn validate(&self, inst: &OnlineInstance) -> Result<()> {
        for (id, path) in self.iter() {
            if id.0 == 0 || id.0 as usize > inst.agent_count() {
                return Err(Error::InvalidAgent(format!("unknown agent {id}")));
            }
            path.validate(&inst.graph, inst.agent(id))?;
        }
        Ok(())
    }
}

impl FromIterator<(AgentId, Path)> for Plan {
    fn from_iter<I: IntoIterator<Item = (AgentId, Path)>>(iter: I) -> Self {
        Plan {
            paths: iter.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConflictKind {
    Vertex(VertexId),
    /// Edge traversed `u -> v` by the first agent and `v -> u` by the second.
    Edge(VertexId, VertexId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Conflict {
    pub time: Time,
    /// Always `(smaller id, larger id)`.
    pub agents: (AgentId, AgentId),
    pub kind: ConflictKind,
}

/// All vertex and edge conflicts in a plan, sorted by time, agents and location.
pub fn detect_conflicts(plan: &Plan) -> Vec<Conflict> {
    let mut at: HashMap<(VertexId, Time), Vec<AgentId>> = HashMap::new();
    let mut moves: HashMap<(VertexId, VertexId, Time), Vec<AgentId>> = HashMap::new();
    for (id, path) in plan.iter() {
        for t in path.start_time..path.arrival_time() {
            let v = path.vertices[(t - path.start_time) as usize];
            at.entry((v, t)).or_default().push(id);
        }
        for (t, u, v) in path.moves() {
            moves.entry((u, v, t)).or_default().push(id);
        }
    }
    let mut conflicts = Vec::new();
    for (&(v, t), ids) in &at {
        for (i, &a) in ids.iter().enumerate() {
            for &b in &ids[i + 1..] {
                conflicts.push(Conflict {
                    time: t,
                    agents: (a.min(b), a.max(b)),
                    kind: ConflictKind::Vertex(v),
                });
            }
        }
    }
    for (&(u, v, t), ids) in &moves {
        if u > v {
            continue;
        }
        if let Some(back) = moves.get(&(v, u, t)) {
            for &a in ids {
                for &b in back {
                    let (lo, hi, kind) = if a < b {
                        (a, b, ConflictKind::Edge(u, v))
                    } else {
                        (b, a, ConflictKind::Edge(v, u))
                    };
                    conflicts.push(Conflict {
                        time: t,
                        agents: (lo, hi),
                        kind,
                    });
                }
            }
        }
    }
    conflicts.sort();
    conflicts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Metrics {
    pub flowtime: i64,
    pub makespan: i64,
    pub latency: i64,
}

/// Flowtime, makespan and latency of `plan` over the given agents.
pub fn evaluate(plan: &Plan, inst: &OnlineInstance, agents: &[AgentId]) -> Result<Metrics> {
    let mut m = Metrics::default();
    for &id in agents {
        let path = plan.get(id).ok_or(Error::UnplannedAgent(id))?;
        let service = path.arrival_time() - inst.agent(id).release;
        m.flowtime += service;
        m.makespan = m.makespan.max(path.arrival_time());
        m.latency += service - inst.dist(id);
    }
    Ok(m)
}

impl Metrics {
    /// Metrics over every agent of the instance.
    pub fn of_plan(plan: &Plan, inst: &OnlineInstance) -> Result<Metrics> {
        let ids: Vec<AgentId> = inst.agents().iter().map(|a| a.id).collect();
        evaluate(plan, inst, &ids)
    }
}

/// Per-release-time upper bounds on flowtime and makespan of the revealed agents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RationalityBounds {
    pub flow_bound: i64,
    pub make_bound: i64,
    /// Anchor agent `n_k` of the makespan term.
    pub anchor: AgentId,
    /// Largest revealed agent index `m_k`.
    pub last: AgentId,
}

impl RationalityBounds {
    /// Bounds for the revealed set `agents` (a release-ordered prefix of an instance).
    ///
    /// The anchor candidates are agent 1 and every agent `n` with
    /// `r_n > r_1 + sum_{i<n} dist_i`; the anchor is the candidate maximizing
    /// `r_n + sum_{i in [n, m_k]} dist_i` (latest on ties). That maximum equals
    /// the makespan of sequential routing over the same agents.
    pub fn for_agents(graph: &Graph, agents: &[Agent]) -> RationalityBounds {
        assert!(!agents.is_empty(), "bounds need at least one revealed agent");
        let dists: Vec<i64> = agents
            .iter()
            .map(|a| i64::from(graph.distance(a.start, a.goal)))
            .collect();
        let total: i64 = dists.iter().sum();
        let r1 = agents[0].release;
        let mut best = (r1 + total, 0usize);
        let mut before = 0;
        for (n, a) in agents.iter().enumerate() {
            if n > 0 && a.release > r1 + before {
                let value = a.release + (total - before);
                if value >= best.0 {
                    best = (value, n);
                }
            }
            before += dists[n];
        }
        RationalityBounds {
            flow_bound: agents.len() as i64 * total,
            make_bound: best.0,
            anchor: agents[best.1].id,
            last: agents[agents.len() - 1].id,
        }
    }
}

/// Bounds for release group `k` (0-based).
pub fn rationality_bounds(inst: &OnlineInstance, k: usize) -> RationalityBounds {
    let groups = partition_by_release(inst);
    let count = groups.revealed_count(k);
    RationalityBounds::for_agents(&inst.graph, &inst.agents()[..count])
}

/// Whether the plan restricted to the agents revealed by group `k` meets the bounds.
pub fn is_rational_at(plan: &Plan, inst: &OnlineInstance, k: usize) -> Result<bool> {
    let groups = partition_by_release(inst);
    let revealed = groups.revealed(k);
    let metrics = evaluate(plan, inst, &revealed)?;
    let bounds = RationalityBounds::for_agents(&inst.graph, &inst.agents()[..revealed.len()]);
    Ok(metrics.flowtime <= bounds.flow_bound && metrics.makespan <= bounds.make_bound)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompetitiveRatio {
    Finite(Ratio<i64>),
    Infinite,
}

impl CompetitiveRatio {
    pub fn as_f64(&self) -> f64 {
        match self {
            CompetitiveRatio::Finite(r) => *r.numer() as f64 / *r.denom() as f64,
            CompetitiveRatio::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for CompetitiveRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompetitiveRatio::Finite(r) => write!(f, "{r}"),
            CompetitiveRatio::Infinite => write!(f, "inf"),
        }
    }
}

/// Online cost against offline optimum on one input sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RatioReport {
    pub algorithm_cost: i64,
    pub optimal_cost: i64,
    pub ratio: CompetitiveRatio,
    pub additive_gap: i64,
}

impl RatioReport {
    pub fn new(algorithm_cost: i64, optimal_cost: i64) -> Self {
        let ratio = match (algorithm_cost, optimal_cost) {
            (0, 0) => CompetitiveRatio::Finite(Ratio::from_integer(1)),
            (_, 0) => CompetitiveRatio::Infinite,
            (a, o) => CompetitiveRatio::Finite(Ratio::new(a, o)),
        };
        RatioReport {
            algorithm_cost,
            optimal_cost,
            ratio,
            additive_gap: algorithm_cost - optimal_cost,
        }
    }
}

/// Agent ids of a set, in order.
pub fn ids(agents: &[Agent]) -> BTreeSet<AgentId> {
    agents.iter().map(|a| a.id).collect()
}
