use std::collections::{BTreeSet, HashMap};

use crate::model::{AgentId, Path, Plan, Time};
use crate::world::VertexId;

/// Time-indexed reservations made by agents that follow fixed paths.
///
/// Vertex reservations cover `[start_time, arrival_time - 1]` of each path;
/// edge reservations cover every move, including the move into the goal.
#[derive(Debug, Clone, Default)]
pub struct DynamicObstacleSet {
    vertices: HashMap<(VertexId, Time), AgentId>,
    edges: HashMap<(VertexId, VertexId, Time), AgentId>,
    horizon: Time,
}

impl DynamicObstacleSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_path(&mut self, owner: AgentId, path: &Path) {
        for t in path.start_time..path.arrival_time() {
            self.reserve_vertex(path.vertices[(t - path.start_time) as usize], t, owner);
        }
        for (t, u, v) in path.moves() {
            self.reserve_edge(u, v, t, owner);
        }
    }

    pub fn reserve_vertex(&mut self, v: VertexId, t: Time, owner: AgentId) {
        self.vertices.insert((v, t), owner);
        self.horizon = self.horizon.max(t + 1);
    }

    /// Reserves the move `from -> to` departing at `t`.
    pub fn reserve_edge(&mut self, from: VertexId, to: VertexId, t: Time, owner: AgentId) {
        self.edges.insert((from, to, t), owner);
        self.horizon = self.horizon.max(t + 1);
    }

    pub fn vertex_owner(&self, v: VertexId, t: Time) -> Option<AgentId> {
        self.vertices.get(&(v, t)).copied()
    }

    pub fn edge_owner(&self, from: VertexId, to: VertexId, t: Time) -> Option<AgentId> {
        self.edges.get(&(from, to, t)).copied()
    }

    #[inline]
    pub fn is_vertex_free(&self, v: VertexId, t: Time) -> bool {
        self.vertices.is_empty() || !self.vertices.contains_key(&(v, t))
    }

    /// Whether a move `from -> to` departing at `t` would swap with a reserved move.
    #[inline]
    pub fn blocks_move(&self, from: VertexId, to: VertexId, t: Time) -> bool {
        from != to && !self.edges.is_empty() && self.edges.contains_key(&(to, from, t))
    }

    /// One past the latest reserved time; 0 when empty.
    pub fn horizon(&self) -> Time {
        self.horizon
    }

    pub fn vertex_reservation_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_reservation_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty() && self.edges.is_empty()
    }
}

/// Reservations of every planned agent not in `excluded`.
pub fn build_obstacles(plan: &Plan, excluded: &BTreeSet<AgentId>) -> DynamicObstacleSet {
    let mut set = DynamicObstacleSet::new();
    for (id, path) in plan.iter() {
        if !excluded.contains(&id) {
            set.add_path(id, path);
        }
    }
    set
}
