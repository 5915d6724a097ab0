//! Environment graphs: general undirected graphs and 4-neighbor grids.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Dense vertex index in `[0, |V|)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A connected, undirected, simple graph.
///
/// Distances are computed by breadth-first search on demand and memoized per
/// source vertex. The cache is filled through `OnceLock`, so a graph can be
/// shared across threads after construction.
pub struct Graph {
    adjacency: Vec<Vec<VertexId>>,
    cells: Option<Vec<(usize, usize)>>,
    distances: Vec<OnceLock<Box<[u32]>>>,
}

impl Graph {
    fn from_adjacency(
        mut adjacency: Vec<Vec<VertexId>>,
        cells: Option<Vec<(usize, usize)>>,
    ) -> Result<Self> {
        if adjacency.is_empty() {
            return Err(Error::EmptyWorld);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        let n = adjacency.len();
        let graph = Graph {
            adjacency,
            cells,
            distances: (0..n).map(|_| OnceLock::new()).collect(),
        };
        let components = graph.component_count();
        if components != 1 {
            return Err(Error::DisconnectedWorld { components });
        }
        Ok(graph)
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.adjacency.len() as u32).map(VertexId)
    }

    /// Sorted neighbor list.
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adjacency[v.index()]
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v.index() < self.adjacency.len()
    }

    pub fn is_adjacent(&self, u: VertexId, v: VertexId) -> bool {
        self.adjacency[u.index()].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in increasing order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.vertices().flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .filter(move |&&v| u < v)
                .map(move |&v| (u, v))
        })
    }

    /// Grid cell of a vertex, for graphs built from a [`GridMap`].
    pub fn cell(&self, v: VertexId) -> Option<(usize, usize)> {
        self.cells.as_ref().map(|cells| cells[v.index()])
    }

    pub fn is_grid(&self) -> bool {
        self.cells.is_some()
    }

    /// Vertex at a grid cell, if this graph came from a grid and the cell is unblocked.
    pub fn vertex_at(&self, row: usize, col: usize) -> Option<VertexId> {
        let cells = self.cells.as_ref()?;
        cells
            .binary_search(&(row, col))
            .ok()
            .map(|i| VertexId(i as u32))
    }

    /// Unweighted distances from `source` to every vertex.
    pub fn distances_from(&self, source: VertexId) -> &[u32] {
        self.distances[source.index()].get_or_init(|| self.bfs(source))
    }

    pub fn distance(&self, s: VertexId, t: VertexId) -> u32 {
        self.distances_from(t)[s.index()]
    }

    fn bfs(&self, source: VertexId) -> Box<[u32]> {
        let mut dist = vec![u32::MAX; self.vertex_count()];
        let mut queue = VecDeque::new();
        dist[source.index()] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let next = dist[u.index()] + 1;
            for &v in self.neighbors(u) {
                if dist[v.index()] == u32::MAX {
                    dist[v.index()] = next;
                    queue.push_back(v);
                }
            }
        }
        dist.into_boxed_slice()
    }

    fn component_count(&self) -> usize {
        let mut seen = vec![false; self.vertex_count()];
        let mut components = 0;
        for root in 0..self.vertex_count() {
            if seen[root] {
                continue;
            }
            components += 1;
            let mut stack = vec![root];
            seen[root] = true;
            while let Some(u) = stack.pop() {
                for v in &self.adjacency[u] {
                    if !seen[v.index()] {
                        seen[v.index()] = true;
                        stack.push(v.index());
                    }
                }
            }
        }
        components
    }

    /// A shortest path from `s` to `t` that picks the smallest-id neighbor at every step.
    pub fn shortest_path(&self, s: VertexId, t: VertexId) -> Vec<VertexId> {
        let to_goal = self.distances_from(t);
        let mut path = vec![s];
        let mut cur = s;
        while cur != t {
            let want = to_goal[cur.index()] - 1;
            cur = *self
                .neighbors(cur)
                .iter()
                .find(|v| to_goal[v.index()] == want)
                .expect("connected graph has a descending neighbor");
            path.push(cur);
        }
        path
    }
}

impl Clone for Graph {
    fn clone(&self) -> Self {
        Graph {
            adjacency: self.adjacency.clone(),
            cells: self.cells.clone(),
            distances: self.distances.clone(),
        }
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("vertices", &self.vertex_count())
            .field("edges", &self.edge_count())
            .field("grid", &self.is_grid())
            .finish()
    }
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.adjacency == other.adjacency && self.cells == other.cells
    }
}

impl Eq for Graph {}

/// A rectangular 4-neighbor grid with blocked cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    pub height: usize,
    pub width: usize,
    pub blocked: BTreeSet<(usize, usize)>,
}

impl GridMap {
    pub fn new(height: usize, width: usize) -> Self {
        GridMap {
            height,
            width,
            blocked: BTreeSet::new(),
        }
    }

    pub fn with_blocked(
        height: usize,
        width: usize,
        blocked: impl IntoIterator<Item = (usize, usize)>,
    ) -> Self {
        GridMap {
            height,
            width,
            blocked: blocked.into_iter().collect(),
        }
    }

    pub fn is_free(&self, row: usize, col: usize) -> bool {
        row < self.height && col < self.width && !self.blocked.contains(&(row, col))
    }

    /// Unblocked cells in row-major order; index = vertex id.
    pub fn free_cells(&self) -> Vec<(usize, usize)> {
        (0..self.height)
            .flat_map(|r| (0..self.width).map(move |c| (r, c)))
            .filter(|&(r, c)| self.is_free(r, c))
            .collect()
    }

    pub fn to_graph(&self) -> Result<Graph> {
        build_grid(self.height, self.width, &self.blocked)
    }
}

/// Builds the 4-neighbor graph over the unblocked cells of a grid.
///
/// Vertices are numbered row-major over unblocked cells.
pub fn build_grid(height: usize, width: usize, blocked: &BTreeSet<(usize, usize)>) -> Result<Graph> {
    let map = GridMap {
        height,
        width,
        blocked: blocked.clone(),
    };
    let cells = map.free_cells();
    if cells.is_empty() {
        return Err(Error::EmptyWorld);
    }
    let mut index = vec![None; height * width];
    for (i, &(r, c)) in cells.iter().enumerate() {
        index[r * width + c] = Some(VertexId(i as u32));
    }
    let at = |r: usize, c: usize| index[r * width + c];
    let adjacency = cells
        .iter()
        .map(|&(r, c)| {
            let mut adj = Vec::with_capacity(4);
            if r > 0 {
                adj.extend(at(r - 1, c));
            }
            if c > 0 {
                adj.extend(at(r, c - 1));
            }
            if c + 1 < width {
                adj.extend(at(r, c + 1));
            }
            if r + 1 < height {
                adj.extend(at(r + 1, c));
            }
            adj
        })
        .collect();
    Graph::from_adjacency(adjacency, Some(cells))
}

/// Builds an undirected graph from an edge list. Duplicate edges are merged.
pub fn build_graph(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Graph> {
    if vertex_count == 0 {
        return Err(Error::EmptyWorld);
    }
    let mut adjacency = vec![Vec::new(); vertex_count];
    for &(u, v) in edges {
        if u == v || u >= vertex_count || v >= vertex_count {
            return Err(Error::InvalidEdge(u, v));
        }
        adjacency[u].push(VertexId(v as u32));
        adjacency[v].push(VertexId(u as u32));
    }
    Graph::from_adjacency(adjacency, None)
}

/// Unweighted shortest-path length between two vertices.
pub fn shortest_dist(g: &Graph, s: VertexId, t: VertexId) -> u32 {
    g.distance(s, t)
}
