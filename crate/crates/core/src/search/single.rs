//! Minimum-arrival single-agent search in the time-expanded graph.
//!
//! The search runs forward over time layers until the goal becomes
//! reachable, then picks among all minimum-arrival paths with a backward
//! pass: fewest on-graph waits, then latest entry, then the lexicographically
//! smallest vertex sequence.

use super::obstacles::DynamicObstacleSet;
use super::SearchLimits;
use crate::error::{Error, Result};
use crate::model::{Agent, Path, Time};
use crate::world::{Graph, VertexId};

/// Where a single-agent search begins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    /// Not yet in the graph; may enter at its start vertex at any time `>= earliest`.
    OffGraph { earliest: Time },
    /// Already in the graph at `vertex` at time `time`.
    OnGraph { vertex: VertexId, time: Time },
}

impl Origin {
    pub fn time(&self) -> Time {
        match *self {
            Origin::OffGraph { earliest } => earliest,
            Origin::OnGraph { time, .. } => time,
        }
    }
}

const UNREACHED: u32 = u32::MAX;

pub(crate) struct SingleOutcome {
    pub path: Path,
    pub expanded: u64,
}

/// Minimum-arrival path from `origin` to `goal` avoiding `obstacles`.
///
/// `horizon` bounds the arrival time; `budget` bounds the number of
/// time-expanded states touched.
pub(crate) fn search(
    graph: &Graph,
    start: VertexId,
    goal: VertexId,
    origin: Origin,
    obstacles: &DynamicObstacleSet,
    horizon: Time,
    budget: u64,
) -> Result<SingleOutcome> {
    let n = graph.vertex_count();
    let t0 = origin.time();
    let enters = matches!(origin, Origin::OffGraph { .. });
    let can_move = |from: VertexId, to: VertexId, t: Time| {
        (to == goal || obstacles.is_vertex_free(to, t + 1)) && !obstacles.blocks_move(from, to, t)
    };

    // reach[j][v]: the agent can be at v at time t0 + j.
    let mut reach: Vec<Vec<bool>> = Vec::new();
    let mut first = vec![false; n];
    match origin {
        Origin::OffGraph { .. } => first[start.index()] = obstacles.is_vertex_free(start, t0),
        Origin::OnGraph { vertex, .. } => first[vertex.index()] = true,
    }
    reach.push(first);
    let mut expanded = 0u64;
    let arrival = loop {
        let j = reach.len() - 1;
        let t = t0 + j as Time;
        let layer = &reach[j];
        if graph
            .vertices()
            .filter(|v| layer[v.index()])
            .any(|v| graph.is_adjacent(v, goal) && can_move(v, goal, t))
        {
            break t + 1;
        }
        if t + 1 >= horizon || expanded >= budget {
            return Err(Error::BudgetExhausted { expanded, horizon });
        }
        let mut next = vec![false; n];
        for v in graph.vertices().filter(|v| layer[v.index()]) {
            expanded += 1;
            for u in std::iter::once(v).chain(graph.neighbors(v).iter().copied()) {
                if u != goal && can_move(v, u, t) {
                    next[u.index()] = true;
                }
            }
        }
        if enters && obstacles.is_vertex_free(start, t + 1) {
            next[start.index()] = true;
        }
        reach.push(next);
    };

    // waits[j][v]: fewest waits from (v, t0 + j) to the goal at `arrival`.
    let layers = reach.len();
    let mut waits = vec![vec![UNREACHED; n]; layers];
    for v in graph.vertices() {
        let t = arrival - 1;
        if reach[layers - 1][v.index()] && graph.is_adjacent(v, goal) && can_move(v, goal, t) {
            waits[layers - 1][v.index()] = 0;
        }
    }
    for j in (0..layers - 1).rev() {
        let t = t0 + j as Time;
        for v in graph.vertices().filter(|v| reach[j][v.index()]) {
            let best = std::iter::once(v)
                .chain(graph.neighbors(v).iter().copied())
                .filter(|&u| u != goal && can_move(v, u, t))
                .map(|u| waits[j + 1][u.index()].saturating_add(u32::from(u == v)))
                .min()
                .unwrap_or(UNREACHED);
            waits[j][v.index()] = best;
        }
    }

    let (mut j, mut cur) = match origin {
        Origin::OnGraph { vertex, .. } => (0, vertex),
        Origin::OffGraph { .. } => {
            let entry = (0..layers)
                .filter(|&j| obstacles.is_vertex_free(start, t0 + j as Time))
                .filter(|&j| waits[j][start.index()] != UNREACHED)
                .min_by_key(|&j| (waits[j][start.index()], std::cmp::Reverse(j)))
                .expect("forward pass reached the goal");
            (entry, start)
        }
    };
    let start_time = t0 + j as Time;
    let mut vertices = vec![cur];
    while j + 1 < layers {
        let t = t0 + j as Time;
        let mut options: Vec<VertexId> = std::iter::once(cur)
            .chain(graph.neighbors(cur).iter().copied())
            .filter(|&u| u != goal && can_move(cur, u, t))
            .collect();
        options.sort_unstable();
        let target = waits[j][cur.index()];
        cur = options
            .into_iter()
            .find(|&u| waits[j + 1][u.index()].saturating_add(u32::from(u == cur)) == target)
            .expect("backward pass is consistent");
        vertices.push(cur);
        j += 1;
    }
    vertices.push(goal);
    Ok(SingleOutcome {
        path: Path::new(start_time, vertices),
        expanded,
    })
}

/// Collision-free path for `agent` against `obstacles` with the earliest
/// possible arrival, entering the graph at any time `>= earliest_start`.
pub fn plan_min_arrival(
    graph: &Graph,
    agent: &Agent,
    obstacles: &DynamicObstacleSet,
    earliest_start: Time,
    limits: &SearchLimits,
) -> Result<Path> {
    let earliest = earliest_start.max(agent.release);
    let horizon = limits.single_horizon(graph, obstacles, earliest);
    search(
        graph,
        agent.start,
        agent.goal,
        Origin::OffGraph { earliest },
        obstacles,
        horizon,
        limits.node_budget,
    )
    .map(|out| out.path)
}
