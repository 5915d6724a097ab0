#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use online_mapf::{detect_conflicts, AgentId, Graph, Path, Plan, Time, VertexId};

/// Plain BFS distances over the adjacency lists.
pub fn bfs(graph: &Graph, s: VertexId) -> Vec<Option<u32>> {
    let mut dist = vec![None; graph.vertex_count()];
    dist[s.index()] = Some(0);
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        let d = dist[u.index()].unwrap();
        for &v in graph.neighbors(u) {
            if dist[v.index()].is_none() {
                dist[v.index()] = Some(d + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Every timed path for one agent from `start` to `goal` that enters at or
/// after `earliest`, arrives no later than `horizon`, and collides with none
/// of `obstacles` (checked by `detect_conflicts`). Calls `visit` on each.
pub fn enumerate_paths(
    graph: &Graph,
    start: VertexId,
    goal: VertexId,
    earliest: Time,
    horizon: Time,
    obstacles: &Plan,
    visit: &mut dyn FnMut(&Path),
) {
    let me = AgentId(u32::MAX);
    let dist = bfs(graph, goal);
    let collides = |path: &Path| {
        let mut plan = obstacles.clone();
        plan.insert(me, path.clone());
        detect_conflicts(&plan).iter().any(|c| c.agents.1 == me)
    };
    fn walk(
        graph: &Graph,
        goal: VertexId,
        horizon: Time,
        dist: &[Option<u32>],
        path: &mut Path,
        collides: &dyn Fn(&Path) -> bool,
        visit: &mut dyn FnMut(&Path),
    ) {
        let cur = path.last();
        let t = path.arrival_time();
        let Some(d) = dist[cur.index()] else { return };
        if t + Time::from(d) > horizon {
            return;
        }
        let options: Vec<VertexId> = std::iter::once(cur)
            .chain(graph.neighbors(cur).iter().copied())
            .collect();
        for next in options {
            path.vertices.push(next);
            if !collides(path) {
                if next == goal {
                    visit(path);
                } else {
                    walk(graph, goal, horizon, dist, path, collides, visit);
                }
            }
            path.vertices.pop();
        }
    }
    for t0 in earliest..horizon {
        let mut path = Path::new(t0, vec![start]);
        walk(graph, goal, horizon, &dist, &mut path, &collides, visit);
    }
}

/// Minimum arrival time found by `enumerate_paths`.
pub fn brute_min_arrival(
    graph: &Graph,
    start: VertexId,
    goal: VertexId,
    earliest: Time,
    horizon: Time,
    obstacles: &Plan,
) -> Option<Time> {
    // Iterative deepening keeps the enumeration small: the first horizon
    // with any path is the minimum.
    (earliest + 1..=horizon).find(|&h| {
        let mut found = false;
        enumerate_paths(graph, start, goal, earliest, h, obstacles, &mut |_| found = true);
        found
    })
}

/// Brute-force satisfiability over all assignments.
pub fn brute_sat(n: usize, clauses: &[Vec<i32>]) -> Option<Vec<bool>> {
    (0..1u32 << n)
        .map(|bits| (0..n).map(|i| bits >> i & 1 == 1).collect::<Vec<_>>())
        .find(|a| satisfied(a, clauses))
}

pub fn satisfied(assignment: &[bool], clauses: &[Vec<i32>]) -> bool {
    clauses.iter().all(|c| {
        c.iter()
            .any(|&l| assignment[l.unsigned_abs() as usize - 1] == (l > 0))
    })
}

pub fn free_grid_cells(h: usize, w: usize, blocked: &BTreeSet<(usize, usize)>) -> usize {
    h * w - blocked.len()
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
enum Status {
    Pending,
    At(VertexId),
    Done,
}

/// Optimal (flowtime, makespan) for agents entering at or after their release,
/// by dynamic programming over joint per-timestep states up to `horizon`.
/// Flowtime charges one unit per agent per step from its release until it is
/// done. Each objective is optimized separately.
pub fn joint_dp(graph: &Graph, agents: &[online_mapf::Agent], horizon: Time) -> Option<(Time, Time)> {
    use std::collections::HashMap;
    let mut layer: HashMap<Vec<Status>, Time> = HashMap::from([(vec![Status::Pending; agents.len()], 0)]);
    let mut best_make = None;
    let mut best_flow: Option<Time> = None;
    let mut t: Time = -1;
    while t < horizon && !layer.is_empty() {
        let mut next: HashMap<Vec<Status>, Time> = HashMap::new();
        for (state, &cost) in &layer {
            // Per-agent options for the step t -> t + 1, with the move taken.
            let options: Vec<Vec<(Status, Option<(VertexId, VertexId)>)>> = agents
                .iter()
                .zip(state)
                .map(|(a, s)| match *s {
                    Status::Pending if t + 1 >= a.release => {
                        vec![(Status::Pending, None), (Status::At(a.start), None)]
                    }
                    Status::Pending => vec![(Status::Pending, None)],
                    Status::Done => vec![(Status::Done, None)],
                    Status::At(v) => std::iter::once(v)
                        .chain(graph.neighbors(v).iter().copied())
                        .map(|u| {
                            let status = if u == a.goal { Status::Done } else { Status::At(u) };
                            (status, (u != v).then_some((v, u)))
                        })
                        .collect(),
                })
                .collect();
            let step_cost = agents
                .iter()
                .zip(state)
                .filter(|(a, s)| t >= a.release && **s != Status::Done)
                .count() as Time;
            let mut choice = vec![0usize; agents.len()];
            'combos: loop {
                let picked: Vec<_> = choice.iter().zip(&options).map(|(&c, o)| o[c]).collect();
                let ok = (0..picked.len()).all(|i| {
                    (i + 1..picked.len()).all(|j| {
                        let vertex_clash = matches!((picked[i].0, picked[j].0), (Status::At(x), Status::At(y)) if x == y);
                        let swap = matches!((picked[i].1, picked[j].1), (Some((a, b)), Some((c, d))) if a == d && b == c);
                        !vertex_clash && !swap
                    })
                });
                if ok {
                    let new_state: Vec<Status> = picked.iter().map(|p| p.0).collect();
                    let c = cost + step_cost;
                    let e = next.entry(new_state).or_insert(c);
                    *e = (*e).min(c);
                }
                for i in 0..choice.len() {
                    choice[i] += 1;
                    if choice[i] < options[i].len() {
                        continue 'combos;
                    }
                    choice[i] = 0;
                }
                break;
            }
        }
        t += 1;
        let done = vec![Status::Done; agents.len()];
        if let Some(&c) = next.get(&done) {
            best_make.get_or_insert(t);
            best_flow = Some(best_flow.map_or(c, |f| f.min(c)));
            next.remove(&done);
        }
        layer = next;
    }
    best_flow.zip(best_make)
}
