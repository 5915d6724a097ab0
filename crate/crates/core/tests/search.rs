mod common;

use std::collections::BTreeSet;

use online_mapf::search::{build_obstacles, plan_joint, JointAgent, Origin};
use online_mapf::{
    build_graph, build_grid, detect_conflicts, offline_optimal, plan_min_arrival, Agent, AgentId,
    DynamicObstacleSet, Error, Graph, Objective, Path, Plan, SearchLimits, Time, VertexId,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random walk on `graph` used as a moving obstacle.
fn random_walk(rng: &mut ChaCha8Rng, graph: &Graph, max_len: usize) -> Path {
    let n = graph.vertex_count() as u32;
    let mut cur = VertexId(rng.gen_range(0..n));
    let mut vertices = vec![cur];
    for _ in 0..rng.gen_range(1..=max_len) {
        let nbrs = graph.neighbors(cur);
        if rng.gen_bool(0.25) {
            // wait
        } else {
            cur = nbrs[rng.gen_range(0..nbrs.len())];
        }
        vertices.push(cur);
    }
    Path::new(rng.gen_range(0..6), vertices)
}

fn small_world(rng: &mut ChaCha8Rng) -> Graph {
    loop {
        let (h, w) = [(2, 4), (2, 3), (1, 8), (3, 2), (2, 2)][rng.gen_range(0..5)];
        let blocked: BTreeSet<(usize, usize)> = (0..rng.gen_range(0..2))
            .map(|_| (rng.gen_range(0..h), rng.gen_range(0..w)))
            .collect();
        if let Ok(g) = build_grid(h, w, &blocked) {
            if g.vertex_count() >= 2 && g.vertex_count() <= 8 {
                return g;
            }
        }
    }
}

#[test]
fn min_arrival_matches_exhaustive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let horizon: Time = 20;
    let mut compared = 0;
    for _ in 0..60 {
        let g = small_world(&mut rng);
        let n = g.vertex_count() as u32;
        let s = rng.gen_range(0..n);
        let goal = VertexId((s + rng.gen_range(1..n)) % n);
        let release = rng.gen_range(0..4);
        let agent = Agent::new(1, VertexId(s), goal, release);
        let obstacles: Plan = (0..rng.gen_range(0..4))
            .map(|i| (AgentId(i + 2), random_walk(&mut rng, &g, 8)))
            .collect();
        let set = build_obstacles(&obstacles, &BTreeSet::new());
        let expected = common::brute_min_arrival(&g, agent.start, goal, release, horizon, &obstacles);
        match plan_min_arrival(&g, &agent, &set, release, &SearchLimits::default()) {
            Ok(path) => {
                path.validate(&g, &agent).unwrap();
                let mut plan = obstacles.clone();
                plan.insert(AgentId(1), path.clone());
                assert!(detect_conflicts(&plan).iter().all(|c| c.agents.0 != AgentId(1)));
                match expected {
                    Some(t) => assert_eq!(path.arrival_time(), t),
                    None => assert!(path.arrival_time() > horizon),
                }
                compared += 1;
            }
            // Obstacles can pin the start vertex forever only if they never
            // leave it, which finite walks do not; so this must not fail.
            Err(e) => panic!("search failed: {e}"),
        }
    }
    assert_eq!(compared, 60);
}

#[test]
fn joint_optimum_matches_state_dp() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut compared = 0;
    for _ in 0..25 {
        let g = loop {
            let (h, w) = [(1, 4), (2, 2), (2, 3)][rng.gen_range(0..3)];
            if let Ok(g) = build_grid(h, w, &BTreeSet::new()) {
                break g;
            }
        };
        let n = g.vertex_count() as u32;
        let count = rng.gen_range(2..=3);
        let mut agents: Vec<Agent> = (0..count)
            .map(|_| {
                let s = rng.gen_range(0..n);
                Agent::new(0, VertexId(s), VertexId((s + rng.gen_range(1..n)) % n), rng.gen_range(0..3))
            })
            .collect();
        agents.sort_by_key(|a| a.release);
        for (i, a) in agents.iter_mut().enumerate() {
            a.id = AgentId(i as u32 + 1);
        }
        // Sequential routing finishes within this horizon, and any plan with a
        // later arrival costs more than sequential routing in either objective.
        let total: Time = agents.iter().map(|a| Time::from(g.distance(a.start, a.goal))).sum();
        let horizon = 3 + count as Time * (total + 2);
        let Some((flow, make)) = common::joint_dp(&g, &agents, horizon) else { continue };
        let limits = SearchLimits::default();
        let empty = DynamicObstacleSet::new();
        for (objective, want) in [(Objective::Flowtime, flow), (Objective::Makespan, make)] {
            let plan = offline_optimal(&g, &agents, &empty, objective, &limits).unwrap();
            assert!(detect_conflicts(&plan).is_empty());
            let got = match objective {
                Objective::Flowtime => plan.iter().map(|(id, p)| p.arrival_time() - agents[id.0 as usize - 1].release).sum(),
                Objective::Makespan => plan.makespan(),
            };
            assert_eq!(got, want, "{objective:?} on {agents:?}");
        }
        compared += 1;
    }
    assert!(compared >= 20, "only {compared} comparable instances");
}

#[test]
fn joint_respects_frozen_paths_and_on_graph_origins() {
    // Corridor 0-1-2-3 with a side vertex 4 hanging off 1.
    let g = build_graph(5, &[(0, 1), (1, 2), (2, 3), (1, 4)]).unwrap();
    let mut frozen = DynamicObstacleSet::new();
    frozen.add_path(AgentId(9), &Path::new(0, vec![VertexId(3), VertexId(2), VertexId(2), VertexId(1), VertexId(4)]));
    let agent = Agent::new(1, VertexId(0), VertexId(3), 0);
    let joint = [JointAgent {
        agent,
        origin: Origin::OnGraph { vertex: VertexId(1), time: 2 },
    }];
    let out = plan_joint(&g, &joint, &frozen, Objective::Flowtime, &SearchLimits::default()).unwrap();
    let path = &out[0].1;
    assert_eq!(path.start_time, 2);
    assert_eq!(path.first(), VertexId(1));
    let mut plan: Plan = [(AgentId(1), path.clone())].into_iter().collect();
    plan.insert(AgentId(9), Path::new(0, vec![VertexId(3), VertexId(2), VertexId(2), VertexId(1), VertexId(4)]));
    // Only the spliced suffix is checked against the obstacle.
    assert!(detect_conflicts(&plan).iter().all(|c| c.time >= 2 && false));
}

#[test]
fn joint_budget_is_reported() {
    let inst = online_mapf::adversary::gen_line(6).unwrap();
    let limits = SearchLimits::with_node_budget(50);
    let err = offline_optimal(&inst.graph, inst.agents(), &DynamicObstacleSet::new(), Objective::Flowtime, &limits)
        .unwrap_err();
    assert!(matches!(err, Error::BudgetExhausted { .. }));
}
