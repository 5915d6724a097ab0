use std::sync::Arc;

use online_mapf::online::{run, sequence_step, FixedSource, OnlinePolicy, SequenceState};
use online_mapf::{
    build_graph, build_grid, detect_conflicts, evaluate, is_rational_at, partition_by_release,
    rationality_bounds, Agent, AgentId, CompetitiveRatio, ConflictKind, Metrics, OnlineInstance,
    Path, Plan, RatioReport, RationalityBounds, SearchLimits, Time, VertexId,
};
use proptest::prelude::*;

fn v(i: u32) -> VertexId {
    VertexId(i)
}

#[test]
fn swap_and_vertex_conflicts() {
    let plan: Plan = [
        (AgentId(1), Path::new(0, vec![v(0), v(1), v(2)])),
        (AgentId(2), Path::new(0, vec![v(1), v(0), v(3)])),
    ]
    .into_iter()
    .collect();
    let c = detect_conflicts(&plan);
    assert_eq!(c.len(), 1);
    assert_eq!(c[0].time, 0);
    assert_eq!(c[0].kind, ConflictKind::Edge(v(0), v(1)));

    // An agent is gone at its arrival time, so another may enter its goal then.
    let plan: Plan = [
        (AgentId(1), Path::new(0, vec![v(0), v(1)])),
        (AgentId(2), Path::new(1, vec![v(1), v(2)])),
    ]
    .into_iter()
    .collect();
    assert!(detect_conflicts(&plan).is_empty());

    // The final move into the goal counts as a swap.
    let plan: Plan = [
        (AgentId(1), Path::new(0, vec![v(0), v(1)])),
        (AgentId(2), Path::new(0, vec![v(1), v(0)])),
    ]
    .into_iter()
    .collect();
    assert_eq!(detect_conflicts(&plan).len(), 1);
}

#[test]
fn release_groups() {
    let g = Arc::new(build_grid(1, 4, &Default::default()).unwrap());
    let inst = OnlineInstance::from_unsorted(
        g,
        vec![(v(0), v(3), 2), (v(3), v(0), 0), (v(1), v(2), 2), (v(2), v(1), 5)],
    )
    .unwrap();
    let groups = partition_by_release(&inst);
    assert_eq!(groups.len(), 3);
    assert_eq!(groups.revealed(1), vec![AgentId(1), AgentId(2), AgentId(3)]);
    assert_eq!(groups.previously_revealed(1), vec![AgentId(1)]);
}

#[test]
fn instance_validation() {
    let g = Arc::new(build_grid(1, 3, &Default::default()).unwrap());
    assert!(OnlineInstance::new(g.clone(), vec![Agent::new(1, v(0), v(0), 0)]).is_err());
    assert!(OnlineInstance::new(g.clone(), vec![Agent::new(1, v(0), v(9), 0)]).is_err());
    assert!(OnlineInstance::new(
        g.clone(),
        vec![Agent::new(1, v(0), v(1), 3), Agent::new(2, v(1), v(2), 1)]
    )
    .is_err());
    assert!(OnlineInstance::new(g, vec![Agent::new(2, v(0), v(1), 0)]).is_err());
}

#[test]
fn ratio_reports() {
    let r = RatioReport::new(34, 25);
    assert_eq!(r.ratio.to_string(), "34/25");
    assert!((r.ratio.as_f64() - 1.36).abs() < 1e-12);
    assert_eq!(r.additive_gap, 9);
    assert_eq!(RatioReport::new(1, 0).ratio, CompetitiveRatio::Infinite);
    assert_eq!(RatioReport::new(0, 0).ratio.as_f64(), 1.0);
}

/// Makespan of routing agents one after another without waiting, computed
/// directly from the start rule.
fn sequential_makespan(releases: &[Time], dists: &[Time]) -> Time {
    let mut prev = 0;
    for (r, d) in releases.iter().zip(dists) {
        prev = prev.max(*r) + d;
    }
    prev
}

/// A strip long enough to host agents with the given distances; all agents
/// run from vertex 0 rightwards.
fn strip_instance(releases: &[Time], dists: &[Time]) -> OnlineInstance {
    let len = *dists.iter().max().unwrap() as usize + 1;
    let g = Arc::new(build_grid(1, len, &Default::default()).unwrap());
    let agents = releases
        .iter()
        .zip(dists)
        .enumerate()
        .map(|(i, (&r, &d))| Agent::new(i as u32 + 1, v(0), v(d as u32), r))
        .collect();
    OnlineInstance::new(g, agents).unwrap()
}

#[test]
fn makespan_bound_takes_the_binding_candidate() {
    // The latest qualifying anchor (agent 3) would give 12, below what
    // sequential routing needs.
    let inst = strip_instance(&[0, 10, 11], &[1, 5, 1]);
    let b = rationality_bounds(&inst, 2);
    assert_eq!(sequential_makespan(&[0, 10, 11], &[1, 5, 1]), 16);
    assert_eq!(b.make_bound, 16);
    assert_eq!(b.anchor, AgentId(2));
    assert_eq!(b.flow_bound, 3 * 7);
}

proptest! {
    #[test]
    fn make_bound_is_sequential_makespan(
        steps in proptest::collection::vec((0i64..6, 1i64..6), 1..8)
    ) {
        let mut releases = Vec::new();
        let mut r = 0;
        for (gap, _) in &steps {
            r += gap;
            releases.push(r);
        }
        let dists: Vec<Time> = steps.iter().map(|s| s.1).collect();
        let inst = strip_instance(&releases, &dists);
        let b = RationalityBounds::for_agents(&inst.graph, inst.agents());
        prop_assert_eq!(b.make_bound, sequential_makespan(&releases, &dists));
        prop_assert_eq!(b.flow_bound, dists.len() as i64 * dists.iter().sum::<i64>());

        let trace = run(&mut FixedSource::new(inst.clone()), &OnlinePolicy::sequence(), &SearchLimits::default()).unwrap();
        prop_assert!(detect_conflicts(&trace.plan).is_empty());
        prop_assert_eq!(trace.metrics.makespan, b.make_bound);
        for k in 0..partition_by_release(&inst).len() {
            prop_assert!(is_rational_at(&trace.plan, &inst, k).unwrap());
        }
    }

    #[test]
    fn latency_identity_and_conflict_symmetry(
        releases in proptest::collection::vec(0i64..5, 1..6),
        delays in proptest::collection::vec(0i64..4, 6),
    ) {
        let mut releases = releases;
        releases.sort();
        let g = Arc::new(build_graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap());
        let agents: Vec<Agent> = releases
            .iter()
            .enumerate()
            .map(|(i, &r)| Agent::new(i as u32 + 1, v(i as u32 % 4), v((i as u32 + 2) % 4), r))
            .collect();
        let inst = OnlineInstance::new(g.clone(), agents).unwrap();
        let plan: Plan = inst
            .agents()
            .iter()
            .map(|a| (a.id, Path::new(a.release + delays[a.id.0 as usize - 1], g.shortest_path(a.start, a.goal))))
            .collect();
        let ids: Vec<AgentId> = inst.agents().iter().map(|a| a.id).collect();
        let m = evaluate(&plan, &inst, &ids).unwrap();
        prop_assert_eq!(m, Metrics::of_plan(&plan, &inst).unwrap());
        prop_assert_eq!(m.latency, m.flowtime - inst.total_dist());
        prop_assert!(m.latency >= 0);

        // Reversing the ids must report the same conflicts, with agents swapped.
        let n = ids.len() as u32 + 1;
        let mirrored: Plan = plan.iter().map(|(id, p)| (AgentId(n - id.0), p.clone())).collect();
        let mut a: Vec<_> = detect_conflicts(&plan).iter().map(|c| (c.time, c.agents)).collect();
        let mut b: Vec<_> = detect_conflicts(&mirrored)
            .iter()
            .map(|c| (c.time, (AgentId(n - c.agents.1 .0), AgentId(n - c.agents.0 .0))))
            .collect();
        a.sort();
        b.sort();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn sequence_step_line() {
    let inst = online_mapf::adversary::gen_line(2).unwrap();
    let mut state = SequenceState::default();
    let p1 = sequence_step(&inst.graph, &mut state, &inst.agents()[0]);
    let p2 = sequence_step(&inst.graph, &mut state, &inst.agents()[1]);
    assert_eq!((p1.start_time, p1.arrival_time()), (0, 2));
    assert_eq!((p2.start_time, p2.arrival_time()), (2, 4));
}
