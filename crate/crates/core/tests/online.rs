use std::sync::Arc;

use online_mapf::adversary::{gen_2x2_adversary, gen_line, gen_random, line_witness_plan, RandomSpec};
use online_mapf::online::{
    check_global_bounds, rationalize_wrap, run, ControllabilityMode, FixedSource, OnlinePolicy,
    ReplayHook, SimulationTrace, WastefulHook,
};
use online_mapf::{
    detect_conflicts, is_rational_at, partition_by_release, Error, Objective, OnlineInstance,
    SearchLimits,
};

use ControllabilityMode::{All, New, NewSingle};

fn run_fixed(inst: &OnlineInstance, policy: &OnlinePolicy) -> SimulationTrace {
    run(&mut FixedSource::new(inst.clone()), policy, &SearchLimits::default()).unwrap()
}

fn assert_commitments(trace: &SimulationTrace, mode: ControllabilityMode) {
    for (i, earlier) in trace.snapshots.iter().enumerate() {
        for later in &trace.snapshots[i + 1..] {
            for (id, old) in earlier.plan.iter() {
                let new = later.plan.get(id).unwrap();
                if mode != All {
                    assert_eq!(old, new, "agent {id} changed after commitment");
                } else if old.start_time <= later.release {
                    let end = later.release.min(old.arrival_time());
                    for t in old.start_time..=end {
                        assert_eq!(old.position(t), new.position(t), "agent {id} prefix at {t}");
                    }
                }
            }
        }
    }
}

fn assert_rational_everywhere(trace: &SimulationTrace) {
    for k in 0..partition_by_release(&trace.instance).len() {
        let snap = &trace.snapshots[k];
        assert!(is_rational_at(&snap.plan, &trace.instance.prefix(snap.plan.len()), k).unwrap());
        assert!(snap.rational);
    }
}

fn policies() -> Vec<OnlinePolicy> {
    let mut out = vec![OnlinePolicy::sequence()];
    for mode in [NewSingle, New, All] {
        for obj in [Objective::Flowtime, Objective::Makespan] {
            out.push(OnlinePolicy::opt_rational(mode, obj));
        }
    }
    out
}

#[test]
fn line_family_rational_outcomes() {
    for m in [2, 4, 6] {
        let inst = gen_line(m).unwrap();
        let n = m as i64;
        for policy in policies().into_iter().filter(|p| p.mode != All) {
            let trace = run_fixed(&inst, &policy);
            assert_eq!(trace.metrics.flowtime, (n * n * n + n) / 2, "{}", policy.label());
            assert_eq!(trace.metrics.makespan, n * n, "{}", policy.label());
            assert_commitments(&trace, policy.mode);
            assert_rational_everywhere(&trace);
            assert_eq!(check_global_bounds(&trace, &inst), (true, true));
        }
    }
}

#[test]
fn sequence_start_rule() {
    let inst = gen_random(&RandomSpec { height: 5, width: 5, density: 0.2, agents: 8, max_release: 6, seed: 3 }).unwrap();
    let trace = run_fixed(&inst, &OnlinePolicy::sequence());
    let mut prev = 0;
    for a in inst.agents() {
        let p = trace.plan.get(a.id).unwrap();
        assert_eq!(p.start_time, a.release.max(prev));
        assert_eq!(p.arrival_time() - p.start_time, i64::from(inst.graph.distance(a.start, a.goal)));
        prev = p.arrival_time();
    }
    assert!(detect_conflicts(&trace.plan).is_empty());
}

#[test]
fn monotone_in_controllability_on_line() {
    for m in [2, 4, 6] {
        let inst = gen_line(m).unwrap();
        let cost = |p: OnlinePolicy| run_fixed(&inst, &p).metrics.flowtime;
        let seq = cost(OnlinePolicy::sequence());
        let new = cost(OnlinePolicy::opt_rational(New, Objective::Flowtime));
        let all = cost(OnlinePolicy::opt_rational(All, Objective::Flowtime));
        assert!(all <= new && new <= seq, "m={m}: {all} {new} {seq}");
    }
}

#[test]
fn plan_all_on_adversary() {
    for obj in [Objective::Flowtime, Objective::Makespan] {
        let mut adv = gen_2x2_adversary();
        let trace = run(&mut adv, &OnlinePolicy::opt_rational(All, obj), &SearchLimits::default()).unwrap();
        assert_eq!(trace.metrics.flowtime, 4);
        assert_eq!(trace.metrics.makespan, 3);
        assert_eq!(trace.metrics.latency, 1);
        assert_eq!(adv.observed().len(), 1);
        assert_commitments(&trace, All);
    }
}

#[test]
fn wasteful_policy_is_caught_by_the_wrapper() {
    let inst = gen_line(4).unwrap();
    for mode in [NewSingle, New, All] {
        let wasteful = OnlinePolicy::custom(mode, Arc::new(WastefulHook));
        let raw = run_fixed(&inst, &wasteful);
        assert!(!raw.rational_everywhere());
        assert_eq!(check_global_bounds(&raw, &inst), (false, false));
        let wrapped = run_fixed(&inst, &rationalize_wrap(wasteful));
        assert!(wrapped.fallbacks() > 0);
        assert_rational_everywhere(&wrapped);
        assert_commitments(&wrapped, mode);
        assert_eq!(check_global_bounds(&wrapped, &inst), (true, true));
    }
}

#[test]
fn wrapping_sequence_and_optimal_policies_changes_nothing() {
    let inst = gen_random(&RandomSpec { height: 6, width: 6, density: 0.1, agents: 7, max_release: 8, seed: 5 }).unwrap();
    for policy in policies() {
        let plain = run_fixed(&inst, &policy);
        let wrapped = run_fixed(&inst, &rationalize_wrap(policy.clone()));
        assert_eq!(plain.plan, wrapped.plan, "{}", policy.label());
        assert_eq!(wrapped.fallbacks(), 0);
    }
}

#[test]
fn replaying_the_offline_optimum_is_irrational_but_cheaper() {
    let inst = gen_line(4).unwrap();
    let replay = OnlinePolicy::custom(New, Arc::new(ReplayHook::new(line_witness_plan(4).unwrap())));
    let trace = run_fixed(&inst, &replay);
    assert_eq!((trace.metrics.flowtime, trace.metrics.makespan), (25, 11));
    // At the second release the witness delays agent 2 to time 6 (makespan 10
    // against a bound of 8).
    assert!(!trace.snapshots[1].rational);
    assert_eq!(trace.snapshots[1].metrics.makespan, 10);
    assert_eq!(trace.snapshots[1].bounds.make_bound, 8);
}

#[test]
fn sequence_needs_new_single() {
    let inst = gen_line(2).unwrap();
    let bad = OnlinePolicy { mode: New, ..OnlinePolicy::sequence() };
    let err = run(&mut FixedSource::new(inst), &bad, &SearchLimits::default()).unwrap_err();
    assert!(matches!(err, Error::InvalidPolicy(_)));
}

#[test]
fn plan_all_prefixes_on_random_instances() {
    for seed in 0..6 {
        let inst = gen_random(&RandomSpec { height: 5, width: 5, density: 0.1, agents: 6, max_release: 6, seed }).unwrap();
        for obj in [Objective::Flowtime, Objective::Makespan] {
            let trace = run_fixed(&inst, &OnlinePolicy::opt_rational(All, obj));
            assert_commitments(&trace, All);
            assert_rational_everywhere(&trace);
            assert!(detect_conflicts(&trace.plan).is_empty());
            assert_eq!(trace.plan.len(), inst.agent_count());
        }
    }
}
