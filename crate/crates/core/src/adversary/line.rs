use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{Agent, AgentId, OnlineInstance, Path, Plan, Time};
use crate::world::{build_grid, VertexId};

fn check_m(m: usize) -> Result<()> {
    if m < 2 || m % 2 == 1 {
        return Err(Error::OddM(m));
    }
    Ok(())
}

/// The strip `v_0 .. v_m` with `m` agents released one per step, alternating
/// between `v_0 -> v_m` (odd index) and `v_m -> v_0` (even index).
pub fn gen_line(m: usize) -> Result<OnlineInstance> {
    check_m(m)?;
    let graph = build_grid(1, m + 1, &Default::default())?;
    let (left, right) = (VertexId(0), VertexId(m as u32));
    let agents = (1..=m)
        .map(|i| {
            let (s, g) = if i % 2 == 1 { (left, right) } else { (right, left) };
            Agent::new(i as u32, s, g, i as Time - 1)
        })
        .collect();
    OnlineInstance::new(Arc::new(graph), agents)
}

/// Costs of the rational online outcome and of the offline optimum on the
/// line family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LineClosedForms {
    pub rational_flow: i64,
    pub rational_make: i64,
    pub opt_flow: i64,
    pub opt_make: i64,
}

pub fn line_closed_forms(m: usize) -> Result<LineClosedForms> {
    check_m(m)?;
    let exact = |name: &'static str, num: i64, den: i64| {
        if num % den == 0 {
            Ok(num / den)
        } else {
            Err(Error::NonIntegerResult { name, m })
        }
    };
    let n = m as i64;
    Ok(LineClosedForms {
        rational_flow: exact("rational_flow", n * n * n + n, 2)?,
        rational_make: n * n,
        opt_flow: exact("opt_flow", 15 * n * n - 10 * n, 8)?,
        opt_make: exact("opt_make", 7 * n - 6, 2)?,
    })
}

/// Collision-free plan attaining the optimal costs: odd agents leave at
/// release in a convoy, even agents follow in a convoy starting at
/// `2m - 3 + i/2`.
pub fn line_witness_plan(m: usize) -> Result<Plan> {
    let inst = gen_line(m)?;
    Ok(inst
        .agents()
        .iter()
        .map(|a| {
            let i = a.id.0 as Time;
            let start = if i % 2 == 1 { a.release } else { 2 * m as Time - 3 + i / 2 };
            (AgentId(a.id.0), Path::new(start, inst.graph.shortest_path(a.start, a.goal)))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let f = line_closed_forms(4).unwrap();
        assert_eq!((f.rational_flow, f.rational_make, f.opt_flow, f.opt_make), (34, 16, 25, 11));
        assert!(matches!(line_closed_forms(3), Err(Error::OddM(3))));
        assert!(matches!(gen_line(0), Err(Error::OddM(0))));
    }

    #[test]
    fn agents() {
        let inst = gen_line(2).unwrap();
        let a = inst.agents();
        assert_eq!((a[0].start, a[0].goal, a[0].release), (VertexId(0), VertexId(2), 0));
        assert_eq!((a[1].start, a[1].goal, a[1].release), (VertexId(2), VertexId(0), 1));
    }
}
