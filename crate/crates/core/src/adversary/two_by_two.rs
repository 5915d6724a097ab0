use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{Agent, AgentId, Plan};
use crate::online::{Batch, RevealSource};
use crate::world::{build_grid, Graph, VertexId};

// Row-major ids: v_1 = 0 (top left), v_2 = 1, v_3 = 2, v_4 = 3 (bottom right).
const V1: VertexId = VertexId(0);
const V2: VertexId = VertexId(1);
const V3: VertexId = VertexId(2);
const V4: VertexId = VertexId(3);

/// Reveals `a_1 = (v_1 -> v_4, r = 0)`, then at time 1 an agent heading to
/// `v_1` from whichever corner `a_1` committed to pass through at time 1.
/// A plan that is at neither corner at time 1 gets the `v_2` branch.
#[derive(Debug, Clone)]
pub struct TwoByTwoAdversary {
    graph: Arc<Graph>,
    stage: u8,
    observed: Vec<Plan>,
}

pub fn gen_2x2_adversary() -> TwoByTwoAdversary {
    TwoByTwoAdversary {
        graph: Arc::new(build_grid(2, 2, &Default::default()).expect("2x2 grid")),
        stage: 0,
        observed: Vec::new(),
    }
}

impl TwoByTwoAdversary {
    /// Committed plans received so far, one per query after the first.
    pub fn observed(&self) -> &[Plan] {
        &self.observed
    }

    /// The agent revealed at time 1 given `a_1`'s committed plan.
    pub fn respond(&self, committed: &Plan) -> Result<Agent> {
        let path = committed.get(AgentId(1)).ok_or_else(|| {
            Error::ProtocolViolation("a_1 has no committed path before a_2 is revealed".into())
        })?;
        let start = if path.position(1) == Some(V3) { V3 } else { V2 };
        Ok(Agent::new(2, start, V1, 1))
    }
}

impl RevealSource for TwoByTwoAdversary {
    fn graph(&self) -> Arc<Graph> {
        self.graph.clone()
    }

    fn next_batch(&mut self, committed: &Plan) -> Result<Option<Batch>> {
        let batch = match self.stage {
            0 => Batch {
                release: 0,
                agents: vec![Agent::new(1, V1, V4, 0)],
            },
            1 => {
                let a2 = self.respond(committed)?;
                self.observed.push(committed.clone());
                Batch {
                    release: 1,
                    agents: vec![a2],
                }
            }
            _ => return Ok(None),
        };
        self.stage += 1;
        Ok(Some(batch))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Path;

    #[test]
    fn branches() {
        let adv = gen_2x2_adversary();
        let via = |v| [(AgentId(1), Path::new(0, vec![V1, v, V4]))].into_iter().collect::<Plan>();
        assert_eq!(adv.respond(&via(V2)).unwrap().start, V2);
        assert_eq!(adv.respond(&via(V3)).unwrap().start, V3);
        let waits: Plan = [(AgentId(1), Path::new(0, vec![V1, V1, V2, V4]))].into_iter().collect();
        assert_eq!(adv.respond(&waits).unwrap().start, V2);
        assert!(matches!(adv.respond(&Plan::new()), Err(Error::ProtocolViolation(_))));
    }
}
