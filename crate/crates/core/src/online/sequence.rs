use crate::model::{Agent, Path, Time};
use crate::world::Graph;

/// State carried between SEQUENCE steps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SequenceState {
    /// Arrival time of the previously routed agent (0 before the first).
    pub previous_arrival: Time,
}

/// Routes `agent` along a shortest path without waiting, starting once the
/// previous agent has arrived (or at its own release, whichever is later).
pub fn sequence_step(graph: &Graph, state: &mut SequenceState, agent: &Agent) -> Path {
    let start = agent.release.max(state.previous_arrival);
    let path = Path::new(start, graph.shortest_path(agent.start, agent.goal));
    state.previous_arrival = path.arrival_time();
    path
}

/// Routes `agents` one after another from `start`, in the given order.
pub(crate) fn sequential_from(graph: &Graph, start: Time, agents: &[Agent]) -> Vec<Path> {
    let mut state = SequenceState {
        previous_arrival: start,
    };
    agents
        .iter()
        .map(|a| sequence_step(graph, &mut state, a))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{build_grid, VertexId};

    #[test]
    fn start_rule() {
        let g = build_grid(1, 3, &Default::default()).unwrap();
        let mut state = SequenceState::default();
        let a1 = Agent::new(1, VertexId(0), VertexId(2), 0);
        let a2 = Agent::new(2, VertexId(2), VertexId(0), 1);
        let p1 = sequence_step(&g, &mut state, &a1);
        assert_eq!((p1.start_time, p1.arrival_time()), (0, 2));
        let p2 = sequence_step(&g, &mut state, &a2);
        assert_eq!((p2.start_time, p2.arrival_time()), (2, 4));
        // Released after the predecessor finished: starts at its own release.
        let a3 = Agent::new(3, VertexId(0), VertexId(1), 9);
        let p3 = sequence_step(&g, &mut state, &a3);
        assert_eq!((p3.start_time, p3.arrival_time()), (9, 10));
    }
}
