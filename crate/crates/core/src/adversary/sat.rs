use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{detect_conflicts, Agent, AgentId, OnlineInstance, Plan};
use crate::world::{build_graph, VertexId};

/// A signed variable index: `i` is `X_i`, `-i` its complement (1-based).
pub type Literal = i32;

/// A CNF formula in which every clause has at most three literals and every
/// variable occurs in exactly three clauses, at least once in each polarity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatInstance {
    pub variable_count: usize,
    pub clauses: Vec<Vec<Literal>>,
}

impl SatInstance {
    pub fn new(variable_count: usize, clauses: Vec<Vec<Literal>>) -> Result<Self> {
        let sat = SatInstance {
            variable_count,
            clauses,
        };
        sat.validate()?;
        Ok(sat)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::MalformedSat(msg));
        if self.variable_count == 0 {
            return bad("no variables".into());
        }
        let mut counts = vec![(0usize, 0usize); self.variable_count + 1];
        for (j, clause) in self.clauses.iter().enumerate() {
            if clause.is_empty() || clause.len() > 3 {
                return bad(format!("clause {} has {} literals", j + 1, clause.len()));
            }
            let mut vars = BTreeSet::new();
            for &lit in clause {
                let var = lit.unsigned_abs() as usize;
                if lit == 0 || var > self.variable_count {
                    return bad(format!("clause {} has literal {lit}", j + 1));
                }
                if !vars.insert(var) {
                    return bad(format!("clause {} mentions variable {var} twice", j + 1));
                }
                if lit > 0 {
                    counts[var].0 += 1;
                } else {
                    counts[var].1 += 1;
                }
            }
        }
        for (var, &(pos, neg)) in counts.iter().enumerate().skip(1) {
            if pos + neg != 3 || pos == 0 || neg == 0 {
                return bad(format!(
                    "variable {var} occurs {pos} times plain and {neg} times complemented"
                ));
            }
        }
        Ok(())
    }

    /// `assignment[i]` is the value of `X_{i+1}`.
    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|clause| {
            clause
                .iter()
                .any(|&lit| assignment[lit.unsigned_abs() as usize - 1] == (lit > 0))
        })
    }
}

/// The reduced instance with the role of every vertex and agent.
#[derive(Debug, Clone)]
pub struct ReductionOutput {
    pub instance: OnlineInstance,
    pub sat: SatInstance,
    /// Role of vertex `v`, indexed by id.
    pub vertex_labels: Vec<String>,
    /// Role of agent `i`, indexed by `i - 1`.
    pub agent_labels: Vec<String>,
    /// `v_i` per variable.
    shared: Vec<VertexId>,
}

impl ReductionOutput {
    pub fn labels(&self) -> impl Iterator<Item = (VertexId, &str)> {
        self.vertex_labels
            .iter()
            .enumerate()
            .map(|(v, l)| (VertexId(v as u32), l.as_str()))
    }

    /// Agents `a_iT` and `a_iF` for variable `i` (1-based).
    pub fn literal_agents(&self, var: usize) -> (AgentId, AgentId) {
        (AgentId(2 * var as u32 - 1), AgentId(2 * var as u32))
    }

    /// The vertex `v_i` where the shared paths of variable `i` meet.
    pub fn shared_vertex(&self, var: usize) -> VertexId {
        self.shared[var - 1]
    }
}

#[derive(Default)]
struct Builder {
    labels: Vec<String>,
    edges: BTreeSet<(usize, usize)>,
}

impl Builder {
    fn vertex(&mut self, label: String) -> usize {
        self.labels.push(label);
        self.labels.len() - 1
    }

    fn path(&mut self, vertices: &[usize]) {
        for w in vertices.windows(2) {
            self.edges.insert((w[0].min(w[1]), w[0].max(w[1])));
        }
    }
}

struct Side {
    s: usize,
    u: usize,
    w: usize,
    x: usize,
    t: usize,
}

fn find(parent: &mut [usize], v: usize) -> usize {
    let mut root = v;
    while parent[root] != root {
        root = parent[root];
    }
    let mut cur = v;
    while parent[cur] != root {
        let next = parent[cur];
        parent[cur] = root;
        cur = next;
    }
    root
}

/// Builds the instance that admits a makespan-3 solution iff `sat` is satisfiable.
///
/// Gadget components left disconnected (e.g. variables sharing no clause) are
/// joined by two fresh `link` vertices, which cannot shorten any agent's route.
pub fn reduce_sat(sat: &SatInstance) -> Result<ReductionOutput> {
    sat.validate()?;
    let mut b = Builder::default();
    let mut sides: Vec<[Side; 2]> = Vec::new();
    let mut shared = Vec::new();
    for i in 1..=sat.variable_count {
        let mut side = |tag: char| Side {
            s: b.vertex(format!("s_{i}{tag}")),
            u: b.vertex(format!("u_{i}{tag}")),
            w: b.vertex(format!("w_{i}{tag}")),
            x: b.vertex(format!("x_{i}{tag}")),
            t: b.vertex(format!("t_{i}{tag}")),
        };
        let pair = [side('T'), side('F')];
        let v = b.vertex(format!("v_{i}"));
        for p in &pair {
            b.path(&[p.s, p.u, v, p.t]);
            b.path(&[p.s, p.w, p.x, p.t]);
        }
        sides.push(pair);
        shared.push(VertexId(v as u32));
    }

    let mut seen: BTreeMap<Literal, usize> = BTreeMap::new();
    let mut clause_ends = Vec::new();
    for (j, clause) in sat.clauses.iter().enumerate() {
        let j = j + 1;
        let occurrence: Vec<usize> = clause
            .iter()
            .map(|lit| {
                let n = seen.entry(*lit).or_default();
                *n += 1;
                *n
            })
            .collect();
        let c = b.vertex(format!("c_{j}"));
        let bj = occurrence.contains(&1).then(|| b.vertex(format!("b_{j}")));
        let alpha = occurrence.iter().any(|&n| n >= 2).then(|| b.vertex(format!("alpha_{j}")));
        let d = b.vertex(format!("d_{j}"));
        for (&lit, &n) in clause.iter().zip(&occurrence) {
            let side = &sides[lit.unsigned_abs() as usize - 1][usize::from(lit < 0)];
            if n == 1 {
                b.path(&[c, side.w, bj.expect("first occurrence"), d]);
            } else {
                b.path(&[c, alpha.expect("second occurrence"), side.x, d]);
            }
        }
        clause_ends.push((c, d));
    }

    let n = b.labels.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for &(u, v) in &b.edges {
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        parent[ru.max(rv)] = ru.min(rv);
    }
    let roots: BTreeSet<usize> = (0..n).map(|v| find(&mut parent, v)).collect();
    for (k, &root) in roots.iter().enumerate().skip(1) {
        let l1 = b.vertex(format!("link_{k}a"));
        let l2 = b.vertex(format!("link_{k}b"));
        b.path(&[0, l1, l2, root]);
    }

    let edges: Vec<(usize, usize)> = b.edges.iter().copied().collect();
    let graph = Arc::new(build_graph(b.labels.len(), &edges)?);
    let mut agents = Vec::new();
    let mut agent_labels = Vec::new();
    for (i, pair) in sides.iter().enumerate() {
        for (p, tag) in pair.iter().zip(['T', 'F']) {
            agents.push(Agent::new(agents.len() as u32 + 1, VertexId(p.s as u32), VertexId(p.t as u32), 0));
            agent_labels.push(format!("a_{}{tag}", i + 1));
        }
    }
    for (j, &(c, d)) in clause_ends.iter().enumerate() {
        agents.push(Agent::new(agents.len() as u32 + 1, VertexId(c as u32), VertexId(d as u32), 0));
        agent_labels.push(format!("a_c{}", j + 1));
    }
    for a in &agents {
        let d = graph.distance(a.start, a.goal);
        if d != 3 {
            return Err(Error::MalformedSat(format!(
                "reduction gave agent {} distance {d}, expected 3",
                agent_labels[a.id.0 as usize - 1]
            )));
        }
    }
    Ok(ReductionOutput {
        instance: OnlineInstance::new(graph, agents)?,
        sat: sat.clone(),
        vertex_labels: b.labels,
        agent_labels,
        shared,
    })
}

/// Reads a truth assignment off a makespan-3 solution: a variable is true if
/// `a_iT` takes its shared path, false if `a_iF` does, and true otherwise.
pub fn decode_assignment(out: &ReductionOutput, plan: &Plan) -> Result<Vec<bool>> {
    let inst = &out.instance;
    plan.validate(inst)?;
    if let Some(a) = inst.agents().iter().find(|a| !plan.contains(a.id)) {
        return Err(Error::UnplannedAgent(a.id));
    }
    if let Some(c) = detect_conflicts(plan).first() {
        return Err(Error::PolicyViolation(format!(
            "agents {} and {} collide at {}",
            c.agents.0, c.agents.1, c.time
        )));
    }
    if plan.makespan() != 3 {
        return Err(Error::NotMakespanThree(plan.makespan()));
    }
    let uses_shared = |id: AgentId, v: VertexId| {
        plan.get(id).is_some_and(|p| p.vertices.contains(&v))
    };
    Ok((1..=out.sat.variable_count)
        .map(|var| {
            let (t, f) = out.literal_agents(var);
            let v = out.shared_vertex(var);
            uses_shared(t, v) || !uses_shared(f, v)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(SatInstance::new(1, vec![vec![1], vec![1], vec![-1]]).is_ok());
        assert!(SatInstance::new(1, vec![vec![1], vec![1], vec![1]]).is_err());
        assert!(SatInstance::new(1, vec![vec![1], vec![-1]]).is_err());
        assert!(SatInstance::new(1, vec![vec![1, -1], vec![1]]).is_err());
        assert!(SatInstance::new(2, vec![vec![1, 2, -2, 1]]).is_err());
    }

    #[test]
    fn gadget_sizes() {
        let sat = SatInstance::new(2, vec![vec![1, 2], vec![-1, 2], vec![1, -2]]).unwrap();
        let out = reduce_sat(&sat).unwrap();
        assert_eq!(out.instance.agent_count(), 7);
        assert!(out.instance.agents().iter().all(|a| a.release == 0));
        // 11 per variable plus c, b/alpha, d per clause.
        assert!(out.instance.graph.vertex_count() <= 11 * 2 + 4 * 3);
    }
}
