use crate::model::AgentId;
use crate::world::VertexId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("world has no unblocked cell")]
    EmptyWorld,
    #[error("world is not connected ({components} components)")]
    DisconnectedWorld { components: usize },
    #[error("invalid edge ({0}, {1})")]
    InvalidEdge(usize, usize),
    #[error("vertex {0} is out of range")]
    InvalidVertex(usize),
    #[error("invalid agent: {0}")]
    InvalidAgent(String),
    #[error("invalid path for agent {agent}: {reason}")]
    InvalidPath { agent: AgentId, reason: String },
    #[error("agent {0} has no path")]
    UnplannedAgent(AgentId),
    #[error("search budget exhausted after {expanded} nodes (horizon {horizon})")]
    BudgetExhausted { expanded: u64, horizon: i64 },
    #[error("line family needs an even m >= 2, got {0}")]
    OddM(usize),
    #[error("closed form {name} is not an integer at m = {m}")]
    NonIntegerResult { name: &'static str, m: usize },
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),
    #[error("malformed SAT instance: {0}")]
    MalformedSat(String),
    #[error("plan has makespan {0}, expected 3")]
    NotMakespanThree(i64),
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("policy produced an infeasible plan: {0}")]
    PolicyViolation(String),
    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },
    #[error("vertex {vertex} has no grid cell")]
    NotAGridVertex { vertex: VertexId },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(file: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            file: file.into(),
            line,
            message: message.into(),
        }
    }
}
