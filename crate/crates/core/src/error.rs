use thiserror::Error;

use crate::bend::VarId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("literal {literal}: not a bend: {reason}")]
    RejectedNotABend { literal: usize, reason: String },

    #[error("invalid literal: {0}")]
    InvalidLiteral(String),

    #[error("{0}")]
    SignCondition(String),

    #[error("bounds are on different variables")]
    DifferentVariables,

    #[error("bends do not share the expected variable")]
    VariableMismatch,

    #[error("variable {0} has no value")]
    UnassignedVariable(VariableRef),

    #[error("assignment variables do not match the formula")]
    VariableSetMismatch,

    #[error("cycle and dual cycle share a vertex other than the joining one")]
    SharedEndpoint,

    #[error("bends do not form a path: {0}")]
    NotAPath(String),

    #[error("bends do not form a cycle: {0}")]
    NotACycle(String),

    #[error("unknown variable {0}")]
    UnknownVariable(String),

    #[error("no disjunct of bend {0} dominates on the chosen strip")]
    NoDisjunctDominates(usize),

    #[error("input is not a conjunction of two-variable inequalities")]
    NonTvpiInput,

    #[error("empty interval")]
    EmptyInterval,

    #[error("search budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("composition does not produce a bend: {0}")]
    NonBendResidue(String),

    #[error("{location}: {message}")]
    Parse { location: SourceLocation, message: String },

    #[error("{location}: not a bend: {reason}")]
    NotABendAt { location: SourceLocation, reason: String },

    #[error("witness fails the formula: {0}")]
    WitnessRejected(String),

    #[error("invalid certificate: {0}")]
    Certificate(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

/// A variable named either by index or by its user-facing name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VariableRef {
    Id(VarId),
    Name(String),
}

impl From<VarId> for VariableRef {
    fn from(v: VarId) -> Self {
        VariableRef::Id(v)
    }
}

impl std::fmt::Display for VariableRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VariableRef::Id(v) => v.fmt(f),
            VariableRef::Name(n) => f.write_str(n),
        }
    }
}

/// Position in an input file; lines and columns count from 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceLocation {
    pub file: String,
    pub line: usize,
    pub column: usize,
}

impl std::fmt::Display for SourceLocation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}
