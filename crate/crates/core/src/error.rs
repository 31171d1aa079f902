use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("reserve component {index} must be strictly positive, got {value}")]
    Domain { index: usize, value: f64 },

    #[error("dimension mismatch: expected {expected} components, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid trading function: {0}")]
    InvalidSpec(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("trade must be nonzero")]
    ZeroTrade,

    #[error("trade rejected: reserves would change the trading function or go negative")]
    Rejected,

    #[error("no feasible trade: {0}")]
    NoSolution(String),

    #[error("singular linear system")]
    Singular,

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("no sign change found while bracketing the scale root in [{lo:e}, {hi:e}]")]
    Bracket { lo: f64, hi: f64 },

    #[error("{0} pools have no unique price-consistent reserves; use the constant-sum search")]
    Inapplicable(&'static str),

    #[error("linear program is infeasible")]
    InfeasibleLp,

    #[error("linear program is unbounded")]
    UnboundedLp,

    #[error("probe trades are degenerate (rank {rank} < {required})")]
    DegenerateProbes { rank: usize, required: usize },

    #[error("oracle query budget of {0} exhausted")]
    QueryBudget(u64),
}
