//! Slack-variable penalty bounds for semi-definite and linear programs,
//! evaluated with parameterized states and trained with SPSA.

pub mod ansatz;
pub mod cli;
pub mod estimate;
pub mod linalg;
pub mod objective;
pub mod optimizer;
pub mod oracle;
pub mod pauli;
