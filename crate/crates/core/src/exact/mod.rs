//! Exact optimum for small instances and an LP-format model exporter.

mod ilp;
mod solver;

pub use ilp::{
    build_ilp, export_ilp, ConnectivityForm, Constraint, IlpModel, Sense, VarKind, SUBTOUR_MAX_CANDIDATES,
};
pub use solver::{solve_exact, OptimumCertificate, DEFAULT_CANDIDATE_LIMIT};
