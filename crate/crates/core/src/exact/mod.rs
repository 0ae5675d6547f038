//! Ground truth: a brute-force optimum for tiny instances and the integer
//! model for external MILP solvers.

mod ilp;
mod oracle;

pub use ilp::{
    build_ilp, decode_assignment, emit_lp, emit_mps, encode_solution, values_by_name, AssignmentError, Constraint,
    IlpModel, RowFamily, Sense, VarKind, Variable,
};
pub use oracle::{brute_force_opt, brute_force_opt_strict, OracleError, OracleLimits};
