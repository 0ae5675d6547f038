//! Command-line harness for the sDmSOP solvers: instance conversion,
//! experiment matrices with CSV reports, solution verification and model
//! export.

pub mod experiment;
pub mod inputs;
pub mod verify;
