//! Command-line front end: problem files, subcommands and output.

pub mod app;
pub mod problem_file;

pub use app::{run, Outcome, EXIT_OK, EXIT_SOLVER, EXIT_USAGE, EXIT_VERIFY};
pub use problem_file::{FileError, Kind, Problem, ProblemFile};
