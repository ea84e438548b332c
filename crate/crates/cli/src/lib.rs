//! Scenario runner and acceptance suites for `ncerg`.
//!
//! A scenario file names one system, a Følner schedule and a list of tasks;
//! [`run`] executes the tasks and returns a [`Report`] that renders as JSON or
//! as a fixed-layout table. [`suites`] holds the randomized acceptance suites
//! behind `ncx check`.

pub mod builtin;
pub mod report;
pub mod run;
pub mod scenario;
pub mod suites;

pub use builtin::{builtin_system, BUILTIN_NAMES};
pub use report::{Environment, Report, Status, Summary, TaskRecord};
pub use run::{run, RunOptions};
pub use scenario::{parse_scenario, Scenario, ScenarioError, TaskSpec, Tolerances};
