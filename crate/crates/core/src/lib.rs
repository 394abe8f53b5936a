//! Collaboration analytics on student–subtask bipartite networks.
//!
//! Each team's activity in a project is modelled as a bipartite network
//! between students and the project's subtasks. Two measures are read off
//! it per student: the point-weighted share of subtasks they engaged with
//! (quantity) and the capacity-normalized entropy of their task-type mix
//! (heterogeneity). The pair places a student in one of four emerging
//! roles; role changes across projects are cross-tabulated against changes
//! in assigned leadership and tested with Barnard's exact test, and leader
//! versus non-leader contributions are compared with Mann-Whitney U.

pub mod error;
pub mod measures;
pub mod model;
pub mod pipeline;
pub mod report;
pub mod roles;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
