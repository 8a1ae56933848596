//! Multi-school bus routing and scheduling.
//!
//! The crate decomposes the joint routing/scheduling problem into one routing
//! subproblem per school plus a single chaining (scheduling) problem. Routing
//! subproblems can look ahead at which later schools a trip could feed into
//! ("trip-to-school compatibility"), which is what distinguishes the
//! compatibility-aware algorithms from the traditional route-then-schedule
//! baselines also provided here.
//!
//! Layout:
//! - [`instance`]: problem data, travel-time arithmetic, seeded generator, JSON I/O.
//! - [`trips`]: trip representation, service-time regression, stop ordering.
//! - [`compatibility`]: deadheads, compatibility predicates, the pair set `E`.
//! - [`routing`]: single-school subproblem solvers (exact and heuristic).
//! - [`scheduling`]: exact trip chaining via min-cost matching, plus an oracle.
//! - [`decomposition`]: the end-to-end algorithms, baselines and exact oracle.
//! - [`harness`]: experiment grids and CSV reports.

pub mod compatibility;
pub mod config;
pub mod decomposition;
pub mod error;
pub mod fixtures;
pub mod flow;
pub mod harness;
pub mod instance;
pub mod ordering;
pub mod routing;
pub mod scheduling;
pub mod solution_io;
pub mod trips;

pub use config::{Aat, SolverConfig};
pub use error::{Error, Result};
pub use instance::{Instance, Node, School, SchoolId, Stop, StopId};
