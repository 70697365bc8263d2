//! Solver for preemptive scheduling on parallel identical machines with
//! release dates and regular criteria (`P|pmtn,r_j|f`).
//!
//! The solver searches among permutation-flow-shop-like (PFS-like)
//! schedules: every machine processes the jobs in one common order, each job
//! at most once per machine, and concurrently running jobs occupy the lowest
//! machines in index order. When the completion order of an optimal schedule
//! is known, a linear program with `O(nm)` variables finds it.
//!
//! * [`model`] instances, criteria, schedules and exact rationals.
//! * [`validate`] structural predicates over schedules.
//! * [`simplex`] exact two-phase simplex.
//! * [`pfs_lp`] job ordering, the fixed-order LP and schedule extraction.
//! * [`transform`] left shifts, vertical ordering, PFS conversion and pair exchange.
//! * [`oracle`] brute-force references and random generators.

pub mod error;
pub mod model;
pub mod oracle;
pub mod pfs_lp;
pub mod simplex;
pub mod transform;
pub mod validate;

pub use error::{Error, Result};
pub use model::{Criterion, Instance, Job, Piece, PiecewiseLinearFn, Rational, Schedule};
