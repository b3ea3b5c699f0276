//! Hierarchical location services for mobile ad-hoc networks.
//!
//! The crate simulates PHLS (a hierarchical location service whose servers
//! extrapolate stored positions with either the last recorded velocity or a
//! smoothed average velocity) next to the HLS baseline, and evaluates the
//! closed-form scalability model of the same hierarchy.
//!
//! * [`grid`]: recursive square partition and modulo-hash server election.
//! * [`mobility`]: modified random-direction mobility with reflecting walls.
//! * [`netsim`]: event queue, unit-disk radio and greedy geographic forwarding.
//! * [`locsvc`]: server tables, update/hand-over handlers, treewalk queries
//!   and the two predictors.
//! * [`analytic`]: maintenance, query and storage cost model.
//! * [`experiment`]: scenario configuration, runs, sweeps and CSV output.

// Validation uses `!(x > 0.0)` on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod experiment;
pub mod geom;
pub mod grid;
pub mod locsvc;
pub mod mobility;
pub mod netsim;

pub use geom::Vec2;

use std::fmt;

/// Unique identity of a mobile node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}
