//! Location-service protocols: PHLS with linear (PHLS1) or moving-average
//! (PHLS2) prediction, and the HLS baseline.
//!
//! Both protocols share the grid hierarchy, the update trigger (a node
//! refreshes the servers of every level whose region it just left) and the
//! treewalk query. They differ in where records live: PHLS unicasts each
//! record to one elected node per region, HLS geocasts it to every node of a
//! hash-selected responsible cell. Servers answer from the stored
//! (position, velocity, timestamp) triple; PHLS extrapolates it, HLS returns
//! the stored position.

mod predict;
mod service;
mod table;

pub use predict::{predict_avg, predict_linear, update_avg_velocity};
pub use service::{
    elect_excluding, Body, Candidate, LocationAnswer, LocationService, Message, Outgoing,
    QueryId, QueryOutcome, QueryState, ServiceConfig, ServiceContext, ServiceStats,
};
pub use table::{Entry, ServerTable};

use crate::geom::Vec2;
use crate::grid::RegionId;
use crate::NodeId;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LocError {
    #[error("prediction requested at t={now} before record time {recorded}")]
    NegativeElapsed { recorded: f64, now: f64 },
    #[error("filter gain {0} outside [0, 1]")]
    AlphaOutOfRange(f64),
    #[error("no server holds a record for {0}")]
    SubjectUnknown(NodeId),
    #[error("unknown protocol '{0}' (expected hls, phls1 or phls2)")]
    UnknownProtocol(String),
    #[error("unknown server mobility policy '{0}' (expected handover or discard)")]
    UnknownPolicy(String),
}

/// One node's location as stored at a server.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocationRecord {
    pub subject: NodeId,
    pub position: Vec2,
    pub velocity: Vec2,
    /// Time (s) at which position and velocity were sampled.
    pub timestamp: f64,
    pub region: RegionId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PredictorScheme {
    /// Stored position returned as is (HLS).
    None,
    /// Last recorded velocity (PHLS1).
    Linear,
    /// Exponentially smoothed velocity (PHLS2).
    MovingAverage,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictorConfig {
    pub scheme: PredictorScheme,
    pub alpha: f64,
}

impl PredictorConfig {
    pub fn new(scheme: PredictorScheme, alpha: f64) -> Result<Self, LocError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(LocError::AlphaOutOfRange(alpha));
        }
        Ok(PredictorConfig { scheme, alpha })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Protocol {
    Hls,
    Phls1,
    Phls2,
}

impl Protocol {
    pub const ALL: [Protocol; 3] = [Protocol::Hls, Protocol::Phls1, Protocol::Phls2];

    pub fn scheme(self) -> PredictorScheme {
        match self {
            Protocol::Hls => PredictorScheme::None,
            Protocol::Phls1 => PredictorScheme::Linear,
            Protocol::Phls2 => PredictorScheme::MovingAverage,
        }
    }

    /// HLS stores records in responsible cells rather than single nodes.
    pub fn cell_based(self) -> bool {
        self == Protocol::Hls
    }

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Hls => "HLS",
            Protocol::Phls1 => "PHLS1",
            Protocol::Phls2 => "PHLS2",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = LocError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hls" => Ok(Protocol::Hls),
            "phls1" => Ok(Protocol::Phls1),
            "phls2" => Ok(Protocol::Phls2),
            _ => Err(LocError::UnknownProtocol(s.to_string())),
        }
    }
}

/// What a server does with its records when it leaves their region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ServerMobilityPolicy {
    /// Forward them to the newly elected server of that region.
    #[default]
    HandOver,
    /// Drop them; clients re-elect on their next move.
    Discard,
}

impl fmt::Display for ServerMobilityPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ServerMobilityPolicy::HandOver => "handover",
            ServerMobilityPolicy::Discard => "discard",
        })
    }
}

impl FromStr for ServerMobilityPolicy {
    type Err = LocError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "handover" | "hand_over" => Ok(ServerMobilityPolicy::HandOver),
            "discard" => Ok(ServerMobilityPolicy::Discard),
            _ => Err(LocError::UnknownPolicy(s.to_string())),
        }
    }
}
