use std::fmt;
use std::ops::{Add, Sub};

/// Simulation time in whole microseconds.
///
/// Integer time keeps event ordering exact and replayable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SimTime(pub u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);
    pub const MAX: SimTime = SimTime(u64::MAX);

    pub fn from_secs(s: f64) -> Self {
        debug_assert!(s >= 0.0);
        SimTime((s * 1e6).round() as u64)
    }

    pub fn from_millis(ms: u64) -> Self {
        SimTime(ms * 1000)
    }

    pub fn as_secs(self) -> f64 {
        self.0 as f64 * 1e-6
    }

    pub fn saturating_add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.saturating_add(rhs.0))
    }
}

impl Add for SimTime {
    type Output = SimTime;
    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 + rhs.0)
    }
}

impl Sub for SimTime {
    type Output = SimTime;
    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 - rhs.0)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6}s", self.as_secs())
    }
}
