//! Modified random-direction mobility.
//!
//! A node picks a speed, a heading and a leg duration, moves in a straight
//! line until the leg expires, pauses, then picks again. Walls reflect the
//! node specularly, so the speed is preserved within a leg.

use crate::geom::{Square, Vec2};
use rand::Rng;
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Moving,
    Paused,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionState {
    /// Simulation time (s) this state describes.
    pub time: f64,
    pub position: Vec2,
    pub velocity: Vec2,
    pub phase: Phase,
    /// Time (s) at which the current phase ends.
    pub phase_end: f64,
    /// Smoothed velocity kept for the moving-average predictor.
    pub avg_velocity: Vec2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MobilityConfig {
    pub v_max: f64,
    pub pause_max: f64,
    pub leg_time_max: f64,
    pub area: Square,
}

impl MobilityConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.v_max > 0.0 && self.v_max.is_finite()) {
            return Err(format!("v_max must be positive, got {}", self.v_max));
        }
        if !(self.pause_max >= 0.0 && self.pause_max.is_finite()) {
            return Err(format!("pause_max must be non-negative, got {}", self.pause_max));
        }
        if !(self.leg_time_max > 0.0 && self.leg_time_max.is_finite()) {
            return Err(format!(
                "leg_time_max must be positive, got {}",
                self.leg_time_max
            ));
        }
        if !(self.area.side > 0.0) {
            return Err("mobility area must have a positive side".into());
        }
        Ok(())
    }
}

/// Draws from `(0, max]`; returns 0 when `max == 0`.
fn half_open_upper<R: Rng + ?Sized>(rng: &mut R, max: f64) -> f64 {
    max * (1.0 - rng.gen::<f64>())
}

impl MotionState {
    /// A node at `position` starting a fresh leg at `time`.
    pub fn start<R: Rng + ?Sized>(
        position: Vec2,
        time: f64,
        cfg: &MobilityConfig,
        rng: &mut R,
    ) -> Self {
        let mut s = MotionState {
            time,
            position,
            velocity: Vec2::ZERO,
            phase: Phase::Paused,
            phase_end: time,
            avg_velocity: Vec2::ZERO,
        };
        s.begin_leg(cfg, rng);
        s
    }

    /// A node that never moves.
    pub fn stationary(position: Vec2, time: f64) -> Self {
        MotionState {
            time,
            position,
            velocity: Vec2::ZERO,
            phase: Phase::Paused,
            phase_end: f64::INFINITY,
            avg_velocity: Vec2::ZERO,
        }
    }

    pub fn speed(&self) -> f64 {
        self.velocity.norm()
    }

    fn begin_leg<R: Rng + ?Sized>(&mut self, cfg: &MobilityConfig, rng: &mut R) {
        let speed = half_open_upper(rng, cfg.v_max);
        let heading = rng.gen::<f64>() * TAU;
        let leg = half_open_upper(rng, cfg.leg_time_max);
        self.velocity = Vec2::new(speed * heading.cos(), speed * heading.sin());
        self.phase = Phase::Moving;
        self.phase_end = self.time + leg;
    }

    fn begin_pause<R: Rng + ?Sized>(&mut self, cfg: &MobilityConfig, rng: &mut R) {
        self.velocity = Vec2::ZERO;
        self.phase = Phase::Paused;
        self.phase_end = self.time + half_open_upper(rng, cfg.pause_max);
    }

    /// Position and velocity after moving `dt` seconds within the current
    /// phase, without consuming randomness.
    pub fn drift(&self, dt: f64, area: &Square) -> (Vec2, Vec2) {
        let (x, vx) = reflect_axis(self.position.x - area.origin.x, self.velocity.x, dt, area.side);
        let (y, vy) = reflect_axis(self.position.y - area.origin.y, self.velocity.y, dt, area.side);
        (
            Vec2::new(area.origin.x + x, area.origin.y + y),
            Vec2::new(vx, vy),
        )
    }
}

/// One axis of specular reflection inside `[0, side]`, by folding the
/// unfolded coordinate onto a triangle wave of period `2 * side`.
fn reflect_axis(offset: f64, velocity: f64, dt: f64, side: f64) -> (f64, f64) {
    if velocity == 0.0 || dt == 0.0 {
        return (offset, velocity);
    }
    let unfolded = offset + velocity * dt;
    let m = unfolded.rem_euclid(2.0 * side);
    if m <= side {
        (m, velocity)
    } else {
        (2.0 * side - m, -velocity)
    }
}

/// Advances `state` to `to_time`, drawing new legs and pauses from `rng` at
/// every phase boundary crossed on the way.
pub fn advance<R: Rng + ?Sized>(
    state: &MotionState,
    to_time: f64,
    cfg: &MobilityConfig,
    rng: &mut R,
) -> MotionState {
    debug_assert!(to_time >= state.time, "cannot advance backwards in time");
    let mut s = *state;
    while s.phase_end < to_time {
        let (p, v) = s.drift(s.phase_end - s.time, &cfg.area);
        s.position = cfg.area.clamp(p);
        s.velocity = v;
        s.time = s.phase_end;
        match s.phase {
            Phase::Moving => s.begin_pause(cfg, rng),
            Phase::Paused => s.begin_leg(cfg, rng),
        }
    }
    if to_time > s.time {
        let (p, v) = s.drift(to_time - s.time, &cfg.area);
        s.position = cfg.area.clamp(p);
        s.velocity = v;
        s.time = to_time;
    }
    s
}

/// A node's whole path, stored as the state at the start of every phase.
///
/// Positions at arbitrary times are then pure lookups, so the event core can
/// sample any node at any time without touching random streams.
#[derive(Debug, Clone)]
pub struct Trajectory {
    phases: Vec<MotionState>,
    area: Square,
}

impl Trajectory {
    /// Generates phases from `initial` until one ends at or after `horizon`.
    pub fn generate<R: Rng + ?Sized>(
        initial: MotionState,
        horizon: f64,
        cfg: &MobilityConfig,
        rng: &mut R,
    ) -> Self {
        let mut phases = vec![initial];
        let mut s = initial;
        while s.phase_end < horizon {
            // Step just past the boundary so `advance` performs the transition.
            s = advance(&s, s.phase_end, cfg, rng);
            let mut next = s;
            match next.phase {
                Phase::Moving => next.begin_pause(cfg, rng),
                Phase::Paused => next.begin_leg(cfg, rng),
            }
            s = next;
            phases.push(s);
        }
        Trajectory {
            phases,
            area: cfg.area,
        }
    }

    pub fn stationary(position: Vec2, area: Square) -> Self {
        Trajectory {
            phases: vec![MotionState::stationary(position, 0.0)],
            area,
        }
    }

    pub fn phases(&self) -> &[MotionState] {
        &self.phases
    }

    fn phase_at(&self, t: f64) -> &MotionState {
        let idx = self.phases.partition_point(|s| s.time <= t);
        &self.phases[idx.saturating_sub(1)]
    }

    pub fn state_at(&self, t: f64) -> (Vec2, Vec2) {
        let s = self.phase_at(t);
        let (p, v) = s.drift((t - s.time).max(0.0), &self.area);
        (self.area.clamp(p), v)
    }

    pub fn position_at(&self, t: f64) -> Vec2 {
        self.state_at(t).0
    }

    pub fn velocity_at(&self, t: f64) -> Vec2 {
        self.state_at(t).1
    }
}
