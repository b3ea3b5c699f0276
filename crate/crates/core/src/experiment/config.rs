//! Scenario parameters and their flat `key = value` file format.

use std::fmt::Write as _;
use std::str::FromStr;

use super::ExperimentError;
use crate::geom::{Square, Vec2};
use crate::grid::GridHierarchy;
use crate::locsvc::{PredictorConfig, Protocol, ServerMobilityPolicy, ServiceConfig};
use crate::mobility::MobilityConfig;
use crate::netsim::{RadioConfig, SimTime};

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Side of the square simulation area (m).
    pub area_side: f64,
    pub radio_range: f64,
    pub node_count: u32,
    pub v_max: f64,
    pub pause_max: f64,
    /// Longest movement leg (s).
    pub leg_time_max: f64,
    /// Simulated time (s).
    pub duration: f64,
    /// Initial period without queries or byte accounting (s).
    pub warmup: f64,
    pub requests_per_run: u32,
    pub runs: u32,
    pub protocol: Protocol,
    pub alpha: f64,
    pub server_mobility: ServerMobilityPolicy,
    pub cell_side: f64,
    pub rng_seed: u64,
    /// A reply farther than this from the true position counts as a failure.
    pub success_radius: f64,
    /// Count every reply as a success regardless of its error.
    pub any_reply_counts: bool,
    pub query_deadline: f64,
    /// A PHLS level-0 server missing a record asks the rest of its cell.
    pub cell_fallback: bool,
    /// PHLS records follow the elected server when region membership changes.
    pub rehome_on_election_change: bool,
    /// Period of the membership check that detects boundary crossings (s).
    pub tick: f64,
    pub hop_latency: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            area_side: 1000.0,
            radio_range: 250.0,
            node_count: 300,
            v_max: 10.0,
            pause_max: 10.0,
            leg_time_max: 30.0,
            duration: 300.0,
            warmup: 10.0,
            requests_per_run: 1200,
            runs: 5,
            protocol: Protocol::Phls2,
            alpha: 0.5,
            server_mobility: ServerMobilityPolicy::HandOver,
            cell_side: 125.0,
            rng_seed: 1,
            success_radius: 250.0,
            any_reply_counts: false,
            query_deadline: 5.0,
            cell_fallback: true,
            rehome_on_election_change: false,
            tick: 0.1,
            hop_latency: 0.005,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, ExperimentError>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| ExperimentError::InvalidConfig(format!("{key}: cannot parse {value:?}: {e}")))
}

impl ScenarioConfig {
    /// Parses `key = value` lines over the defaults. Blank lines and `#`
    /// comments are ignored; unknown or repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self, ExperimentError> {
        let mut cfg = ScenarioConfig::default();
        let mut seen = std::collections::BTreeSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ExperimentError::InvalidConfig(format!("line {}: expected key = value", n + 1)));
            };
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(ExperimentError::InvalidConfig(format!("line {}: duplicate key {key}", n + 1)));
            }
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ExperimentError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ExperimentError> {
        match key {
            "area_side" => self.area_side = parse_value(key, value)?,
            "radio_range" => self.radio_range = parse_value(key, value)?,
            "node_count" => self.node_count = parse_value(key, value)?,
            "v_max" => self.v_max = parse_value(key, value)?,
            "pause_max" => self.pause_max = parse_value(key, value)?,
            "leg_time_max" => self.leg_time_max = parse_value(key, value)?,
            "duration" => self.duration = parse_value(key, value)?,
            "warmup" => self.warmup = parse_value(key, value)?,
            "requests_per_run" => self.requests_per_run = parse_value(key, value)?,
            "runs" => self.runs = parse_value(key, value)?,
            "protocol" => self.protocol = parse_value(key, value)?,
            "alpha" => self.alpha = parse_value(key, value)?,
            "server_mobility" => self.server_mobility = parse_value(key, value)?,
            "cell_side" => self.cell_side = parse_value(key, value)?,
            "rng_seed" => self.rng_seed = parse_value(key, value)?,
            "success_radius" => self.success_radius = parse_value(key, value)?,
            "any_reply_counts" => self.any_reply_counts = parse_value(key, value)?,
            "query_deadline" => self.query_deadline = parse_value(key, value)?,
            "cell_fallback" => self.cell_fallback = parse_value(key, value)?,
            "rehome_on_election_change" => self.rehome_on_election_change = parse_value(key, value)?,
            "tick" => self.tick = parse_value(key, value)?,
            "hop_latency" => self.hop_latency = parse_value(key, value)?,
            _ => return Err(ExperimentError::InvalidConfig(format!("unknown key {key}"))),
        }
        Ok(())
    }

    /// Renders every field; `parse(to_text())` round-trips.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "area_side = {}", self.area_side);
        let _ = writeln!(s, "radio_range = {}", self.radio_range);
        let _ = writeln!(s, "node_count = {}", self.node_count);
        let _ = writeln!(s, "v_max = {}", self.v_max);
        let _ = writeln!(s, "pause_max = {}", self.pause_max);
        let _ = writeln!(s, "leg_time_max = {}", self.leg_time_max);
        let _ = writeln!(s, "duration = {}", self.duration);
        let _ = writeln!(s, "warmup = {}", self.warmup);
        let _ = writeln!(s, "requests_per_run = {}", self.requests_per_run);
        let _ = writeln!(s, "runs = {}", self.runs);
        let _ = writeln!(s, "protocol = {}", self.protocol);
        let _ = writeln!(s, "alpha = {}", self.alpha);
        let _ = writeln!(s, "server_mobility = {}", self.server_mobility);
        let _ = writeln!(s, "cell_side = {}", self.cell_side);
        let _ = writeln!(s, "rng_seed = {}", self.rng_seed);
        let _ = writeln!(s, "success_radius = {}", self.success_radius);
        let _ = writeln!(s, "any_reply_counts = {}", self.any_reply_counts);
        let _ = writeln!(s, "query_deadline = {}", self.query_deadline);
        let _ = writeln!(s, "cell_fallback = {}", self.cell_fallback);
        let _ = writeln!(s, "rehome_on_election_change = {}", self.rehome_on_election_change);
        let _ = writeln!(s, "tick = {}", self.tick);
        let _ = writeln!(s, "hop_latency = {}", self.hop_latency);
        s
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let invalid = |msg: String| Err(ExperimentError::InvalidConfig(msg));
        for (name, v) in [
            ("area_side", self.area_side),
            ("radio_range", self.radio_range),
            ("v_max", self.v_max),
            ("leg_time_max", self.leg_time_max),
            ("duration", self.duration),
            ("cell_side", self.cell_side),
            ("success_radius", self.success_radius),
            ("query_deadline", self.query_deadline),
            ("tick", self.tick),
            ("hop_latency", self.hop_latency),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return invalid(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.pause_max >= 0.0 && self.pause_max.is_finite()) {
            return invalid(format!("pause_max must be non-negative, got {}", self.pause_max));
        }
        if !(self.warmup >= 0.0 && self.warmup < self.duration) {
            return invalid(format!("warmup must lie in [0, duration), got {}", self.warmup));
        }
        if self.node_count < 2 {
            return invalid(format!("node_count must be at least 2, got {}", self.node_count));
        }
        if self.requests_per_run == 0 || self.runs == 0 {
            return invalid("requests_per_run and runs must be at least 1".into());
        }
        PredictorConfig::new(self.protocol.scheme(), self.alpha)
            .map_err(|e| ExperimentError::InvalidConfig(e.to_string()))?;
        let grid = self.grid()?;
        grid.check_radio_range(self.radio_range)
            .map_err(|e| ExperimentError::InvalidConfig(e.to_string()))?;
        Ok(())
    }

    pub fn grid(&self) -> Result<GridHierarchy, ExperimentError> {
        GridHierarchy::for_area(Vec2::ZERO, self.area_side, self.cell_side)
            .map_err(|e| ExperimentError::InvalidConfig(e.to_string()))
    }

    pub fn area(&self) -> Square {
        Square::new(Vec2::ZERO, self.area_side)
    }

    pub fn mobility(&self) -> MobilityConfig {
        MobilityConfig {
            v_max: self.v_max,
            pause_max: self.pause_max,
            leg_time_max: self.leg_time_max,
            area: self.area(),
        }
    }

    pub fn radio(&self) -> RadioConfig {
        RadioConfig {
            range: self.radio_range,
            hop_latency: SimTime::from_secs(self.hop_latency),
        }
    }

    pub fn service(&self) -> Result<ServiceConfig, ExperimentError> {
        Ok(ServiceConfig {
            protocol: self.protocol,
            predictor: PredictorConfig::new(self.protocol.scheme(), self.alpha)
                .map_err(|e| ExperimentError::InvalidConfig(e.to_string()))?,
            policy: self.server_mobility,
            cell_fallback: self.cell_fallback,
            rehome_on_election_change: self.rehome_on_election_change,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        ScenarioConfig::default().validate().unwrap();
        assert_eq!(ScenarioConfig::default().grid().unwrap().levels(), 3);
    }

    #[test]
    fn shipped_config_matches_defaults() {
        let cfg = ScenarioConfig::parse(include_str!("../../configs/default.conf")).unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
    }

    #[test]
    fn parse_overrides_and_round_trips() {
        let cfg = ScenarioConfig::parse("# speed sweep base\nv_max = 30\nprotocol = hls\nserver_mobility = discard\n").unwrap();
        assert_eq!(cfg.v_max, 30.0);
        assert_eq!(cfg.protocol, Protocol::Hls);
        assert_eq!(cfg.server_mobility, ServerMobilityPolicy::Discard);
        assert_eq!(ScenarioConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn unknown_and_duplicate_keys_rejected() {
        assert!(matches!(ScenarioConfig::parse("speed = 3"), Err(ExperimentError::InvalidConfig(_))));
        assert!(matches!(ScenarioConfig::parse("v_max = 3\nv_max = 4"), Err(ExperimentError::InvalidConfig(_))));
        assert!(matches!(ScenarioConfig::parse("v_max"), Err(ExperimentError::InvalidConfig(_))));
    }

    #[test]
    fn geometry_invariants_enforced() {
        let too_wide = ScenarioConfig { radio_range: 150.0, ..Default::default() };
        assert!(too_wide.validate().is_err());
        let not_power_of_two = ScenarioConfig { cell_side: 300.0, ..Default::default() };
        assert!(not_power_of_two.validate().is_err());
        let bad_alpha = ScenarioConfig { alpha: 1.5, ..Default::default() };
        assert!(bad_alpha.validate().is_err());
    }
}
