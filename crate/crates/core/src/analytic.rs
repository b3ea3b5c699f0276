//! Closed-form scalability model: maintenance, query and storage cost of the
//! hierarchical location service under uniform motion and uniform traffic.

use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error("region side must be positive, got {0}")]
    NonPositiveR(f64),
    #[error("level {level} outside 0..={max}")]
    LevelOutOfRange { level: u32, max: u32 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticParams {
    /// Area in m².
    pub area: f64,
    pub nodes: f64,
    /// Top level H; the hierarchy has H + 1 levels.
    pub levels: u32,
    /// Side of a level-0 region in m.
    pub r: f64,
    /// Node speed in m/s.
    pub v: f64,
    /// Average progress per hop in m.
    pub z: f64,
    /// Mean distance between two uniform points of the unit square.
    pub c: f64,
    /// Growth of the expected in-region distance per level: 4 or 2.
    pub level_scale_exponent: u32,
    pub normalize_hit_probs: bool,
}

impl Default for AnalyticParams {
    fn default() -> Self {
        AnalyticParams {
            area: 1.0e6,
            nodes: 300.0,
            levels: 3,
            r: 125.0,
            v: 10.0,
            z: 200.0,
            c: UNIT_SQUARE_MEAN_DISTANCE,
            level_scale_exponent: 4,
            normalize_hit_probs: false,
        }
    }
}

/// Mean distance between two points drawn uniformly from the unit square,
/// `(2 + √2 + 5 ln(1 + √2)) / 15`, rounded to the digits used in the model.
pub const UNIT_SQUARE_MEAN_DISTANCE: f64 = 0.5214;

impl AnalyticParams {
    pub fn validate(&self) -> Result<(), AnalyticError> {
        if !(self.r > 0.0) {
            return Err(AnalyticError::NonPositiveR(self.r));
        }
        for (name, value) in [("area", self.area), ("nodes", self.nodes), ("z", self.z), ("c", self.c)] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(AnalyticError::InvalidParams(format!("{name} must be positive, got {value}")));
            }
        }
        if !(self.v >= 0.0) || !self.v.is_finite() {
            return Err(AnalyticError::InvalidParams(format!("v must be non-negative, got {}", self.v)));
        }
        if !matches!(self.level_scale_exponent, 2 | 4) {
            return Err(AnalyticError::InvalidParams(format!(
                "level_scale_exponent must be 2 or 4, got {}",
                self.level_scale_exponent
            )));
        }
        Ok(())
    }

    /// Parameters for a network of `nodes` at fixed `density` (nodes/m²).
    pub fn for_network(nodes: f64, density: f64, r: f64) -> Result<Self, AnalyticError> {
        let levels = depth_for_network(nodes, density, r)?;
        Ok(AnalyticParams { area: nodes / density, nodes, levels, r, ..Self::default() })
    }
}

/// Mean length of a chord crossing a square region of side `r`.
pub fn mean_chord(r: f64) -> Result<f64, AnalyticError> {
    if !(r > 0.0) {
        return Err(AnalyticError::NonPositiveR(r));
    }
    Ok(2.0 * r / PI)
}

/// Expected rate (1/s) at which a node moving at `v` leaves its level-`i` region.
pub fn crossing_rate(i: u32, v: f64, r: f64) -> Result<f64, AnalyticError> {
    if !(r > 0.0) {
        return Err(AnalyticError::NonPositiveR(r));
    }
    Ok(PI * v / (2.0 * r) / 4f64.powi(i as i32))
}

/// Expected hop count between two uniform points of a level-`i` region.
pub fn expected_hops(i: u32, params: &AnalyticParams) -> Result<f64, AnalyticError> {
    params.validate()?;
    Ok(f64::from(params.level_scale_exponent).powi(i as i32) * params.r * params.c / params.z)
}

/// Probability that a query is satisfied at level `i` of an `h`-level hierarchy.
///
/// The raw form does not sum to one (the total is `4 - 3·4^-h`); the
/// normalized form is the exact fraction of destination cells that first
/// share a level-`i` region with the source.
pub fn hit_probability(i: u32, h: u32, normalized: bool) -> Result<f64, AnalyticError> {
    if i > h {
        return Err(AnalyticError::LevelOutOfRange { level: i, max: h });
    }
    if i == 0 {
        return Ok(0.25f64.powi(h as i32));
    }
    let exponent = if normalized { h - i + 1 } else { h - i };
    Ok(3.0 * 0.25f64.powi(exponent as i32))
}

/// Expected update traffic in hops/s, summed over levels `0..=H`.
pub fn maintenance_cost(params: &AnalyticParams) -> Result<f64, AnalyticError> {
    params.validate()?;
    let mut total = 0.0;
    for i in 0..=params.levels {
        total += crossing_rate(i, params.v, params.r)? * expected_hops(i, params)?;
    }
    Ok(total)
}

/// Expected hops per query, summed over the levels where it may be satisfied.
pub fn query_cost(params: &AnalyticParams) -> Result<f64, AnalyticError> {
    params.validate()?;
    let mut total = 0.0;
    for i in 0..=params.levels {
        total += hit_probability(i, params.levels, params.normalize_hit_probs)? * expected_hops(i, params)?;
    }
    Ok(total)
}

/// Records stored per node: one per level.
pub fn storage_cost(h: u32) -> u32 {
    h + 1
}

/// Closed form `vπcH / (2z)`; it undercounts the level sum by `(H+1)/H`.
pub fn maintenance_closed_form(params: &AnalyticParams) -> f64 {
    params.v * PI * params.c * f64::from(params.levels) / (2.0 * params.z)
}

/// Closed form `3·4^H·cR/z`.
pub fn query_closed_form(params: &AnalyticParams) -> f64 {
    3.0 * 4f64.powi(params.levels as i32) * params.c * params.r / params.z
}

/// Smallest depth whose top region covers a network of `n` nodes at `density`.
pub fn depth_for_network(n: f64, density: f64, r: f64) -> Result<u32, AnalyticError> {
    if !(r > 0.0) {
        return Err(AnalyticError::NonPositiveR(r));
    }
    if !(n >= 1.0) || !(density > 0.0) {
        return Err(AnalyticError::InvalidParams(format!("need n >= 1 and density > 0, got {n}, {density}")));
    }
    let ratio = (n / density).sqrt() / r;
    // Guard against log2 landing a hair above an exact power of two.
    let h = (ratio.log2() - 1e-9).ceil();
    Ok((h.max(1.0)) as u32)
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Mean distance between two uniform points of the unit square.
///
/// The difference vector `(u, w)` of two such points has density
/// `(1-|u|)(1-|w|)` on `[-1,1]²`; by symmetry the integral reduces to four
/// times the positive quadrant, evaluated by nested adaptive Simpson.
pub fn unit_square_constant() -> f64 {
    let inner = |u: f64| adaptive_simpson(&|w: f64| (u * u + w * w).sqrt() * (1.0 - w), 0.0, 1.0, 1e-12);
    4.0 * adaptive_simpson(&|u: f64| inner(u) * (1.0 - u), 0.0, 1.0, 1e-11)
}

/// One-dimensional analogue of [`unit_square_constant`]: mean `|x1 - x2|`
/// on the unit interval, through the same triangular-density kernel.
pub fn unit_interval_constant() -> f64 {
    2.0 * adaptive_simpson(&|u: f64| u * (1.0 - u), 0.0, 1.0, 1e-13)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelCost {
    pub level: u32,
    pub crossing_rate: f64,
    pub expected_hops: f64,
    pub hit_probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostReport {
    pub maintenance: f64,
    pub query: f64,
    pub storage: u32,
    pub maintenance_closed_form: f64,
    pub query_closed_form: f64,
    pub levels: Vec<LevelCost>,
}

impl CostReport {
    pub fn compute(params: &AnalyticParams) -> Result<Self, AnalyticError> {
        params.validate()?;
        let levels = (0..=params.levels)
            .map(|i| {
                Ok(LevelCost {
                    level: i,
                    crossing_rate: crossing_rate(i, params.v, params.r)?,
                    expected_hops: expected_hops(i, params)?,
                    hit_probability: hit_probability(i, params.levels, params.normalize_hit_probs)?,
                })
            })
            .collect::<Result<Vec<_>, AnalyticError>>()?;
        Ok(CostReport {
            maintenance: maintenance_cost(params)?,
            query: query_cost(params)?,
            storage: storage_cost(params.levels),
            maintenance_closed_form: maintenance_closed_form(params),
            query_closed_form: query_closed_form(params),
            levels,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn chord_examples() {
        assert!(close(mean_chord(125.0).unwrap(), 79.577, 1e-3));
        assert!(close(mean_chord(PI / 2.0).unwrap(), 1.0, 1e-15));
        assert_eq!(mean_chord(0.0), Err(AnalyticError::NonPositiveR(0.0)));
    }

    #[test]
    fn chord_matches_monte_carlo() {
        // Chord R·cosθ for an entry angle uniform on [0, π/2).
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 1_000_000;
        let r = 125.0;
        let sum: f64 = (0..n).map(|_| r * rng.gen_range(0.0..PI / 2.0).cos()).sum();
        let mc = sum / n as f64;
        let exact = mean_chord(r).unwrap();
        assert!((mc - exact).abs() / exact < 1e-3, "{mc} vs {exact}");
    }

    #[test]
    fn crossing_rate_examples() {
        assert!(close(crossing_rate(0, 10.0, 125.0).unwrap(), 0.12566, 1e-5));
        assert!(close(crossing_rate(1, 20.0, 125.0).unwrap(), 0.06283, 1e-5));
        for i in 0..6 {
            assert_eq!(crossing_rate(i, 0.0, 125.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn expected_hops_examples() {
        let p = AnalyticParams::default();
        let h0 = expected_hops(0, &p).unwrap();
        assert!(close(h0, 0.3259, 1e-4));
        assert!(close(expected_hops(1, &p).unwrap(), 4.0 * h0, 1e-12));
        let p2 = AnalyticParams { level_scale_exponent: 2, ..p };
        assert!(close(expected_hops(1, &p2).unwrap(), 2.0 * h0, 1e-12));
        let bad = AnalyticParams { level_scale_exponent: 3, ..AnalyticParams::default() };
        assert!(matches!(expected_hops(0, &bad), Err(AnalyticError::InvalidParams(_))));
    }

    #[test]
    fn hit_probability_examples() {
        let raw: Vec<f64> = (0..=2).map(|i| hit_probability(i, 2, false).unwrap()).collect();
        assert_eq!(raw, vec![1.0 / 16.0, 0.75, 3.0]);
        assert_eq!(raw.iter().sum::<f64>(), 3.8125);
        let norm: Vec<f64> = (0..=2).map(|i| hit_probability(i, 2, true).unwrap()).collect();
        assert_eq!(norm, vec![1.0 / 16.0, 3.0 / 16.0, 0.75]);
        assert_eq!(hit_probability(0, 3, false).unwrap(), 1.0 / 64.0);
        assert_eq!(hit_probability(0, 3, true).unwrap(), 1.0 / 64.0);
        assert!(matches!(hit_probability(4, 3, true), Err(AnalyticError::LevelOutOfRange { .. })));
    }

    #[test]
    fn maintenance_examples() {
        let p = AnalyticParams::default();
        let m = maintenance_cost(&p).unwrap();
        assert!(close(m, 0.16382, 5e-5), "{m}");
        let closed = maintenance_closed_form(&p);
        assert!(close(closed, 0.12287, 5e-5), "{closed}");
        assert!(close(m / closed, 4.0 / 3.0, 1e-12));
        let still = AnalyticParams { v: 0.0, ..p };
        assert_eq!(maintenance_cost(&still).unwrap(), 0.0);
    }

    #[test]
    fn query_examples() {
        let p = AnalyticParams { levels: 1, ..AnalyticParams::default() };
        assert!(close(query_cost(&p).unwrap(), 3.9923, 5e-4));

        let p = AnalyticParams { levels: 2, level_scale_exponent: 2, normalize_hit_probs: true, ..AnalyticParams::default() };
        let e0 = expected_hops(0, &p).unwrap();
        let direct = e0 / 16.0 + 3.0 / 16.0 * 2.0 * e0 + 0.75 * 4.0 * e0;
        assert!(close(query_cost(&p).unwrap(), direct, 1e-12));

        let p = AnalyticParams { levels: 0, ..AnalyticParams::default() };
        assert!(close(query_cost(&p).unwrap(), expected_hops(0, &p).unwrap(), 1e-15));
    }

    #[test]
    fn storage_examples() {
        assert_eq!(storage_cost(3), 4);
        assert_eq!(storage_cost(0), 1);
        assert_eq!(storage_cost(10), 11);
    }

    #[test]
    fn quadrature_kernels() {
        assert!(close(unit_interval_constant(), 1.0 / 3.0, 1e-6));
        let exact = (2.0 + 2f64.sqrt() + 5.0 * (1.0 + 2f64.sqrt()).ln()) / 15.0;
        assert!(close(unit_square_constant(), exact, 1e-8));
        assert!(close(unit_square_constant(), UNIT_SQUARE_MEAN_DISTANCE, 1e-3));
    }

    #[test]
    fn depth_examples() {
        assert_eq!(depth_for_network(300.0, 3e-4, 125.0).unwrap(), 3);
        assert_eq!(depth_for_network(1200.0, 3e-4, 125.0).unwrap(), 4);
        // √A / R = 5
        assert_eq!(depth_for_network(1.0, 1.0 / (625.0 * 625.0), 125.0).unwrap(), 3);
        assert_eq!(depth_for_network(1.0, 1.0, 125.0).unwrap(), 1);
    }

    #[test]
    fn report_is_consistent() {
        let p = AnalyticParams::default();
        let report = CostReport::compute(&p).unwrap();
        assert_eq!(report.storage, 4);
        assert_eq!(report.levels.len(), 4);
        let sum: f64 = report.levels.iter().map(|l| l.crossing_rate * l.expected_hops).sum();
        assert!(close(sum, report.maintenance, 1e-15));
    }
}
