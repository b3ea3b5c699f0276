//! Parameter sweeps over speed or node count, aggregated across seeds.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::{run, ExperimentError, RunMetrics, ScenarioConfig};
use crate::locsvc::Protocol;

#[derive(Debug, Clone, PartialEq)]
pub enum Axis {
    /// Values of `v_max` (m/s).
    Speed(Vec<f64>),
    /// Values of `node_count`.
    Density(Vec<u32>),
}

impl Axis {
    /// 10 to 50 m/s in steps of 10.
    pub fn speed() -> Self {
        Axis::Speed(vec![10.0, 20.0, 30.0, 40.0, 50.0])
    }

    /// 100 to 400 nodes in steps of 100.
    pub fn density() -> Self {
        Axis::Density(vec![100, 200, 300, 400])
    }

    pub fn name(&self) -> &'static str {
        match self {
            Axis::Speed(_) => "v_max",
            Axis::Density(_) => "node_count",
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            Axis::Speed(v) => v.clone(),
            Axis::Density(n) => n.iter().map(|&n| f64::from(n)).collect(),
        }
    }

    fn apply(&self, base: &ScenarioConfig, index: usize) -> ScenarioConfig {
        let mut cfg = base.clone();
        match self {
            Axis::Speed(v) => cfg.v_max = v[index],
            Axis::Density(n) => cfg.node_count = n[index],
        }
        cfg
    }

    fn len(&self) -> usize {
        match self {
            Axis::Speed(v) => v.len(),
            Axis::Density(n) => n.len(),
        }
    }
}

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        if values.is_empty() {
            return Summary { mean: 0.0, std: 0.0 };
        }
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Summary { mean, std }
    }
}

/// Aggregate of every seed at one (axis value, protocol) point.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub axis_value: f64,
    pub protocol: Protocol,
    pub runs: Vec<RunMetrics>,
    pub success_rate: Summary,
    pub location_error: Summary,
    pub bandwidth: Summary,
    pub query_hops_mean: f64,
    pub drop_noprogress: u64,
    pub drop_deadline: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub axis_name: String,
    pub rows: Vec<Row>,
}

impl ResultTable {
    pub fn row(&self, axis_value: f64, protocol: Protocol) -> Option<&Row> {
        self.rows.iter().find(|r| r.axis_value == axis_value && r.protocol == protocol)
    }
}

pub fn aggregate(axis_value: f64, protocol: Protocol, runs: Vec<RunMetrics>) -> Row {
    let pick = |f: fn(&RunMetrics) -> f64| Summary::of(&runs.iter().map(f).collect::<Vec<_>>());
    Row {
        axis_value,
        protocol,
        success_rate: pick(|m| m.query_success_rate),
        location_error: pick(|m| m.avg_location_error),
        bandwidth: pick(|m| m.bandwidth),
        query_hops_mean: pick(|m| m.query_hops_mean).mean,
        drop_noprogress: runs.iter().map(|m| m.drop_noprogress).sum(),
        drop_deadline: runs.iter().map(|m| m.drop_deadline).sum(),
        runs,
    }
}

/// Runs `base.runs` seeds for every (axis value, protocol) pair, serially.
pub fn sweep(base: &ScenarioConfig, axis: &Axis, protocols: &[Protocol]) -> Result<ResultTable, ExperimentError> {
    sweep_with_threads(base, axis, protocols, 1)
}

/// As [`sweep`], spreading runs over `threads` workers. Seeds are
/// `rng_seed + run`, shared by all protocols and axis values, so results do
/// not depend on the thread count.
pub fn sweep_with_threads(
    base: &ScenarioConfig,
    axis: &Axis,
    protocols: &[Protocol],
    threads: usize,
) -> Result<ResultTable, ExperimentError> {
    base.validate()?;
    let mut protocols = protocols.to_vec();
    protocols.sort_by_key(|p| p.name());
    protocols.dedup();
    let mut order: Vec<usize> = (0..axis.len()).collect();
    let values = axis.values();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let mut jobs = Vec::new();
    for &i in &order {
        for &p in &protocols {
            for r in 0..base.runs {
                let mut cfg = axis.apply(base, i);
                cfg.protocol = p;
                cfg.validate()?;
                jobs.push((cfg, base.rng_seed.wrapping_add(u64::from(r))));
            }
        }
    }
    let results: Mutex<Vec<Option<Result<RunMetrics, ExperimentError>>>> =
        Mutex::new((0..jobs.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..threads.max(1) {
            s.spawn(|| loop {
                let j = next.fetch_add(1, Ordering::Relaxed);
                let Some((cfg, seed)) = jobs.get(j) else { break };
                let m = run(cfg, *seed);
                results.lock().expect("worker panicked")[j] = Some(m);
            });
        }
    });
    let mut results = results.into_inner().expect("worker panicked").into_iter();
    let mut rows = Vec::new();
    for &i in &order {
        for &p in &protocols {
            let runs = (0..base.runs)
                .map(|_| results.next().flatten().expect("every job ran"))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(aggregate(values[i], p, runs));
        }
    }
    Ok(ResultTable { axis_name: axis.name().to_string(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_std() {
        let s = Summary::of(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(s.mean, 5.0);
        assert!((s.std - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
        assert_eq!(Summary::of(&[3.0]).std, 0.0);
    }
}
