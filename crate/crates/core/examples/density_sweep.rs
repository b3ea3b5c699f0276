//! Sweeps maximum node count over 100..400 at 10 m/s for all three protocols and prints
//! the aggregated metrics; optionally writes the CSV.
//!
//! `cargo run --release --example density_sweep -- [out.csv]`

use phls::experiment::{emit_csv, sweep, Axis, ScenarioConfig};
use phls::locsvc::Protocol;

fn main() {
    let base = ScenarioConfig::default();
    let table = sweep(&base, &Axis::density(), &Protocol::ALL).expect("valid scenario");
    println!("nodes  protocol  success (std)     error_m (std)     bandwidth (std)");
    for r in &table.rows {
        println!(
            "{:>5}  {:<8}  {:.4} ({:.4})   {:>6.2} ({:>5.2})   {:>7.2} ({:>5.2})",
            r.axis_value,
            r.protocol.name(),
            r.success_rate.mean,
            r.success_rate.std,
            r.location_error.mean,
            r.location_error.std,
            r.bandwidth.mean,
            r.bandwidth.std,
        );
    }
    if let Some(path) = std::env::args().nth(1) {
        emit_csv(&table, path.as_ref()).expect("writable output");
    }
}
