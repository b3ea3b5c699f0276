//! One simulation run per protocol at a chosen speed, with the main metrics.
//!
//! `cargo run --release --example single_run -- [v_max] [seed]`

use phls::experiment::{run, ScenarioConfig};
use phls::locsvc::Protocol;

fn main() {
    let mut args = std::env::args().skip(1);
    let v_max: f64 = args.next().map_or(20.0, |a| a.parse().expect("v_max"));
    let seed: u64 = args.next().map_or(1, |a| a.parse().expect("seed"));
    println!("v_max = {v_max} m/s, seed = {seed}");
    println!("protocol  success  error_m  bandwidth  hops   exact  no_rec  drops(np/dl)  updates  handovers  lost");
    for protocol in Protocol::ALL {
        let cfg = ScenarioConfig { v_max, protocol, ..ScenarioConfig::default() };
        let m = run(&cfg, seed).expect("valid scenario");
        println!(
            "{:<8}  {:>7.3}  {:>7.1}  {:>9.2}  {:>5.1}  {:>5}  {:>6}  {:>5}/{:<6}  {:>7}  {:>9}  {:>4}",
            protocol.name(),
            m.query_success_rate,
            m.avg_location_error,
            m.bandwidth,
            m.query_hops_mean,
            m.exact_answers,
            m.no_record,
            m.drop_noprogress,
            m.drop_deadline,
            m.updates_sent,
            m.handovers_sent + m.rehome_handovers,
            m.records_lost,
        );
    }
}
