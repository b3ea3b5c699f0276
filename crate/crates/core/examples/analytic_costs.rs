//! Per-level and total costs of the analytic model, and how they scale with
//! network size at constant density.
//!
//! `cargo run --example analytic_costs -- [nodes] [speed]`

use phls::analytic::{depth_for_network, query_cost, AnalyticParams, CostReport};

fn main() {
    let mut args = std::env::args().skip(1);
    let nodes: f64 = args.next().map_or(300.0, |a| a.parse().expect("nodes"));
    let v: f64 = args.next().map_or(10.0, |a| a.parse().expect("speed"));
    let density = 3e-4;
    let r = 125.0;

    let mut params = AnalyticParams::for_network(nodes, density, r).expect("valid network");
    params.v = v;
    let report = CostReport::compute(&params).expect("valid parameters");
    println!("N = {nodes}, v = {v} m/s, H = {}", params.levels);
    println!("level  crossing_rate  expected_hops  hit_probability");
    for l in &report.levels {
        println!("{:>5}  {:>13.6}  {:>13.3}  {:>15.6}", l.level, l.crossing_rate, l.expected_hops, l.hit_probability);
    }
    println!("maintenance {:.4} (closed form {:.4})", report.maintenance, report.maintenance_closed_form);
    println!("query       {:.4} (closed form {:.4})", report.query, report.query_closed_form);
    println!("storage     {}", report.storage);

    println!("\nquery cost vs N, base-2 level scaling, normalized hit probabilities");
    for n in [1e2, 1e3, 1e4, 1e5] {
        let mut p = AnalyticParams::for_network(n, density, r).expect("valid network");
        p.level_scale_exponent = 2;
        p.normalize_hit_probs = true;
        let h = depth_for_network(n, density, r).unwrap();
        println!("N = {n:>7}  H = {h:>2}  query = {:.3}", query_cost(&p).unwrap());
    }
}
