//! Compares the stored position, the linear predictor and the smoothed
//! velocity predictor for a node that keeps going and for one that turns.
//!
//! `cargo run --example predictors -- [alpha]`

use phls::geom::Square;
use phls::grid::RegionId;
use phls::locsvc::{predict_avg, predict_linear, update_avg_velocity, LocationRecord};
use phls::{NodeId, Vec2};

fn main() {
    let alpha: f64 = std::env::args().nth(1).map_or(0.5, |a| a.parse().expect("alpha"));
    let area = Square::new(Vec2::ZERO, 1000.0);

    // Velocity history reported by the node at successive updates.
    let history = [Vec2::new(10.0, 0.0), Vec2::new(8.0, 6.0), Vec2::new(0.0, 10.0)];
    let mut v_bar = history[0];
    for &v in &history[1..] {
        v_bar = update_avg_velocity(v_bar, v, alpha).expect("alpha in [0, 1]");
    }
    let record = LocationRecord {
        subject: NodeId(1),
        position: Vec2::new(400.0, 400.0),
        velocity: history[history.len() - 1],
        timestamp: 10.0,
        region: RegionId::new(0, 3, 3),
    };
    println!("alpha = {alpha}, smoothed velocity ({:.2}, {:.2})", v_bar.x, v_bar.y);

    for (label, truth_velocity) in [("keeps its last heading", record.velocity), ("turns back along -x", Vec2::new(-10.0, 0.0))] {
        println!("\nnode {label}");
        println!("  dt  truth             stored err  linear err  smoothed err");
        for dt in [0.0, 2.0, 5.0, 10.0, 20.0] {
            let t = record.timestamp + dt;
            let truth = area.clamp(record.position + truth_velocity * dt);
            let linear = predict_linear(&record, t, &area).unwrap();
            let smoothed = predict_avg(&record, v_bar, t, &area).unwrap();
            println!(
                "{dt:>4}  ({:>6.1}, {:>6.1})  {:>10.1}  {:>10.1}  {:>12.1}",
                truth.x,
                truth.y,
                record.position.distance(truth),
                linear.distance(truth),
                smoothed.distance(truth)
            );
        }
    }
}
