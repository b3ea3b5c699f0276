//! Samples one node's random-direction trajectory at a fixed interval.
//!
//! `cargo run --example mobility_trace -- [v_max] [seed]`

use phls::geom::Square;
use phls::mobility::{MobilityConfig, MotionState, Trajectory};
use phls::Vec2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut args = std::env::args().skip(1);
    let v_max: f64 = args.next().map_or(20.0, |a| a.parse().expect("v_max"));
    let seed: u64 = args.next().map_or(1, |a| a.parse().expect("seed"));
    let cfg = MobilityConfig {
        v_max,
        pause_max: 10.0,
        leg_time_max: 30.0,
        area: Square::new(Vec2::ZERO, 1000.0),
    };
    cfg.validate().expect("valid mobility");

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = MotionState::start(Vec2::new(500.0, 500.0), 0.0, &cfg, &mut rng);
    let horizon = 120.0;
    let traj = Trajectory::generate(start, horizon, &cfg, &mut rng);
    println!("{} phases over {horizon} s", traj.phases().len());
    for s in traj.phases() {
        println!(
            "  t={:>7.2}  {:?} until {:>7.2}  at ({:>6.1}, {:>6.1})  speed {:>5.2} m/s",
            s.time, s.phase, s.phase_end, s.position.x, s.position.y, s.speed()
        );
    }
    println!("t, x, y, vx, vy");
    let mut t = 0.0;
    while t <= horizon {
        let (p, v) = traj.state_at(t);
        println!("{t:.0}, {:.2}, {:.2}, {:.2}, {:.2}", p.x, p.y, v.x, v.y);
        t += 5.0;
    }
}
