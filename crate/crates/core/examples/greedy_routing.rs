//! Greedy geographic forwarding over a random static topology. Sparse
//! topologies (try 60 nodes) show packets dropped at local maxima.
//!
//! `cargo run --example greedy_routing -- [nodes] [seed]`

use phls::grid::GridHierarchy;
use phls::netsim::{
    route, Delivery, Packet, PacketKind, RadioConfig, SimTime, StaticPositions, Target, TransmissionLog,
};
use phls::{NodeId, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut args = std::env::args().skip(1);
    let n: u32 = args.next().map_or(150, |a| a.parse().expect("nodes"));
    let seed: u64 = args.next().map_or(7, |a| a.parse().expect("seed"));
    let grid = GridHierarchy::for_area(Vec2::ZERO, 1000.0, 125.0).expect("valid grid");
    let radio = RadioConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positions: Vec<Vec2> = (0..n)
        .map(|_| Vec2::new(rng.gen_range(0.0..1000.0), rng.gen_range(0.0..1000.0)))
        .collect();
    let mut oracle = StaticPositions::new(positions.clone(), radio.range);

    let mut log = TransmissionLog::new(true, SimTime::ZERO);
    let (mut delivered, mut dropped) = (0, 0);
    for id in 0..20u64 {
        let src = NodeId(rng.gen_range(0..n));
        let dst = NodeId(rng.gen_range(0..n));
        let mut packet = Packet {
            id,
            kind: PacketKind::Update,
            origin: src,
            requester: src,
            subject: src,
            payload: None,
            target: Target::Node(dst),
            dest_position: positions[dst.index()],
            hops: 0,
            deadline: SimTime::from_secs(5.0),
        };
        match route(&mut packet, src, SimTime::ZERO, &mut oracle, &grid, &radio, &mut log) {
            Delivery::Delivered { time, .. } => {
                delivered += 1;
                println!("{:>3} -> {:>3}: {:>2} hops, {:.3} s", src.0, dst.0, packet.hops, time.as_secs());
            }
            Delivery::Dropped { reason, at, .. } => {
                dropped += 1;
                println!("{:>3} -> {:>3}: dropped ({reason:?}) at node {}", src.0, dst.0, at.0);
            }
        }
    }
    println!(
        "{delivered} delivered, {dropped} dropped, {} transmissions, {} bytes",
        log.transmissions(),
        log.total_bytes()
    );
}
