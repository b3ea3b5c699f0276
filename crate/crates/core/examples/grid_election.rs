//! Hierarchy geometry and server election for one node position.
//!
//! `cargo run --example grid_election -- [x] [y]`

use phls::grid::{select_server, GridHierarchy};
use phls::{NodeId, Vec2};

fn main() {
    let mut args = std::env::args().skip(1);
    let x: f64 = args.next().map_or(130.0, |a| a.parse().expect("x"));
    let y: f64 = args.next().map_or(260.0, |a| a.parse().expect("y"));
    let grid = GridHierarchy::for_area(Vec2::ZERO, 1000.0, 125.0).expect("valid grid");
    println!("area {} m, cell {} m, {} levels above the cells", grid.side_length(), grid.cell_side(), grid.levels());

    let p = Vec2::new(x, y);
    for level in 0..=grid.levels() {
        let r = grid.region_containing(p, level).expect("inside the area");
        let b = grid.bounds(r);
        println!(
            "level {level}: region ({}, {}) origin ({:.0}, {:.0}) side {:.0} m, {} cells",
            r.x,
            r.y,
            b.origin.x,
            b.origin.y,
            b.side,
            grid.cells_of(r).len()
        );
    }

    // Every node in the region agrees on the same server for a given subject.
    let members: Vec<NodeId> = [3, 17, 42, 99, 250].map(NodeId).to_vec();
    for subject in [0, 1, 7, 123] {
        let server = select_server(NodeId(subject), &members).expect("non-empty region");
        println!("subject {subject:>3} -> server {:?} among {:?}", server.0, members.iter().map(|m| m.0).collect::<Vec<_>>());
    }

    let a = Vec2::new(120.0, 60.0);
    let b = Vec2::new(130.0, 60.0);
    let c = Vec2::new(490.0, 510.0);
    for to in [b, c] {
        let k = grid.highest_crossed_level(a, to).expect("inside the area");
        println!("({}, {}) -> ({}, {}): highest level crossed {k:?}", a.x, a.y, to.x, to.y);
    }
}
