//! Unit-disk radio: two nodes hear each other iff they are within range.

use super::{NetError, SimTime};
use crate::geom::Vec2;
use crate::NodeId;

/// Positions of every node at one instant, bucketed for neighbour lookups.
#[derive(Debug, Clone)]
pub struct Snapshot {
    time: SimTime,
    positions: Vec<Vec2>,
    range: f64,
    origin: Vec2,
    bucket_side: f64,
    buckets_per_side: usize,
    buckets: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NextHop {
    Node(NodeId),
    NoProgress,
}

impl Snapshot {
    /// `positions[i]` is the position of node `i`.
    pub fn new(time: SimTime, positions: Vec<Vec2>, range: f64) -> Self {
        let (mut lo, mut hi) = (Vec2::new(f64::MAX, f64::MAX), Vec2::new(f64::MIN, f64::MIN));
        for p in &positions {
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        if positions.is_empty() {
            lo = Vec2::ZERO;
            hi = Vec2::ZERO;
        }
        let extent = (hi.x - lo.x).max(hi.y - lo.y).max(range);
        // Buckets at least `range` wide, so neighbours lie in the 3x3 block.
        let buckets_per_side = ((extent / range).floor() as usize).clamp(1, 256);
        let bucket_side = extent / buckets_per_side as f64;
        let mut s = Snapshot {
            time,
            positions,
            range,
            origin: lo,
            bucket_side,
            buckets_per_side,
            buckets: vec![Vec::new(); buckets_per_side * buckets_per_side],
        };
        for i in 0..s.positions.len() {
            let b = s.bucket_of(s.positions[i]);
            s.buckets[b.1 * s.buckets_per_side + b.0].push(i as u32);
        }
        s
    }

    fn bucket_of(&self, p: Vec2) -> (usize, usize) {
        let f = |v: f64| {
            ((v / self.bucket_side).floor().max(0.0) as usize).min(self.buckets_per_side - 1)
        };
        (f(p.x - self.origin.x), f(p.y - self.origin.y))
    }

    pub fn time(&self) -> SimTime {
        self.time
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Vec2] {
        &self.positions
    }

    pub fn position(&self, node: NodeId) -> Result<Vec2, NetError> {
        self.positions
            .get(node.index())
            .copied()
            .ok_or(NetError::UnknownNode(node))
    }

    pub fn in_range(&self, a: NodeId, b: NodeId) -> bool {
        match (self.positions.get(a.index()), self.positions.get(b.index())) {
            (Some(pa), Some(pb)) => pa.distance_sq(*pb) <= self.range * self.range,
            _ => false,
        }
    }

    /// Calls `f` for every other node within range of `node`, in no particular order.
    fn for_each_neighbor(&self, node: NodeId, mut f: impl FnMut(NodeId, Vec2)) -> Result<(), NetError> {
        let p = self.position(node)?;
        let (bx, by) = self.bucket_of(p);
        let r2 = self.range * self.range;
        let n = self.buckets_per_side;
        for y in by.saturating_sub(1)..=(by + 1).min(n - 1) {
            for x in bx.saturating_sub(1)..=(bx + 1).min(n - 1) {
                for &j in &self.buckets[y * n + x] {
                    if j == node.0 {
                        continue;
                    }
                    let q = self.positions[j as usize];
                    if p.distance_sq(q) <= r2 {
                        f(NodeId(j), q);
                    }
                }
            }
        }
        Ok(())
    }

    /// All other nodes within radio range of `node`, ascending by identity.
    pub fn neighbors(&self, node: NodeId) -> Result<Vec<NodeId>, NetError> {
        let mut out = Vec::new();
        self.for_each_neighbor(node, |id, _| out.push(id))?;
        out.sort_unstable();
        Ok(out)
    }

    /// Neighbour inside `area` closest to `dest`; ties go to the lower identity.
    pub fn nearest_neighbor_in(
        &self,
        current: NodeId,
        area: &crate::geom::Square,
        dest: Vec2,
    ) -> Result<Option<NodeId>, NetError> {
        let mut best: Option<(f64, NodeId)> = None;
        self.for_each_neighbor(current, |id, q| {
            if !area.contains(q) {
                return;
            }
            let d = q.distance_sq(dest);
            if best.is_none_or(|(bd, bid)| d < bd || (d == bd && id < bid)) {
                best = Some((d, id));
            }
        })?;
        Ok(best.map(|(_, id)| id))
    }

    /// Neighbour strictly closer to `dest` than `current`, minimising the
    /// remaining distance; ties go to the lower identity.
    pub fn greedy_next_hop(&self, current: NodeId, dest: Vec2) -> Result<NextHop, NetError> {
        let own = self.position(current)?.distance_sq(dest);
        let mut best: Option<(f64, NodeId)> = None;
        self.for_each_neighbor(current, |id, q| {
            let d = q.distance_sq(dest);
            if d < own {
                let better = match best {
                    None => true,
                    Some((bd, bid)) => d < bd || (d == bd && id < bid),
                };
                if better {
                    best = Some((d, id));
                }
            }
        })?;
        Ok(best.map_or(NextHop::NoProgress, |(_, id)| NextHop::Node(id)))
    }
}
