//! Discrete-event network core: event queue, unit-disk radio, greedy
//! geographic forwarding and per-transmission byte accounting.
//!
//! The MAC layer is idealised: no collisions, a constant per-hop latency.

mod packet;
mod queue;
mod radio;
mod time;

pub use packet::{Packet, PacketKind, Target, HEADER_BYTES, RECORD_BYTES};
pub use queue::EventQueue;
pub use radio::{NextHop, Snapshot};
pub use time::SimTime;

use crate::grid::GridHierarchy;
use crate::NodeId;
use std::rc::Rc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadioConfig {
    pub range: f64,
    pub hop_latency: SimTime,
}

impl Default for RadioConfig {
    fn default() -> Self {
        RadioConfig {
            range: 250.0,
            hop_latency: SimTime::from_millis(5),
        }
    }
}

/// Source of node positions at arbitrary instants.
pub trait PositionOracle {
    fn snapshot_at(&mut self, t: SimTime) -> Rc<Snapshot>;
}

/// Fixed positions; handy for tests and scripted topologies.
pub struct StaticPositions {
    snapshot: Rc<Snapshot>,
}

impl StaticPositions {
    pub fn new(positions: Vec<crate::Vec2>, range: f64) -> Self {
        StaticPositions {
            snapshot: Rc::new(Snapshot::new(SimTime::ZERO, positions, range)),
        }
    }
}

impl PositionOracle for StaticPositions {
    fn snapshot_at(&mut self, _t: SimTime) -> Rc<Snapshot> {
        Rc::clone(&self.snapshot)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DropReason {
    NoProgress,
    DeadlineExceeded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delivery {
    Delivered { at: NodeId, time: SimTime },
    Dropped { reason: DropReason, at: NodeId, time: SimTime },
}

/// One radio transmission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transmission {
    pub packet: u64,
    pub time: SimTime,
    pub from: NodeId,
    pub to: NodeId,
    pub kind: PacketKind,
    pub bytes: u32,
    /// Sender's distance to the packet's destination position.
    pub before: f64,
    /// Receiver's remaining distance; 0 when the receiver is the recipient
    /// or lies inside the target cell.
    pub after: f64,
    /// In-cell fan-out (geocast or cell-local broadcast), not a routing hop.
    pub local: bool,
}

/// Byte and hop accounting for every transmission of a run.
#[derive(Debug, Clone, Default)]
pub struct TransmissionLog {
    entries: Vec<Transmission>,
    keep_entries: bool,
    accounting_start: SimTime,
    counted_bytes: u64,
    total_bytes: u64,
    count: u64,
    bytes_by_kind: [u64; 5],
    trace: u64,
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

impl TransmissionLog {
    /// `accounting_start` excludes earlier transmissions from
    /// [`counted_bytes`](Self::counted_bytes).
    pub fn new(keep_entries: bool, accounting_start: SimTime) -> Self {
        TransmissionLog {
            keep_entries,
            accounting_start,
            trace: FNV_OFFSET,
            ..Default::default()
        }
    }

    pub fn record(&mut self, tx: Transmission) {
        self.count += 1;
        self.total_bytes += u64::from(tx.bytes);
        self.bytes_by_kind[tx.kind.index()] += u64::from(tx.bytes);
        if tx.time >= self.accounting_start {
            self.counted_bytes += u64::from(tx.bytes);
        }
        for word in [tx.packet, tx.time.0, u64::from(tx.from.0), u64::from(tx.to.0), u64::from(tx.bytes)] {
            for b in word.to_le_bytes() {
                self.trace = (self.trace ^ u64::from(b)).wrapping_mul(FNV_PRIME);
            }
        }
        if self.keep_entries {
            self.entries.push(tx);
        }
    }

    pub fn entries(&self) -> &[Transmission] {
        &self.entries
    }

    pub fn accounting_start(&self) -> SimTime {
        self.accounting_start
    }

    /// Bytes sent at or after the accounting start.
    pub fn counted_bytes(&self) -> u64 {
        self.counted_bytes
    }

    pub fn total_bytes(&self) -> u64 {
        self.total_bytes
    }

    pub fn transmissions(&self) -> u64 {
        self.count
    }

    pub fn bytes_of(&self, kind: PacketKind) -> u64 {
        self.bytes_by_kind[kind.index()]
    }

    /// Order-sensitive hash of every transmission so far.
    pub fn trace_hash(&self) -> u64 {
        self.trace
    }
}

/// Forwards `packet` hop by hop from `from`, starting at `depart`.
///
/// Each hop samples positions at its own departure time. A node-addressed
/// packet is handed directly to its recipient once in range, a
/// cell-addressed one to the in-range node of the cell nearest its centre;
/// otherwise it goes to the greedy next hop towards `dest_position`.
/// Cell-addressed packets are delivered at the first node inside the cell.
pub fn route<O: PositionOracle + ?Sized>(
    packet: &mut Packet,
    from: NodeId,
    depart: SimTime,
    oracle: &mut O,
    grid: &GridHierarchy,
    radio: &RadioConfig,
    log: &mut TransmissionLog,
) -> Delivery {
    let mut current = from;
    let mut now = depart;
    loop {
        if now > packet.deadline {
            return Delivery::Dropped {
                reason: DropReason::DeadlineExceeded,
                at: current,
                time: now,
            };
        }
        let snap = oracle.snapshot_at(now);
        let here = match snap.position(current) {
            Ok(p) => p,
            Err(_) => {
                return Delivery::Dropped {
                    reason: DropReason::NoProgress,
                    at: current,
                    time: now,
                }
            }
        };
        let arrived = match packet.target {
            Target::Node(id) => id == current,
            Target::Cell(cell) => grid.cell_of(here).map(|c| c == cell).unwrap_or(false),
        };
        if arrived {
            return Delivery::Delivered { at: current, time: now };
        }
        if now.saturating_add(radio.hop_latency) > packet.deadline {
            return Delivery::Dropped {
                reason: DropReason::DeadlineExceeded,
                at: current,
                time: now,
            };
        }
        let before = here.distance(packet.dest_position);
        let entry = match packet.target {
            Target::Node(id) => snap.in_range(current, id).then_some(id),
            Target::Cell(cell) => {
                let area = grid.bounds(cell);
                snap.nearest_neighbor_in(current, &area, packet.dest_position)
                    .unwrap_or(None)
                    .filter(|n| snap.position(*n).is_ok_and(|p| grid.cell_of(p) == Ok(cell)))
            }
        };
        let hop = match entry {
            Some(id) => Some((id, 0.0)),
            None => match snap.greedy_next_hop(current, packet.dest_position) {
                Ok(NextHop::Node(n)) => {
                    let after = snap.position(n).map(|p| p.distance(packet.dest_position));
                    Some((n, after.unwrap_or(0.0)))
                }
                _ => None,
            },
        };
        let Some((next, after)) = hop else {
            return Delivery::Dropped {
                reason: DropReason::NoProgress,
                at: current,
                time: now,
            };
        };
        log.record(Transmission {
            packet: packet.id,
            time: now,
            from: current,
            to: next,
            kind: packet.kind,
            bytes: packet.size(),
            before,
            after,
            local: false,
        });
        packet.hops += 1;
        current = next;
        now = now + radio.hop_latency;
    }
}
