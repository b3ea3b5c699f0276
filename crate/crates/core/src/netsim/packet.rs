use super::SimTime;
use crate::geom::Vec2;
use crate::grid::RegionId;
use crate::locsvc::LocationRecord;
use crate::NodeId;

/// Common header: kind, origin, requester, subject and deadline.
pub const HEADER_BYTES: u32 = 20;
/// Position (2x8), velocity (2x8), timestamp (8) and region tag (8).
pub const RECORD_BYTES: u32 = 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PacketKind {
    Update,
    HandOver,
    Query,
    QueryDescend,
    Reply,
}

impl PacketKind {
    pub const ALL: [PacketKind; 5] = [
        PacketKind::Update,
        PacketKind::HandOver,
        PacketKind::Query,
        PacketKind::QueryDescend,
        PacketKind::Reply,
    ];

    /// Every kind carries one location record; queries carry the best
    /// prediction collected so far.
    pub fn payload_bytes(self) -> u32 {
        RECORD_BYTES
    }

    pub fn wire_bytes(self) -> u32 {
        HEADER_BYTES + self.payload_bytes()
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Final recipient of a packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// A specific node.
    Node(NodeId),
    /// Whichever node inside the cell the packet reaches first.
    Cell(RegionId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Packet {
    pub id: u64,
    pub kind: PacketKind,
    pub origin: NodeId,
    pub requester: NodeId,
    pub subject: NodeId,
    pub payload: Option<LocationRecord>,
    pub target: Target,
    /// Geographic routing target.
    pub dest_position: Vec2,
    pub hops: u32,
    pub deadline: SimTime,
}

impl Packet {
    pub fn size(&self) -> u32 {
        self.kind.wire_bytes()
    }
}
