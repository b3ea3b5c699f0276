//! Protocol state machine shared by PHLS and HLS.
//!
//! Handlers are driven by an external event core: they read membership and
//! kinematics through [`ServiceContext`] and return the packets to send.

use super::predict::{predict_avg, predict_linear, update_avg_velocity};
use super::table::{Entry, ServerTable};
use super::{LocationRecord, PredictorConfig, PredictorScheme, Protocol, ServerMobilityPolicy};
use crate::geom::{Square, Vec2};
use crate::grid::{GridHierarchy, RegionId};
use crate::netsim::{DropReason, Packet, PacketKind, SimTime, Target};
use crate::NodeId;

pub type QueryId = u32;

/// What the protocol needs to know about the world.
pub trait ServiceContext {
    fn grid(&self) -> &GridHierarchy;
    /// Current cell of `node`, as known to the membership oracle.
    fn cell_of(&self, node: NodeId) -> crate::grid::RegionId;
    /// Nodes currently inside `region`, ascending by identity.
    fn members(&self, region: RegionId) -> &[NodeId];
    /// Position and velocity of `node` at `t`.
    fn kinematics(&mut self, node: NodeId, t: SimTime) -> (Vec2, Vec2);
    /// Accounts for an in-cell transmission that bypasses routing.
    fn bill_local(&mut self, packet: &Packet, from: NodeId, to: NodeId, t: SimTime);
}

/// Elects `members[target mod n]` over `members \ {target}` without allocating.
///
/// A node never serves as its own location server.
pub fn elect_excluding(target: NodeId, members: &[NodeId]) -> Option<NodeId> {
    let own = members.binary_search(&target).ok();
    let n = members.len() - usize::from(own.is_some());
    if n == 0 {
        return None;
    }
    let i = target.index() % n;
    Some(match own {
        Some(pos) if i >= pos => members[i + 1],
        _ => members[i],
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocationAnswer {
    pub position: Vec2,
    /// Answered from a level-0 record.
    pub exact: bool,
    /// Timestamp of the record the answer was derived from.
    pub timestamp: f64,
    pub level: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QueryOutcome {
    Pending,
    Answered { answer: LocationAnswer, received: SimTime },
    /// The treewalk finished without meeting any record.
    NoRecord,
    /// The reply was lost on its way back.
    Lost(DropReason),
}

/// A record met by a query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub record: LocationRecord,
    pub level: u32,
    pub holder: NodeId,
}

#[derive(Debug, Clone)]
pub struct QueryState {
    pub requester: NodeId,
    pub subject: NodeId,
    pub start: SimTime,
    pub deadline: SimTime,
    /// Requester's cell when the query was issued; fixes the ascending branch.
    pub origin_cell: RegionId,
    pub outstanding: u32,
    /// A reply has been sent (or the walk gave up).
    pub closed: bool,
    pub candidates: Vec<Candidate>,
    /// Sum of routing hops over every packet of the query, reply included.
    pub hops: u32,
    pub outcome: QueryOutcome,
    last_server: NodeId,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Body {
    /// Store the payload at the recipient (PHLS update, any hand-over).
    Store { level: u32, held_for: RegionId },
    /// Store the payload at every node of `cell` (HLS update).
    Geocast { level: u32, cell: RegionId },
    Ascend { query: QueryId, level: u32, region: RegionId },
    Descend { query: QueryId, level: u32, region: RegionId },
    Reply { query: QueryId, answer: LocationAnswer },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub packet: Packet,
    pub body: Body,
}

/// A packet to route from `from`, departing at `depart`.
#[derive(Debug, Clone, PartialEq)]
pub struct Outgoing {
    pub from: NodeId,
    pub depart: SimTime,
    pub message: Message,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ServiceStats {
    pub updates_sent: u64,
    /// Updates not sent because the target region had no eligible server.
    pub updates_dropped_empty: u64,
    pub updates_lost_in_transit: u64,
    pub reelection_updates: u64,
    pub handovers_sent: u64,
    /// Hand-overs caused by a change of the elected server within a region.
    pub rehome_handovers: u64,
    pub records_lost: u64,
    pub records_discarded: u64,
    pub geocast_deliveries: u64,
    pub queries_started: u64,
    pub exact_answers: u64,
    pub predicted_answers: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceConfig {
    pub protocol: Protocol,
    pub predictor: PredictorConfig,
    pub policy: ServerMobilityPolicy,
    /// A PHLS level-0 server missing a record asks the rest of its cell.
    pub cell_fallback: bool,
    /// A PHLS holder that stops being the elected server of a region hands
    /// its records to the new one (hand-over policy only).
    pub rehome_on_election_change: bool,
}

#[derive(Debug, Clone, Copy)]
enum ServerRef {
    Node(NodeId),
    Cell(RegionId),
}

pub struct LocationService {
    cfg: ServiceConfig,
    grid: GridHierarchy,
    area: Square,
    tables: Vec<ServerTable>,
    /// Last server each node registered with, per level (PHLS only).
    servers: Vec<Vec<Option<NodeId>>>,
    avg_velocity: Vec<Vec2>,
    queries: Vec<QueryState>,
    stats: ServiceStats,
    next_packet: u64,
}

impl LocationService {
    pub fn new(cfg: ServiceConfig, grid: GridHierarchy, node_count: usize) -> Self {
        let levels = grid.levels() as usize + 1;
        LocationService {
            area: grid.area(),
            grid,
            tables: vec![ServerTable::new(); node_count],
            servers: vec![vec![None; levels]; node_count],
            avg_velocity: vec![Vec2::ZERO; node_count],
            queries: Vec::new(),
            stats: ServiceStats::default(),
            next_packet: 0,
            cfg,
        }
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.cfg
    }

    pub fn stats(&self) -> &ServiceStats {
        &self.stats
    }

    pub fn table(&self, node: NodeId) -> &ServerTable {
        &self.tables[node.index()]
    }

    pub fn table_mut(&mut self, node: NodeId) -> &mut ServerTable {
        &mut self.tables[node.index()]
    }

    pub fn tables(&self) -> &[ServerTable] {
        &self.tables
    }

    pub fn query(&self, id: QueryId) -> &QueryState {
        &self.queries[id as usize]
    }

    pub fn queries(&self) -> &[QueryState] {
        &self.queries
    }

    pub fn avg_velocity(&self, node: NodeId) -> Vec2 {
        self.avg_velocity[node.index()]
    }

    /// Answer a server gives for `record` at time `t` under the run's scheme.
    pub fn predict(&self, record: &LocationRecord, t: f64) -> Vec2 {
        let t = t.max(record.timestamp);
        match self.cfg.predictor.scheme {
            PredictorScheme::None => record.position,
            PredictorScheme::Linear => predict_linear(record, t, &self.area).expect("t >= timestamp"),
            // The record's velocity field already carries the smoothed velocity.
            PredictorScheme::MovingAverage => {
                predict_avg(record, record.velocity, t, &self.area).expect("t >= timestamp")
            }
        }
    }

    fn in_region<C: ServiceContext + ?Sized>(ctx: &C, node: NodeId, region: RegionId) -> bool {
        ctx.grid()
            .region_of(ctx.cell_of(node), region.level)
            .map(|r| r == region)
            .unwrap_or(false)
    }

    /// Responsible cell (HLS) or node (PHLS) for `subject` in `region`.
    fn server_for<C: ServiceContext + ?Sized>(
        &self,
        ctx: &C,
        subject: NodeId,
        region: RegionId,
    ) -> Option<ServerRef> {
        if self.cfg.protocol.cell_based() {
            let cells = self.grid.cells_of(region);
            let cell = cells[subject.index() % cells.len()];
            elect_excluding(subject, ctx.members(cell)).map(|_| ServerRef::Cell(cell))
        } else {
            elect_excluding(subject, ctx.members(region)).map(ServerRef::Node)
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn message<C: ServiceContext + ?Sized>(
        &mut self,
        ctx: &mut C,
        kind: PacketKind,
        from: NodeId,
        to: ServerRef,
        requester: NodeId,
        subject: NodeId,
        payload: Option<LocationRecord>,
        body: Body,
        t: SimTime,
        deadline: SimTime,
    ) -> Outgoing {
        let (target, dest_position) = match to {
            ServerRef::Node(n) => (Target::Node(n), ctx.kinematics(n, t).0),
            ServerRef::Cell(c) => (Target::Cell(c), self.grid.center(c)),
        };
        let id = self.next_packet;
        self.next_packet += 1;
        Outgoing {
            from,
            depart: t,
            message: Message {
                packet: Packet {
                    id,
                    kind,
                    origin: from,
                    requester,
                    subject,
                    payload,
                    target,
                    dest_position,
                    hops: 0,
                    deadline,
                },
                body,
            },
        }
    }

    /// Registers every node with its servers at all levels.
    pub fn register_all<C: ServiceContext + ?Sized>(
        &mut self,
        ctx: &mut C,
        node_count: usize,
        t: SimTime,
    ) -> Vec<Outgoing> {
        let top = self.grid.levels();
        (0..node_count as u32)
            .flat_map(|i| self.on_boundary_cross(ctx, NodeId(i), top, t))
            .collect()
    }

    /// `node` left its level-`k` region: refresh the servers of levels `0..=k`
    /// in the new regions.
    pub fn on_boundary_cross<C: ServiceContext + ?Sized>(
        &mut self,
        ctx: &mut C,
        node: NodeId,
        k: u32,
        t: SimTime,
    ) -> Vec<Outgoing> {
        let (position, velocity) = ctx.kinematics(node, t);
        let carried = if self.cfg.predictor.scheme == PredictorScheme::MovingAverage {
            let v = update_avg_velocity(self.avg_velocity[node.index()], velocity, self.cfg.predictor.alpha)
                .expect("alpha validated at construction");
            self.avg_velocity[node.index()] = v;
            v
        } else {
            velocity
        };
        let cell = ctx.cell_of(node);
        let mut out = Vec::new();
        let top = self.grid.levels();
        for level in 0..=top {
            let region = self.grid.region_of(cell, level).expect("level within hierarchy");
            let refresh = if level <= k {
                true
            } else if self.cfg.policy == ServerMobilityPolicy::Discard && !self.cfg.protocol.cell_based() {
                // The previous server may have left and dropped our record.
                match self.servers[node.index()][level as usize] {
                    Some(s) => !Self::in_region(ctx, s, region),
                    None => false,
                }
            } else {
                false
            };
            if !refresh {
                continue;
            }
            let record = LocationRecord {
                subject: node,
                position,
                velocity: carried,
                timestamp: t.as_secs(),
                region,
            };
            let Some(server) = self.server_for(ctx, node, region) else {
                self.stats.updates_dropped_empty += 1;
                if level > k {
                    self.servers[node.index()][level as usize] = None;
                }
                continue;
            };
            if level > k {
                self.stats.reelection_updates += 1;
            }
            self.stats.updates_sent += 1;
            let body = match server {
                ServerRef::Node(s) => {
                    self.servers[node.index()][level as usize] = Some(s);
                    Body::Store { level, held_for: region }
                }
                ServerRef::Cell(c) => Body::Geocast { level, cell: c },
            };
            let msg = self.message(
                ctx,
                PacketKind::Update,
                node,
                server,
                node,
                node,
                Some(record),
                body,
                t,
                SimTime::MAX,
            );
            out.push(msg);
        }
        out
    }

    /// `server` moved: every record it holds for a region it is no longer in
    /// is handed over or discarded according to the policy.
    pub fn on_server_region_exit<C: ServiceContext + ?Sized>(
        &mut self,
        ctx: &mut C,
        server: NodeId,
        t: SimTime,
    ) -> Vec<Outgoing> {
        let cell = ctx.cell_of(server);
        let grid = &self.grid;
        let departed = self.tables[server.index()].drain_where(|_, e| {
            grid.region_of(cell, e.held_for.level).map(|r| r != e.held_for).unwrap_or(true)
        });
        let mut out = Vec::new();
        for (level, entry) in departed {
            self.release(ctx, server, level, entry, t, &mut out);
        }
        out
    }

    /// Membership of `regions` changed: under hand-over, a PHLS holder that is
    /// no longer the elected server of a record's region passes the record on
    /// to the one that is, so queries addressed by election still find it.
    pub fn on_membership_change<C: ServiceContext + ?Sized>(
        &mut self,
        ctx: &mut C,
        regions: &[RegionId],
        t: SimTime,
    ) -> Vec<Outgoing> {
        let mut out = Vec::new();
        if !self.cfg.rehome_on_election_change
            || self.cfg.protocol.cell_based()
            || self.cfg.policy != ServerMobilityPolicy::HandOver
        {
            return out;
        }
        for &region in regions {
            let members = ctx.members(region).to_vec();
            for &holder in &members {
                let moving = self.tables[holder.index()].drain_where(|_, e| {
                    e.held_for == region && elect_excluding(e.record.subject, &members) != Some(holder)
                });
                for (level, entry) in moving {
                    let next = elect_excluding(entry.record.subject, &members).expect("holder is a candidate");
                    self.stats.rehome_handovers += 1;
                    let msg = self.message(
                        ctx,
                        PacketKind::HandOver,
                        holder,
                        ServerRef::Node(next),
                        holder,
                        entry.record.subject,
                        Some(entry.record),
                        Body::Store { level, held_for: entry.held_for },
                        t,
                        SimTime::MAX,
                    );
                    out.push(msg);
                }
            }
        }
        out
    }

    fn release<C: ServiceContext + ?Sized>(
        &mut self,
        ctx: &mut C,
        holder: NodeId,
        level: u32,
        entry: Entry,
        t: SimTime,
        out: &mut Vec<Outgoing>,
    ) {
        if self.cfg.policy == ServerMobilityPolicy::Discard {
            self.stats.records_discarded += 1;
            return;
        }
        let subject = entry.record.subject;
        let members = ctx.members(entry.held_for);
        if self.cfg.protocol.cell_based() {
            // Another holder left in the cell keeps the record alive.
            let covered = members.iter().any(|m| {
                *m != holder
                    && self.tables[m.index()]
                        .get(subject, level)
                        .is_some_and(|e| e.held_for == entry.held_for && e.record.timestamp >= entry.record.timestamp)
            });
            if covered {
                return;
            }
        }
        let Some(next) = elect_excluding(subject, members) else {
            self.stats.records_lost += 1;
            return;
        };
        self.stats.handovers_sent += 1;
        let msg = self.message(
            ctx,
            PacketKind::HandOver,
            holder,
            ServerRef::Node(next),
            holder,
            subject,
            Some(entry.record),
            Body::Store { level, held_for: entry.held_for },
            t,
            SimTime::MAX,
        );
        out.push(msg);
    }

    fn store_at<C: ServiceContext + ?Sized>(
        &mut self,
        ctx: &mut C,
        node: NodeId,
        level: u32,
        entry: Entry,
        t: SimTime,
        out: &mut Vec<Outgoing>,
    ) {
        if entry.record.subject == node {
            return;
        }
        if Self::in_region(ctx, node, entry.held_for) {
            self.tables[node.index()].insert(level, entry);
        } else {
            // Left the region while the packet was in flight.
            self.release(ctx, node, level, entry, t, out);
        }
    }

    /// Issues a location query; the walk proceeds as packets are delivered.
    pub fn start_query<C: ServiceContext + ?Sized>(
        &mut self,
        ctx: &mut C,
        requester: NodeId,
        subject: NodeId,
        t: SimTime,
        deadline: SimTime,
    ) -> (QueryId, Vec<Outgoing>) {
        let id = self.queries.len() as QueryId;
        self.queries.push(QueryState {
            requester,
            subject,
            start: t,
            deadline,
            origin_cell: ctx.cell_of(requester),
            outstanding: 0,
            closed: false,
            candidates: Vec::new(),
            hops: 0,
            outcome: QueryOutcome::Pending,
            last_server: requester,
        });
        self.stats.queries_started += 1;
        let mut out = Vec::new();
        self.ascend_from(ctx, id, 0, requester, t, &mut out);
        if self.queries[id as usize].outstanding == 0 {
            self.finish(ctx, id, requester, t, &mut out);
        }
        (id, out)
    }

    /// Freshest candidate; ties go to the lower level, then to the first met.
    pub fn best_candidate(&self, id: QueryId) -> Option<Candidate> {
        let q = &self.queries[id as usize];
        let mut best: Option<&Candidate> = None;
        for c in &q.candidates {
            let better = match best {
                None => true,
                Some(b) => {
                    c.record.timestamp > b.record.timestamp
                        || (c.record.timestamp == b.record.timestamp && c.level < b.level)
                }
            };
            if better {
                best = Some(c);
            }
        }
        best.copied()
    }

    #[allow(clippy::too_many_arguments)]
    fn send_query<C: ServiceContext + ?Sized>(
        &mut self,
        ctx: &mut C,
        id: QueryId,
        kind: PacketKind,
        from: NodeId,
        to: ServerRef,
        body: Body,
        t: SimTime,
        out: &mut Vec<Outgoing>,
    ) {
        let best = self.best_candidate(id).map(|c| c.record);
        let q = &mut self.queries[id as usize];
        q.outstanding += 1;
        let (requester, subject, deadline) = (q.requester, q.subject, q.deadline);
        let msg = self.message(ctx, kind, from, to, requester, subject, best, body, t, deadline);
        out.push(msg);
    }

    fn ascend_from<C: ServiceContext + ?Sized>(
        &mut self,
        ctx: &mut C,
        id: QueryId,
        from_level: u32,
        from: NodeId,
        t: SimTime,
        out: &mut Vec<Outgoing>,
    ) {
        let (subject, origin) = {
            let q = &self.queries[id as usize];
            (q.subject, q.origin_cell)
        };
        for level in from_level..=self.grid.levels() {
            let region = self.grid.region_of(origin, level).expect("level within hierarchy");
            if let Some(server) = self.server_for(ctx, subject, region) {
                let body = Body::Ascend { query: id, level, region };
                self.send_query(ctx, id, PacketKind::Query, from, server, body, t, out);
                return;
            }
            // Nobody serves this level: fan out to its siblings from here.
            if level >= 1 {
                self.descend_into_children(ctx, id, region, true, from, t, out);
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn descend_into_children<C: ServiceContext + ?Sized>(
        &mut self,
        ctx: &mut C,
        id: QueryId,
        region: RegionId,
        skip_origin_branch: bool,
        from: NodeId,
        t: SimTime,
        out: &mut Vec<Outgoing>,
    ) {
        let (subject, origin) = {
            let q = &self.queries[id as usize];
            (q.subject, q.origin_cell)
        };
        let Some(children) = self.grid.children(region) else {
            return;
        };
        let origin_branch = self.grid.region_of(origin, region.level - 1).ok();
        for child in children {
            if skip_origin_branch && Some(child) == origin_branch {
                continue;
            }
            if let Some(server) = self.server_for(ctx, subject, child) {
                let body = Body::Descend { query: id, level: child.level, region: child };
                self.send_query(ctx, id, PacketKind::QueryDescend, from, server, body, t, out);
            }
        }
    }

    /// Freshest record for (subject, level) held for `area` by any node in it.
    fn freshest_in<C: ServiceContext + ?Sized>(
        &self,
        ctx: &C,
        subject: NodeId,
        level: u32,
        area: RegionId,
    ) -> Option<(LocationRecord, NodeId)> {
        let mut best: Option<(LocationRecord, NodeId)> = None;
        for &m in ctx.members(area) {
            if let Some(e) = self.tables[m.index()].get(subject, level) {
                if e.held_for == area && best.is_none_or(|(b, _)| e.record.timestamp > b.timestamp) {
                    best = Some((e.record, m));
                }
            }
        }
        best
    }

    /// Looks up the record a server holds for (subject, level) in `region`.
    fn lookup<C: ServiceContext + ?Sized>(
        &mut self,
        ctx: &mut C,
        at: NodeId,
        packet: &Packet,
        level: u32,
        region: RegionId,
        t: SimTime,
    ) -> Option<(LocationRecord, NodeId)> {
        let subject = packet.subject;
        match packet.target {
            Target::Cell(cell) => {
                let own = self.tables[at.index()]
                    .get(subject, level)
                    .filter(|e| e.held_for == cell)
                    .map(|e| (e.record, at));
                if own.is_some() {
                    return own;
                }
                // Ask the rest of the cell with one local broadcast.
                ctx.bill_local(packet, at, at, t);
                self.freshest_in(ctx, subject, level, cell)
            }
            Target::Node(_) => {
                let own = self.tables[at.index()]
                    .get(subject, level)
                    .filter(|e| e.held_for == region)
                    .map(|e| (e.record, at));
                if own.is_some() || level > 0 || !self.cfg.cell_fallback {
                    return own;
                }
                // A cell is single-hop: ask it with one local broadcast.
                ctx.bill_local(packet, at, at, t);
                self.freshest_in(ctx, subject, level, region)
            }
        }
    }

    /// Handles a packet that reached its recipient `at` at time `t`.
    pub fn on_deliver<C: ServiceContext + ?Sized>(
        &mut self,
        ctx: &mut C,
        msg: Message,
        at: NodeId,
        t: SimTime,
    ) -> Vec<Outgoing> {
        let mut out = Vec::new();
        match msg.body {
            Body::Store { level, held_for } => {
                if let Some(record) = msg.packet.payload {
                    self.store_at(ctx, at, level, Entry { record, held_for }, t, &mut out);
                }
            }
            Body::Geocast { level, cell } => {
                if let Some(record) = msg.packet.payload {
                    let members = ctx.members(cell).to_vec();
                    for m in members {
                        if m == record.subject {
                            continue;
                        }
                        if m != at {
                            ctx.bill_local(&msg.packet, at, m, t);
                        }
                        self.stats.geocast_deliveries += 1;
                        self.store_at(ctx, m, level, Entry { record, held_for: cell }, t, &mut out);
                    }
                }
            }
            Body::Ascend { query, level, region } | Body::Descend { query, level, region } => {
                let ascending = matches!(msg.body, Body::Ascend { .. });
                let q = &mut self.queries[query as usize];
                q.outstanding -= 1;
                q.hops += msg.packet.hops;
                if !q.closed {
                    q.last_server = at;
                    self.visit(ctx, query, &msg.packet, at, level, region, ascending, t, &mut out);
                }
            }
            Body::Reply { query, answer } => {
                let q = &mut self.queries[query as usize];
                q.hops += msg.packet.hops;
                q.outcome = QueryOutcome::Answered { answer, received: t };
            }
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn visit<C: ServiceContext + ?Sized>(
        &mut self,
        ctx: &mut C,
        id: QueryId,
        packet: &Packet,
        at: NodeId,
        level: u32,
        region: RegionId,
        ascending: bool,
        t: SimTime,
        out: &mut Vec<Outgoing>,
    ) {
        if let Some((record, holder)) = self.lookup(ctx, at, packet, level, region, t) {
            self.queries[id as usize].candidates.push(Candidate { record, level, holder });
        }
        if level >= 1 {
            self.descend_into_children(ctx, id, region, ascending, at, t, out);
        }
        if ascending && level < self.grid.levels() {
            self.ascend_from(ctx, id, level + 1, at, t, out);
        }
        if self.queries[id as usize].outstanding == 0 {
            self.finish(ctx, id, at, t, out);
        }
    }

    fn reply<C: ServiceContext + ?Sized>(
        &mut self,
        ctx: &mut C,
        id: QueryId,
        from: NodeId,
        answer: LocationAnswer,
        t: SimTime,
        out: &mut Vec<Outgoing>,
    ) {
        let q = &mut self.queries[id as usize];
        q.closed = true;
        let (requester, subject, deadline) = (q.requester, q.subject, q.deadline);
        let record = LocationRecord {
            subject,
            position: answer.position,
            velocity: Vec2::ZERO,
            timestamp: answer.timestamp,
            region: self.grid.top(),
        };
        let msg = self.message(
            ctx,
            PacketKind::Reply,
            from,
            ServerRef::Node(requester),
            requester,
            subject,
            Some(record),
            Body::Reply { query: id, answer },
            t,
            deadline,
        );
        out.push(msg);
    }

    /// Closes the walk once no query packet is outstanding. The freshest
    /// record met wins; a level-0 record is answered verbatim as exact, any
    /// other is extrapolated to `t` by the run's predictor.
    fn finish<C: ServiceContext + ?Sized>(
        &mut self,
        ctx: &mut C,
        id: QueryId,
        from: NodeId,
        t: SimTime,
        out: &mut Vec<Outgoing>,
    ) {
        if self.queries[id as usize].closed {
            return;
        }
        let Some(best) = self.best_candidate(id) else {
            let q = &mut self.queries[id as usize];
            q.closed = true;
            q.outcome = QueryOutcome::NoRecord;
            return;
        };
        let answer = if best.level == 0 {
            self.stats.exact_answers += 1;
            LocationAnswer { position: best.record.position, exact: true, timestamp: best.record.timestamp, level: 0 }
        } else {
            self.stats.predicted_answers += 1;
            LocationAnswer {
                position: self.predict(&best.record, t.as_secs()),
                exact: false,
                timestamp: best.record.timestamp,
                level: best.level,
            }
        };
        self.reply(ctx, id, from, answer, t, out);
    }

    /// Handles a packet the network failed to deliver.
    pub fn on_drop<C: ServiceContext + ?Sized>(
        &mut self,
        ctx: &mut C,
        msg: Message,
        reason: DropReason,
        t: SimTime,
    ) -> Vec<Outgoing> {
        let mut out = Vec::new();
        match msg.body {
            Body::Store { .. } | Body::Geocast { .. } => {
                self.stats.updates_lost_in_transit += 1;
            }
            Body::Ascend { query, .. } | Body::Descend { query, .. } => {
                let q = &mut self.queries[query as usize];
                q.outstanding -= 1;
                q.hops += msg.packet.hops;
                if q.outstanding == 0 && !q.closed {
                    let from = q.last_server;
                    self.finish(ctx, query, from, t, &mut out);
                }
            }
            Body::Reply { query, .. } => {
                let q = &mut self.queries[query as usize];
                q.hops += msg.packet.hops;
                q.outcome = QueryOutcome::Lost(reason);
            }
        }
        out
    }
}
