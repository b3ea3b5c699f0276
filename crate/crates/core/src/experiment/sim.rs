//! Event-driven simulation of one scenario run.

use std::collections::BTreeMap;
use std::rc::Rc;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ExperimentError, ScenarioConfig};
use crate::geom::Vec2;
use crate::grid::{GridHierarchy, RegionId};
use crate::locsvc::{
    LocationService, Message, Outgoing, QueryId, QueryOutcome, ServiceContext,
};
use crate::mobility::{MotionState, Trajectory};
use crate::netsim::{
    route, Delivery, DropReason, EventQueue, Packet, PositionOracle, RadioConfig, SimTime, Snapshot,
    Transmission, TransmissionLog,
};
use crate::NodeId;

/// Node trajectories with a cache of radio snapshots.
pub struct Positions {
    trajectories: Vec<Trajectory>,
    range: f64,
    snapshots: BTreeMap<SimTime, Rc<Snapshot>>,
}

impl Positions {
    pub fn new(trajectories: Vec<Trajectory>, range: f64) -> Self {
        Positions { trajectories, range, snapshots: BTreeMap::new() }
    }

    pub fn trajectory(&self, node: NodeId) -> &Trajectory {
        &self.trajectories[node.index()]
    }

    pub fn position(&self, node: NodeId, t: SimTime) -> Vec2 {
        self.trajectories[node.index()].position_at(t.as_secs())
    }

    /// Drops cached snapshots older than `t`.
    fn forget_before(&mut self, t: SimTime) {
        if self.snapshots.first_key_value().is_some_and(|(k, _)| *k < t) {
            self.snapshots = self.snapshots.split_off(&t);
        }
    }
}

impl PositionOracle for Positions {
    fn snapshot_at(&mut self, t: SimTime) -> Rc<Snapshot> {
        if let Some(s) = self.snapshots.get(&t) {
            return Rc::clone(s);
        }
        let secs = t.as_secs();
        let positions = self.trajectories.iter().map(|tr| tr.position_at(secs)).collect();
        let snap = Rc::new(Snapshot::new(t, positions, self.range));
        self.snapshots.insert(t, Rc::clone(&snap));
        snap
    }
}

/// Everything the location service observes: positions, grid membership and
/// the transmission log.
pub struct World {
    grid: GridHierarchy,
    radio: RadioConfig,
    positions: Positions,
    cells: Vec<RegionId>,
    /// Sorted members of every region, indexed by level then `y * n + x`.
    members: Vec<Vec<Vec<NodeId>>>,
    /// Regions whose membership changed since the last `take_changed_regions`.
    changed: std::collections::BTreeSet<RegionId>,
    log: TransmissionLog,
}

impl World {
    pub fn new(
        grid: GridHierarchy,
        radio: RadioConfig,
        trajectories: Vec<Trajectory>,
        log: TransmissionLog,
    ) -> Result<Self, ExperimentError> {
        let members = (0..=grid.levels())
            .map(|l| {
                let n = grid.regions_per_side(l) as usize;
                vec![Vec::new(); n * n]
            })
            .collect();
        let mut world = World {
            positions: Positions::new(trajectories, radio.range),
            grid,
            radio,
            cells: Vec::new(),
            members,
            changed: Default::default(),
            log,
        };
        for i in 0..world.node_count() {
            let p = world.positions.trajectories[i].position_at(0.0);
            let cell = world
                .grid
                .cell_of(p)
                .map_err(|e| ExperimentError::InvalidConfig(e.to_string()))?;
            world.cells.push(cell);
            for level in 0..=world.grid.levels() {
                let r = world.grid.region_of(cell, level).expect("level in range");
                world.slot_mut(r).push(NodeId(i as u32));
            }
        }
        Ok(world)
    }

    fn slot(&self, r: RegionId) -> usize {
        (r.y * self.grid.regions_per_side(r.level) + r.x) as usize
    }

    fn slot_mut(&mut self, r: RegionId) -> &mut Vec<NodeId> {
        let i = self.slot(r);
        &mut self.members[r.level as usize][i]
    }

    pub fn node_count(&self) -> usize {
        self.positions.trajectories.len()
    }

    pub fn positions(&self) -> &Positions {
        &self.positions
    }

    pub fn log(&self) -> &TransmissionLog {
        &self.log
    }

    pub fn radio(&self) -> &RadioConfig {
        &self.radio
    }

    /// Re-samples every node's cell at `t`. Returns `(node, highest crossed
    /// level)` for the nodes that changed cell, in id order.
    pub fn update_membership(&mut self, t: SimTime) -> Vec<(NodeId, u32)> {
        let mut moved = Vec::new();
        for i in 0..self.node_count() {
            let node = NodeId(i as u32);
            let p = self.positions.trajectories[i].position_at(t.as_secs());
            let cell = self.grid.cell_of(p).expect("trajectories stay inside the area");
            let old = self.cells[i];
            let Some(k) = self.grid.crossed_level_between(old, cell) else {
                continue;
            };
            for level in 0..=k {
                let from = self.grid.region_of(old, level).expect("level in range");
                let to = self.grid.region_of(cell, level).expect("level in range");
                self.changed.insert(from);
                self.changed.insert(to);
                let list = self.slot_mut(from);
                if let Ok(pos) = list.binary_search(&node) {
                    list.remove(pos);
                }
                let list = self.slot_mut(to);
                if let Err(pos) = list.binary_search(&node) {
                    list.insert(pos, node);
                }
            }
            self.cells[i] = cell;
            moved.push((node, k));
        }
        moved
    }
}

impl World {
    /// Regions whose membership changed since the previous call, sorted.
    pub fn take_changed_regions(&mut self) -> Vec<RegionId> {
        std::mem::take(&mut self.changed).into_iter().collect()
    }
}

impl ServiceContext for World {
    fn grid(&self) -> &GridHierarchy {
        &self.grid
    }

    fn cell_of(&self, node: NodeId) -> RegionId {
        self.cells[node.index()]
    }

    fn members(&self, region: RegionId) -> &[NodeId] {
        &self.members[region.level as usize][self.slot(region)]
    }

    fn kinematics(&mut self, node: NodeId, t: SimTime) -> (Vec2, Vec2) {
        self.positions.trajectories[node.index()].state_at(t.as_secs())
    }

    fn bill_local(&mut self, packet: &Packet, from: NodeId, to: NodeId, t: SimTime) {
        self.log.record(Transmission {
            packet: packet.id,
            time: t,
            from,
            to,
            kind: packet.kind,
            bytes: packet.size(),
            before: 0.0,
            after: 0.0,
            local: true,
        });
    }
}

#[derive(Debug, Clone)]
enum Event {
    Tick,
    Query { requester: NodeId, subject: NodeId },
    Deliver { message: Message, at: NodeId },
    Drop { message: Message, reason: DropReason },
}

/// Metrics of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub queries: u32,
    pub replies: u32,
    pub successes: u32,
    pub query_success_rate: f64,
    /// Mean distance between reported and true position over all replies (m).
    pub avg_location_error: f64,
    /// Bytes per second per node.
    pub bandwidth: f64,
    pub counted_bytes: u64,
    /// Mean routing hops per query, reply included.
    pub query_hops_mean: f64,
    pub exact_answers: u32,
    pub no_record: u32,
    pub drop_noprogress: u64,
    pub drop_deadline: u64,
    pub updates_sent: u64,
    pub handovers_sent: u64,
    pub rehome_handovers: u64,
    pub records_lost: u64,
    pub trace_hash: u64,
}

/// Outcome of one query as judged at reply arrival.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryRecord {
    pub id: QueryId,
    pub requester: NodeId,
    pub subject: NodeId,
    pub issued: SimTime,
    pub outcome: QueryOutcome,
    /// Distance from the answer to the subject's true position at arrival.
    pub error: Option<f64>,
    pub success: bool,
}

pub struct Simulation {
    cfg: ScenarioConfig,
    world: World,
    service: LocationService,
    queue: EventQueue<Event>,
    now: SimTime,
    end: SimTime,
    tick: SimTime,
    drops: [u64; 2],
}

impl Simulation {
    /// Random initial positions and trajectories drawn from per-node streams.
    pub fn new(cfg: &ScenarioConfig, seed: u64, keep_log: bool) -> Result<Self, ExperimentError> {
        cfg.validate()?;
        let mobility = cfg.mobility();
        let area = cfg.area();
        let horizon = cfg.duration + cfg.query_deadline + 1.0;
        let trajectories = (0..cfg.node_count)
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(u64::from(i) + 1);
                let p = Vec2::new(rng.gen_range(0.0..area.side), rng.gen_range(0.0..area.side));
                let start = MotionState::start(p, 0.0, &mobility, &mut rng);
                Trajectory::generate(start, horizon, &mobility, &mut rng)
            })
            .collect();
        Self::with_trajectories(cfg, trajectories, keep_log)
    }

    /// Fixed trajectories; used for scripted scenarios.
    pub fn with_trajectories(
        cfg: &ScenarioConfig,
        trajectories: Vec<Trajectory>,
        keep_log: bool,
    ) -> Result<Self, ExperimentError> {
        cfg.validate()?;
        let grid = cfg.grid()?;
        let node_count = trajectories.len();
        let log = TransmissionLog::new(keep_log, SimTime::from_secs(cfg.warmup));
        let world = World::new(grid.clone(), cfg.radio(), trajectories, log)?;
        let service = LocationService::new(cfg.service()?, grid, node_count);
        let tick = SimTime::from_secs(cfg.tick);
        let mut queue = EventQueue::new();
        queue.push(tick, Event::Tick);
        Ok(Simulation {
            cfg: cfg.clone(),
            world,
            service,
            queue,
            now: SimTime::ZERO,
            end: SimTime::from_secs(cfg.duration),
            tick,
            drops: [0; 2],
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn service(&self) -> &LocationService {
        &self.service
    }

    pub fn service_mut(&mut self) -> &mut LocationService {
        &mut self.service
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    /// Every node contacts its servers at all levels.
    pub fn register_all(&mut self) {
        let n = self.world.node_count();
        let out = self.service.register_all(&mut self.world, n, self.now);
        self.dispatch(out);
    }

    pub fn schedule_query(&mut self, t: SimTime, requester: NodeId, subject: NodeId) {
        self.queue.push(t, Event::Query { requester, subject });
    }

    fn dispatch(&mut self, out: Vec<Outgoing>) {
        for o in out {
            let mut message = o.message;
            let w = &mut self.world;
            let delivery = route(&mut message.packet, o.from, o.depart, &mut w.positions, &w.grid, &w.radio, &mut w.log);
            match delivery {
                Delivery::Delivered { at, time } => self.queue.push(time, Event::Deliver { message, at }),
                Delivery::Dropped { reason, time, .. } => {
                    self.drops[reason as usize] += 1;
                    self.queue.push(time, Event::Drop { message, reason })
                }
            };
        }
    }

    /// Processes every event up to and including `t`.
    pub fn run_until(&mut self, t: SimTime) {
        while let Some(next) = self.queue.peek_time() {
            if next > t {
                break;
            }
            let (time, event) = self.queue.pop().expect("peeked");
            self.now = time;
            self.world.positions.forget_before(time);
            let out = match event {
                Event::Tick => {
                    let moved = self.world.update_membership(time);
                    let mut out = Vec::new();
                    for &(node, _) in &moved {
                        out.extend(self.service.on_server_region_exit(&mut self.world, node, time));
                    }
                    let changed = self.world.take_changed_regions();
                    out.extend(self.service.on_membership_change(&mut self.world, &changed, time));
                    for &(node, k) in &moved {
                        out.extend(self.service.on_boundary_cross(&mut self.world, node, k, time));
                    }
                    let next = time + self.tick;
                    if next <= self.end {
                        self.queue.push(next, Event::Tick);
                    }
                    out
                }
                Event::Query { requester, subject } => {
                    let deadline = time + SimTime::from_secs(self.cfg.query_deadline);
                    self.service.start_query(&mut self.world, requester, subject, time, deadline).1
                }
                Event::Deliver { message, at } => self.service.on_deliver(&mut self.world, message, at, time),
                Event::Drop { message, reason } => self.service.on_drop(&mut self.world, message, reason, time),
            };
            self.dispatch(out);
        }
        self.now = self.now.max(t);
    }

    /// Issues one query at `t` and runs until its deadline.
    pub fn resolve(&mut self, requester: NodeId, subject: NodeId, t: SimTime) -> QueryRecord {
        self.schedule_query(t, requester, subject);
        let deadline = t + SimTime::from_secs(self.cfg.query_deadline);
        self.run_until(deadline);
        let id = (self.service.queries().len() - 1) as QueryId;
        self.judge(id)
    }

    /// Judges query `id` against the subject's true position at reply arrival.
    pub fn judge(&self, id: QueryId) -> QueryRecord {
        let q = self.service.query(id);
        let error = match q.outcome {
            QueryOutcome::Answered { answer, received } => {
                Some(answer.position.distance(self.world.positions.position(q.subject, received)))
            }
            _ => None,
        };
        let success = match (q.outcome, error) {
            (QueryOutcome::Answered { received, .. }, Some(e)) => {
                received <= q.deadline && (self.cfg.any_reply_counts || e <= self.cfg.success_radius)
            }
            _ => false,
        };
        QueryRecord { id, requester: q.requester, subject: q.subject, issued: q.start, outcome: q.outcome, error, success }
    }

    pub fn query_records(&self) -> Vec<QueryRecord> {
        (0..self.service.queries().len() as QueryId).map(|id| self.judge(id)).collect()
    }

    pub fn metrics(&self) -> RunMetrics {
        let records = self.query_records();
        let queries = records.len() as u32;
        let errors: Vec<f64> = records.iter().filter_map(|r| r.error).collect();
        let successes = records.iter().filter(|r| r.success).count() as u32;
        let hops: u64 = self.service.queries().iter().map(|q| u64::from(q.hops)).sum();
        let stats = self.service.stats();
        let log = self.world.log();
        let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { 0.0 };
        RunMetrics {
            queries,
            replies: errors.len() as u32,
            successes,
            query_success_rate: ratio(f64::from(successes), f64::from(queries)),
            avg_location_error: ratio(errors.iter().sum(), errors.len() as f64),
            bandwidth: bandwidth(log.counted_bytes(), self.cfg.duration, self.world.node_count()),
            counted_bytes: log.counted_bytes(),
            query_hops_mean: ratio(hops as f64, f64::from(queries)),
            exact_answers: records
                .iter()
                .filter(|r| matches!(r.outcome, QueryOutcome::Answered { answer, .. } if answer.exact))
                .count() as u32,
            no_record: records.iter().filter(|r| r.outcome == QueryOutcome::NoRecord).count() as u32,
            drop_noprogress: self.drops[DropReason::NoProgress as usize],
            drop_deadline: self.drops[DropReason::DeadlineExceeded as usize],
            updates_sent: stats.updates_sent,
            handovers_sent: stats.handovers_sent,
            rehome_handovers: stats.rehome_handovers,
            records_lost: stats.records_lost,
            trace_hash: log.trace_hash(),
        }
    }
}

/// Bytes per second per node.
pub fn bandwidth(bytes: u64, duration: f64, nodes: usize) -> f64 {
    bytes as f64 / (duration * nodes as f64)
}

/// Query times uniform over `[warmup, duration)` between distinct random pairs,
/// sorted by time.
pub fn workload(cfg: &ScenarioConfig, seed: u64) -> Vec<(SimTime, NodeId, NodeId)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    let mut out: Vec<_> = (0..cfg.requests_per_run)
        .map(|_| {
            let t = SimTime::from_secs(rng.gen_range(cfg.warmup..cfg.duration));
            let pair = sample(&mut rng, cfg.node_count as usize, 2);
            (t, NodeId(pair.index(0) as u32), NodeId(pair.index(1) as u32))
        })
        .collect();
    out.sort_by_key(|q| q.0);
    out
}

/// Runs one scenario to completion.
pub fn run(cfg: &ScenarioConfig, seed: u64) -> Result<RunMetrics, ExperimentError> {
    Ok(run_simulation(cfg, seed, false)?.metrics())
}

/// Like [`run`] but returns the finished simulation for inspection.
pub fn run_simulation(cfg: &ScenarioConfig, seed: u64, keep_log: bool) -> Result<Simulation, ExperimentError> {
    let mut sim = Simulation::new(cfg, seed, keep_log)?;
    sim.register_all();
    for (t, requester, subject) in workload(cfg, seed) {
        sim.schedule_query(t, requester, subject);
    }
    sim.run_until(SimTime::from_secs(cfg.duration));
    Ok(sim)
}
