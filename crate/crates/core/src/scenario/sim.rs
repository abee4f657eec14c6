use crate::channel::{
    channel_condition, dbm_to_mw, mw_to_dbm, sinr_db, AntennaArray, ChannelModel, ConditionMode,
    LinkEnd, LinkState, Vec3,
};
use crate::engine::{RngStream, Scheduler, SimTime, Streams};
use crate::phy_mac::{
    build_schedule, tbs_bits, transmit_slot, FrameConfig, McsChoice, McsTable, SchedulePattern, TxOutcome,
};
use crate::stack::{rlc_tx_fill, PdcpEntity, RlcPdu, RlcRxState, RlcTxBuffer, TrafficGenerator};

use super::geometry::{segment_blocked, Vehicle};
use super::metrics::RunMetrics;
use super::{invalid, ConditionSetting, ScenarioError, ScenarioKind, SimConfig};

#[derive(Debug)]
enum Event {
    Slot(u64),
    TbArrival { link: usize, pdu: RlcPdu },
    ReorderTimer { link: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Queued,
    Dropped,
    Delivered,
}

#[derive(Clone, Copy, Debug)]
struct PacketRec {
    created: SimTime,
    status: Status,
    /// Final segment went out in a measured slot.
    completed_in_window: bool,
}

/// One application packet handed to the receiving application.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Delivery {
    pub link: usize,
    pub packet_id: u64,
    pub created_at: SimTime,
    pub delivered_at: SimTime,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub metrics: RunMetrics,
    /// Every delivery in the run when recording was enabled.
    pub deliveries: Vec<Delivery>,
}

struct LinkRuntime {
    serving: LinkState,
    /// Path from another link's transmitter to this receiver, by link id.
    interference: Vec<Option<LinkState>>,
    traffic: TrafficGenerator,
    pdcp: PdcpEntity,
    tx_buf: RlcTxBuffer,
    rx: RlcRxState,
    errors: RngStream,
    last_sinr_db: f64,
    max_mcs_used: Option<u8>,
    packets: Vec<PacketRec>,
    timer_scheduled: Option<SimTime>,
}

#[derive(Default)]
struct Counters {
    delivered: u64,
    delay_sum_s: f64,
    delay_min_s: f64,
    delay_max_s: f64,
    delivered_bits_in_window: u64,
    sinr_sum_db: f64,
    tbs_sent: u64,
    tbs_lost: u64,
    interfered_tbs: u64,
    max_interference_mw: Option<f64>,
}

/// A fully built run: vehicles, links, protocol state and the event queue.
pub struct Simulation {
    cfg: SimConfig,
    frame: FrameConfig,
    slot: SimTime,
    data_symbols: u32,
    table: McsTable,
    pattern: SchedulePattern,
    vehicles: Vec<Vehicle>,
    links: Vec<LinkRuntime>,
    sched: Scheduler<Event>,
    window_start: SimTime,
    window_end: SimTime,
    stop: SimTime,
    noise_dbm: f64,
    counters: Counters,
    record: bool,
    deliveries: Vec<Delivery>,
}

fn secs(key: &str, s: f64) -> Result<SimTime, ScenarioError> {
    SimTime::from_secs_f64(s).ok_or_else(|| invalid(key, format!("invalid duration {s}")))
}

/// `v` steering its beam at `peer`.
fn link_end<'a>(v: &'a Vehicle, peer: &Vehicle) -> LinkEnd<'a> {
    LinkEnd {
        vehicle: v.id,
        position: v.position,
        speed_mps: v.speed_mps,
        array: &v.antenna,
        steering: v.direction_to(peer).unwrap_or(v.antenna.boresight()),
    }
}

/// Builds the run described by `cfg` with master seed `seed`.
pub fn build_scenario(cfg: &SimConfig, seed: u64) -> Result<Simulation, ScenarioError> {
    match cfg.scenario.kind {
        ScenarioKind::A => build_scenario_a(cfg, seed),
        ScenarioKind::B => build_scenario_b(cfg, seed),
    }
}

fn make_vehicle(cfg: &SimConfig, id: usize, x: f64, y: f64, boresight: Vec3) -> Result<Vehicle, ScenarioError> {
    let a = cfg.scenario.array;
    let antenna = AntennaArray::with_spacing(a.rows, a.cols, cfg.channel.element_spacing_wl, boresight)?
        .with_backlobe_floor_db(cfg.channel.backlobe_floor_db);
    Ok(Vehicle {
        id,
        position: Vec3::new(x, y, 0.0),
        speed_mps: cfg.scenario.speed_mps,
        antenna,
    })
}

/// Single link: transmitter at x = 0, receiver at x = distance, same lane.
pub fn build_scenario_a(cfg: &SimConfig, seed: u64) -> Result<Simulation, ScenarioError> {
    cfg.validate()?;
    let d = cfg.scenario.distance_m;
    let vehicles = vec![
        make_vehicle(cfg, 0, 0.0, 0.0, Vec3::X)?,
        make_vehicle(cfg, 1, d, 0.0, -Vec3::X)?,
    ];
    Simulation::new(cfg, seed, vehicles, &[(0, 1)])
}

/// Two groups: (0, 0)→(L, 0) and (D, y)→(D + L, y) with L the intra-group
/// distance, D the inter-group distance and y the lane offset.
pub fn build_scenario_b(cfg: &SimConfig, seed: u64) -> Result<Simulation, ScenarioError> {
    cfg.validate()?;
    let s = &cfg.scenario;
    let (l, d, y) = (s.intra_group_distance_m, s.inter_group_distance_m, s.lane_offset_m);
    let vehicles = vec![
        make_vehicle(cfg, 0, 0.0, 0.0, Vec3::X)?,
        make_vehicle(cfg, 1, l, 0.0, -Vec3::X)?,
        make_vehicle(cfg, 2, d, y, Vec3::X)?,
        make_vehicle(cfg, 3, d + l, y, -Vec3::X)?,
    ];
    Simulation::new(cfg, seed, vehicles, &[(0, 1), (2, 3)])
}

impl Simulation {
    fn new(cfg: &SimConfig, seed: u64, vehicles: Vec<Vehicle>, pairs: &[(usize, usize)]) -> Result<Self, ScenarioError> {
        let phy = &cfg.phy;
        let frame = phy.frame()?;
        let slot = frame.slot_duration();
        let table = phy.load_table()?;
        let link_ids: Vec<usize> = (0..pairs.len()).collect();
        let pattern = build_schedule(phy.schedule, &link_ids, frame.slots_per_subframe())
            .map_err(|e| invalid("phy.schedule", e.to_string()))?;
        let channel = ChannelModel::new(
            cfg.channel.clone(),
            cfg.scenario.propagation,
            phy.carrier_ghz,
            frame.bandwidth_hz,
        );
        let streams = Streams::new(seed);

        let window_start = secs("scenario.warmup_s", cfg.scenario.warmup_s)?;
        let window_end = window_start + secs("scenario.duration_s", cfg.scenario.duration_s)?;
        let stop = window_end + secs("scenario.drain_s", cfg.scenario.drain_s)?;
        let t_reordering = secs("rlc.t_reordering_ms", cfg.rlc.t_reordering_ms / 1e3)?;

        let realize = |tx: usize, rx: usize, tx_peer: usize, rx_peer: usize| -> Result<LinkState, ScenarioError> {
            let (vt, vr) = (&vehicles[tx], &vehicles[rx]);
            let others = vehicles
                .iter()
                .filter(|v| v.id != tx && v.id != rx)
                .map(|v| v.position);
            let condition = if segment_blocked(vt.position, vr.position, others, cfg.scenario.blocker_clearance_m) {
                cfg.scenario.blocked_condition
            } else {
                match cfg.scenario.condition {
                    ConditionSetting::Fixed(c) => c,
                    ConditionSetting::Probabilistic => {
                        let d = (vr.position - vt.position).norm();
                        let mut rng = streams.fork(&format!("condition.{tx}->{rx}"));
                        let mode = ConditionMode::Probabilistic {
                            d0_m: cfg.channel.los_d0_m,
                        };
                        channel_condition(mode, cfg.scenario.propagation, d, &mut rng)
                    }
                }
            };
            let tx_end = link_end(vt, &vehicles[tx_peer]);
            let rx_end = link_end(vr, &vehicles[rx_peer]);
            Ok(channel.realize_link(tx_end, rx_end, condition, &streams)?)
        };

        let mut links = Vec::with_capacity(pairs.len());
        for (i, &(tx, rx)) in pairs.iter().enumerate() {
            let serving = realize(tx, rx, rx, tx)?;
            let mut interference = Vec::with_capacity(pairs.len());
            for (j, &(otx, orx)) in pairs.iter().enumerate() {
                interference.push(if j == i { None } else { Some(realize(otx, rx, orx, tx)?) });
            }
            let mean_snr = serving.mean_rx_power_dbm(cfg.channel.tx_power_dbm) - channel.noise_dbm();
            links.push(LinkRuntime {
                serving,
                interference,
                traffic: TrafficGenerator::new(cfg.app, SimTime::ZERO, streams.fork(&format!("traffic.l{i}")))?,
                pdcp: PdcpEntity::new(),
                tx_buf: RlcTxBuffer::new(cfg.rlc.buffer_bytes, cfg.headers),
                rx: RlcRxState::new(t_reordering),
                errors: streams.fork(&format!("phy.error.l{i}")),
                last_sinr_db: mean_snr,
                max_mcs_used: None,
                packets: Vec::new(),
                timer_scheduled: None,
            });
        }

        let mut sched = Scheduler::new();
        sched.schedule_in(SimTime::ZERO, Event::Slot(0));
        Ok(Simulation {
            cfg: cfg.clone(),
            frame,
            slot,
            data_symbols: phy.data_symbols(),
            table,
            pattern,
            vehicles,
            links,
            sched,
            window_start,
            window_end,
            stop,
            noise_dbm: channel.noise_dbm(),
            counters: Counters {
                delay_min_s: f64::INFINITY,
                delay_max_s: f64::NEG_INFINITY,
                ..Counters::default()
            },
            record: false,
            deliveries: Vec::new(),
        })
    }

    /// Keep every delivery in the outcome (memory grows with traffic).
    pub fn record_deliveries(mut self, on: bool) -> Self {
        self.record = on;
        self
    }

    pub fn vehicles(&self) -> &[Vehicle] {
        &self.vehicles
    }

    pub fn links(&self) -> impl Iterator<Item = &LinkState> {
        self.links.iter().map(|l| &l.serving)
    }

    /// Path from link `from`'s transmitter to link `to`'s receiver.
    pub fn interference_path(&self, from: usize, to: usize) -> Option<&LinkState> {
        self.links.get(to)?.interference.get(from)?.as_ref()
    }

    pub fn schedule(&self) -> &SchedulePattern {
        &self.pattern
    }

    pub fn frame(&self) -> &FrameConfig {
        &self.frame
    }

    pub fn noise_dbm(&self) -> f64 {
        self.noise_dbm
    }

    pub fn run(mut self) -> RunOutcome {
        while let Some((now, ev)) = self.sched.pop_until(self.stop) {
            match ev {
                Event::Slot(k) => self.on_slot(k, now),
                Event::TbArrival { link, pdu } => {
                    let ids = self.links[link].rx.receive(pdu, now);
                    self.deliver(link, &ids, now);
                    self.arm_timer(link);
                }
                Event::ReorderTimer { link } => {
                    let ids = self.links[link].rx.poll_timer(now);
                    self.deliver(link, &ids, now);
                    self.arm_timer(link);
                }
            }
        }
        let metrics = self.finish();
        RunOutcome {
            metrics,
            deliveries: self.deliveries,
        }
    }

    fn in_window(&self, t: SimTime) -> bool {
        t >= self.window_start && t < self.window_end
    }

    fn generate(&mut self, now: SimTime) {
        let payload = self.cfg.app.packet_bytes();
        let sdu = self.cfg.headers.sdu_bytes(payload);
        let end = self.window_end;
        for link in &mut self.links {
            while link.traffic.peek() <= now && link.traffic.peek() < end {
                let created = link.traffic.next_packet();
                let id = link.packets.len() as u64;
                link.pdcp.submit();
                let status = if link.tx_buf.enqueue(id, sdu) {
                    Status::Queued
                } else {
                    Status::Dropped
                };
                link.packets.push(PacketRec {
                    created,
                    status,
                    completed_in_window: false,
                });
            }
        }
    }

    fn on_slot(&mut self, k: u64, now: SimTime) {
        self.generate(now);

        let mut active: Vec<(usize, u8, RlcPdu)> = Vec::new();
        for &l in self.pattern.permitted(k) {
            let link = &mut self.links[l];
            if link.tx_buf.is_empty() {
                continue;
            }
            let mcs = match self.cfg.phy.mcs {
                McsChoice::Fixed(i) => i,
                McsChoice::Adaptive => self.table.amc_select(link.last_sinr_db, self.cfg.phy.target_bler),
            };
            let entry = self.table.get(mcs).expect("MCS validated at build");
            let tbs = tbs_bits(entry, &self.frame, self.data_symbols);
            if let Some(pdu) = rlc_tx_fill(tbs, &mut link.tx_buf) {
                link.max_mcs_used = link.max_mcs_used.max(Some(mcs));
                active.push((l, mcs, pdu));
            }
        }

        let t_mid = now + SimTime::from_nanos(self.slot.as_nanos() / 2);
        let p_tx = self.cfg.channel.tx_power_dbm;
        let measuring = self.in_window(now);
        let transmitting: Vec<usize> = active.iter().map(|a| a.0).collect();
        for (l, mcs, pdu) in active {
            let link = &mut self.links[l];
            let signal = link.serving.rx_power_dbm(p_tx, t_mid);
            let mut interference_mw = 0.0;
            let mut interferers = 0;
            for &j in transmitting.iter().filter(|&&j| j != l) {
                if let Some(path) = link.interference[j].as_mut() {
                    interference_mw += dbm_to_mw(path.rx_power_dbm(p_tx, t_mid));
                    interferers += 1;
                }
            }
            let sinr = sinr_db(signal, std::iter::once(mw_to_dbm(interference_mw)), self.noise_dbm);
            let bler = match self.cfg.phy.bler_override {
                Some(b) => b,
                None => self.table.bler(mcs, sinr).expect("MCS validated at build"),
            };
            let outcome = transmit_slot(bler, &mut link.errors);
            link.last_sinr_db = sinr;

            if measuring {
                let c = &mut self.counters;
                c.sinr_sum_db += sinr;
                c.tbs_sent += 1;
                if outcome == TxOutcome::Lost {
                    c.tbs_lost += 1;
                }
                if interferers > 0 {
                    c.interfered_tbs += 1;
                    c.max_interference_mw = Some(c.max_interference_mw.map_or(interference_mw, |m| m.max(interference_mw)));
                }
            }
            if outcome == TxOutcome::Delivered {
                if measuring {
                    for seg in pdu.segments.iter().filter(|s| s.is_last) {
                        link.packets[seg.packet_id as usize].completed_in_window = true;
                    }
                }
                self.sched.schedule_in(self.slot, Event::TbArrival { link: l, pdu });
            }
        }

        if now + self.slot < self.stop {
            self.sched.schedule_in(self.slot, Event::Slot(k + 1));
        }
    }

    fn deliver(&mut self, l: usize, ids: &[u64], now: SimTime) {
        let payload_bits = u64::from(self.cfg.app.packet_bytes()) * 8;
        for &id in ids {
            let rec = &mut self.links[l].packets[id as usize];
            debug_assert_eq!(rec.status, Status::Queued);
            rec.status = Status::Delivered;
            let created = rec.created;
            // attributed to the slot that finished it, so bits never
            // outrun the slots that carried them
            if rec.completed_in_window {
                self.counters.delivered_bits_in_window += payload_bits;
            }
            if self.in_window(created) {
                let c = &mut self.counters;
                let delay = (now - created).as_secs_f64();
                c.delivered += 1;
                c.delay_sum_s += delay;
                c.delay_min_s = c.delay_min_s.min(delay);
                c.delay_max_s = c.delay_max_s.max(delay);
            }
            if self.record {
                self.deliveries.push(Delivery {
                    link: l,
                    packet_id: id,
                    created_at: created,
                    delivered_at: now,
                });
            }
        }
    }

    fn arm_timer(&mut self, l: usize) {
        let link = &mut self.links[l];
        if let Some(d) = link.rx.timer_deadline() {
            if link.timer_scheduled != Some(d) {
                link.timer_scheduled = Some(d);
                self.sched
                    .schedule_at(d, Event::ReorderTimer { link: l })
                    .expect("timer deadline is never in the past");
            }
        }
    }

    fn finish(&mut self) -> RunMetrics {
        let (ws, we) = (self.window_start, self.window_end);
        let in_window = |t: SimTime| t >= ws && t < we;
        let mut generated = 0;
        let mut dropped = 0;
        let mut in_flight = 0;
        let mut ceiling_bps = 0.0;
        for (l, link) in self.links.iter().enumerate() {
            for p in link.packets.iter().filter(|p| in_window(p.created)) {
                generated += 1;
                if p.status == Status::Dropped {
                    dropped += 1;
                }
            }
            in_flight += link
                .tx_buf
                .iter()
                .filter(|s| in_window(link.packets[s.packet_id as usize].created))
                .count() as u64;
            if let Some(mcs) = link.max_mcs_used {
                let tbs = tbs_bits(self.table.get(mcs).expect("used MCS exists"), &self.frame, self.data_symbols);
                let owned = self.pattern.slots_of(l).len() as f64 * 1000.0;
                ceiling_bps += tbs as f64 * owned;
            }
        }
        let c = &self.counters;
        let duration = (we - ws).as_secs_f64();
        let payload_bits = f64::from(self.cfg.app.packet_bytes()) * 8.0;
        let nan_if_none = |v: f64| if c.delivered == 0 { f64::NAN } else { v };
        RunMetrics {
            prr: if generated == 0 { f64::NAN } else { c.delivered as f64 / generated as f64 },
            mean_delay_s: nan_if_none(c.delay_sum_s / c.delivered as f64),
            min_delay_s: nan_if_none(c.delay_min_s),
            max_delay_s: nan_if_none(c.delay_max_s),
            mean_sinr_db: if c.tbs_sent == 0 { f64::NAN } else { c.sinr_sum_db / c.tbs_sent as f64 },
            throughput_bps: c.delivered_bits_in_window as f64 / duration,
            offered_bps: generated as f64 * payload_bits / duration,
            generated,
            delivered: c.delivered,
            phy_lost: generated - c.delivered - dropped - in_flight,
            buffer_dropped: dropped,
            in_flight,
            tbs_sent: c.tbs_sent,
            tbs_lost: c.tbs_lost,
            interfered_tbs: c.interfered_tbs,
            max_interference_dbm: c.max_interference_mw.map(mw_to_dbm),
            phy_ceiling_bps: ceiling_bps,
            events: self.sched.fired(),
        }
    }
}

impl std::fmt::Debug for Simulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Simulation")
            .field("vehicles", &self.vehicles.len())
            .field("links", &self.links.len())
            .field("slot", &self.slot)
            .finish()
    }
}
