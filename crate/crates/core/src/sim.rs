//! Discrete-time dual-connectivity engine.
//!
//! Each tick, in order: move the UE, measure every gNB, then either advance
//! an in-flight SN handover or consult the strategy, and finally record the
//! tick. The MN (the single macro gNB) stays attached for the whole run and
//! carries the UE alone whenever the SN path is down.

use thiserror::Error;

use crate::config::ScenarioConfig;
use crate::geometry::{blockage_count, Point3, Trajectory};
use crate::hdma::{Decision, HandoverStrategy, HdmaKind};
use crate::nci::{GnbType, Ncgi};
use crate::radio::{
    rsrp_dbm, sinr_at, throughput_bps, CellMeasurement, GnbConfig, MeasurementFrame, ShadowState,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    Config(String),
    #[error("invalid state transition: {0}")]
    State(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct UeState {
    pub position: Point3,
    pub speed_kmh: f64,
    pub mn: Ncgi,
    /// SN currently carrying traffic (or, during a handover, the SN being left).
    pub sn: Option<Ncgi>,
    /// Target of the in-flight SN handover.
    pub pending_sn: Option<Ncgi>,
    pub handover_remaining_ticks: u64,
}

impl UeState {
    pub fn new(position: Point3, speed_kmh: f64, mn: Ncgi, sn: Option<Ncgi>) -> Self {
        Self {
            position,
            speed_kmh,
            mn,
            sn,
            pending_sn: None,
            handover_remaining_ticks: 0,
        }
    }

    /// The cell the A3 condition is measured against.
    pub fn serving_reference(&self) -> Ncgi {
        self.sn.unwrap_or(self.mn)
    }

    pub fn handover_in_progress(&self) -> bool {
        self.handover_remaining_ticks > 0
    }

    pub fn sn_handover_remaining_ms(&self, tick_ms: f64) -> f64 {
        self.handover_remaining_ticks as f64 * tick_ms
    }
}

/// Starts an SN handover to `target`. The SN path is dark for
/// `interruption_ticks` ticks; with zero ticks the switch is immediate.
pub fn execute_sn_handover(
    ue: &mut UeState,
    target: Ncgi,
    interruption_ticks: u64,
) -> Result<(), SimError> {
    if ue.handover_in_progress() {
        return Err(SimError::State("SN handover already in progress".into()));
    }
    if ue.sn == Some(target) {
        return Err(SimError::State(format!("{target} is already the SN")));
    }
    if target == ue.mn {
        return Err(SimError::State("the MN cannot be the SN".into()));
    }
    if interruption_ticks == 0 {
        ue.sn = Some(target);
    } else {
        ue.pending_sn = Some(target);
        ue.handover_remaining_ticks = interruption_ticks;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HandoverKind {
    SnChange,
    SnRelease,
    SnAttach,
}

impl HandoverKind {
    pub const fn as_str(self) -> &'static str {
        match self {
            HandoverKind::SnChange => "sn_change",
            HandoverKind::SnRelease => "sn_release",
            HandoverKind::SnAttach => "sn_attach",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandoverEvent {
    pub time_s: f64,
    /// Tick on which the decision fired.
    pub tick: u64,
    pub from: Option<Ncgi>,
    pub to: Option<Ncgi>,
    pub kind: HandoverKind,
    /// Tier of the node that carries the UE afterwards (macro for a release).
    pub target_tier: GnbType,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TickRecord {
    pub time_s: f64,
    pub sn: Option<Ncgi>,
    /// SINR of the path carrying the UE this tick.
    pub sinr_db: f64,
    pub throughput_bps: f64,
    pub mn_throughput_bps: f64,
    pub sn_throughput_bps: f64,
    pub interrupted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub strategy: HdmaKind,
    pub seed: u64,
    pub tick_ms: f64,
    pub gnbs: Vec<Ncgi>,
    pub events: Vec<HandoverEvent>,
    pub ticks: Vec<TickRecord>,
    /// Row-major `ticks.len() x gnbs.len()` RSRP matrix.
    pub rsrp_dbm: Vec<f64>,
}

impl SimOutput {
    pub fn rsrp_row(&self, tick: usize) -> &[f64] {
        let n = self.gnbs.len();
        &self.rsrp_dbm[tick * n..(tick + 1) * n]
    }

    /// Ticks on which a decision fired, in order.
    pub fn decision_ticks(&self) -> Vec<u64> {
        self.events.iter().map(|e| e.tick).collect()
    }
}

/// Outcome of one tick.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub frame: MeasurementFrame,
    pub record: TickRecord,
    pub event: Option<HandoverEvent>,
}

pub struct Simulation<'a> {
    cfg: &'a ScenarioConfig,
    trajectory: Trajectory,
    strategy: Box<dyn HandoverStrategy + Send>,
    shadow: ShadowState,
    ue: UeState,
    mn_idx: usize,
    tick: u64,
    total_ticks: u64,
    interruption_ticks: u64,
    rsrp_buf: Vec<f64>,
}

impl<'a> Simulation<'a> {
    pub fn new(cfg: &'a ScenarioConfig, kind: HdmaKind, seed: u64) -> Result<Self, SimError> {
        cfg.validate().map_err(|e| SimError::Config(e.to_string()))?;
        let trajectory = cfg.trajectory().map_err(|e| SimError::Config(e.to_string()))?;
        let mn_idx = cfg
            .gnbs
            .iter()
            .position(|g| g.tier == GnbType::Macro)
            .expect("validated: one macro");
        let sigmas = cfg.gnbs.iter().map(|g| g.shadow_sigma_db).collect();
        let shadow = ShadowState::new(sigmas, cfg.shadow_decorrelation_m, seed)
            .map_err(|e| SimError::Config(e.to_string()))?;
        let ue = UeState::new(
            trajectory.start(),
            trajectory.speed_kmh(),
            cfg.gnbs[mn_idx].ncgi,
            None,
        );
        Ok(Self {
            cfg,
            trajectory,
            strategy: kind.strategy(cfg.hdma),
            shadow,
            ue,
            mn_idx,
            tick: 0,
            total_ticks: cfg.total_ticks(),
            interruption_ticks: cfg.interruption_ticks(),
            rsrp_buf: vec![0.0; cfg.gnbs.len()],
        })
    }

    pub fn ue(&self) -> &UeState {
        &self.ue
    }

    pub fn total_ticks(&self) -> u64 {
        self.total_ticks
    }

    fn measure(&mut self, time_s: f64) -> MeasurementFrame {
        let pos = self.ue.position;
        let gnbs: &[GnbConfig] = &self.cfg.gnbs;
        let shadows = self.shadow.advance(pos);
        let mut blocked = Vec::with_capacity(gnbs.len());
        for (i, g) in gnbs.iter().enumerate() {
            let b = blockage_count(g.position, pos, &self.cfg.obstacles);
            self.rsrp_buf[i] = rsrp_dbm(g, pos, shadows[i], b);
            blocked.push(b);
        }
        let cells = gnbs
            .iter()
            .enumerate()
            .map(|(i, g)| CellMeasurement {
                ncgi: g.ncgi,
                rsrp_dbm: self.rsrp_buf[i],
                sinr_db: sinr_at(i, gnbs, &self.rsrp_buf),
                blocked: blocked[i],
            })
            .collect();
        MeasurementFrame { time_s, cells }
    }

    fn attach_initial_sn(&mut self, frame: &MeasurementFrame) {
        let speed = self.ue.speed_kmh;
        let mn = self.ue.mn;
        self.ue.sn = frame
            .cells
            .iter()
            .filter(|c| c.ncgi != mn)
            .filter(|c| self.strategy.initial_sn_eligible(speed, c.ncgi.gnb_type()))
            .max_by(|a, b| a.rsrp_dbm.total_cmp(&b.rsrp_dbm).then(b.ncgi.cmp(&a.ncgi)))
            .map(|c| c.ncgi);
    }

    /// Advances one tick; `None` once the run is complete.
    pub fn step(&mut self) -> Option<StepResult> {
        if self.tick >= self.total_ticks {
            return None;
        }
        let k = self.tick;
        let time_s = k as f64 * self.cfg.tick_ms / 1000.0;
        self.ue.position = self.trajectory.position_at(time_s);
        let frame = self.measure(time_s);
        if k == 0 {
            self.attach_initial_sn(&frame);
        }

        let mut event = None;
        if self.ue.handover_in_progress() {
            self.ue.handover_remaining_ticks -= 1;
            if self.ue.handover_remaining_ticks == 0 {
                self.ue.sn = self.ue.pending_sn.take();
            }
        } else {
            match self.strategy.decide(&self.ue, &frame, self.cfg.tick_ms) {
                Decision::NoAction => {}
                Decision::HandoverTo(target) => {
                    let from = self.ue.sn;
                    // the strategy never proposes the current SN or the MN
                    execute_sn_handover(&mut self.ue, target, self.interruption_ticks)
                        .expect("idle UE accepts a fresh target");
                    event = Some(HandoverEvent {
                        time_s,
                        tick: k,
                        from,
                        to: Some(target),
                        kind: if from.is_some() {
                            HandoverKind::SnChange
                        } else {
                            HandoverKind::SnAttach
                        },
                        target_tier: target.gnb_type(),
                    });
                }
                Decision::ReleaseSn => {
                    event = Some(HandoverEvent {
                        time_s,
                        tick: k,
                        from: self.ue.sn.take(),
                        to: None,
                        kind: HandoverKind::SnRelease,
                        target_tier: GnbType::Macro,
                    });
                }
            }
        }
        if event.is_some() {
            self.strategy.reset();
        }

        let record = self.record(&frame, time_s);
        self.tick += 1;
        Some(StepResult {
            frame,
            record,
            event,
        })
    }

    fn record(&self, frame: &MeasurementFrame, time_s: f64) -> TickRecord {
        let mn_cfg = &self.cfg.gnbs[self.mn_idx];
        let mn_sinr = frame.cells[self.mn_idx].sinr_db;
        let mn_thr = throughput_bps(mn_sinr, mn_cfg.bandwidth_hz, mn_cfg.resource_share);
        let interrupted = self.ue.handover_in_progress();
        let active_sn = if interrupted { None } else { self.ue.sn };
        let (sinr_db, sn_thr) = match active_sn {
            Some(sn) => {
                let i = self
                    .cfg
                    .gnbs
                    .iter()
                    .position(|g| g.ncgi == sn)
                    .expect("SN is a configured gNB");
                let g = &self.cfg.gnbs[i];
                let s = frame.cells[i].sinr_db;
                (s, throughput_bps(s, g.bandwidth_hz, g.resource_share))
            }
            None => (mn_sinr, 0.0),
        };
        TickRecord {
            time_s,
            sn: self.ue.sn,
            sinr_db,
            throughput_bps: mn_thr + sn_thr,
            mn_throughput_bps: mn_thr,
            sn_throughput_bps: sn_thr,
            interrupted,
        }
    }
}

/// Runs `cfg` to completion under `kind`. The channel realization depends
/// only on `seed`, so all strategies see the same shadowing for a seed.
pub fn run(cfg: &ScenarioConfig, kind: HdmaKind, seed: u64) -> Result<SimOutput, SimError> {
    let mut sim = Simulation::new(cfg, kind, seed)?;
    let n = sim.total_ticks() as usize;
    let mut ticks = Vec::with_capacity(n);
    let mut rsrp = Vec::with_capacity(n * cfg.gnbs.len());
    let mut events = Vec::new();
    while let Some(step) = sim.step() {
        rsrp.extend(step.frame.cells.iter().map(|c| c.rsrp_dbm));
        ticks.push(step.record);
        events.extend(step.event);
    }
    Ok(SimOutput {
        strategy: kind,
        seed,
        tick_ms: cfg.tick_ms,
        gnbs: cfg.gnbs.iter().map(|g| g.ncgi).collect(),
        events,
        ticks,
        rsrp_dbm: rsrp,
    })
}
