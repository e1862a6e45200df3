//! Secondary-node handover decision strategies.
//!
//! All three strategies share the same A3 trigger: the best admissible
//! candidate must beat the serving reference by the handover margin on every
//! tick of a time-to-trigger window. They differ only in which gNBs are
//! admissible and in the speed gate in front of the trigger.
//!
//! The serving reference is the attached SN, or the MN when the UE runs
//! MN-only. A fired trigger whose best candidate is the MN maps to
//! [`Decision::ReleaseSn`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::nci::{GnbType, Ncgi};
use crate::radio::MeasurementFrame;
use crate::sim::UeState;

const TIME_EPS_MS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HdmaConfig {
    #[serde(default = "default_speed_threshold")]
    pub speed_threshold_kmh: f64,
    #[serde(default = "default_hom")]
    pub hom_db: f64,
    #[serde(default = "default_ttt")]
    pub ttt_ms: f64,
}

fn default_speed_threshold() -> f64 {
    30.0
}

fn default_hom() -> f64 {
    3.0
}

fn default_ttt() -> f64 {
    200.0
}

impl Default for HdmaConfig {
    fn default() -> Self {
        Self {
            speed_threshold_kmh: default_speed_threshold(),
            hom_db: default_hom(),
            ttt_ms: default_ttt(),
        }
    }
}

impl HdmaConfig {
    pub fn check(&self) -> Result<(), String> {
        if !(self.speed_threshold_kmh >= 0.0 && self.speed_threshold_kmh.is_finite()) {
            return Err("speed_threshold_kmh must be finite and >= 0".into());
        }
        if !self.hom_db.is_finite() {
            return Err("hom_db must be finite".into());
        }
        if !(self.ttt_ms >= 0.0 && self.ttt_ms.is_finite()) {
            return Err("ttt_ms must be finite and >= 0".into());
        }
        Ok(())
    }
}

/// Time-to-trigger accounting for one target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TttTimer {
    pub target: Ncgi,
    pub elapsed_ms: f64,
    /// Entering condition held on the last update.
    pub armed: bool,
}

impl TttTimer {
    pub fn new(target: Ncgi) -> Self {
        Self {
            target,
            elapsed_ms: 0.0,
            armed: false,
        }
    }
}

/// Advances `timer` by one tick. Fires once the condition has held for at
/// least `ttt_ms`; any tick without the condition resets it.
pub fn ttt_update(timer: TttTimer, condition_holds: bool, dt_ms: f64, ttt_ms: f64) -> (TttTimer, bool) {
    debug_assert!(dt_ms > 0.0);
    if condition_holds {
        let elapsed = (timer.elapsed_ms + dt_ms).min(ttt_ms);
        let fired = elapsed + TIME_EPS_MS >= ttt_ms;
        (
            TttTimer {
                target: timer.target,
                elapsed_ms: elapsed,
                armed: true,
            },
            fired,
        )
    } else {
        (TttTimer::new(timer.target), false)
    }
}

/// A3 entering condition, strict.
#[inline]
pub fn a3_condition(target_rsrp_dbm: f64, serving_rsrp_dbm: f64, hom_db: f64) -> bool {
    target_rsrp_dbm > serving_rsrp_dbm + hom_db
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    NoAction,
    HandoverTo(Ncgi),
    /// Drop the SN and run MN-only.
    ReleaseSn,
}

/// Candidates ordered best first: RSRP descending, ties to the lowest raw NCI.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CandidateSet(Vec<(Ncgi, f64)>);

impl CandidateSet {
    /// Collects every gNB in `frame` other than `serving` whose identity bits
    /// pass `admit`. `Reserved` identities are never admitted.
    pub fn collect(frame: &MeasurementFrame, serving: Ncgi, admit: impl Fn(GnbType) -> bool) -> Self {
        let mut v: Vec<(Ncgi, f64)> = frame
            .cells
            .iter()
            .filter(|c| c.ncgi != serving)
            .filter(|c| {
                let t = c.ncgi.gnb_type();
                t != GnbType::Reserved && admit(t)
            })
            .map(|c| (c.ncgi, c.rsrp_dbm))
            .collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Self(v)
    }

    pub fn best(&self) -> Option<(Ncgi, f64)> {
        self.0.first().copied()
    }

    pub fn as_slice(&self) -> &[(Ncgi, f64)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Runs the A3 + TTT trigger for the best candidate of `candidates`.
fn a3_trigger(
    ue: &UeState,
    frame: &MeasurementFrame,
    candidates: &CandidateSet,
    cfg: &HdmaConfig,
    dt_ms: f64,
    timer: &mut Option<TttTimer>,
) -> Decision {
    let serving = ue.serving_reference();
    let (Some((best, best_rsrp)), Some(serving_rsrp)) = (candidates.best(), frame.rsrp_of(serving))
    else {
        *timer = None;
        return Decision::NoAction;
    };
    let current = match *timer {
        Some(t) if t.target == best => t,
        _ => TttTimer::new(best),
    };
    let holds = a3_condition(best_rsrp, serving_rsrp, cfg.hom_db);
    let (next, fired) = ttt_update(current, holds, dt_ms, cfg.ttt_ms);
    if !fired {
        *timer = Some(next);
        return Decision::NoAction;
    }
    *timer = None;
    if best == ue.mn {
        Decision::ReleaseSn
    } else {
        Decision::HandoverTo(best)
    }
}

/// A3RSRP baseline: every tier is a candidate.
pub fn a3rsrp_decide(
    ue: &UeState,
    frame: &MeasurementFrame,
    cfg: &HdmaConfig,
    dt_ms: f64,
    timer: &mut Option<TttTimer>,
) -> Decision {
    let candidates = CandidateSet::collect(frame, ue.serving_reference(), |_| true);
    a3_trigger(ue, frame, &candidates, cfg, dt_ms, timer)
}

/// Speed baseline: above the threshold the UE is pinned to the MN.
pub fn speed_based_decide(
    ue: &UeState,
    frame: &MeasurementFrame,
    cfg: &HdmaConfig,
    dt_ms: f64,
    timer: &mut Option<TttTimer>,
) -> Decision {
    if ue.speed_kmh > cfg.speed_threshold_kmh {
        *timer = None;
        return if ue.sn.is_some() {
            Decision::ReleaseSn
        } else {
            Decision::NoAction
        };
    }
    a3rsrp_decide(ue, frame, cfg, dt_ms, timer)
}

/// Identity-aware strategy: at or above the speed threshold only gNBs whose
/// type bits read macro or sub-6 small cell are candidates.
pub fn nci_based_decide(
    ue: &UeState,
    frame: &MeasurementFrame,
    cfg: &HdmaConfig,
    dt_ms: f64,
    timer: &mut Option<TttTimer>,
) -> Decision {
    if ue.speed_kmh < cfg.speed_threshold_kmh {
        return a3rsrp_decide(ue, frame, cfg, dt_ms, timer);
    }
    let candidates = CandidateSet::collect(frame, ue.serving_reference(), |t| {
        matches!(t, GnbType::Macro | GnbType::SmallSub6)
    });
    a3_trigger(ue, frame, &candidates, cfg, dt_ms, timer)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HdmaKind {
    Nci,
    A3rsrp,
    Speed,
}

impl HdmaKind {
    pub const ALL: [HdmaKind; 3] = [HdmaKind::Nci, HdmaKind::A3rsrp, HdmaKind::Speed];

    pub const fn name(self) -> &'static str {
        match self {
            HdmaKind::Nci => "nci",
            HdmaKind::A3rsrp => "a3rsrp",
            HdmaKind::Speed => "speed",
        }
    }

    pub fn strategy(self, cfg: HdmaConfig) -> Box<dyn HandoverStrategy + Send> {
        match self {
            HdmaKind::Nci => Box::new(NciBased::new(cfg)),
            HdmaKind::A3rsrp => Box::new(A3Rsrp::new(cfg)),
            HdmaKind::Speed => Box::new(SpeedBased::new(cfg)),
        }
    }
}

impl fmt::Display for HdmaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownHdma(pub String);

impl fmt::Display for UnknownHdma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown HDMA `{}` (expected nci, a3rsrp or speed)", self.0)
    }
}

impl std::error::Error for UnknownHdma {}

impl FromStr for HdmaKind {
    type Err = UnknownHdma;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nci" => Ok(HdmaKind::Nci),
            "a3rsrp" => Ok(HdmaKind::A3rsrp),
            "speed" => Ok(HdmaKind::Speed),
            other => Err(UnknownHdma(other.to_owned())),
        }
    }
}

/// A handover decision strategy owned by one simulation run.
pub trait HandoverStrategy {
    fn kind(&self) -> HdmaKind;

    fn decide(&mut self, ue: &UeState, frame: &MeasurementFrame, dt_ms: f64) -> Decision;

    /// Whether a gNB of `tier` may be attached as the initial SN.
    fn initial_sn_eligible(&self, speed_kmh: f64, tier: GnbType) -> bool;

    /// Drops any running TTT timer.
    fn reset(&mut self);
}

fn sn_tier(tier: GnbType) -> bool {
    matches!(tier, GnbType::SmallSub6 | GnbType::MmWave)
}

#[derive(Debug, Clone)]
pub struct A3Rsrp {
    cfg: HdmaConfig,
    timer: Option<TttTimer>,
}

impl A3Rsrp {
    pub fn new(cfg: HdmaConfig) -> Self {
        Self { cfg, timer: None }
    }
}

impl HandoverStrategy for A3Rsrp {
    fn kind(&self) -> HdmaKind {
        HdmaKind::A3rsrp
    }

    fn decide(&mut self, ue: &UeState, frame: &MeasurementFrame, dt_ms: f64) -> Decision {
        a3rsrp_decide(ue, frame, &self.cfg, dt_ms, &mut self.timer)
    }

    fn initial_sn_eligible(&self, _speed_kmh: f64, tier: GnbType) -> bool {
        sn_tier(tier)
    }

    fn reset(&mut self) {
        self.timer = None;
    }
}

#[derive(Debug, Clone)]
pub struct SpeedBased {
    cfg: HdmaConfig,
    timer: Option<TttTimer>,
}

impl SpeedBased {
    pub fn new(cfg: HdmaConfig) -> Self {
        Self { cfg, timer: None }
    }
}

impl HandoverStrategy for SpeedBased {
    fn kind(&self) -> HdmaKind {
        HdmaKind::Speed
    }

    fn decide(&mut self, ue: &UeState, frame: &MeasurementFrame, dt_ms: f64) -> Decision {
        speed_based_decide(ue, frame, &self.cfg, dt_ms, &mut self.timer)
    }

    fn initial_sn_eligible(&self, speed_kmh: f64, tier: GnbType) -> bool {
        speed_kmh <= self.cfg.speed_threshold_kmh && sn_tier(tier)
    }

    fn reset(&mut self) {
        self.timer = None;
    }
}

#[derive(Debug, Clone)]
pub struct NciBased {
    cfg: HdmaConfig,
    timer: Option<TttTimer>,
}

impl NciBased {
    pub fn new(cfg: HdmaConfig) -> Self {
        Self { cfg, timer: None }
    }
}

impl HandoverStrategy for NciBased {
    fn kind(&self) -> HdmaKind {
        HdmaKind::Nci
    }

    fn decide(&mut self, ue: &UeState, frame: &MeasurementFrame, dt_ms: f64) -> Decision {
        nci_based_decide(ue, frame, &self.cfg, dt_ms, &mut self.timer)
    }

    fn initial_sn_eligible(&self, speed_kmh: f64, tier: GnbType) -> bool {
        if speed_kmh >= self.cfg.speed_threshold_kmh {
            tier == GnbType::SmallSub6
        } else {
            sn_tier(tier)
        }
    }

    fn reset(&mut self) {
        self.timer = None;
    }
}
