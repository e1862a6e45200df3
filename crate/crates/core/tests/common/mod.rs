//! Test-only helpers: random scenarios and a brute-force replay of the
//! handover trigger that shares no code with the decision module.

#![allow(dead_code)]

use dcsim_core::config::{ScenarioConfig, UeConfig};
use dcsim_core::geometry::{Obstacle, Point3};
use dcsim_core::hdma::{HdmaConfig, HdmaKind};
use dcsim_core::nci::{GnbType, Ncgi};
use dcsim_core::radio::GnbConfig;
use dcsim_core::sim::SimOutput;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random street-like scenario: one macro, 1-3 small cells, 2-6 mmWave
/// cells and a few boxes along a UE track.
pub fn random_scenario(seed: u64) -> ScenarioConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gnbs = Vec::new();
    let plmn = rng.random_range(0..1 << 24);
    let mut push = |tier: GnbType, id: u32, pos: Point3| {
        let ncgi = Ncgi::typed(plmn, tier, id, 1).unwrap();
        gnbs.push(GnbConfig::with_defaults(ncgi, tier, pos).unwrap());
    };
    push(
        GnbType::Macro,
        rng.random_range(0..1 << 20),
        Point3::new(rng.random_range(-100.0..0.0), rng.random_range(0.0..400.0), 25.0),
    );
    for i in 0..rng.random_range(1..=3) {
        let pos = Point3::new(
            100.0 + rng.random_range(-30.0..30.0),
            rng.random_range(50.0..450.0),
            10.0,
        );
        push(GnbType::SmallSub6, i, pos);
    }
    for i in 0..rng.random_range(2..=6) {
        let pos = Point3::new(
            100.0 + rng.random_range(-20.0..20.0),
            rng.random_range(50.0..450.0),
            10.0,
        );
        push(GnbType::MmWave, 100 + i, pos);
    }
    let obstacles = (0..rng.random_range(0..=5))
        .map(|_| {
            let x = if rng.random_bool(0.5) {
                rng.random_range(20.0..85.0)
            } else {
                rng.random_range(105.0..170.0)
            };
            let y = rng.random_range(0.0..450.0);
            Obstacle::new(
                Point3::new(x, y, 0.0),
                Point3::new(x + rng.random_range(3.0..30.0), y + rng.random_range(10.0..120.0), 20.0),
            )
            .unwrap()
        })
        .collect();
    let speeds = [10.0, 30.0, 45.0, 60.0, 90.0];
    ScenarioConfig {
        duration_s: 15.0,
        tick_ms: 1.0,
        seed,
        ue: UeConfig {
            start: Point3::new(100.0, 80.0, 1.5),
            direction: Point3::new(0.0, 1.0, 0.0),
            speed_kmh: speeds[rng.random_range(0..speeds.len())],
        },
        hdma: HdmaConfig {
            speed_threshold_kmh: 30.0,
            hom_db: [0.0, 1.0, 3.0, 5.0][rng.random_range(0..4)],
            ttt_ms: [0.0, 40.0, 100.0, 200.0][rng.random_range(0..4)],
        },
        sn_interruption_ms: [0.0, 20.0, 50.0][rng.random_range(0..3)],
        shadow_decorrelation_m: rng.random_range(5.0..40.0),
        gnbs,
        obstacles,
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    AllTiers,
    MacroAndSmall,
    MnOnly,
}

/// Replays recorded RSRP rows and returns the ticks on which a handover or
/// SN release must fire. Every tick re-scans its whole time-to-trigger window.
pub fn brute_force_decision_ticks(out: &SimOutput, cfg: &ScenarioConfig, kind: HdmaKind) -> Vec<u64> {
    let n_ticks = out.ticks.len();
    let ids: &[Ncgi] = &out.gnbs;
    let mn = ids.iter().position(|n| n.gnb_type() == GnbType::Macro).unwrap();
    let speed = cfg.ue.speed_kmh;
    let thr = cfg.hdma.speed_threshold_kmh;
    let mode = match kind {
        HdmaKind::A3rsrp => Mode::AllTiers,
        HdmaKind::Nci if speed >= thr => Mode::MacroAndSmall,
        HdmaKind::Nci => Mode::AllTiers,
        HdmaKind::Speed if speed > thr => Mode::MnOnly,
        HdmaKind::Speed => Mode::AllTiers,
    };
    let window = ((cfg.hdma.ttt_ms / cfg.tick_ms) - 1e-9).ceil().max(1.0) as usize;
    let interruption = (cfg.sn_interruption_ms / cfg.tick_ms).round() as usize;
    let rsrp = |j: usize, i: usize| out.rsrp_dbm[j * ids.len() + i];

    let admissible = |i: usize, serving: usize| {
        let t = ids[i].gnb_type();
        i != serving
            && match mode {
                Mode::AllTiers => matches!(t, GnbType::Macro | GnbType::SmallSub6 | GnbType::MmWave),
                Mode::MacroAndSmall => matches!(t, GnbType::Macro | GnbType::SmallSub6),
                Mode::MnOnly => false,
            }
    };
    let best_at = |j: usize, serving: usize| -> Option<usize> {
        let mut best: Option<usize> = None;
        for i in 0..ids.len() {
            if !admissible(i, serving) {
                continue;
            }
            best = match best {
                None => Some(i),
                Some(b) => {
                    let (ri, rb) = (rsrp(j, i), rsrp(j, b));
                    if ri > rb || (ri == rb && ids[i] < ids[b]) {
                        Some(i)
                    } else {
                        Some(b)
                    }
                }
            };
        }
        best
    };

    let mut fires = Vec::new();
    let mut sn: Option<usize> = None;
    let mut pending: Option<usize> = None;
    let mut busy = 0usize;
    let mut since = 0usize;
    for k in 0..n_ticks {
        if k == 0 {
            sn = (0..ids.len())
                .filter(|&i| i != mn)
                .filter(|&i| match mode {
                    Mode::AllTiers => matches!(ids[i].gnb_type(), GnbType::SmallSub6 | GnbType::MmWave),
                    Mode::MacroAndSmall => ids[i].gnb_type() == GnbType::SmallSub6,
                    Mode::MnOnly => false,
                })
                .fold(None, |acc: Option<usize>, i| match acc {
                    Some(b) if rsrp(0, b) > rsrp(0, i) || (rsrp(0, b) == rsrp(0, i) && ids[b] < ids[i]) => Some(b),
                    _ => Some(i),
                });
        }
        if busy > 0 {
            busy -= 1;
            if busy == 0 {
                sn = pending.take();
            }
            since = k + 1;
            continue;
        }
        if mode == Mode::MnOnly {
            if sn.take().is_some() {
                fires.push(k as u64);
                since = k + 1;
            }
            continue;
        }
        let serving = sn.unwrap_or(mn);
        if k + 1 < since + window {
            continue;
        }
        let Some(b) = best_at(k, serving) else { continue };
        let held = (k + 1 - window..=k)
            .all(|j| best_at(j, serving) == Some(b) && rsrp(j, b) > rsrp(j, serving) + cfg.hdma.hom_db);
        if !held {
            continue;
        }
        fires.push(k as u64);
        since = k + 1;
        if b == mn {
            sn = None;
        } else if interruption == 0 {
            sn = Some(b);
        } else {
            busy = interruption;
            pending = Some(b);
        }
    }
    fires
}
