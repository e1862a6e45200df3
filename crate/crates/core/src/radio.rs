//! Link model: log-distance path loss anchored at 1 m free-space loss,
//! spatially correlated log-normal shadowing, wideband RSRP, co-channel SINR
//! and a capped Shannon throughput mapping.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::geometry::{distance_3d, Point3};
use crate::nci::{GnbType, Ncgi};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;
pub const NOISE_FIGURE_DB: f64 = 9.0;
/// Spectral efficiency ceiling in bit/s/Hz.
pub const MAX_SPECTRAL_EFFICIENCY: f64 = 7.4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RadioError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("serving gNB {0} is not in the gNB list")]
    UnknownServing(Ncgi),
    #[error("{expected} rx power entries required, got {got}")]
    PowerCount { expected: usize, got: usize },
}

/// One base station and its link parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GnbConfig {
    pub ncgi: Ncgi,
    pub tier: GnbType,
    pub position: Point3,
    pub carrier_hz: f64,
    pub tx_power_dbm: f64,
    pub bandwidth_hz: f64,
    pub resource_share: f64,
    pub pl_exponent_los: f64,
    pub pl_exponent_nlos: f64,
    pub shadow_sigma_db: f64,
    /// Extra loss per obstacle crossed.
    pub blockage_penalty_db: f64,
}

/// Per-tier defaults used when a scenario leaves a field out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TierDefaults {
    pub carrier_hz: f64,
    pub tx_power_dbm: f64,
    pub bandwidth_hz: f64,
    pub resource_share: f64,
    pub pl_exponent_los: f64,
    pub pl_exponent_nlos: f64,
    pub shadow_sigma_db: f64,
    pub blockage_penalty_db: f64,
}

impl TierDefaults {
    pub fn for_tier(tier: GnbType) -> Option<Self> {
        match tier {
            GnbType::Macro => Some(Self {
                carrier_hz: 2.1e9,
                tx_power_dbm: 46.0,
                bandwidth_hz: 20e6,
                resource_share: 0.1,
                pl_exponent_los: 2.9,
                pl_exponent_nlos: 3.5,
                shadow_sigma_db: 6.0,
                blockage_penalty_db: 15.0,
            }),
            GnbType::SmallSub6 => Some(Self {
                carrier_hz: 3.5e9,
                tx_power_dbm: 30.0,
                bandwidth_hz: 100e6,
                resource_share: 0.5,
                pl_exponent_los: 2.2,
                pl_exponent_nlos: 3.1,
                shadow_sigma_db: 7.0,
                blockage_penalty_db: 15.0,
            }),
            // 30 dBm conducted + 15 dB beamforming gain
            GnbType::MmWave => Some(Self {
                carrier_hz: 28e9,
                tx_power_dbm: 45.0,
                bandwidth_hz: 400e6,
                resource_share: 1.0,
                pl_exponent_los: 2.0,
                pl_exponent_nlos: 3.4,
                shadow_sigma_db: 4.0,
                blockage_penalty_db: 20.0,
            }),
            GnbType::Reserved => None,
        }
    }
}

impl GnbConfig {
    pub fn with_defaults(ncgi: Ncgi, tier: GnbType, position: Point3) -> Option<Self> {
        let d = TierDefaults::for_tier(tier)?;
        Some(Self {
            ncgi,
            tier,
            position,
            carrier_hz: d.carrier_hz,
            tx_power_dbm: d.tx_power_dbm,
            bandwidth_hz: d.bandwidth_hz,
            resource_share: d.resource_share,
            pl_exponent_los: d.pl_exponent_los,
            pl_exponent_nlos: d.pl_exponent_nlos,
            shadow_sigma_db: d.shadow_sigma_db,
            blockage_penalty_db: d.blockage_penalty_db,
        })
    }

    /// Checks the numeric invariants; returns a description of the first violation.
    pub fn check(&self) -> Result<(), String> {
        let finite = [
            self.carrier_hz,
            self.tx_power_dbm,
            self.bandwidth_hz,
            self.resource_share,
            self.pl_exponent_los,
            self.pl_exponent_nlos,
            self.shadow_sigma_db,
            self.blockage_penalty_db,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite || !self.position.is_finite() {
            return Err("non-finite parameter".into());
        }
        if self.carrier_hz <= 0.0 {
            return Err("carrier_hz must be > 0".into());
        }
        if self.bandwidth_hz <= 0.0 {
            return Err("bandwidth_hz must be > 0".into());
        }
        if !(self.resource_share > 0.0 && self.resource_share <= 1.0) {
            return Err("resource_share must be in (0, 1]".into());
        }
        if self.pl_exponent_los < 0.0 || self.pl_exponent_nlos < 0.0 {
            return Err("path loss exponents must be >= 0".into());
        }
        if self.shadow_sigma_db < 0.0 {
            return Err("shadow_sigma_db must be >= 0".into());
        }
        Ok(())
    }
}

/// Free-space path loss in dB.
pub fn fspl_db(distance_m: f64, carrier_hz: f64) -> Result<f64, RadioError> {
    if distance_m.is_nan() || distance_m <= 0.0 || carrier_hz.is_nan() || carrier_hz <= 0.0 {
        return Err(RadioError::Domain(format!(
            "FSPL needs d > 0 and f > 0 (d = {distance_m}, f = {carrier_hz})"
        )));
    }
    Ok(20.0 * (4.0 * std::f64::consts::PI * distance_m * carrier_hz / SPEED_OF_LIGHT).log10())
}

/// Log-distance loss with the exponent switched on line of sight, plus a
/// fixed penalty per obstacle. Distances below 1 m are clamped.
pub fn path_loss_db(gnb: &GnbConfig, distance_m: f64, blockers: u32) -> f64 {
    let d = distance_m.max(1.0);
    let reference = fspl_db(1.0, gnb.carrier_hz).expect("carrier validated positive");
    let n = if blockers == 0 {
        gnb.pl_exponent_los
    } else {
        gnb.pl_exponent_nlos
    };
    reference + 10.0 * n * d.log10() + f64::from(blockers) * gnb.blockage_penalty_db
}

pub fn rsrp_dbm(gnb: &GnbConfig, ue_pos: Point3, shadow_db: f64, blockers: u32) -> f64 {
    let d = distance_3d(gnb.position, ue_pos);
    gnb.tx_power_dbm - path_loss_db(gnb, d, blockers) + shadow_db
}

#[inline]
pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

#[inline]
pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

pub fn noise_dbm(bandwidth_hz: f64) -> f64 {
    THERMAL_NOISE_DBM_PER_HZ + 10.0 * bandwidth_hz.log10() + NOISE_FIGURE_DB
}

/// SINR of `serving` against every other gNB on the same carrier.
pub fn sinr_db(serving: &GnbConfig, all: &[GnbConfig], rx_dbm: &[f64]) -> Result<f64, RadioError> {
    if rx_dbm.len() != all.len() {
        return Err(RadioError::PowerCount {
            expected: all.len(),
            got: rx_dbm.len(),
        });
    }
    let idx = all
        .iter()
        .position(|g| g.ncgi == serving.ncgi)
        .ok_or(RadioError::UnknownServing(serving.ncgi))?;
    Ok(sinr_at(idx, all, rx_dbm))
}

pub(crate) fn sinr_at(idx: usize, all: &[GnbConfig], rx_dbm: &[f64]) -> f64 {
    let serving = &all[idx];
    let interference: f64 = all
        .iter()
        .zip(rx_dbm)
        .enumerate()
        .filter(|(j, (g, _))| *j != idx && g.carrier_hz == serving.carrier_hz)
        .map(|(_, (_, p))| dbm_to_mw(*p))
        .sum();
    let noise = dbm_to_mw(noise_dbm(serving.bandwidth_hz));
    mw_to_dbm(dbm_to_mw(rx_dbm[idx]) / (interference + noise))
}

/// Shannon rate on the allotted share of the band, capped at
/// [`MAX_SPECTRAL_EFFICIENCY`].
pub fn throughput_bps(sinr_db: f64, bandwidth_hz: f64, resource_share: f64) -> f64 {
    let se = (1.0 + 10f64.powf(sinr_db / 10.0))
        .log2()
        .min(MAX_SPECTRAL_EFFICIENCY);
    resource_share * bandwidth_hz * se
}

/// Gauss-Markov shadowing for a set of links sharing one receiver.
///
/// Each link keeps a marginal of `Normal(0, sigma^2)`; the correlation between
/// two samples taken `delta` metres apart is `exp(-delta / decorrelation_m)`.
#[derive(Debug, Clone)]
pub struct ShadowState {
    values: Vec<f64>,
    sigmas: Vec<f64>,
    last_pos: Option<Point3>,
    decorrelation_m: f64,
    rng: ChaCha8Rng,
}

impl ShadowState {
    pub fn new(sigmas: Vec<f64>, decorrelation_m: f64, seed: u64) -> Result<Self, RadioError> {
        if decorrelation_m.is_nan() || decorrelation_m <= 0.0 {
            return Err(RadioError::Domain(
                "decorrelation distance must be > 0".into(),
            ));
        }
        Ok(Self {
            values: vec![0.0; sigmas.len()],
            sigmas,
            last_pos: None,
            decorrelation_m,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// Moves the receiver to `ue_pos` and returns the updated per-link values.
    /// The first call draws every link from its marginal.
    pub fn advance(&mut self, ue_pos: Point3) -> &[f64] {
        let rho = match self.last_pos {
            None => 0.0,
            Some(prev) => (-distance_3d(prev, ue_pos) / self.decorrelation_m).exp(),
        };
        let innovation = (1.0 - rho * rho).max(0.0).sqrt();
        for (v, sigma) in self.values.iter_mut().zip(&self.sigmas) {
            let z: f64 = StandardNormal.sample(&mut self.rng);
            *v = rho * *v + innovation * sigma * z;
        }
        self.last_pos = Some(ue_pos);
        &self.values
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Single-link convenience over [`ShadowState::advance`].
pub fn shadowing_db(state: &mut ShadowState, ue_pos: Point3) -> f64 {
    state.advance(ue_pos)[0]
}

/// What the UE sees from one gNB in one tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellMeasurement {
    pub ncgi: Ncgi,
    pub rsrp_dbm: f64,
    pub sinr_db: f64,
    pub blocked: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementFrame {
    pub time_s: f64,
    pub cells: Vec<CellMeasurement>,
}

impl MeasurementFrame {
    pub fn get(&self, ncgi: Ncgi) -> Option<&CellMeasurement> {
        self.cells.iter().find(|c| c.ncgi == ncgi)
    }

    pub fn rsrp_of(&self, ncgi: Ncgi) -> Option<f64> {
        self.get(ncgi).map(|c| c.rsrp_dbm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gnb(tier: GnbType, id: u32, pos: Point3) -> GnbConfig {
        GnbConfig::with_defaults(Ncgi::typed(1, tier, id, 0).unwrap(), tier, pos).unwrap()
    }

    #[test]
    fn fspl_values() {
        // closed form evaluated offline: 78.892169 / 38.892169 dB
        assert!((fspl_db(100.0, 2.1e9).unwrap() - 78.892169).abs() < 1e-5);
        assert!((fspl_db(1.0, 2.1e9).unwrap() - 38.892169).abs() < 1e-5);
        let step = fspl_db(1000.0, 3.5e9).unwrap() - fspl_db(100.0, 3.5e9).unwrap();
        assert!((step - 20.0).abs() < 1e-9);
        assert!(fspl_db(0.0, 1e9).is_err());
        assert!(fspl_db(1.0, -1.0).is_err());
    }

    #[test]
    fn path_loss_values() {
        let m = gnb(GnbType::MmWave, 1, Point3::default());
        assert_eq!(path_loss_db(&m, 1.0, 0), fspl_db(1.0, 28e9).unwrap());
        assert_eq!(path_loss_db(&m, 0.2, 0), fspl_db(1.0, 28e9).unwrap());
        // 61.390944 + 34*2 + 20, evaluated offline
        assert!((path_loss_db(&m, 100.0, 1) - 149.390944).abs() < 1e-5);

        let mut flat = m.clone();
        flat.pl_exponent_nlos = flat.pl_exponent_los;
        let delta = path_loss_db(&flat, 57.0, 1) - path_loss_db(&flat, 57.0, 0);
        assert!((delta - flat.blockage_penalty_db).abs() < 1e-12);
    }

    #[test]
    fn rsrp_values() {
        let mut g = gnb(GnbType::Macro, 1, Point3::default());
        g.pl_exponent_los = 2.0;
        let ue = Point3::new(100.0, 0.0, 0.0);
        assert!((rsrp_dbm(&g, ue, 0.0, 0) - -32.892169).abs() < 1e-5);
        let d = rsrp_dbm(&g, ue, 6.0, 0) - rsrp_dbm(&g, ue, 0.0, 0);
        assert!((d - 6.0).abs() < 1e-12);
    }

    #[test]
    fn sinr_values() {
        let a = gnb(GnbType::Macro, 1, Point3::default());
        let n = noise_dbm(a.bandwidth_hz);
        assert!((n - -91.989700).abs() < 1e-5);
        let s = sinr_db(&a, std::slice::from_ref(&a), &[n]).unwrap();
        assert!(s.abs() < 1e-9);
        let s = sinr_db(&a, std::slice::from_ref(&a), &[-90.0]).unwrap();
        assert!((s - 1.989700).abs() < 1e-5);

        let b = gnb(GnbType::SmallSub6, 1, Point3::default());
        let c = gnb(GnbType::SmallSub6, 2, Point3::default());
        let s = sinr_db(&b, &[b.clone(), c.clone()], &[-20.0, -20.0]).unwrap();
        assert!(s.abs() < 1e-3);
        // other carriers do not interfere
        let s = sinr_db(&a, &[a.clone(), b.clone()], &[n, 0.0]).unwrap();
        assert!(s.abs() < 1e-9);
    }

    #[test]
    fn sinr_errors() {
        let a = gnb(GnbType::Macro, 1, Point3::default());
        let b = gnb(GnbType::SmallSub6, 1, Point3::default());
        assert_eq!(
            sinr_db(&a, std::slice::from_ref(&b), &[0.0]),
            Err(RadioError::UnknownServing(a.ncgi))
        );
        assert!(matches!(
            sinr_db(&b, std::slice::from_ref(&b), &[]),
            Err(RadioError::PowerCount { .. })
        ));
    }

    #[test]
    fn throughput_values() {
        assert!((throughput_bps(0.0, 20e6, 1.0) - 20e6).abs() < 1e-3);
        assert!(throughput_bps(-400.0, 100e6, 1.0) < 1e-30);
        // log2(1001) = 9.967 exceeds the cap, so the rate is 0.5 * 100e6 * 7.4
        assert!((throughput_bps(30.0, 100e6, 0.5) - 370e6).abs() < 1e-3);
        // below the cap the closed form applies: 0.5 * 100e6 * log2(11)
        assert!((throughput_bps(10.0, 100e6, 0.5) - 172_971_580.0).abs() < 1.0);
    }

    #[test]
    fn throughput_monotone_then_flat() {
        let cap_db = 10.0 * (2f64.powf(MAX_SPECTRAL_EFFICIENCY) - 1.0).log10();
        let mut prev = throughput_bps(-20.0, 1e6, 1.0);
        let mut s = -19.9;
        while s < cap_db - 0.1 {
            let t = throughput_bps(s, 1e6, 1.0);
            assert!(t > prev, "not increasing at {s}");
            prev = t;
            s += 0.1;
        }
        assert_eq!(throughput_bps(cap_db + 1.0, 1e6, 1.0), throughput_bps(cap_db + 9.0, 1e6, 1.0));
    }

    #[test]
    fn rsrp_monotone_in_distance_and_blockers() {
        for tier in [GnbType::Macro, GnbType::SmallSub6, GnbType::MmWave] {
            let g = gnb(tier, 1, Point3::default());
            let mut prev = f64::INFINITY;
            for d in (1..400).map(|k| k as f64 * 2.5) {
                for b in 0..4 {
                    let r = rsrp_dbm(&g, Point3::new(d, 0.0, 0.0), 0.0, b);
                    if b == 0 {
                        assert!(r <= prev);
                        prev = r;
                    }
                    assert!(r <= rsrp_dbm(&g, Point3::new(d, 0.0, 0.0), 0.0, b.saturating_sub(1)));
                }
            }
        }
    }

    #[test]
    fn stronger_cochannel_gnb_has_higher_sinr() {
        let gs: Vec<_> = (0..4)
            .map(|i| gnb(GnbType::MmWave, i, Point3::new(i as f64 * 40.0, 0.0, 10.0)))
            .collect();
        let ue = Point3::new(30.0, 5.0, 1.5);
        let rx: Vec<f64> = gs.iter().map(|g| rsrp_dbm(g, ue, 0.0, 0)).collect();
        let best = (0..4).max_by(|&a, &b| rx[a].total_cmp(&rx[b])).unwrap();
        for i in 0..4 {
            assert!(sinr_at(best, &gs, &rx) >= sinr_at(i, &gs, &rx));
        }
    }

    #[test]
    fn shadowing_zero_step_keeps_value() {
        let mut st = ShadowState::new(vec![6.0], 20.0, 3).unwrap();
        let p = Point3::new(1.0, 2.0, 3.0);
        let v0 = shadowing_db(&mut st, p);
        assert_eq!(shadowing_db(&mut st, p), v0);
    }

    #[test]
    fn shadowing_far_step_decorrelates() {
        // consecutive samples 1 km apart at 1 m decorrelation are independent
        let mut st = ShadowState::new(vec![1.0], 1.0, 11).unwrap();
        let n = 20_000;
        let xs: Vec<f64> = (0..n)
            .map(|k| shadowing_db(&mut st, Point3::new(1000.0 * k as f64, 0.0, 0.0)))
            .collect();
        let lag1: f64 = xs.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / (n - 1) as f64;
        assert!(lag1.abs() < 0.05, "lag-1 correlation {lag1}");
    }

    #[test]
    fn shadowing_marginal_sigma() {
        // 1e5 steps of 1 m at 20 m decorrelation; sample stddev within 5 %
        let sigma = 6.0;
        let mut st = ShadowState::new(vec![sigma], 20.0, 42).unwrap();
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .map(|k| shadowing_db(&mut st, Point3::new(0.0, k as f64, 0.0)))
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let sd = var.sqrt();
        assert!((sd - sigma).abs() < 0.05 * sigma, "sd {sd}");
        let mut st = ShadowState::new(vec![sigma], 20.0, 42).unwrap();
        let expected_rho = (-1.0f64 / 20.0).exp();
        let ys: Vec<f64> = (0..n)
            .map(|k| shadowing_db(&mut st, Point3::new(0.0, k as f64, 0.0)))
            .collect();
        let cov = ys.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / (n - 1) as f64;
        assert!((cov / (sigma * sigma) - expected_rho).abs() < 0.05);
    }

    #[test]
    fn shadowing_is_seed_deterministic() {
        let path: Vec<_> = (0..500).map(|k| Point3::new(0.0, k as f64 * 0.3, 0.0)).collect();
        let run = |seed| {
            let mut st = ShadowState::new(vec![6.0, 7.0, 4.0], 15.0, seed).unwrap();
            path.iter()
                .flat_map(|p| st.advance(*p).to_vec())
                .map(f64::to_bits)
                .collect::<Vec<_>>()
        };
        assert_eq!(run(5), run(5));
        assert_ne!(run(5), run(6));
    }

    #[test]
    fn rejects_bad_decorrelation() {
        assert!(ShadowState::new(vec![1.0], 0.0, 1).is_err());
    }
}
