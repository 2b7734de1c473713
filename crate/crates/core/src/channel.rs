//! Statistical 28 GHz urban channel and the SNR / detection link budget.
//!
//! A realization is drawn in three steps: the link state (outage, LOS or
//! NLOS) from distance-dependent probabilities, a log-distance pathloss with
//! log-normal shadowing, and a set of spatial clusters with power fractions
//! and departure/arrival azimuths. Shadowing and cluster geometry are drawn
//! once per realization and stay fixed for the whole search.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::{Distribution, Exp1, Normal, Poisson};

use crate::beams::{beam_gain, wrap_angle, BeamCodeword};
use crate::error::{Error, Result};

/// Thermal noise density at 290 K, dBm/Hz.
pub const THERMAL_NOISE_DBM_HZ: f64 = -174.0;

/// Slack (dB) on the detection threshold comparison, so that values which are
/// equal up to rounding of the integration-gain term count as detected.
const DETECT_EPS_DB: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkState {
    Los,
    Nlos,
    Outage,
}

impl LinkState {
    pub fn as_str(&self) -> &'static str {
        match self {
            LinkState::Los => "los",
            LinkState::Nlos => "nlos",
            LinkState::Outage => "outage",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathCluster {
    pub power_fraction: f64,
    /// Departure azimuth at the BS.
    pub aod: f64,
    /// Arrival azimuth at the UE.
    pub aoa: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub state: LinkState,
    /// Pathloss including shadowing. Infinite for outage.
    pub pathloss_db: f64,
    pub clusters: Vec<PathCluster>,
    pub distance_m: f64,
}

impl ChannelRealization {
    pub fn outage(distance_m: f64) -> Self {
        Self {
            state: LinkState::Outage,
            pathloss_db: f64::INFINITY,
            clusters: Vec::new(),
            distance_m,
        }
    }

    pub fn is_outage(&self) -> bool {
        self.state == LinkState::Outage
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub dl_ptx_dbm: f64,
    pub ul_ptx_dbm: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
    pub carrier_ghz: f64,
    /// Detection threshold on the integrated SNR.
    pub tau_db: f64,
    /// Minimum signal duration, seconds.
    pub t_ref: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self {
            dl_ptx_dbm: 30.0,
            ul_ptx_dbm: 23.0,
            bandwidth_hz: 1e9,
            noise_figure_db: 5.0,
            carrier_ghz: 28.0,
            tau_db: -5.0,
            t_ref: 10e-6,
        }
    }
}

impl LinkBudget {
    pub fn noise_floor_dbm(&self) -> f64 {
        THERMAL_NOISE_DBM_HZ + 10.0 * self.bandwidth_hz.log10() + self.noise_figure_db
    }

    /// Downlink SNR for a beam pair with combined linear gain `gain`.
    pub fn snr_db(&self, ch: &ChannelRealization, gain: f64) -> Result<f64> {
        if ch.is_outage() {
            return Err(Error::invalid("no SNR is defined for an outage link"));
        }
        if !(gain > 0.0) {
            return Err(Error::invalid(format!("gain must be positive, got {gain}")));
        }
        Ok(self.dl_ptx_dbm + 10.0 * gain.log10() - ch.pathloss_db - self.noise_floor_dbm())
    }

    /// Energy accumulated over `t_sig` relative to the minimum duration, dB.
    pub fn integration_gain_db(&self, t_sig: f64) -> Result<f64> {
        if !(t_sig >= self.t_ref) {
            return Err(Error::invalid(format!(
                "signal duration {t_sig} s is below the minimum {} s",
                self.t_ref
            )));
        }
        Ok(10.0 * (t_sig / self.t_ref).log10())
    }

    /// Whether a pilot received at `snr` dB over `t_sig` seconds clears the
    /// threshold. Equality counts as a detection.
    pub fn detect(&self, snr: f64, t_sig: f64) -> Result<bool> {
        let g = self.integration_gain_db(t_sig)?;
        Ok(snr + g >= self.tau_db - DETECT_EPS_DB)
    }
}

/// Free-function form of [`LinkBudget::snr_db`].
pub fn snr_db(budget: &LinkBudget, ch: &ChannelRealization, gain: f64) -> Result<f64> {
    budget.snr_db(ch, gain)
}

/// Free-function form of [`LinkBudget::detect`].
pub fn detect(snr: f64, t_sig: f64, budget: &LinkBudget) -> Result<bool> {
    budget.detect(snr, t_sig)
}

/// Sum over clusters of `fraction · G_tx(aod) · G_rx(aoa)`.
pub fn pair_gain(ch: &ChannelRealization, tx: &BeamCodeword, rx: &BeamCodeword) -> Result<f64> {
    if ch.is_outage() {
        return Err(Error::invalid(
            "no beam-pair gain is defined for an outage link",
        ));
    }
    Ok(ch
        .clusters
        .iter()
        .map(|c| c.power_fraction * beam_gain(tx, c.aod) * beam_gain(rx, c.aoa))
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateProbabilities {
    pub outage: f64,
    pub los: f64,
    pub nlos: f64,
}

/// `intercept + 10·exponent·log10(d)` with log-normal shadowing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathlossModel {
    pub intercept_db: f64,
    pub exponent: f64,
    pub shadowing_sigma_db: f64,
}

impl PathlossModel {
    pub fn median_db(&self, d: f64) -> f64 {
        self.intercept_db + 10.0 * self.exponent * d.log10()
    }
}

/// How cluster azimuths are drawn for non-deterministic clusters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AngleModel {
    /// Departure and arrival azimuths i.i.d. uniform on `[0, 2π)`.
    Uniform,
    /// Azimuths scattered around the direct-path directions with a wrapped
    /// Gaussian offset of standard deviation `spread_deg` degrees.
    AroundDirectPath { spread_deg: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams {
    /// Outage model `p_out = max(0, 1 - exp(-d/outage_scale_m + outage_offset))`.
    pub outage_scale_m: f64,
    pub outage_offset: f64,
    /// LOS model `p_los = (1 - p_out)·exp(-d/los_scale_m)`.
    pub los_scale_m: f64,
    pub los: PathlossModel,
    pub nlos: PathlossModel,
    pub shadowing: bool,
    /// Mean of the Poisson cluster count (clamped below at one).
    pub cluster_lambda: f64,
    /// LOS links carry a single cluster along the geometric path.
    pub los_deterministic_angle: bool,
    pub angles: AngleModel,
    /// Pins every draw to one state.
    pub forced_state: Option<LinkState>,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            outage_scale_m: 30.0,
            outage_offset: 5.2,
            los_scale_m: 67.1,
            los: PathlossModel {
                intercept_db: 61.4,
                exponent: 2.0,
                shadowing_sigma_db: 5.8,
            },
            nlos: PathlossModel {
                intercept_db: 72.0,
                exponent: 2.92,
                shadowing_sigma_db: 8.7,
            },
            shadowing: true,
            cluster_lambda: 1.9,
            los_deterministic_angle: true,
            angles: AngleModel::AroundDirectPath {
                spread_deg: DEFAULT_ANGLE_SPREAD_DEG,
            },
            forced_state: None,
        }
    }
}

/// Default standard deviation of cluster azimuths around the direct path.
pub const DEFAULT_ANGLE_SPREAD_DEG: f64 = 15.0;

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("channel.outage_scale_m", self.outage_scale_m),
            ("channel.los_scale_m", self.los_scale_m),
            ("channel.los_exponent", self.los.exponent),
            ("channel.nlos_exponent", self.nlos.exponent),
            ("channel.cluster_lambda", self.cluster_lambda),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(
                    key,
                    format!("must be positive and finite, got {v}"),
                ));
            }
        }
        let finite = [
            ("channel.outage_offset", self.outage_offset),
            ("channel.los_intercept_db", self.los.intercept_db),
            ("channel.nlos_intercept_db", self.nlos.intercept_db),
        ];
        for (key, v) in finite {
            if !v.is_finite() {
                return Err(Error::validation(key, format!("must be finite, got {v}")));
            }
        }
        for (key, v) in [
            ("channel.los_sigma_db", self.los.shadowing_sigma_db),
            ("channel.nlos_sigma_db", self.nlos.shadowing_sigma_db),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::validation(
                    key,
                    format!("must be non-negative, got {v}"),
                ));
            }
        }
        if let AngleModel::AroundDirectPath { spread_deg } = self.angles {
            if !(spread_deg >= 0.0 && spread_deg.is_finite()) {
                return Err(Error::validation(
                    "channel.angle_spread_deg",
                    format!("must be non-negative, got {spread_deg}"),
                ));
            }
        }
        Ok(())
    }

    pub fn link_state_probabilities(&self, d: f64) -> Result<StateProbabilities> {
        if !(d > 0.0) {
            return Err(Error::invalid(format!(
                "distance must be positive, got {d}"
            )));
        }
        let outage = (1.0 - (-d / self.outage_scale_m + self.outage_offset).exp()).max(0.0);
        let los = (1.0 - outage) * (-d / self.los_scale_m).exp();
        let nlos = (1.0 - outage - los).max(0.0);
        Ok(StateProbabilities { outage, los, nlos })
    }

    pub fn sample_state<R: Rng + ?Sized>(&self, d: f64, rng: &mut R) -> Result<LinkState> {
        let p = self.link_state_probabilities(d)?;
        // always consume one draw so forced and free runs stay aligned
        let u: f64 = rng.random();
        if let Some(state) = self.forced_state {
            return Ok(state);
        }
        Ok(if u < p.outage {
            LinkState::Outage
        } else if u < p.outage + p.los {
            LinkState::Los
        } else {
            LinkState::Nlos
        })
    }

    fn pathloss_model(&self, state: LinkState) -> Result<&PathlossModel> {
        match state {
            LinkState::Los => Ok(&self.los),
            LinkState::Nlos => Ok(&self.nlos),
            LinkState::Outage => Err(Error::invalid("no pathloss is defined for an outage link")),
        }
    }

    /// Pathloss in dB at `d` metres, shadowing included when enabled.
    pub fn pathloss_db<R: Rng + ?Sized>(
        &self,
        d: f64,
        state: LinkState,
        rng: &mut R,
    ) -> Result<f64> {
        if !(d >= 1.0) {
            return Err(Error::invalid(format!(
                "pathloss model is defined from 1 m, got {d} m"
            )));
        }
        let model = self.pathloss_model(state)?;
        let mut pl = model.median_db(d);
        if self.shadowing && model.shadowing_sigma_db > 0.0 {
            let x: f64 = Normal::new(0.0, model.shadowing_sigma_db)
                .expect("sigma validated")
                .sample(rng);
            pl += x;
        }
        Ok(pl)
    }

    /// Spatial clusters for a UE at `bearing` (BS → UE azimuth).
    pub fn sample_clusters<R: Rng + ?Sized>(
        &self,
        state: LinkState,
        bearing: f64,
        rng: &mut R,
    ) -> Result<Vec<PathCluster>> {
        let aod_direct = wrap_angle(bearing);
        let aoa_direct = wrap_angle(bearing + PI);
        match state {
            LinkState::Outage => {
                return Err(Error::invalid("outage links carry no clusters"));
            }
            LinkState::Los if self.los_deterministic_angle => {
                return Ok(vec![PathCluster {
                    power_fraction: 1.0,
                    aod: aod_direct,
                    aoa: aoa_direct,
                }]);
            }
            _ => {}
        }

        let count: f64 = Poisson::new(self.cluster_lambda)
            .expect("lambda validated")
            .sample(rng);
        let k = (count as usize).max(1);
        let mut clusters = Vec::with_capacity(k);
        let mut total = 0.0;
        for _ in 0..k {
            let w: f64 = Exp1.sample(rng);
            let (aod, aoa) = match self.angles {
                AngleModel::Uniform => (rng.random::<f64>() * TAU, rng.random::<f64>() * TAU),
                AngleModel::AroundDirectPath { spread_deg } => {
                    let n = Normal::new(0.0, spread_deg.to_radians()).expect("spread validated");
                    let dd: f64 = n.sample(rng);
                    let da: f64 = n.sample(rng);
                    (wrap_angle(aod_direct + dd), wrap_angle(aoa_direct + da))
                }
            };
            total += w;
            clusters.push(PathCluster {
                power_fraction: w,
                aod: wrap_angle(aod),
                aoa: wrap_angle(aoa),
            });
        }
        for c in &mut clusters {
            c.power_fraction /= total;
        }
        Ok(clusters)
    }

    /// Draws one complete link for a UE at distance `d` and bearing `bearing`
    /// from the BS.
    pub fn sample_realization<R: Rng + ?Sized>(
        &self,
        d: f64,
        bearing: f64,
        rng: &mut R,
    ) -> Result<ChannelRealization> {
        let state = self.sample_state(d, rng)?;
        if state == LinkState::Outage {
            return Ok(ChannelRealization::outage(d));
        }
        let pathloss_db = self.pathloss_db(d, state, rng)?;
        let clusters = self.sample_clusters(state, bearing, rng)?;
        Ok(ChannelRealization {
            state,
            pathloss_db,
            clusters,
            distance_m: d,
        })
    }
}
