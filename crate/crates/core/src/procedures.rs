//! Initial-access cell search procedures.
//!
//! Each procedure is a fixed slot schedule run against one channel
//! realization. The schedule length does not depend on what the UE sees:
//! a miss still consumes every slot of the frame.
//!
//! Slot budgets (downlink sweep + uplink BS sweep, UE beam already fixed):
//!
//! | kind        | downlink                      | uplink              |
//! |-------------|-------------------------------|---------------------|
//! | exhaustive  | `N_bs · N_ue`                 | `N_bs`              |
//! | iterative   | `N_wide · N_ue + N_refine`    | `N_wide + N_refine` |
//! | pure CI     | `N_bs`                        | `N_bs`              |
//! | enhanced CI | `N_bs · (2h + 1)`             | `N_bs`              |

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::beams::{
    adjacent_beams, best_beam_for_bearing, make_codebook, wrap_angle, ArrayGeometry, Codebook,
    DEFAULT_SIDELOBE_GAIN,
};
use crate::channel::{pair_gain, ChannelRealization, LinkBudget};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProcedureKind {
    Exhaustive,
    Iterative,
    PureCi,
    EnhancedCi,
}

impl ProcedureKind {
    pub const ALL: [ProcedureKind; 4] = [
        ProcedureKind::Exhaustive,
        ProcedureKind::Iterative,
        ProcedureKind::PureCi,
        ProcedureKind::EnhancedCi,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ProcedureKind::Exhaustive => "exhaustive",
            ProcedureKind::Iterative => "iterative",
            ProcedureKind::PureCi => "pure-ci",
            ProcedureKind::EnhancedCi => "enhanced-ci",
        }
    }

    pub fn is_ci(&self) -> bool {
        matches!(self, ProcedureKind::PureCi | ProcedureKind::EnhancedCi)
    }

    /// Half window used unless configured otherwise.
    pub fn default_half_window(&self) -> usize {
        match self {
            ProcedureKind::EnhancedCi => 1,
            _ => 0,
        }
    }
}

impl fmt::Display for ProcedureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProcedureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(ProcedureKind::Exhaustive),
            "iterative" => Ok(ProcedureKind::Iterative),
            "pure-ci" => Ok(ProcedureKind::PureCi),
            "enhanced-ci" => Ok(ProcedureKind::EnhancedCi),
            other => Err(Error::invalid(format!(
                "unknown procedure `{other}` (expected exhaustive, iterative, pure-ci or enhanced-ci)"
            ))),
        }
    }
}

/// UE codebook with `beams` directions: 4 wide beams on a 2×2 array or
/// 8 narrower beams on a 4×4 array.
pub fn ue_codebook(beams: usize) -> Result<Codebook> {
    match beams {
        4 => make_codebook(ArrayGeometry::ue_2x2(), 4, 4),
        8 => make_codebook(ArrayGeometry::ue_4x4(), 8, 16),
        other => Err(Error::invalid(format!(
            "UE supports 4 or 8 beams, got {other}"
        ))),
    }
}

/// Wide codebook rotated so that wide beam `k` covers exactly narrow beams
/// `k·r .. (k+1)·r` of `narrow`, with `r = N_narrow / n_wide`.
pub fn nested_wide_codebook(
    narrow: &Codebook,
    geometry: ArrayGeometry,
    n_wide: usize,
    active_elements: usize,
) -> Result<Codebook> {
    if n_wide == 0 || !narrow.len().is_multiple_of(n_wide) {
        return Err(Error::invalid(format!(
            "{} narrow beams cannot be split into {n_wide} sectors",
            narrow.len()
        )));
    }
    let ratio = narrow.len() / n_wide;
    let shift = (ratio as f64 - 1.0) / 2.0 * narrow.beamwidth();
    Ok(make_codebook(geometry, n_wide, active_elements)?.rotated(narrow.offset() + shift))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcedureConfig {
    pub kind: ProcedureKind,
    pub bs_narrow: Codebook,
    /// Macro-sector codebook for the first iterative phase.
    pub bs_wide: Option<Codebook>,
    pub ue_codebook: Codebook,
    pub ci_half_window: usize,
}

impl ProcedureConfig {
    /// Standard 8×8 BS (16 narrow beams, 4 nested wide beams on 4 elements)
    /// with a 4- or 8-beam UE.
    pub fn standard(kind: ProcedureKind, ue_beams: usize) -> Result<Self> {
        Self::with_sidelobe(kind, ue_beams, DEFAULT_SIDELOBE_GAIN)
    }

    pub fn with_sidelobe(kind: ProcedureKind, ue_beams: usize, sidelobe_gain: f64) -> Result<Self> {
        let bs = ArrayGeometry::bs_8x8();
        let bs_narrow = make_codebook(bs, 16, 64)?.with_sidelobe_gain(sidelobe_gain)?;
        let bs_wide = match kind {
            ProcedureKind::Iterative => Some(
                nested_wide_codebook(&bs_narrow, bs, 4, 4)?.with_sidelobe_gain(sidelobe_gain)?,
            ),
            _ => None,
        };
        let cfg = Self {
            kind,
            bs_narrow,
            bs_wide,
            ue_codebook: ue_codebook(ue_beams)?.with_sidelobe_gain(sidelobe_gain)?,
            ci_half_window: kind.default_half_window(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Short label such as `exhaustive 64x16`.
    pub fn label(&self) -> String {
        format!(
            "{} {}x{}",
            self.kind,
            self.bs_antennas(),
            self.ue_antennas()
        )
    }

    pub fn bs_antennas(&self) -> usize {
        self.bs_narrow.active_elements()
    }

    pub fn ue_antennas(&self) -> usize {
        self.ue_codebook.active_elements()
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            ProcedureKind::Iterative => {
                let wide = self
                    .bs_wide
                    .as_ref()
                    .ok_or_else(|| Error::invalid("iterative search needs a wide BS codebook"))?;
                if !self.bs_narrow.len().is_multiple_of(wide.len()) {
                    return Err(Error::invalid(format!(
                        "{} narrow beams are not divisible into {} wide sectors",
                        self.bs_narrow.len(),
                        wide.len()
                    )));
                }
                let ratio = self.bs_narrow.len() / wide.len();
                for k in 0..wide.len() {
                    let n = self.refinement_beams(k).len();
                    if n != ratio {
                        return Err(Error::invalid(format!(
                            "wide sector {k} holds {n} narrow beams, expected {ratio}"
                        )));
                    }
                }
            }
            ProcedureKind::PureCi if self.ci_half_window != 0 => {
                return Err(Error::invalid("pure CI search uses a zero half window"));
            }
            _ => {}
        }
        if self.kind.is_ci() && 2 * self.ci_half_window >= self.ue_codebook.len() {
            return Err(Error::invalid(format!(
                "half window {} overlaps itself in a {}-beam UE codebook",
                self.ci_half_window,
                self.ue_codebook.len()
            )));
        }
        Ok(())
    }

    /// Narrow beams whose centers fall inside wide beam `sector`.
    pub fn refinement_beams(&self, sector: usize) -> Vec<usize> {
        let Some(wide) = self.bs_wide.as_ref().and_then(|w| w.get(sector)) else {
            return Vec::new();
        };
        self.bs_narrow
            .codewords()
            .iter()
            .filter(|cw| wide.in_mainlobe(cw.center_azimuth))
            .map(|cw| cw.index())
            .collect()
    }
}

/// Number of slots the procedure occupies, uplink included.
pub fn slot_count(config: &ProcedureConfig) -> Result<usize> {
    config.validate()?;
    let n_bs = config.bs_narrow.len();
    let n_ue = config.ue_codebook.len();
    Ok(match config.kind {
        ProcedureKind::Exhaustive => n_bs * n_ue + n_bs,
        ProcedureKind::Iterative => {
            let n_wide = config.bs_wide.as_ref().map_or(0, Codebook::len);
            let n_refine = n_bs / n_wide;
            (n_wide * n_ue + n_refine) + (n_wide + n_refine)
        }
        ProcedureKind::PureCi => n_bs + n_bs,
        ProcedureKind::EnhancedCi => n_bs * (2 * config.ci_half_window + 1) + n_bs,
    })
}

/// Pilot duration and overhead fraction; the period follows as
/// `t_per = t_sig / phi_ov`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverheadPolicy {
    pub t_sig: f64,
    pub phi_ov: f64,
}

impl OverheadPolicy {
    pub fn new(t_sig: f64, phi_ov: f64) -> Result<Self> {
        if !(phi_ov > 0.0 && phi_ov <= 1.0) {
            return Err(Error::validation("run.phi_ov", "phi_ov must be in (0,1]"));
        }
        if !(t_sig > 0.0 && t_sig.is_finite()) {
            return Err(Error::validation("run.t_sig_s", "t_sig must be positive"));
        }
        Ok(Self { t_sig, phi_ov })
    }

    pub fn t_per(&self) -> f64 {
        self.t_sig / self.phi_ov
    }

    pub fn with_t_sig(&self, t_sig: f64) -> Self {
        Self { t_sig, ..*self }
    }
}

/// Time to run `n_slots` pilots, one per period.
pub fn discovery_delay(n_slots: usize, policy: &OverheadPolicy) -> f64 {
    n_slots as f64 * policy.t_sig / policy.phi_ov
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub detected: bool,
    pub best_bs_beam: Option<usize>,
    pub best_ue_beam: Option<usize>,
    pub n_slots: usize,
    pub best_snr_db: Option<f64>,
}

impl SearchOutcome {
    fn miss(n_slots: usize) -> Self {
        Self {
            detected: false,
            best_bs_beam: None,
            best_ue_beam: None,
            n_slots,
            best_snr_db: None,
        }
    }
}

/// Best passing pair seen so far. Ties resolve to the lowest BS index, then
/// the lowest UE index.
#[derive(Debug, Default, Clone, Copy)]
struct BestPair {
    best: Option<(f64, usize, usize)>,
}

impl BestPair {
    fn offer(&mut self, snr: f64, bs: usize, ue: usize) {
        let better = match self.best {
            None => true,
            Some((s, b, u)) => snr > s || (snr == s && (bs, ue) < (b, u)),
        };
        if better {
            self.best = Some((snr, bs, ue));
        }
    }
}

/// Evaluates every `(tx, rx)` combination and keeps the strongest one that
/// clears the threshold.
fn sweep(
    ch: &ChannelRealization,
    budget: &LinkBudget,
    t_sig: f64,
    tx: &Codebook,
    tx_set: &[usize],
    rx: &Codebook,
    rx_set: &[usize],
) -> Result<Option<(f64, usize, usize)>> {
    let mut best = BestPair::default();
    for &b in tx_set {
        for &u in rx_set {
            let gain = pair_gain(ch, &tx.codewords()[b], &rx.codewords()[u])?;
            let snr = budget.snr_db(ch, gain)?;
            if budget.detect(snr, t_sig)? {
                best.offer(snr, b, u);
            }
        }
    }
    Ok(best.best)
}

fn outcome(found: Option<(f64, usize, usize)>, n_slots: usize) -> SearchOutcome {
    match found {
        Some((snr, b, u)) => SearchOutcome {
            detected: true,
            best_bs_beam: Some(b),
            best_ue_beam: Some(u),
            n_slots,
            best_snr_db: Some(snr),
        },
        None => SearchOutcome::miss(n_slots),
    }
}

fn all(cb: &Codebook) -> Vec<usize> {
    (0..cb.len()).collect()
}

/// Full cross-scan of every BS × UE beam pair.
pub fn run_exhaustive(
    ch: &ChannelRealization,
    config: &ProcedureConfig,
    budget: &LinkBudget,
    t_sig: f64,
) -> Result<SearchOutcome> {
    let n_slots = slot_count(config)?;
    budget.integration_gain_db(t_sig)?;
    if ch.is_outage() {
        return Ok(SearchOutcome::miss(n_slots));
    }
    let found = sweep(
        ch,
        budget,
        t_sig,
        &config.bs_narrow,
        &all(&config.bs_narrow),
        &config.ue_codebook,
        &all(&config.ue_codebook),
    )?;
    Ok(outcome(found, n_slots))
}

/// Two-phase search: wide macro sectors against every UE beam, then the
/// narrow beams of the winning sector with the UE beam held fixed. A sector
/// whose refinement fails is a miss; other sectors are not retried.
pub fn run_iterative(
    ch: &ChannelRealization,
    config: &ProcedureConfig,
    budget: &LinkBudget,
    t_sig: f64,
) -> Result<SearchOutcome> {
    if config.kind != ProcedureKind::Iterative {
        return Err(Error::invalid(format!(
            "iterative search requested for a {} configuration",
            config.kind
        )));
    }
    let n_slots = slot_count(config)?;
    budget.integration_gain_db(t_sig)?;
    if ch.is_outage() {
        return Ok(SearchOutcome::miss(n_slots));
    }
    let wide = config.bs_wide.as_ref().expect("validated by slot_count");
    let Some((_, sector, ue)) = sweep(
        ch,
        budget,
        t_sig,
        wide,
        &all(wide),
        &config.ue_codebook,
        &all(&config.ue_codebook),
    )?
    else {
        return Ok(SearchOutcome::miss(n_slots));
    };
    let refine = config.refinement_beams(sector);
    let found = sweep(
        ch,
        budget,
        t_sig,
        &config.bs_narrow,
        &refine,
        &config.ue_codebook,
        &[ue],
    )?;
    Ok(outcome(found, n_slots))
}

/// Context-information search: the UE points at the known BS direction
/// (`true_bearing`, UE → BS azimuth) plus `ci_half_window` neighbours on each
/// side while the BS sweeps all narrow beams.
pub fn run_ci(
    ch: &ChannelRealization,
    config: &ProcedureConfig,
    budget: &LinkBudget,
    t_sig: f64,
    true_bearing: f64,
) -> Result<SearchOutcome> {
    if !config.kind.is_ci() {
        return Err(Error::invalid(format!(
            "context-information search requested for a {} configuration",
            config.kind
        )));
    }
    let n_slots = slot_count(config)?;
    budget.integration_gain_db(t_sig)?;
    if ch.is_outage() {
        return Ok(SearchOutcome::miss(n_slots));
    }
    let center = best_beam_for_bearing(&config.ue_codebook, wrap_angle(true_bearing));
    let ue_set = adjacent_beams(&config.ue_codebook, center, config.ci_half_window)?;
    let found = sweep(
        ch,
        budget,
        t_sig,
        &config.bs_narrow,
        &all(&config.bs_narrow),
        &config.ue_codebook,
        &ue_set,
    )?;
    Ok(outcome(found, n_slots))
}

/// Runs whichever procedure `config` describes. `bs_bearing` is the BS → UE
/// azimuth; CI procedures point the UE back along it.
pub fn run_procedure(
    ch: &ChannelRealization,
    config: &ProcedureConfig,
    budget: &LinkBudget,
    t_sig: f64,
    bs_bearing: f64,
) -> Result<SearchOutcome> {
    match config.kind {
        ProcedureKind::Exhaustive => run_exhaustive(ch, config, budget, t_sig),
        ProcedureKind::Iterative => run_iterative(ch, config, budget, t_sig),
        ProcedureKind::PureCi | ProcedureKind::EnhancedCi => {
            run_ci(ch, config, budget, t_sig, wrap_angle(bs_bearing + PI))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{LinkState, PathCluster};
    use std::f64::consts::TAU;

    fn cfg(kind: ProcedureKind, ue: usize) -> ProcedureConfig {
        ProcedureConfig::standard(kind, ue).unwrap()
    }

    fn link(clusters: Vec<PathCluster>, pathloss_db: f64) -> ChannelRealization {
        ChannelRealization {
            state: LinkState::Nlos,
            pathloss_db,
            clusters,
            distance_m: 95.0,
        }
    }

    fn direct(bearing: f64) -> PathCluster {
        PathCluster {
            power_fraction: 1.0,
            aod: wrap_angle(bearing),
            aoa: wrap_angle(bearing + PI),
        }
    }

    #[test]
    fn table_slot_counts() {
        let cases = [
            (ProcedureKind::Exhaustive, 4, 80),
            (ProcedureKind::Exhaustive, 8, 144),
            (ProcedureKind::Iterative, 4, 28),
            (ProcedureKind::Iterative, 8, 44),
            (ProcedureKind::PureCi, 4, 32),
            (ProcedureKind::PureCi, 8, 32),
            (ProcedureKind::EnhancedCi, 8, 64),
        ];
        for (kind, ue, n) in cases {
            assert_eq!(slot_count(&cfg(kind, ue)).unwrap(), n, "{kind} ue={ue}");
        }
    }

    #[test]
    fn inconsistent_configs_rejected() {
        let mut c = cfg(ProcedureKind::Iterative, 4);
        c.bs_wide = Some(make_codebook(ArrayGeometry::bs_8x8(), 3, 4).unwrap());
        assert!(slot_count(&c).is_err());
        c.bs_wide = None;
        assert!(slot_count(&c).is_err());

        let mut c = cfg(ProcedureKind::PureCi, 4);
        c.ci_half_window = 1;
        assert!(slot_count(&c).is_err());

        let mut c = cfg(ProcedureKind::EnhancedCi, 4);
        c.ci_half_window = 2;
        assert!(slot_count(&c).is_err());
    }

    #[test]
    fn nested_sectors_cover_consecutive_narrow_beams() {
        let c = cfg(ProcedureKind::Iterative, 8);
        for k in 0..4 {
            assert_eq!(
                c.refinement_beams(k),
                (4 * k..4 * k + 4).collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn delay_arithmetic() {
        let p = OverheadPolicy::new(125e-6, 0.05).unwrap();
        assert!((discovery_delay(144, &p) - 0.360).abs() < 1e-12);
        let p = OverheadPolicy::new(15e-6, 0.05).unwrap();
        assert!((discovery_delay(32, &p) - 9.6e-3).abs() < 1e-15);
        let p = OverheadPolicy::new(37e-6, 1.0).unwrap();
        assert_eq!(discovery_delay(1, &p), 37e-6);
        assert!((OverheadPolicy::new(10e-6, 0.05).unwrap().t_per() - 200e-6).abs() < 1e-18);
        assert!(OverheadPolicy::new(10e-6, 0.0).is_err());
        assert!(OverheadPolicy::new(10e-6, 1.5).is_err());
    }

    #[test]
    fn aligned_los_detected_everywhere() {
        let budget = LinkBudget::default();
        let bearing = TAU * 5.0 / 16.0 + 0.01;
        let ch = link(vec![direct(bearing)], 80.0);
        let ex = run_exhaustive(&ch, &cfg(ProcedureKind::Exhaustive, 8), &budget, 10e-6).unwrap();
        assert!(ex.detected);
        assert_eq!(ex.best_bs_beam, Some(5));
        assert_eq!(ex.n_slots, 144);
        let it = run_iterative(&ch, &cfg(ProcedureKind::Iterative, 8), &budget, 10e-6).unwrap();
        assert!(it.detected);
        assert_eq!(it.best_bs_beam, ex.best_bs_beam);
        assert_eq!(it.best_ue_beam, ex.best_ue_beam);
        for kind in [ProcedureKind::PureCi, ProcedureKind::EnhancedCi] {
            let ci = run_procedure(&ch, &cfg(kind, 8), &budget, 10e-6, bearing).unwrap();
            assert!(ci.detected);
            assert_eq!(ci.best_bs_beam, ex.best_bs_beam);
        }
    }

    #[test]
    fn outage_misses_with_full_frame() {
        let budget = LinkBudget::default();
        let ch = ChannelRealization::outage(95.0);
        let ex = run_exhaustive(&ch, &cfg(ProcedureKind::Exhaustive, 4), &budget, 10e-6).unwrap();
        assert_eq!(ex, SearchOutcome::miss(80));
        let ex = run_exhaustive(&ch, &cfg(ProcedureKind::Exhaustive, 8), &budget, 10e-6).unwrap();
        assert_eq!(ex.n_slots, 144);
        let it = run_iterative(&ch, &cfg(ProcedureKind::Iterative, 4), &budget, 10e-6).unwrap();
        assert_eq!(it, SearchOutcome::miss(28));
        let it = run_iterative(&ch, &cfg(ProcedureKind::Iterative, 8), &budget, 10e-6).unwrap();
        assert_eq!(it.n_slots, 44);
    }

    #[test]
    fn iterative_misses_inside_the_wide_beam_gap() {
        // Narrow pair gain 64·4 = 256, wide pair gain 4·4 = 16: 12 dB apart.
        // Place the SNR so the narrow pair clears τ = -5 dB and the wide one
        // does not: snr_narrow = 30 + 24.08 - PL + 79 = -2  →  PL = 135.08.
        let budget = LinkBudget::default();
        let pl = 30.0 + 10.0 * 256f64.log10() + 79.0 + 2.0;
        let ch = link(vec![direct(1.0)], pl);
        let ex = run_exhaustive(&ch, &cfg(ProcedureKind::Exhaustive, 4), &budget, 10e-6).unwrap();
        assert!(ex.detected);
        assert!((ex.best_snr_db.unwrap() - (-2.0)).abs() < 1e-9);
        let it = run_iterative(&ch, &cfg(ProcedureKind::Iterative, 4), &budget, 10e-6).unwrap();
        assert!(!it.detected);
        assert_eq!(it.n_slots, 28);
    }

    #[test]
    fn ci_misses_paths_outside_its_window() {
        // 130 dB: the 64·16 mainlobe pair clears τ by ~14 dB, a UE sidelobe
        // (64·0.01) falls ~18 dB short
        let budget = LinkBudget::default();
        let bearing = 0.3;
        let ue_to_bs = wrap_angle(bearing + PI);
        let ue = ue_codebook(8).unwrap();
        let ci_beam = best_beam_for_bearing(&ue, ue_to_bs);

        // only path arrives two UE beams away from the direct direction
        let far_aoa = ue.codewords()[(ci_beam + 2) % 8].center_azimuth;
        let ch = link(
            vec![PathCluster {
                power_fraction: 1.0,
                aod: 2.0,
                aoa: far_aoa,
            }],
            130.0,
        );
        let ex = run_exhaustive(&ch, &cfg(ProcedureKind::Exhaustive, 8), &budget, 10e-6).unwrap();
        assert!(ex.detected);
        for kind in [ProcedureKind::PureCi, ProcedureKind::EnhancedCi] {
            let ci = run_procedure(&ch, &cfg(kind, 8), &budget, 10e-6, bearing).unwrap();
            assert!(!ci.detected, "{kind}");
        }

        // path in the adjacent beam: only the enhanced variant finds it
        let near_aoa = ue.codewords()[(ci_beam + 1) % 8].center_azimuth;
        let ch = link(
            vec![PathCluster {
                power_fraction: 1.0,
                aod: 2.0,
                aoa: near_aoa,
            }],
            130.0,
        );
        let pure =
            run_procedure(&ch, &cfg(ProcedureKind::PureCi, 8), &budget, 10e-6, bearing).unwrap();
        let enh = run_procedure(
            &ch,
            &cfg(ProcedureKind::EnhancedCi, 8),
            &budget,
            10e-6,
            bearing,
        )
        .unwrap();
        assert!(!pure.detected);
        assert!(enh.detected);
        assert_eq!(enh.best_ue_beam, Some((ci_beam + 1) % 8));
    }

    #[test]
    fn wrong_kind_rejected() {
        let budget = LinkBudget::default();
        let ch = link(vec![direct(0.0)], 100.0);
        assert!(run_ci(&ch, &cfg(ProcedureKind::Exhaustive, 4), &budget, 10e-6, 0.0).is_err());
        assert!(run_iterative(&ch, &cfg(ProcedureKind::Exhaustive, 4), &budget, 10e-6).is_err());
        assert!(run_exhaustive(&ch, &cfg(ProcedureKind::Exhaustive, 4), &budget, 1e-6).is_err());
    }

    #[test]
    fn ties_prefer_lowest_indices() {
        // two equal clusters seen by BS beams 3 and 9 through UE beams 6 and 1
        let bs = make_codebook(ArrayGeometry::bs_8x8(), 16, 64).unwrap();
        let ue = ue_codebook(8).unwrap();
        let c = |b: usize, u: usize| PathCluster {
            power_fraction: 0.5,
            aod: bs.codewords()[b].center_azimuth,
            aoa: ue.codewords()[u].center_azimuth,
        };
        let ch = link(vec![c(9, 1), c(3, 6)], 100.0);
        let out = run_exhaustive(
            &ch,
            &cfg(ProcedureKind::Exhaustive, 8),
            &LinkBudget::default(),
            10e-6,
        )
        .unwrap();
        assert_eq!((out.best_bs_beam, out.best_ue_beam), (Some(3), Some(6)));
    }
}
