//! Monte Carlo estimation of misdetection probability.
//!
//! Every trial owns a ChaCha8 stream keyed by `(seed, trial index)`, so a
//! trial sees the same UE position and channel no matter which thread runs
//! it or how many procedures and signal durations are evaluated against it.
//! Per-trial outcomes are reduced with integer sums, which keeps estimates
//! bit-identical across worker counts.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{ChannelParams, LinkBudget};
use crate::error::{Error, Result};
use crate::procedures::{
    discovery_delay, run_procedure, slot_count, OverheadPolicy, ProcedureConfig, ProcedureKind,
};

pub type TrialRng = ChaCha8Rng;

/// Half-width z-score of a two-sided 95% normal interval.
pub const Z95: f64 = 1.96;

/// Relative bracket width at which the min-T_sig bisection stops.
pub const BISECTION_REL_TOL: f64 = 0.05;

/// Independent stream for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Uniform-by-area position in the annulus `r_inner ≤ r ≤ r_outer`.
/// Returns `(distance, bearing)`, bearing measured at the BS.
pub fn place_ue<R: Rng + ?Sized>(r_inner: f64, r_outer: f64, rng: &mut R) -> Result<(f64, f64)> {
    if !(r_inner >= 0.0 && r_inner <= r_outer && r_outer > 0.0 && r_outer.is_finite()) {
        return Err(Error::invalid(format!(
            "annulus needs 0 <= r_inner <= r_outer, got r_inner = {r_inner}, r_outer = {r_outer}"
        )));
    }
    let bearing = rng.random::<f64>() * TAU;
    let u: f64 = rng.random();
    let distance = if r_inner == r_outer {
        r_outer
    } else {
        (u * (r_outer * r_outer - r_inner * r_inner) + r_inner * r_inner).sqrt()
    };
    Ok((distance, bearing))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub procedure: ProcedureConfig,
    pub budget: LinkBudget,
    pub policy: OverheadPolicy,
    pub r_outer: f64,
    pub r_inner: f64,
    pub trials: u64,
    pub seed: u64,
    pub channel: ChannelParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            procedure: ProcedureConfig::standard(ProcedureKind::Exhaustive, 8)
                .expect("standard configuration is valid"),
            budget: LinkBudget::default(),
            policy: OverheadPolicy {
                t_sig: 10e-6,
                phi_ov: 0.05,
            },
            r_outer: 95.0,
            r_inner: 95.0,
            trials: 50_000,
            seed: 1,
            channel: ChannelParams::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.procedure.validate()?;
        self.channel.validate()?;
        OverheadPolicy::new(self.policy.t_sig, self.policy.phi_ov)?;
        if self.policy.t_sig < self.budget.t_ref {
            return Err(Error::validation(
                "run.t_sig_s",
                format!("must be at least budget.t_ref_s = {}", self.budget.t_ref),
            ));
        }
        if !(self.r_inner >= 1.0) {
            return Err(Error::validation(
                "run.r_inner_m",
                "must be at least 1 m (pathloss model lower limit)",
            ));
        }
        if !(self.r_inner <= self.r_outer && self.r_outer.is_finite()) {
            return Err(Error::validation(
                "run.r_outer_m",
                "must be finite and >= run.r_inner_m",
            ));
        }
        if self.trials == 0 {
            return Err(Error::validation("run.trials", "must be at least 1"));
        }
        let b = &self.budget;
        if !(b.bandwidth_hz > 0.0 && b.bandwidth_hz.is_finite()) {
            return Err(Error::validation("budget.bandwidth_hz", "must be positive"));
        }
        if !(b.t_ref > 0.0 && b.t_ref.is_finite()) {
            return Err(Error::validation("budget.t_ref_s", "must be positive"));
        }
        for (key, v) in [
            ("budget.dl_ptx_dbm", b.dl_ptx_dbm),
            ("budget.ul_ptx_dbm", b.ul_ptx_dbm),
            ("budget.noise_figure_db", b.noise_figure_db),
            ("budget.carrier_ghz", b.carrier_ghz),
            ("budget.tau_db", b.tau_db),
        ] {
            if !v.is_finite() {
                return Err(Error::validation(key, "must be finite"));
            }
        }
        Ok(())
    }

    /// Same scenario with every UE at exactly `d` metres.
    pub fn at_distance(&self, d: f64) -> Self {
        Self {
            r_inner: d,
            r_outer: d,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmdEstimate {
    pub pmd: f64,
    pub trials: u64,
    pub misses: u64,
    /// Trials whose link was in outage (a lower bound on `misses`).
    pub outages: u64,
    pub ci95_halfwidth: f64,
    pub mean_delay_s: f64,
}

impl PmdEstimate {
    pub fn from_counts(misses: u64, outages: u64, trials: u64, delay_s: f64) -> Self {
        let pmd = misses as f64 / trials as f64;
        Self {
            pmd,
            trials,
            misses,
            outages,
            ci95_halfwidth: ci95_halfwidth(pmd, trials),
            mean_delay_s: delay_s,
        }
    }

    pub fn outage_fraction(&self) -> f64 {
        self.outages as f64 / self.trials as f64
    }
}

/// `1.96·sqrt(p(1-p)/n)`.
pub fn ci95_halfwidth(p: f64, trials: u64) -> f64 {
    Z95 * (p * (1.0 - p) / trials as f64).sqrt()
}

/// Counts trials for which `hit` returns true, in parallel, with trial `i`
/// drawing from `trial_rng(seed, i)`.
pub fn count_hits<F>(trials: u64, seed: u64, hit: F) -> u64
where
    F: Fn(&mut TrialRng) -> bool + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|i| hit(&mut trial_rng(seed, i)) as u64)
        .sum()
}

/// Misses per (procedure, t_sig) cell, row-major by procedure, plus the
/// outage count, over paired trials.
fn paired_counts(
    scn: &ScenarioConfig,
    procedures: &[ProcedureConfig],
    t_sigs: &[f64],
) -> Result<(Vec<u64>, u64)> {
    let cells = procedures.len() * t_sigs.len();
    let zero = || (vec![0u64; cells], 0u64);
    (0..scn.trials)
        .into_par_iter()
        .try_fold(zero, |(mut misses, mut outages), i| -> Result<_> {
            let mut rng = trial_rng(scn.seed, i);
            let (d, bearing) = place_ue(scn.r_inner, scn.r_outer, &mut rng)?;
            let ch = scn.channel.sample_realization(d, bearing, &mut rng)?;
            outages += ch.is_outage() as u64;
            for (p, cfg) in procedures.iter().enumerate() {
                for (t, &t_sig) in t_sigs.iter().enumerate() {
                    let out = run_procedure(&ch, cfg, &scn.budget, t_sig, bearing)?;
                    misses[p * t_sigs.len() + t] += (!out.detected) as u64;
                }
            }
            Ok((misses, outages))
        })
        .try_reduce(zero, |(mut a, oa), (b, ob)| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            Ok((a, oa + ob))
        })
}

fn check_inputs(
    scn: &ScenarioConfig,
    procedures: &[ProcedureConfig],
    t_sigs: &[f64],
) -> Result<()> {
    scn.validate()?;
    for cfg in procedures {
        cfg.validate()?;
    }
    for &t in t_sigs {
        scn.budget.integration_gain_db(t)?;
    }
    Ok(())
}

/// PMD for every procedure at every signal duration, all evaluated on the
/// same trials. Indexed `[procedure][t_sig]`.
pub fn estimate_pmd_grid(
    scn: &ScenarioConfig,
    procedures: &[ProcedureConfig],
    t_sigs: &[f64],
) -> Result<Vec<Vec<PmdEstimate>>> {
    check_inputs(scn, procedures, t_sigs)?;
    let (misses, outages) = paired_counts(scn, procedures, t_sigs)?;
    procedures
        .iter()
        .enumerate()
        .map(|(p, cfg)| {
            let n_slots = slot_count(cfg)?;
            Ok(t_sigs
                .iter()
                .enumerate()
                .map(|(t, &t_sig)| {
                    let delay = discovery_delay(n_slots, &scn.policy.with_t_sig(t_sig));
                    PmdEstimate::from_counts(
                        misses[p * t_sigs.len() + t],
                        outages,
                        scn.trials,
                        delay,
                    )
                })
                .collect())
        })
        .collect()
}

/// PMD of several procedures on shared trials.
pub fn estimate_pmd_paired(
    scn: &ScenarioConfig,
    procedures: &[ProcedureConfig],
    t_sig: f64,
) -> Result<Vec<PmdEstimate>> {
    Ok(estimate_pmd_grid(scn, procedures, &[t_sig])?
        .into_iter()
        .map(|mut row| row.remove(0))
        .collect())
}

/// PMD of the scenario's own procedure at `t_sig`.
pub fn estimate_pmd(scn: &ScenarioConfig, t_sig: f64) -> Result<PmdEstimate> {
    Ok(estimate_pmd_paired(scn, std::slice::from_ref(&scn.procedure), t_sig)?[0])
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub label: String,
    pub kind: ProcedureKind,
    pub bs_antennas: usize,
    pub ue_antennas: usize,
    pub n_slots: usize,
    pub distance_m: f64,
    pub t_sig: f64,
    pub estimate: PmdEstimate,
}

fn row(
    cfg: &ProcedureConfig,
    distance_m: f64,
    t_sig: f64,
    estimate: PmdEstimate,
) -> Result<SweepRow> {
    Ok(SweepRow {
        label: cfg.label(),
        kind: cfg.kind,
        bs_antennas: cfg.bs_antennas(),
        ue_antennas: cfg.ue_antennas(),
        n_slots: slot_count(cfg)?,
        distance_m,
        t_sig,
        estimate,
    })
}

/// PMD against distance on degenerate annuli (`r_inner = r_outer = d`).
/// One row per distance per procedure, distance-major.
pub fn sweep_distance(
    scn: &ScenarioConfig,
    procedures: &[ProcedureConfig],
    distances: &[f64],
    t_sig: f64,
) -> Result<Vec<SweepRow>> {
    if distances.is_empty() {
        return Err(Error::invalid("distance sweep needs at least one distance"));
    }
    let mut rows = Vec::with_capacity(distances.len() * procedures.len());
    for &d in distances {
        let at = scn.at_distance(d);
        let est = estimate_pmd_paired(&at, procedures, t_sig)?;
        for (cfg, e) in procedures.iter().zip(est) {
            rows.push(row(cfg, d, t_sig, e)?);
        }
    }
    Ok(rows)
}

/// PMD against signal duration at constant overhead. One row per duration
/// per procedure, duration-major. The distance column reports `r_outer`.
pub fn sweep_tsig(
    scn: &ScenarioConfig,
    procedures: &[ProcedureConfig],
    t_sig_grid: &[f64],
) -> Result<Vec<SweepRow>> {
    if t_sig_grid.is_empty() {
        return Err(Error::invalid(
            "signal duration sweep needs at least one value",
        ));
    }
    let grid = estimate_pmd_grid(scn, procedures, t_sig_grid)?;
    let mut rows = Vec::with_capacity(t_sig_grid.len() * procedures.len());
    for (t, &t_sig) in t_sig_grid.iter().enumerate() {
        for (p, cfg) in procedures.iter().enumerate() {
            rows.push(row(cfg, scn.r_outer, t_sig, grid[p][t])?);
        }
    }
    Ok(rows)
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo * (hi / lo).powf(i as f64 / (n - 1) as f64)
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MinTsig {
    /// Smallest duration found with PMD strictly below the target.
    Reached(f64),
    /// PMD at the top of the bracket is still at or above the target.
    Unreachable,
}

impl MinTsig {
    pub fn t_sig(&self) -> Option<f64> {
        match self {
            MinTsig::Reached(t) => Some(*t),
            MinTsig::Unreachable => None,
        }
    }
}

/// Bisects (geometrically) for the smallest `t` in `[t_min, t_max]` with
/// `pmd_at(t) < target`, assuming `pmd_at` is non-increasing. Stops once the
/// bracket's relative width drops to `rel_tol` and returns its upper end.
pub fn bisect_min_tsig<F>(
    mut pmd_at: F,
    target: f64,
    t_min: f64,
    t_max: f64,
    rel_tol: f64,
) -> Result<MinTsig>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::invalid(format!(
            "target PMD must be in (0,1), got {target}"
        )));
    }
    if !(t_min > 0.0 && t_min <= t_max && t_max.is_finite()) {
        return Err(Error::invalid(format!(
            "signal duration bracket [{t_min}, {t_max}] is inverted or empty"
        )));
    }
    if pmd_at(t_min)? < target {
        return Ok(MinTsig::Reached(t_min));
    }
    if pmd_at(t_max)? >= target {
        return Ok(MinTsig::Unreachable);
    }
    let (mut lo, mut hi) = (t_min, t_max);
    while hi / lo - 1.0 > rel_tol {
        let mid = (lo * hi).sqrt();
        if pmd_at(mid)? < target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(MinTsig::Reached(hi))
}

/// Smallest signal duration whose estimated PMD falls below `target_pmd`.
/// Every evaluation reuses the scenario seed, so the estimated curve is
/// monotone in `t_sig` and the bisection is well defined.
pub fn min_tsig_for_pmd(
    scn: &ScenarioConfig,
    target_pmd: f64,
    t_min: f64,
    t_max: f64,
) -> Result<MinTsig> {
    if t_min < scn.budget.t_ref {
        return Err(Error::invalid(format!(
            "t_min {t_min} s is below the minimum signal duration {} s",
            scn.budget.t_ref
        )));
    }
    bisect_min_tsig(
        |t| Ok(estimate_pmd(scn, t)?.pmd),
        target_pmd,
        t_min,
        t_max,
        BISECTION_REL_TOL,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::LinkState;

    fn small(trials: u64) -> ScenarioConfig {
        ScenarioConfig {
            trials,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn degenerate_annulus() {
        let mut rng = trial_rng(1, 0);
        for _ in 0..1000 {
            assert_eq!(place_ue(95.0, 95.0, &mut rng).unwrap().0, 95.0);
        }
        assert!(place_ue(-1.0, 95.0, &mut rng).is_err());
        assert!(place_ue(100.0, 95.0, &mut rng).is_err());
    }

    #[test]
    fn disk_mean_distance() {
        // E[r] = 2R/3 for a uniform disk; sd(r) = R/sqrt(18)
        let n = 100_000;
        let mut rng = trial_rng(9, 0);
        let mean = (0..n)
            .map(|_| place_ue(0.0, 90.0, &mut rng).unwrap().0)
            .sum::<f64>()
            / n as f64;
        let tol = 4.0 * 90.0 / 18f64.sqrt() / (n as f64).sqrt();
        assert!((mean - 60.0).abs() < tol, "{mean}");
    }

    #[test]
    fn annulus_cdf_ks() {
        let (r2, r1) = (50.0, 100.0);
        let n = 100_000;
        let mut rng = trial_rng(4, 0);
        let mut rs: Vec<f64> = (0..n)
            .map(|_| place_ue(r2, r1, &mut rng).unwrap().0)
            .collect();
        rs.sort_by(f64::total_cmp);
        let cdf = |r: f64| (r * r - r2 * r2) / (r1 * r1 - r2 * r2);
        let ks = rs
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                let f = cdf(r);
                (f - i as f64 / n as f64)
                    .abs()
                    .max(((i + 1) as f64 / n as f64 - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.01, "KS = {ks}");
    }

    #[test]
    fn trial_streams_differ_and_replay() {
        let a: u64 = trial_rng(1, 0).random();
        let b: u64 = trial_rng(1, 1).random();
        let c: u64 = trial_rng(2, 0).random();
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, trial_rng(1, 0).random::<u64>());
    }

    #[test]
    fn forced_outage_never_detects() {
        let mut scn = small(2000);
        scn.channel.forced_state = Some(LinkState::Outage);
        let e = estimate_pmd(&scn, 10e-6).unwrap();
        assert_eq!(e.pmd, 1.0);
        assert_eq!(e.ci95_halfwidth, 0.0);
        assert_eq!(e.outages, 2000);
        let rows = sweep_tsig(&scn, &[scn.procedure.clone()], &log_grid(10e-6, 3e-3, 5)).unwrap();
        assert!(rows.iter().all(|r| r.estimate.pmd == 1.0));
    }

    #[test]
    fn strong_los_always_detects() {
        let mut scn = small(2000).at_distance(10.0);
        scn.channel.forced_state = Some(LinkState::Los);
        scn.channel.shadowing = false;
        for kind in ProcedureKind::ALL {
            let cfg = ProcedureConfig::standard(kind, 8).unwrap();
            let e = estimate_pmd_paired(&scn, &[cfg], 10e-6).unwrap()[0];
            assert_eq!(e.pmd, 0.0, "{kind}");
        }
    }

    #[test]
    fn worker_count_does_not_matter() {
        let scn = small(3000);
        let procs: Vec<_> = [
            ProcedureKind::Exhaustive,
            ProcedureKind::Iterative,
            ProcedureKind::PureCi,
        ]
        .into_iter()
        .map(|k| ProcedureConfig::standard(k, 4).unwrap())
        .collect();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| estimate_pmd_paired(&scn, &procs, 10e-6).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn delay_column() {
        let scn = small(200);
        let e = estimate_pmd(&scn, 125e-6).unwrap();
        assert!((e.mean_delay_s - 0.360).abs() < 1e-12);
    }

    #[test]
    fn bisection_against_closed_form() {
        // PMD(t) = exp(-t/c) crosses 0.01 at c·ln(100)
        let c = 2e-4;
        let exact = c * 100f64.ln();
        let got = bisect_min_tsig(
            |t| Ok((-t / c).exp()),
            0.01,
            10e-6,
            10e-3,
            BISECTION_REL_TOL,
        )
        .unwrap()
        .t_sig()
        .unwrap();
        assert!(got >= exact && got <= exact * 1.05, "{got} vs {exact}");

        let low = bisect_min_tsig(|_| Ok(0.001), 0.01, 10e-6, 1e-3, BISECTION_REL_TOL).unwrap();
        assert_eq!(low, MinTsig::Reached(10e-6));
        let floor = bisect_min_tsig(|_| Ok(0.3), 0.01, 10e-6, 1e-3, BISECTION_REL_TOL).unwrap();
        assert_eq!(floor, MinTsig::Unreachable);
        assert!(bisect_min_tsig(|_| Ok(0.3), 0.01, 1e-3, 1e-5, BISECTION_REL_TOL).is_err());
        assert!(bisect_min_tsig(|_| Ok(0.3), 1.0, 1e-5, 1e-3, BISECTION_REL_TOL).is_err());
    }

    #[test]
    fn outage_floor_is_unreachable() {
        // at 400 m the outage probability alone is ~0.9
        let scn = small(2000).at_distance(400.0);
        let p = scn.channel.link_state_probabilities(400.0).unwrap();
        assert!(p.outage > 0.5);
        let r = min_tsig_for_pmd(&scn, 0.01, 10e-6, 3e-3).unwrap();
        assert_eq!(r, MinTsig::Unreachable);
        assert!(min_tsig_for_pmd(&scn, 0.01, 1e-6, 3e-3).is_err());
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(10e-6, 3e-3, 10);
        assert_eq!(g.len(), 10);
        assert_eq!(g[0], 10e-6);
        assert_eq!(g[9], 3e-3);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn bernoulli_coverage() {
        // |p̂ - p| <= ci95 in at least 93% of seeded runs
        let p = 0.2;
        let trials = 2000;
        let runs = 400;
        let covered = (0..runs)
            .filter(|&seed| {
                let hits = count_hits(trials, seed, |rng| rng.random::<f64>() < p);
                let est = hits as f64 / trials as f64;
                (est - p).abs() <= ci95_halfwidth(est, trials)
            })
            .count();
        assert!(covered as f64 / runs as f64 >= 0.93, "{covered}/{runs}");
    }
}
