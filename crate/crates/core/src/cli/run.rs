//! Experiment runner behind the command-line tool.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use crate::cli::config::{load_config_with_overrides, LoadedConfig};
use crate::cli::output::{header, ms3, sig4_short, sig6, sweep_row, SWEEP_COLUMNS};
use crate::error::{Error, Result};
use crate::montecarlo::{
    estimate_pmd, log_grid, min_tsig_for_pmd, sweep_distance, sweep_tsig, MinTsig, ScenarioConfig,
};
use crate::procedures::{
    discovery_delay, slot_count, OverheadPolicy, ProcedureConfig, ProcedureKind,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_UNREACHABLE: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Upper end of the default min-T_sig search bracket, seconds.
pub const DEFAULT_T_MAX: f64 = 3.16e-3;
pub const DEFAULT_TARGET_PMD: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    SweepDistance,
    SweepTsig,
    MinTsig,
    Table3,
    Validate,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::SweepDistance => "sweep-distance",
            Command::SweepTsig => "sweep-tsig",
            Command::MinTsig => "min-tsig",
            Command::Table3 => "table3",
            Command::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProcedureSelection {
    /// The six reference combinations (see [`reference_rows`]).
    All,
    Kind(ProcedureKind),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub command: Command,
    pub config_path: Option<PathBuf>,
    /// `None` writes to standard output.
    pub output_path: Option<PathBuf>,
    pub seed_override: Option<u64>,
    pub trials_override: Option<u64>,
    pub procedure: Option<ProcedureSelection>,
    pub ue_beams: Option<usize>,
    pub distances: Vec<f64>,
    pub tsigs: Vec<f64>,
    pub target_pmd: Option<f64>,
    /// Rayon worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
    /// `table3` only: append simulated min-T_sig columns.
    pub simulate: bool,
}

impl RunSpec {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            config_path: None,
            output_path: None,
            seed_override: None,
            trials_override: None,
            procedure: None,
            ue_beams: None,
            distances: Vec::new(),
            tsigs: Vec::new(),
            target_pmd: None,
            workers: None,
            simulate: false,
        }
    }
}

/// Signal duration of a reference row, microseconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RefTsig {
    Exactly(f64),
    /// Only a lower bound is known.
    Above(f64),
}

impl RefTsig {
    fn value(&self) -> f64 {
        match *self {
            RefTsig::Exactly(v) | RefTsig::Above(v) => v,
        }
    }

    fn prefix(&self) -> &'static str {
        match self {
            RefTsig::Exactly(_) => "",
            RefTsig::Above(_) => ">",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRow {
    pub kind: ProcedureKind,
    pub ue_beams: usize,
    pub n_slots: usize,
    /// Reference minimum T_sig for PMD < 0.01 at 95 m and 35 m.
    pub t_sig_95_us: RefTsig,
    pub t_sig_35_us: RefTsig,
}

/// Reference procedures with their expected slot counts and minimum
/// signal durations.
pub fn reference_rows() -> [ReferenceRow; 6] {
    use ProcedureKind::*;
    use RefTsig::*;
    let row = |kind, ue_beams, n_slots, t95, t35| ReferenceRow {
        kind,
        ue_beams,
        n_slots,
        t_sig_95_us: t95,
        t_sig_35_us: t35,
    };
    [
        row(Exhaustive, 4, 80, Exactly(400.0), Exactly(13.0)),
        row(Exhaustive, 8, 144, Exactly(125.0), Exactly(10.0)),
        row(Iterative, 4, 28, Above(3160.0), Exactly(160.0)),
        row(Iterative, 8, 44, Exactly(1580.0), Exactly(50.0)),
        row(PureCi, 4, 32, Exactly(630.0), Exactly(15.0)),
        row(EnhancedCi, 8, 64, Exactly(150.0), Exactly(10.0)),
    ]
}

/// Reference discovery delays `(n_slots, t_sig µs, delay ms, relative
/// tolerance)` at 5% overhead. Two entries are rounded.
pub const REFERENCE_DELAYS: [(usize, f64, f64, f64); 11] = [
    (80, 400.0, 640.0, 1e-9),
    (144, 125.0, 360.0, 1e-9),
    (44, 1580.0, 1390.0, 5e-3),
    (80, 13.0, 20.8, 1e-9),
    (144, 10.0, 28.8, 1e-9),
    (28, 160.0, 89.6, 1e-9),
    (44, 50.0, 44.0, 1e-9),
    (32, 630.0, 403.0, 5e-3),
    (64, 150.0, 192.0, 1e-9),
    (32, 15.0, 9.6, 1e-9),
    (64, 10.0, 12.8, 1e-9),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
}

/// Slot-count, delay-arithmetic and LOS-probability oracles. No simulation.
pub fn validation_checks(scn: &ScenarioConfig) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for r in reference_rows() {
        let cfg = ProcedureConfig::standard(r.kind, r.ue_beams)?;
        let n = slot_count(&cfg)?;
        checks.push(Check {
            name: format!("slots {}", cfg.label()),
            expected: r.n_slots.to_string(),
            observed: n.to_string(),
            pass: n == r.n_slots,
        });
    }
    for (n, t_us, delay_ms, tol) in REFERENCE_DELAYS {
        let policy = OverheadPolicy::new(t_us * 1e-6, 0.05)?;
        let got = discovery_delay(n, &policy) * 1e3;
        checks.push(Check {
            name: format!("delay {n} slots @ {t_us} us"),
            expected: format!("{delay_ms} ms"),
            observed: format!("{} ms", ms3(got / 1e3)),
            pass: ((got - delay_ms) / delay_ms).abs() <= tol,
        });
    }
    let p = scn.channel.link_state_probabilities(35.0)?;
    checks.push(Check {
        name: "p_los(35 m)".into(),
        expected: "0.60 +/- 0.03".into(),
        observed: format!("{:.4}", p.los),
        pass: (p.los - 0.60).abs() <= 0.03,
    });
    Ok(checks)
}

/// Which procedures a run evaluates.
pub fn select_procedures(
    scn: &ScenarioConfig,
    selection: Option<ProcedureSelection>,
    ue_beams: Option<usize>,
) -> Result<Vec<ProcedureConfig>> {
    let sidelobe = scn.procedure.bs_narrow.codewords()[0].sidelobe_gain;
    let ue = ue_beams.unwrap_or(scn.procedure.ue_codebook.len());
    match selection {
        Some(ProcedureSelection::All) => reference_rows()
            .iter()
            .map(|r| {
                ProcedureConfig::with_sidelobe(r.kind, ue_beams.unwrap_or(r.ue_beams), sidelobe)
            })
            .collect(),
        Some(ProcedureSelection::Kind(kind)) => {
            let mut cfg = ProcedureConfig::with_sidelobe(kind, ue, sidelobe)?;
            if kind == scn.procedure.kind {
                cfg.ci_half_window = scn.procedure.ci_half_window;
                cfg.validate()?;
            }
            Ok(vec![cfg])
        }
        None if ue_beams.is_some() => {
            let mut cfg = ProcedureConfig::with_sidelobe(scn.procedure.kind, ue, sidelobe)?;
            cfg.ci_half_window = scn.procedure.ci_half_window;
            cfg.validate()?;
            Ok(vec![cfg])
        }
        None => Ok(vec![scn.procedure.clone()]),
    }
}

fn resolve(spec: &RunSpec) -> Result<LoadedConfig> {
    let mut loaded = match &spec.config_path {
        Some(path) => load_config_with_overrides(path).map_err(|e| match e {
            Error::Io(io) => Error::invalid(format!("cannot read {}: {io}", path.display())),
            other => other,
        })?,
        None => LoadedConfig {
            scenario: ScenarioConfig::default(),
            overrides: Vec::new(),
        },
    };
    if let Some(seed) = spec.seed_override {
        loaded.scenario.seed = seed;
        loaded.overrides.push("run.seed".into());
    }
    if let Some(trials) = spec.trials_override {
        if trials == 0 {
            return Err(Error::validation("run.trials", "must be at least 1"));
        }
        loaded.scenario.trials = trials;
        loaded.overrides.push("run.trials".into());
    }
    if spec.procedure.is_some() {
        loaded.overrides.push("procedure.kind".into());
    }
    if spec.ue_beams.is_some() {
        loaded.overrides.push("procedure.ue_beams".into());
    }
    Ok(loaded)
}

/// Output of one run: the rendered document plus whether any min-T_sig
/// target was unreachable or any validation check failed.
struct Rendered {
    text: String,
    unreachable: bool,
    failed_checks: bool,
}

fn default_distances() -> Vec<f64> {
    (1..=20).map(|i| 10.0 * i as f64).collect()
}

fn render(spec: &RunSpec, loaded: &LoadedConfig) -> Result<Rendered> {
    let scn = &loaded.scenario;
    let mut text = header(spec.command.as_str(), scn, &loaded.overrides);
    let mut unreachable = false;
    let mut failed_checks = false;

    match spec.command {
        Command::SweepDistance => {
            let procs = select_procedures(scn, spec.procedure, spec.ue_beams)?;
            let distances = if spec.distances.is_empty() {
                default_distances()
            } else {
                spec.distances.clone()
            };
            let t_sig = spec.tsigs.first().copied().unwrap_or(scn.policy.t_sig);
            let rows = sweep_distance(scn, &procs, &distances, t_sig)?;
            writeln!(text, "{SWEEP_COLUMNS}").ok();
            for r in &rows {
                writeln!(text, "{}", sweep_row(r, scn.seed)).ok();
            }
        }
        Command::SweepTsig => {
            let procs = select_procedures(scn, spec.procedure, spec.ue_beams)?;
            let grid = if spec.tsigs.is_empty() {
                log_grid(scn.budget.t_ref, 3e-3, 10)
            } else {
                spec.tsigs.clone()
            };
            let at = match spec.distances.first() {
                Some(&d) => scn.at_distance(d),
                None => scn.clone(),
            };
            let rows = sweep_tsig(&at, &procs, &grid)?;
            writeln!(text, "{SWEEP_COLUMNS}").ok();
            for r in &rows {
                writeln!(text, "{}", sweep_row(r, scn.seed)).ok();
            }
        }
        Command::MinTsig => {
            let procs = select_procedures(scn, spec.procedure, spec.ue_beams)?;
            let target = spec.target_pmd.unwrap_or(DEFAULT_TARGET_PMD);
            let (t_min, t_max) = match spec.tsigs.as_slice() {
                [] => (scn.budget.t_ref, DEFAULT_T_MAX),
                [hi] => (scn.budget.t_ref, *hi),
                [lo, hi, ..] => (*lo, *hi),
            };
            let scenarios: Vec<ScenarioConfig> = if spec.distances.is_empty() {
                vec![scn.clone()]
            } else {
                spec.distances.iter().map(|&d| scn.at_distance(d)).collect()
            };
            writeln!(
                text,
                "procedure,bs_antennas,ue_antennas,n_slots,distance_m,target_pmd,min_t_sig_s,pmd,ci95,delay_ms,seed,trials"
            )
            .ok();
            for s in &scenarios {
                for cfg in &procs {
                    let s = ScenarioConfig {
                        procedure: cfg.clone(),
                        ..s.clone()
                    };
                    let found = min_tsig_for_pmd(&s, target, t_min, t_max)?;
                    let (t_col, at) = match found {
                        MinTsig::Reached(t) => (sig4_short(t), t),
                        MinTsig::Unreachable => {
                            unreachable = true;
                            ("unreachable".to_string(), t_max)
                        }
                    };
                    let e = estimate_pmd(&s, at)?;
                    let delay = match found {
                        MinTsig::Reached(_) => ms3(e.mean_delay_s),
                        MinTsig::Unreachable => String::new(),
                    };
                    writeln!(
                        text,
                        "{},{},{},{},{},{},{},{},{},{},{},{}",
                        cfg.label(),
                        cfg.bs_antennas(),
                        cfg.ue_antennas(),
                        slot_count(cfg)?,
                        s.r_outer,
                        target,
                        t_col,
                        sig6(e.pmd),
                        sig6(e.ci95_halfwidth),
                        delay,
                        s.seed,
                        s.trials
                    )
                    .ok();
                }
            }
        }
        Command::Table3 => {
            let phi = scn.policy.phi_ov;
            let target = spec.target_pmd.unwrap_or(DEFAULT_TARGET_PMD);
            write!(
                text,
                "procedure,bs_antennas,ue_antennas,n_slots,ref_t_sig_95_us,ref_delay_95_ms,ref_t_sig_35_us,ref_delay_35_ms"
            )
            .ok();
            if spec.simulate {
                write!(
                    text,
                    ",model_t_sig_95_us,model_delay_95_ms,model_t_sig_35_us,model_delay_35_ms"
                )
                .ok();
            }
            writeln!(text).ok();
            for r in reference_rows() {
                let cfg = ProcedureConfig::standard(r.kind, r.ue_beams)?;
                let n = slot_count(&cfg)?;
                let delay = |t: RefTsig| -> Result<String> {
                    let p = OverheadPolicy::new(t.value() * 1e-6, phi)?;
                    Ok(format!("{}{}", t.prefix(), ms3(discovery_delay(n, &p))))
                };
                let t = |t: RefTsig| format!("{}{}", t.prefix(), t.value());
                write!(
                    text,
                    "{},{},{},{},{},{},{},{}",
                    cfg.label(),
                    cfg.bs_antennas(),
                    cfg.ue_antennas(),
                    n,
                    t(r.t_sig_95_us),
                    delay(r.t_sig_95_us)?,
                    t(r.t_sig_35_us),
                    delay(r.t_sig_35_us)?
                )
                .ok();
                if spec.simulate {
                    for d in [95.0, 35.0] {
                        let s = ScenarioConfig {
                            procedure: cfg.clone(),
                            ..scn.at_distance(d)
                        };
                        match min_tsig_for_pmd(&s, target, scn.budget.t_ref, DEFAULT_T_MAX)? {
                            MinTsig::Reached(t) => {
                                let p = OverheadPolicy::new(t, phi)?;
                                write!(text, ",{:.1},{}", t * 1e6, ms3(discovery_delay(n, &p)))
                                    .ok();
                            }
                            MinTsig::Unreachable => {
                                write!(text, ",unreachable,").ok();
                            }
                        }
                    }
                }
                writeln!(text).ok();
            }
        }
        Command::Validate => {
            writeln!(text, "check,expected,observed,status").ok();
            for c in validation_checks(scn)? {
                failed_checks |= !c.pass;
                writeln!(
                    text,
                    "{},{},{},{}",
                    c.name,
                    c.expected,
                    c.observed,
                    if c.pass { "PASS" } else { "FAIL" }
                )
                .ok();
            }
        }
    }
    Ok(Rendered {
        text,
        unreachable,
        failed_checks,
    })
}

fn write_output(spec: &RunSpec, text: &str) -> std::io::Result<()> {
    match &spec.output_path {
        Some(path) => std::fs::write(path, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

/// Runs one experiment and returns the process exit code.
pub fn run(spec: &RunSpec) -> i32 {
    let loaded = match resolve(spec) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let rendered = match spec.workers {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| render(spec, &loaded)),
            Err(e) => {
                eprintln!("error: cannot start {n} workers: {e}");
                return EXIT_CONFIG;
            }
        },
        None => render(spec, &loaded),
    };
    let rendered = match rendered {
        Ok(r) => r,
        Err(Error::Io(e)) => {
            eprintln!("error: {e}");
            return EXIT_IO;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Err(e) = write_output(spec, &rendered.text) {
        eprintln!("error: cannot write output: {e}");
        return EXIT_IO;
    }
    if rendered.unreachable {
        EXIT_UNREACHABLE
    } else if rendered.failed_checks {
        EXIT_CHECK_FAILED
    } else {
        EXIT_OK
    }
}
