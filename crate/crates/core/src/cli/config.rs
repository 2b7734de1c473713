//! Scenario configuration files.
//!
//! A config file is a flat list of `section.key = value` lines (valid TOML
//! with dotted keys). Sections are `budget`, `channel`, `procedure` and
//! `run`; any key left out keeps its default. See `docs/config.md` for the
//! full schema.

use std::fmt::Write as _;
use std::path::Path;

use toml::{Table, Value};

use crate::beams::DEFAULT_SIDELOBE_GAIN;
use crate::channel::{AngleModel, LinkState};
use crate::error::{Error, Result};
use crate::montecarlo::ScenarioConfig;
use crate::procedures::{ProcedureConfig, ProcedureKind};

/// Every accepted key, in emission order.
pub const KEYS: &[&str] = &[
    "budget.dl_ptx_dbm",
    "budget.ul_ptx_dbm",
    "budget.bandwidth_hz",
    "budget.noise_figure_db",
    "budget.carrier_ghz",
    "budget.tau_db",
    "budget.t_ref_s",
    "channel.outage_scale_m",
    "channel.outage_offset",
    "channel.los_scale_m",
    "channel.los_intercept_db",
    "channel.los_exponent",
    "channel.los_sigma_db",
    "channel.nlos_intercept_db",
    "channel.nlos_exponent",
    "channel.nlos_sigma_db",
    "channel.shadowing",
    "channel.cluster_lambda",
    "channel.los_deterministic_angle",
    "channel.angle_model",
    "channel.angle_spread_deg",
    "channel.force_state",
    "procedure.kind",
    "procedure.ue_beams",
    "procedure.ci_half_window",
    "procedure.sidelobe_gain",
    "run.trials",
    "run.seed",
    "run.r_inner_m",
    "run.r_outer_m",
    "run.t_sig_s",
    "run.phi_ov",
];

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub scenario: ScenarioConfig,
    /// Keys explicitly set by the file, in file order.
    pub overrides: Vec<String>,
}

/// Procedure settings kept in file form until the codebooks are built.
#[derive(Debug, Clone, Copy)]
struct ProcedureSettings {
    kind: ProcedureKind,
    ue_beams: usize,
    half_window: Option<usize>,
    sidelobe_gain: f64,
}

impl ProcedureSettings {
    fn of(cfg: &ProcedureConfig) -> Self {
        Self {
            kind: cfg.kind,
            ue_beams: cfg.ue_codebook.len(),
            half_window: Some(cfg.ci_half_window),
            sidelobe_gain: cfg.bs_narrow.codewords()[0].sidelobe_gain,
        }
    }

    fn build(&self) -> Result<ProcedureConfig> {
        let mut cfg = ProcedureConfig::with_sidelobe(self.kind, self.ue_beams, self.sidelobe_gain)
            .map_err(|e| Error::validation("procedure", strip(e)))?;
        if let Some(h) = self.half_window {
            cfg.ci_half_window = h;
        }
        cfg.validate()
            .map_err(|e| Error::validation("procedure.ci_half_window", strip(e)))?;
        Ok(cfg)
    }
}

fn strip(e: Error) -> String {
    match e {
        Error::InvalidArgument(m) => m,
        other => other.to_string(),
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Flattens `section.key` tables (section order, then file order within a
/// section); rejects nesting deeper than one level.
fn flatten(table: Table) -> Result<Vec<(String, Value)>> {
    let mut out = Vec::new();
    for (section, value) in table {
        let Value::Table(inner) = value else {
            return Err(Error::validation(
                section.clone(),
                "top-level keys must be namespaced as section.key",
            ));
        };
        for (key, v) in inner {
            let full = format!("{section}.{key}");
            if matches!(v, Value::Table(_)) {
                return Err(Error::validation(full, "nested tables are not supported"));
            }
            out.push((full, v));
        }
    }
    Ok(out)
}

fn num(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(Error::validation(key, "expected a number")),
    }
}

fn uint(key: &str, v: &Value) -> Result<u64> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        _ => Err(Error::validation(key, "expected a non-negative integer")),
    }
}

fn boolean(key: &str, v: &Value) -> Result<bool> {
    v.as_bool()
        .ok_or_else(|| Error::validation(key, "expected true or false"))
}

fn string<'a>(key: &str, v: &'a Value) -> Result<&'a str> {
    v.as_str()
        .ok_or_else(|| Error::validation(key, "expected a quoted string"))
}

fn parse_state(key: &str, s: &str) -> Result<Option<LinkState>> {
    match s {
        "none" => Ok(None),
        "los" => Ok(Some(LinkState::Los)),
        "nlos" => Ok(Some(LinkState::Nlos)),
        "outage" => Ok(Some(LinkState::Outage)),
        other => Err(Error::validation(
            key,
            format!("expected none, los, nlos or outage, got `{other}`"),
        )),
    }
}

/// Applies one `key = value` pair.
fn apply(
    scn: &mut ScenarioConfig,
    procedure: &mut ProcedureSettings,
    spread_deg: &mut Option<f64>,
    key: &str,
    v: &Value,
) -> Result<()> {
    let b = &mut scn.budget;
    let ch = &mut scn.channel;
    match key {
        "budget.dl_ptx_dbm" => b.dl_ptx_dbm = num(key, v)?,
        "budget.ul_ptx_dbm" => b.ul_ptx_dbm = num(key, v)?,
        "budget.bandwidth_hz" => b.bandwidth_hz = num(key, v)?,
        "budget.noise_figure_db" => b.noise_figure_db = num(key, v)?,
        "budget.carrier_ghz" => b.carrier_ghz = num(key, v)?,
        "budget.tau_db" => b.tau_db = num(key, v)?,
        "budget.t_ref_s" => b.t_ref = num(key, v)?,
        "channel.outage_scale_m" => ch.outage_scale_m = num(key, v)?,
        "channel.outage_offset" => ch.outage_offset = num(key, v)?,
        "channel.los_scale_m" => ch.los_scale_m = num(key, v)?,
        "channel.los_intercept_db" => ch.los.intercept_db = num(key, v)?,
        "channel.los_exponent" => ch.los.exponent = num(key, v)?,
        "channel.los_sigma_db" => ch.los.shadowing_sigma_db = num(key, v)?,
        "channel.nlos_intercept_db" => ch.nlos.intercept_db = num(key, v)?,
        "channel.nlos_exponent" => ch.nlos.exponent = num(key, v)?,
        "channel.nlos_sigma_db" => ch.nlos.shadowing_sigma_db = num(key, v)?,
        "channel.shadowing" => ch.shadowing = boolean(key, v)?,
        "channel.cluster_lambda" => ch.cluster_lambda = num(key, v)?,
        "channel.los_deterministic_angle" => ch.los_deterministic_angle = boolean(key, v)?,
        "channel.angle_model" => {
            ch.angles = match string(key, v)? {
                "uniform" => AngleModel::Uniform,
                "direct-path" => AngleModel::AroundDirectPath {
                    spread_deg: crate::channel::DEFAULT_ANGLE_SPREAD_DEG,
                },
                other => {
                    return Err(Error::validation(
                        key,
                        format!("expected uniform or direct-path, got `{other}`"),
                    ))
                }
            }
        }
        "channel.angle_spread_deg" => *spread_deg = Some(num(key, v)?),
        "channel.force_state" => ch.forced_state = parse_state(key, string(key, v)?)?,
        "procedure.kind" => {
            procedure.kind = string(key, v)?
                .parse()
                .map_err(|e| Error::validation(key, strip(e)))?
        }
        "procedure.ue_beams" => {
            let n = uint(key, v)?;
            if n != 4 && n != 8 {
                return Err(Error::validation(key, "ue_beams must be 4 or 8"));
            }
            procedure.ue_beams = n as usize;
        }
        "procedure.ci_half_window" => procedure.half_window = Some(uint(key, v)? as usize),
        "procedure.sidelobe_gain" => {
            let g = num(key, v)?;
            if !(g > 0.0 && g < 1.0) {
                return Err(Error::validation(key, "sidelobe_gain must be in (0,1)"));
            }
            procedure.sidelobe_gain = g;
        }
        "run.trials" => scn.trials = uint(key, v)?,
        "run.seed" => scn.seed = uint(key, v)?,
        "run.r_inner_m" => scn.r_inner = num(key, v)?,
        "run.r_outer_m" => scn.r_outer = num(key, v)?,
        "run.t_sig_s" => scn.policy.t_sig = num(key, v)?,
        "run.phi_ov" => {
            let phi = num(key, v)?;
            if !(phi > 0.0 && phi <= 1.0) {
                return Err(Error::validation(key, "phi_ov must be in (0,1]"));
            }
            scn.policy.phi_ov = phi;
        }
        other => return Err(Error::validation(other, "unknown key")),
    }
    Ok(())
}

/// Parses config text on top of the default scenario.
pub fn parse_config(text: &str) -> Result<LoadedConfig> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| Error::Parse {
        line: e.span().map_or(1, |s| line_of(text, s.start)),
        message: e.message().trim().to_string(),
    })?;
    let entries = flatten(table)?;

    let mut scenario = ScenarioConfig::default();
    let mut procedure = ProcedureSettings {
        kind: scenario.procedure.kind,
        ue_beams: scenario.procedure.ue_codebook.len(),
        half_window: None,
        sidelobe_gain: DEFAULT_SIDELOBE_GAIN,
    };
    let mut spread = None;
    let mut overrides = Vec::with_capacity(entries.len());
    for (key, value) in &entries {
        apply(&mut scenario, &mut procedure, &mut spread, key, value)?;
        overrides.push(key.clone());
    }
    if let (Some(s), AngleModel::AroundDirectPath { spread_deg }) =
        (spread, &mut scenario.channel.angles)
    {
        *spread_deg = s;
    }
    scenario.procedure = procedure.build()?;
    scenario.validate().map_err(|e| match e {
        Error::InvalidArgument(m) => Error::validation("config", m),
        other => other,
    })?;
    Ok(LoadedConfig {
        scenario,
        overrides,
    })
}

/// Reads and validates a config file.
pub fn load_config_with_overrides(path: &Path) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    Ok(load_config_with_overrides(path)?.scenario)
}

fn float(v: f64) -> String {
    // Debug keeps a decimal point or exponent and round-trips exactly
    format!("{v:?}")
}

fn state_str(s: Option<LinkState>) -> &'static str {
    s.map_or("none", |s| s.as_str())
}

/// Resolved `(key, rendered value)` pairs for a scenario.
pub fn config_entries(scn: &ScenarioConfig) -> Vec<(&'static str, String)> {
    let b = &scn.budget;
    let ch = &scn.channel;
    let p = ProcedureSettings::of(&scn.procedure);
    let q = |s: &str| format!("\"{s}\"");
    let mut out = vec![
        ("budget.dl_ptx_dbm", float(b.dl_ptx_dbm)),
        ("budget.ul_ptx_dbm", float(b.ul_ptx_dbm)),
        ("budget.bandwidth_hz", float(b.bandwidth_hz)),
        ("budget.noise_figure_db", float(b.noise_figure_db)),
        ("budget.carrier_ghz", float(b.carrier_ghz)),
        ("budget.tau_db", float(b.tau_db)),
        ("budget.t_ref_s", float(b.t_ref)),
        ("channel.outage_scale_m", float(ch.outage_scale_m)),
        ("channel.outage_offset", float(ch.outage_offset)),
        ("channel.los_scale_m", float(ch.los_scale_m)),
        ("channel.los_intercept_db", float(ch.los.intercept_db)),
        ("channel.los_exponent", float(ch.los.exponent)),
        ("channel.los_sigma_db", float(ch.los.shadowing_sigma_db)),
        ("channel.nlos_intercept_db", float(ch.nlos.intercept_db)),
        ("channel.nlos_exponent", float(ch.nlos.exponent)),
        ("channel.nlos_sigma_db", float(ch.nlos.shadowing_sigma_db)),
        ("channel.shadowing", ch.shadowing.to_string()),
        ("channel.cluster_lambda", float(ch.cluster_lambda)),
        (
            "channel.los_deterministic_angle",
            ch.los_deterministic_angle.to_string(),
        ),
    ];
    match ch.angles {
        AngleModel::Uniform => out.push(("channel.angle_model", q("uniform"))),
        AngleModel::AroundDirectPath { spread_deg } => {
            out.push(("channel.angle_model", q("direct-path")));
            out.push(("channel.angle_spread_deg", float(spread_deg)));
        }
    }
    out.extend([
        ("channel.force_state", q(state_str(ch.forced_state))),
        ("procedure.kind", q(p.kind.as_str())),
        ("procedure.ue_beams", p.ue_beams.to_string()),
        (
            "procedure.ci_half_window",
            p.half_window.unwrap_or(0).to_string(),
        ),
        ("procedure.sidelobe_gain", float(p.sidelobe_gain)),
        ("run.trials", scn.trials.to_string()),
        ("run.seed", scn.seed.to_string()),
        ("run.r_inner_m", float(scn.r_inner)),
        ("run.r_outer_m", float(scn.r_outer)),
        ("run.t_sig_s", float(scn.policy.t_sig)),
        ("run.phi_ov", float(scn.policy.phi_ov)),
    ]);
    out
}

/// Renders a scenario as a config document that parses back to itself.
pub fn emit_config(scn: &ScenarioConfig) -> String {
    let mut s = String::new();
    for (k, v) in config_entries(scn) {
        let _ = writeln!(s, "{k} = {v}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::procedures::ProcedureKind;

    #[test]
    fn empty_file_is_default() {
        let c = parse_config("").unwrap();
        assert_eq!(c.scenario, ScenarioConfig::default());
        assert!(c.overrides.is_empty());
        let b = &c.scenario.budget;
        assert_eq!(
            (
                b.dl_ptx_dbm,
                b.ul_ptx_dbm,
                b.bandwidth_hz,
                b.noise_figure_db,
                b.carrier_ghz,
                b.tau_db,
                b.t_ref
            ),
            (30.0, 23.0, 1e9, 5.0, 28.0, -5.0, 10e-6)
        );
        assert_eq!(c.scenario.policy.phi_ov, 0.05);
        assert_eq!(c.scenario.procedure.bs_antennas(), 64);
    }

    #[test]
    fn phi_ov_zero_rejected() {
        let e = parse_config("run.phi_ov = 0\n").unwrap_err();
        assert!(e.to_string().contains("phi_ov must be in (0,1]"), "{e}");
        assert!(e.to_string().contains("run.phi_ov"), "{e}");
    }

    #[test]
    fn overrides_are_applied_and_recorded() {
        let c = parse_config(
            "budget.tau_db = -10\nprocedure.kind = \"iterative\"\nprocedure.ue_beams = 4\n",
        )
        .unwrap();
        assert_eq!(c.scenario.budget.tau_db, -10.0);
        assert_eq!(c.scenario.procedure.kind, ProcedureKind::Iterative);
        assert_eq!(
            c.overrides,
            ["budget.tau_db", "procedure.kind", "procedure.ue_beams"]
        );
        assert!(emit_config(&c.scenario).contains("budget.tau_db = -10.0"));
    }

    #[test]
    fn errors_name_line_or_key() {
        match parse_config("run.trials = 10\nbudget.tau_db = = 3\n").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("{other}"),
        }
        match parse_config("budget.bogus = 1\n").unwrap_err() {
            Error::Validation { key, .. } => assert_eq!(key, "budget.bogus"),
            other => panic!("{other}"),
        }
        match parse_config("run.trials = \"many\"\n").unwrap_err() {
            Error::Validation { key, .. } => assert_eq!(key, "run.trials"),
            other => panic!("{other}"),
        }
        match parse_config("procedure.ue_beams = 6\n").unwrap_err() {
            Error::Validation { key, .. } => assert_eq!(key, "procedure.ue_beams"),
            other => panic!("{other}"),
        }
        match parse_config("run.r_inner_m = 50\nrun.r_outer_m = 40\n").unwrap_err() {
            Error::Validation { key, .. } => assert_eq!(key, "run.r_outer_m"),
            other => panic!("{other}"),
        }
        assert!(parse_config("trials = 3\n").is_err());
    }

    #[test]
    fn enhanced_window_override() {
        let c = parse_config("procedure.kind = \"enhanced-ci\"\nprocedure.ci_half_window = 2\n")
            .unwrap();
        assert_eq!(c.scenario.procedure.ci_half_window, 2);
        assert!(
            parse_config("procedure.kind = \"enhanced-ci\"\nprocedure.ci_half_window = 4\n")
                .is_err()
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn kind() -> impl Strategy<Value = ProcedureKind> {
            prop::sample::select(ProcedureKind::ALL.to_vec())
        }

        proptest! {
            #[test]
            fn emit_then_load_round_trips(
                k in kind(),
                ue in prop::sample::select(vec![4usize, 8]),
                tau in -20.0f64..10.0,
                seed in 0u64..(i64::MAX as u64),
                trials in 1u64..1_000_000,
                r_in in 1.0f64..200.0,
                extra in 0.0f64..100.0,
                t_sig in 10e-6f64..5e-3,
                phi in 0.001f64..1.0,
                spread in prop::option::of(0.0f64..60.0),
                sidelobe in 1e-4f64..0.5,
                shadowing in any::<bool>(),
            ) {
                let mut scn = ScenarioConfig::default();
                scn.procedure = ProcedureConfig::with_sidelobe(k, ue, sidelobe).unwrap();
                scn.budget.tau_db = tau;
                scn.seed = seed;
                scn.trials = trials;
                scn.r_inner = r_in;
                scn.r_outer = r_in + extra;
                scn.policy.t_sig = t_sig;
                scn.policy.phi_ov = phi;
                scn.channel.shadowing = shadowing;
                scn.channel.angles = match spread {
                    Some(s) => AngleModel::AroundDirectPath { spread_deg: s },
                    None => AngleModel::Uniform,
                };
                let text = emit_config(&scn);
                let back = parse_config(&text).unwrap().scenario;
                prop_assert_eq!(back, scn);
            }
        }
    }
}
