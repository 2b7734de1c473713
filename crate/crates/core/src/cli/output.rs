//! CSV rendering.
//!
//! Output is a `#`-prefixed metadata header followed by a plain CSV body.
//! The header carries the tool version, seed and full resolved config; the
//! body depends only on the config, so reruns produce identical bytes.

use std::fmt::Write as _;

use crate::cli::config::config_entries;
use crate::montecarlo::{ScenarioConfig, SweepRow};

pub const SWEEP_COLUMNS: &str =
    "procedure,bs_antennas,ue_antennas,n_slots,distance_m,t_sig_s,pmd,ci95,delay_ms,seed,trials";

/// `x` with six significant digits in positional notation.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (5 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

/// `x` rounded to four significant digits, shortest decimal form.
pub fn sig4_short(x: f64) -> String {
    let rounded: f64 = format!("{x:.3e}").parse().unwrap_or(x);
    format!("{rounded}")
}

/// Seconds rendered as milliseconds with three decimals.
pub fn ms3(seconds: f64) -> String {
    format!("{:.3}", seconds * 1e3)
}

pub fn header(command: &str, scn: &ScenarioConfig, overrides: &[String]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "# {} {}",
        env!("CARGO_PKG_NAME"),
        env!("CARGO_PKG_VERSION")
    );
    let _ = writeln!(s, "# command = {command}");
    let _ = writeln!(s, "# seed = {}", scn.seed);
    let _ = writeln!(
        s,
        "# overrides = {}",
        if overrides.is_empty() {
            "none".to_string()
        } else {
            overrides.join(", ")
        }
    );
    for (k, v) in config_entries(scn) {
        let _ = writeln!(s, "# {k} = {v}");
    }
    s
}

pub fn sweep_row(row: &SweepRow, seed: u64) -> String {
    let e = &row.estimate;
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        row.label,
        row.bs_antennas,
        row.ue_antennas,
        row.n_slots,
        row.distance_m,
        row.t_sig,
        sig6(e.pmd),
        sig6(e.ci95_halfwidth),
        ms3(e.mean_delay_s),
        seed,
        e.trials
    )
}

/// Lines of `text` that are not `#` metadata.
pub fn body(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .fold(String::new(), |mut acc, l| {
            acc.push_str(l);
            acc.push('\n');
            acc
        })
}
