//! CSV rendering.
//!
//! Header: `sweep_var,scheme,trial,total_power_w,sum_rate_bps,ee_bit_per_joule,n_active_sectors`.
//! Per-trial rows (from `simulate`) leave `sweep_var` empty; aggregated sweep
//! rows leave `trial` empty and carry trial means. An undefined EE is an
//! empty field. Floats use Rust's shortest round-trip formatting, so output
//! does not depend on locale.

use std::fmt::Write as _;

use cpz_core::{SweepResult, TrialReport};

pub const CSV_HEADER: &str =
    "sweep_var,scheme,trial,total_power_w,sum_rate_bps,ee_bit_per_joule,n_active_sectors";

fn ee_field(ee: Option<f64>) -> String {
    ee.map(|v| format!("{v:e}")).unwrap_or_default()
}

pub fn trials_csv(trials: &[TrialReport]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for t in trials {
        for r in &t.reports {
            writeln!(
                out,
                ",{},{},{:e},{:e},{},{}",
                r.scheme,
                t.trial,
                r.total_power,
                r.sum_rate,
                ee_field(r.ee),
                r.n_active_sectors
            )
            .unwrap();
        }
    }
    out
}

pub fn sweep_csv(result: &SweepResult) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in &result.rows {
        writeln!(
            out,
            "{},{},,{:e},{:e},{},{}",
            row.value,
            row.scheme,
            row.mean_total_power,
            row.mean_sum_rate,
            ee_field(row.mean_ee),
            row.mean_active_sectors
        )
        .unwrap();
    }
    out
}
