//! Power allocation schemes and energy efficiency.
//!
//! All three schemes size BS power so that a user at the covered radius
//! reaches the target ergodic rate:
//!
//! * always-max covers the full disk to `R` whatever the occupancy;
//! * zooming covers the full circle out to the farthest occupied ring and
//!   sleeps when the cell is empty;
//! * CPZ powers only occupied sectors, each out to its own zoom radius and
//!   weighted by its angular share `theta / 2 pi`.
//!
//! A user in a CPZ sector sees the same power density as under full-circle
//! coverage at that sector's radius, so its rate is computed with the
//! full-circle power for that radius.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::mimo::{per_ue_rate, RateModelParams};
use crate::partition::{CpzState, UeId};
use crate::propagation::{required_bs_power, snr_rho, LinkBudget};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    AlwaysMax,
    Zooming,
    Cpz,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 3] = [SchemeKind::AlwaysMax, SchemeKind::Zooming, SchemeKind::Cpz];

    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeKind::AlwaysMax => "always_max",
            SchemeKind::Zooming => "zooming",
            SchemeKind::Cpz => "cpz",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| SimError::Config(format!("unknown scheme {s:?}")))
    }
}

/// Cell-wide parameters shared by every scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellModel {
    pub budget: LinkBudget,
    /// Per-user target rate, bit/s.
    pub rate_target: f64,
    pub k_users: usize,
    pub m_antennas: usize,
}

impl CellModel {
    /// Full-circle BS power that serves the target rate out to `d`.
    /// Radii inside the reference distance are budgeted at `r0`.
    pub fn power_at(&self, d: f64) -> Result<f64> {
        required_bs_power(
            d.max(self.budget.r0),
            self.rate_target,
            self.k_users,
            self.m_antennas,
            &self.budget,
        )
    }

    /// Modeled ergodic rate of one user at distance `r` when the BS radiates
    /// `p_bs` over the full circle.
    pub fn ue_rate(&self, p_bs: f64, r: f64, psi: f64) -> Result<f64> {
        let rho = snr_rho(p_bs, self.k_users, r.max(self.budget.r0), &self.budget, psi)?;
        let params = RateModelParams::new(self.budget.bandwidth, rho)?;
        per_ue_rate(&params, rho * (self.m_antennas - self.k_users) as f64)
    }
}

pub fn power_always_max(model: &CellModel) -> Result<f64> {
    model.power_at(model.budget.cell_radius_r)
}

pub fn power_zooming(state: &CpzState, model: &CellModel) -> Result<f64> {
    match state.global_zoom() {
        Some(d) => model.power_at(d),
        None => Ok(0.0),
    }
}

pub fn power_cpz(state: &CpzState, model: &CellModel) -> Result<f64> {
    let n_sectors = state.grid().n_sectors();
    // Group sectors by their full-circle power so that k of n sectors at the
    // same radius contribute exactly P * (k / n); all n give exactly P.
    let mut groups: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
    for req in state.coverage_requirements() {
        let p = model.power_at(req.zoom_distance)?;
        groups.entry(p.to_bits()).or_insert((p, 0)).1 += 1;
    }
    Ok(groups
        .values()
        .fold(0.0, |acc, &(p, count)| acc + p * (count as f64 / n_sectors as f64)))
}

pub fn scheme_power(kind: SchemeKind, state: &CpzState, model: &CellModel) -> Result<f64> {
    match kind {
        SchemeKind::AlwaysMax => power_always_max(model),
        SchemeKind::Zooming => power_zooming(state, model),
        SchemeKind::Cpz => power_cpz(state, model),
    }
}

/// Bits per joule, `None` when nothing is radiated.
pub fn energy_efficiency(sum_rate: f64, total_power: f64) -> Result<Option<f64>> {
    if !(sum_rate >= 0.0) || !(total_power >= 0.0) {
        return Err(SimError::Domain(format!(
            "rate and power must be >= 0, got {sum_rate} bit/s, {total_power} W"
        )));
    }
    Ok((total_power > 0.0).then(|| sum_rate / total_power))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchemeReport {
    pub scheme: SchemeKind,
    /// Watts.
    pub total_power: f64,
    /// Bit/s.
    pub sum_rate: f64,
    /// Bit/joule; `None` in sleep mode.
    pub ee: Option<f64>,
    pub n_active_sectors: usize,
    /// Lowest modeled rate over served users, `None` for an empty cell.
    pub min_ue_rate: Option<f64>,
    /// `total_power <= power_always_max`.
    pub within_budget: bool,
}

/// Evaluate one scheme with `Psi = 1` for every user.
pub fn evaluate_scheme(kind: SchemeKind, state: &CpzState, model: &CellModel) -> Result<SchemeReport> {
    evaluate_scheme_shadowed(kind, state, model, |_| 1.0)
}

/// Evaluate one scheme; `psi` gives each user's shadowing factor.
pub fn evaluate_scheme_shadowed(
    kind: SchemeKind,
    state: &CpzState,
    model: &CellModel,
    psi: impl Fn(UeId) -> f64,
) -> Result<SchemeReport> {
    let p_max = power_always_max(model)?;
    let total_power = scheme_power(kind, state, model)?;

    let mut sum_rate = 0.0;
    let mut min_ue_rate: Option<f64> = None;
    for pos in state.positions() {
        let p_eff = match kind {
            SchemeKind::AlwaysMax => p_max,
            SchemeKind::Zooming => total_power,
            SchemeKind::Cpz => {
                let cell = state.cell_of(pos.ue_id).expect("position without cell");
                let zoom = state
                    .zoom_distance(cell.sector)
                    .expect("occupied sector without zoom");
                model.power_at(zoom)?
            }
        };
        let rate = model.ue_rate(p_eff, pos.r, psi(pos.ue_id))?;
        sum_rate += rate;
        min_ue_rate = Some(min_ue_rate.map_or(rate, |m: f64| m.min(rate)));
    }

    let n_active_sectors = match kind {
        SchemeKind::AlwaysMax => state.grid().n_sectors(),
        SchemeKind::Zooming if state.is_empty() => 0,
        SchemeKind::Zooming => state.grid().n_sectors(),
        SchemeKind::Cpz => state.n_active_sectors(),
    };

    Ok(SchemeReport {
        scheme: kind,
        total_power,
        sum_rate,
        ee: energy_efficiency(sum_rate, total_power)?,
        n_active_sectors,
        min_ue_rate,
        within_budget: total_power <= p_max,
    })
}
