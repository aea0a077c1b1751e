//! Scenario generation, seeded trials and parameter sweeps.
//!
//! Trial `i` draws placements from stream `2i` of the scenario seed and
//! shadowing from stream `2i + 1` of the shadowing seed, so a trial's result
//! depends only on the configuration and its own index. Trials run on the
//! current rayon pool and are reassembled in index order.

use std::f64::consts::TAU;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::partition::{CpzState, PartitionGrid, UeId, UePosition};
use crate::propagation::{LinkBudget, ShadowingMode};
use crate::rng::{stream_rng, SimRng};
use crate::schemes::{evaluate_scheme_shadowed, CellModel, SchemeKind, SchemeReport};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Placement {
    /// Area-uniform over the ring `[r0, R]`.
    #[default]
    UniformDisk,
    /// Area-uniform inside sectors `0..sector_count_occupied` of one annulus.
    ArcCluster {
        sector_count_occupied: usize,
        annulus: usize,
    },
    Fixed { positions: Vec<UePosition> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub grid: PartitionGrid,
    pub budget: LinkBudget,
    pub k_users: usize,
    pub m_antennas: usize,
    /// Bit/s.
    pub rate_target: f64,
    pub placement: Placement,
    pub shadowing: ShadowingMode,
    pub seed: u64,
    pub n_trials: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let budget = LinkBudget::default();
        Self {
            grid: PartitionGrid::new(3, 18, budget.cell_radius_r).expect("default grid"),
            budget,
            k_users: 10,
            m_antennas: 200,
            rate_target: 20e6,
            placement: Placement::UniformDisk,
            shadowing: ShadowingMode::DeterministicUnit,
            seed: 0,
            n_trials: 1,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.budget.validate()?;
        self.shadowing.validate()?;
        if self.k_users == 0 || self.k_users >= self.m_antennas {
            return Err(SimError::Config(format!(
                "need 1 <= k_users < m_antennas, got {} and {}",
                self.k_users, self.m_antennas
            )));
        }
        if self.n_trials == 0 {
            return Err(SimError::Config("n_trials must be >= 1".into()));
        }
        if !(self.rate_target > 0.0 && self.rate_target.is_finite()) {
            return Err(SimError::Config(format!(
                "rate_target must be > 0, got {}",
                self.rate_target
            )));
        }
        if self.grid.cell_radius() != self.budget.cell_radius_r {
            return Err(SimError::Config(format!(
                "grid radius {} differs from budget cell radius {}",
                self.grid.cell_radius(),
                self.budget.cell_radius_r
            )));
        }
        match &self.placement {
            Placement::UniformDisk => {}
            Placement::ArcCluster { sector_count_occupied, annulus } => {
                if *sector_count_occupied == 0 || *sector_count_occupied > self.grid.n_sectors() {
                    return Err(SimError::Config(format!(
                        "sector_count_occupied must be in 1..={}, got {sector_count_occupied}",
                        self.grid.n_sectors()
                    )));
                }
                if *annulus >= self.grid.n_annuli() {
                    return Err(SimError::Config(format!(
                        "annulus must be < {}, got {annulus}",
                        self.grid.n_annuli()
                    )));
                }
                if self.grid.annulus_outer(*annulus) <= self.budget.r0 {
                    return Err(SimError::Config(format!(
                        "annulus {annulus} lies inside the reference distance"
                    )));
                }
            }
            Placement::Fixed { positions } => {
                let mut ids: Vec<UeId> = positions.iter().map(|p| p.ue_id).collect();
                ids.sort();
                if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
                    return Err(SimError::Config(format!("duplicate ue_id {}", w[0])));
                }
                for p in positions {
                    self.grid.locate(p)?;
                }
            }
        }
        Ok(())
    }

    pub fn model(&self) -> CellModel {
        CellModel {
            budget: self.budget,
            rate_target: self.rate_target,
            k_users: self.k_users,
            m_antennas: self.m_antennas,
        }
    }

    fn placement_rng(&self, trial: usize) -> SimRng {
        stream_rng(self.seed, 2 * trial as u64)
    }

    fn shadowing_rng(&self, trial: usize) -> SimRng {
        let seed = match self.shadowing {
            ShadowingMode::Lognormal { seed, .. } => seed,
            ShadowingMode::DeterministicUnit => self.seed,
        };
        stream_rng(seed, 2 * trial as u64 + 1)
    }
}

/// Area-uniform radius in `[lo, hi)`.
fn area_uniform_radius(rng: &mut SimRng, lo: f64, hi: f64) -> f64 {
    let u: f64 = rng.random();
    let r = (u * (hi * hi - lo * lo) + lo * lo).sqrt();
    // rounding in the square root may land on `hi`
    if r >= hi && hi > lo {
        lo.max(hi - hi * f64::EPSILON)
    } else {
        r
    }
}

pub fn place_ues(config: &ScenarioConfig, trial_index: usize) -> Result<Vec<UePosition>> {
    config.validate()?;
    let mut rng = config.placement_rng(trial_index);
    let (r0, radius) = (config.budget.r0, config.grid.cell_radius());
    let ids = (0..config.k_users as u64).map(UeId);
    Ok(match &config.placement {
        Placement::Fixed { positions } => positions.clone(),
        Placement::UniformDisk => ids
            .map(|id| {
                let r = area_uniform_radius(&mut rng, r0, radius).min(radius);
                let phi = rng.random_range(0.0..TAU);
                UePosition::new(id, r, phi)
            })
            .collect(),
        Placement::ArcCluster { sector_count_occupied, annulus } => {
            let g = &config.grid;
            let lo = g.annulus_boundary(*annulus).max(r0);
            let hi = g.annulus_outer(*annulus);
            let phi_hi = g.sector_start(*sector_count_occupied);
            ids.map(|id| {
                let r = area_uniform_radius(&mut rng, lo, hi);
                let phi = rng.random_range(0.0..phi_hi);
                UePosition::new(id, r, phi)
            })
            .collect()
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialReport {
    pub trial: usize,
    /// One report per scheme, in [`SchemeKind::ALL`] order.
    pub reports: Vec<SchemeReport>,
}

fn evaluate_all(
    config: &ScenarioConfig,
    grid: PartitionGrid,
    positions: &[UePosition],
    trial: usize,
) -> Result<Vec<SchemeReport>> {
    let state = CpzState::with_positions(grid, positions)?;
    let mut rng = config.shadowing_rng(trial);
    let mut psi: Vec<(UeId, f64)> = positions
        .iter()
        .map(|p| (p.ue_id, config.shadowing.draw(&mut rng)))
        .collect();
    psi.sort_by_key(|&(id, _)| id);
    let lookup = |id: UeId| {
        psi.binary_search_by_key(&id, |&(i, _)| i)
            .map(|i| psi[i].1)
            .unwrap_or(1.0)
    };
    let model = config.model();
    SchemeKind::ALL
        .iter()
        .map(|&kind| evaluate_scheme_shadowed(kind, &state, &model, lookup))
        .collect()
}

pub fn run_trial(config: &ScenarioConfig, trial: usize) -> Result<TrialReport> {
    let positions = place_ues(config, trial)?;
    Ok(TrialReport {
        trial,
        reports: evaluate_all(config, config.grid, &positions, trial)?,
    })
}

/// Every trial of the scenario, in trial order.
pub fn run_comparison(config: &ScenarioConfig) -> Result<Vec<TrialReport>> {
    config.validate()?;
    (0..config.n_trials)
        .into_par_iter()
        .map(|t| run_trial(config, t))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    Distance,
    Sectors,
}

impl SweepVariable {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepVariable::Distance => "distance",
            SweepVariable::Sectors => "sectors",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub scheme: SchemeKind,
    pub mean_total_power: f64,
    pub mean_sum_rate: f64,
    /// Mean over trials with a defined EE; `None` if there were none.
    pub mean_ee: Option<f64>,
    pub n_trials_defined: usize,
    pub mean_active_sectors: f64,
    /// Lowest served-user rate over all trials.
    pub min_ue_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub variable: SweepVariable,
    pub n_trials: usize,
    pub rows: Vec<SweepRow>,
}

fn aggregate(value: f64, scheme: SchemeKind, reports: &[SchemeReport]) -> SweepRow {
    let n = reports.len() as f64;
    let ees: Vec<f64> = reports.iter().filter_map(|r| r.ee).collect();
    SweepRow {
        value,
        scheme,
        mean_total_power: reports.iter().map(|r| r.total_power).sum::<f64>() / n,
        mean_sum_rate: reports.iter().map(|r| r.sum_rate).sum::<f64>() / n,
        mean_ee: (!ees.is_empty()).then(|| ees.iter().sum::<f64>() / ees.len() as f64),
        n_trials_defined: ees.len(),
        mean_active_sectors: reports.iter().map(|r| r.n_active_sectors as f64).sum::<f64>() / n,
        min_ue_rate: reports
            .iter()
            .filter_map(|r| r.min_ue_rate)
            .fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.min(x)))),
    }
}

/// Runs `trial_fn(value_index, trial)` for every pair and folds the trials of
/// each value into one row per scheme. Rows come out sorted by value, then scheme.
fn sweep_with<F>(
    variable: SweepVariable,
    values: &[f64],
    n_trials: usize,
    trial_fn: F,
) -> Result<SweepResult>
where
    F: Fn(usize, usize) -> Result<Vec<SchemeReport>> + Sync,
{
    let per_pair: Vec<Vec<SchemeReport>> = (0..values.len() * n_trials)
        .into_par_iter()
        .map(|idx| trial_fn(idx / n_trials, idx % n_trials))
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(values.len() * SchemeKind::ALL.len());
    for (vi, &value) in values.iter().enumerate() {
        let trials = &per_pair[vi * n_trials..(vi + 1) * n_trials];
        for (si, &scheme) in SchemeKind::ALL.iter().enumerate() {
            let reports: Vec<SchemeReport> = trials.iter().map(|t| t[si]).collect();
            rows.push(aggregate(value, scheme, &reports));
        }
    }
    rows.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.scheme.cmp(&b.scheme)));
    Ok(SweepResult { variable, n_trials, rows })
}

/// Power and EE against coverage distance. For each `d` the `k_users` users
/// sit at distance `d`, spread across the interior of sector 0, so the
/// farthest user (and every user) is at the swept distance.
pub fn sweep_distance(config: &ScenarioConfig, d_values: &[f64]) -> Result<SweepResult> {
    config.validate()?;
    let (lo, hi) = (config.budget.r0, config.budget.cell_radius_r);
    if let Some(&d) = d_values.iter().find(|&&d| !(d >= lo && d <= hi)) {
        return Err(SimError::Config(format!(
            "distance {d} m outside [{lo}, {hi}] m"
        )));
    }
    let width = config.grid.sector_width();
    let k = config.k_users;
    sweep_with(SweepVariable::Distance, d_values, config.n_trials, |vi, trial| {
        let d = d_values[vi];
        let positions: Vec<UePosition> = (0..k)
            .map(|j| UePosition::new(UeId(j as u64), d, width * (j as f64 + 0.5) / k as f64))
            .collect();
        evaluate_all(config, config.grid, &positions, trial)
    })
}

/// The clustered user set used by [`sweep_sectors`]: fixed positions if the
/// configuration gives them, otherwise `k_users` users area-uniform over the
/// configured annulus (or `[r0, R]`) and angularly inside `[0, 2 pi / finest)`.
pub fn cluster_for_sectors(
    config: &ScenarioConfig,
    finest: usize,
    trial: usize,
) -> Result<Vec<UePosition>> {
    if finest == 0 {
        return Err(SimError::Config("sector counts must be >= 1".into()));
    }
    let (lo, hi) = match &config.placement {
        Placement::Fixed { positions } => return Ok(positions.clone()),
        Placement::ArcCluster { annulus, .. } => (
            config.grid.annulus_boundary(*annulus).max(config.budget.r0),
            config.grid.annulus_outer(*annulus),
        ),
        Placement::UniformDisk => (config.budget.r0, config.grid.cell_radius()),
    };
    let phi_hi = TAU / finest as f64;
    let mut rng = config.placement_rng(trial);
    Ok((0..config.k_users as u64)
        .map(|id| {
            let r = area_uniform_radius(&mut rng, lo, hi).min(hi);
            let phi = rng.random_range(0.0..phi_hi);
            UePosition::new(UeId(id), r, phi)
        })
        .collect())
}

/// Power and EE against the number of sectors for one clustered user set per trial.
pub fn sweep_sectors(config: &ScenarioConfig, sector_counts: &[usize]) -> Result<SweepResult> {
    config.validate()?;
    if sector_counts.contains(&0) {
        return Err(SimError::Config("sector counts must be >= 1".into()));
    }
    let finest = sector_counts.iter().copied().max().unwrap_or(1);
    let grids: Vec<PartitionGrid> = sector_counts
        .iter()
        .map(|&n| PartitionGrid::new(config.grid.n_annuli(), n, config.grid.cell_radius()))
        .collect::<Result<_>>()?;
    let values: Vec<f64> = sector_counts.iter().map(|&n| n as f64).collect();
    sweep_with(SweepVariable::Sectors, &values, config.n_trials, |vi, trial| {
        let positions = cluster_for_sectors(config, finest, trial)?;
        evaluate_all(config, grids[vi], &positions, trial)
    })
}
