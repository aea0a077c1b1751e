//! JSON scenario files.
//!
//! Every key is optional and falls back to the defaults of
//! [`ScenarioConfig::default`]. Unknown keys are rejected and parse errors
//! carry the path of the offending key.

use std::path::Path;

use serde::Deserialize;

use cpz_core::{LinkBudget, PartitionGrid, Placement, ScenarioConfig, ShadowingMode};

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    pub n_annuli: Option<usize>,
    pub n_sectors: Option<usize>,
    pub cell_radius: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetFile {
    pub path_gain_g: Option<f64>,
    pub r0: Option<f64>,
    pub alpha: Option<f64>,
    pub shadow_sigma_db: Option<f64>,
    pub noise_n0: Option<f64>,
    pub bandwidth: Option<f64>,
    pub cell_radius_r: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliConfigFile {
    pub grid: Option<GridFile>,
    pub budget: Option<BudgetFile>,
    pub k_users: Option<usize>,
    pub m_antennas: Option<usize>,
    pub rate_target: Option<f64>,
    pub placement: Option<Placement>,
    pub shadowing: Option<ShadowingMode>,
    pub seed: Option<u64>,
    pub n_trials: Option<usize>,
}

impl CliConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config(format!("at `{path}`: {}", e.into_inner()))
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Merge onto the defaults. The grid and budget radii must agree; giving
    /// either one sets both.
    pub fn resolve(self) -> Result<ScenarioConfig, CliError> {
        let defaults = ScenarioConfig::default();
        let grid = self.grid.unwrap_or_default();
        let b = self.budget.unwrap_or_default();

        let radius = match (grid.cell_radius, b.cell_radius_r) {
            (Some(g), Some(r)) if g != r => {
                return Err(CliError::Config(format!(
                    "grid.cell_radius ({g}) and budget.cell_radius_r ({r}) disagree"
                )))
            }
            (Some(v), _) | (None, Some(v)) => v,
            (None, None) => defaults.budget.cell_radius_r,
        };
        let d = defaults.budget;
        let budget = LinkBudget {
            path_gain_g: b.path_gain_g.unwrap_or(d.path_gain_g),
            r0: b.r0.unwrap_or(d.r0),
            alpha: b.alpha.unwrap_or(d.alpha),
            shadow_sigma_db: b.shadow_sigma_db.unwrap_or(d.shadow_sigma_db),
            noise_n0: b.noise_n0.unwrap_or(d.noise_n0),
            bandwidth: b.bandwidth.unwrap_or(d.bandwidth),
            cell_radius_r: radius,
        };
        let grid = PartitionGrid::new(
            grid.n_annuli.unwrap_or(defaults.grid.n_annuli()),
            grid.n_sectors.unwrap_or(defaults.grid.n_sectors()),
            radius,
        )?;
        let config = ScenarioConfig {
            grid,
            budget,
            k_users: self.k_users.unwrap_or(defaults.k_users),
            m_antennas: self.m_antennas.unwrap_or(defaults.m_antennas),
            rate_target: self.rate_target.unwrap_or(defaults.rate_target),
            placement: self.placement.unwrap_or(defaults.placement),
            shadowing: self.shadowing.unwrap_or(defaults.shadowing),
            seed: self.seed.unwrap_or(defaults.seed),
            n_trials: self.n_trials.unwrap_or(defaults.n_trials),
        };
        Ok(config)
    }

    pub fn has_seed(&self) -> bool {
        self.seed.is_some()
    }
}
