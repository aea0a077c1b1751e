//! Path loss and shadowing link budget.
//!
//! Received power per user is `G (r / r0)^(-alpha) Psi P_BS / K` and the
//! linear SNR is that divided by `N0`. [`required_bs_power`] runs the budget
//! backwards: the BS power at which a user at distance `d` reaches a target
//! ergodic ZF rate.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::rng::SimRng;

/// Noise power over the 5 MHz carrier, roughly -107 dBm.
pub const DEFAULT_NOISE_W: f64 = 2.0e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub path_gain_g: f64,
    /// Reference distance, meters.
    pub r0: f64,
    pub alpha: f64,
    pub shadow_sigma_db: f64,
    /// Noise power over the carrier bandwidth, watts.
    pub noise_n0: f64,
    /// Hertz.
    pub bandwidth: f64,
    /// Meters.
    pub cell_radius_r: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self {
            path_gain_g: 1.0,
            r0: 100.0,
            alpha: 3.7,
            shadow_sigma_db: 8.0,
            noise_n0: DEFAULT_NOISE_W,
            bandwidth: 5e6,
            cell_radius_r: 1000.0,
        }
    }
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("path_gain_g", self.path_gain_g),
            ("r0", self.r0),
            ("alpha", self.alpha),
            ("noise_n0", self.noise_n0),
            ("bandwidth", self.bandwidth),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SimError::Config(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.shadow_sigma_db >= 0.0) {
            return Err(SimError::Config(format!(
                "shadow_sigma_db must be >= 0, got {}",
                self.shadow_sigma_db
            )));
        }
        if !(self.cell_radius_r >= self.r0 && self.cell_radius_r.is_finite()) {
            return Err(SimError::Config(format!(
                "cell_radius_r ({}) must be >= r0 ({})",
                self.cell_radius_r, self.r0
            )));
        }
        Ok(())
    }

    /// Deterministic gain `G (r / r0)^(-alpha)`.
    pub fn attenuation(&self, r: f64) -> Result<f64> {
        if !(r >= self.r0) {
            return Err(SimError::NearField { r, r0: self.r0 });
        }
        Ok(self.path_gain_g * (r / self.r0).powf(-self.alpha))
    }
}

/// How the slow-fading factor `Psi` is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShadowingMode {
    /// `Psi = 1`.
    #[default]
    DeterministicUnit,
    /// `10 log10(Psi) ~ N(0, sigma_db^2)`.
    Lognormal { sigma_db: f64, seed: u64 },
}

impl ShadowingMode {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::DeterministicUnit => Ok(()),
            Self::Lognormal { sigma_db, .. } if sigma_db >= 0.0 && sigma_db.is_finite() => Ok(()),
            Self::Lognormal { sigma_db, .. } => Err(SimError::Config(format!(
                "shadowing sigma_db must be >= 0, got {sigma_db}"
            ))),
        }
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self, Self::DeterministicUnit)
    }

    pub fn draw(&self, rng: &mut SimRng) -> f64 {
        match *self {
            Self::DeterministicUnit => 1.0,
            Self::Lognormal { sigma_db, .. } => {
                let z: f64 = rng.sample(StandardNormal);
                10f64.powf(sigma_db * z / 10.0)
            }
        }
    }
}

fn check_common(p_bs: f64, k_users: usize, psi: f64) -> Result<()> {
    if k_users == 0 {
        return Err(SimError::Domain("K must be >= 1".into()));
    }
    if !(p_bs >= 0.0) {
        return Err(SimError::Domain(format!("BS power must be >= 0, got {p_bs}")));
    }
    if !(psi > 0.0) {
        return Err(SimError::Domain(format!("shadowing factor must be > 0, got {psi}")));
    }
    Ok(())
}

/// Per-user received power in watts.
pub fn received_power(
    p_bs: f64,
    k_users: usize,
    r: f64,
    budget: &LinkBudget,
    psi: f64,
) -> Result<f64> {
    check_common(p_bs, k_users, psi)?;
    Ok(budget.attenuation(r)? * psi * p_bs / k_users as f64)
}

/// Per-user linear SNR `rho`.
pub fn snr_rho(p_bs: f64, k_users: usize, r: f64, budget: &LinkBudget, psi: f64) -> Result<f64> {
    Ok(received_power(p_bs, k_users, r, budget, psi)? / budget.noise_n0)
}

/// SNR at which the ZF closed form gives `target_rate` per user:
/// `(2^(target / B) - 1) / (M - K)`.
pub fn required_rho(
    target_rate: f64,
    bandwidth: f64,
    k_users: usize,
    m_antennas: usize,
) -> Result<f64> {
    if !(target_rate > 0.0 && target_rate.is_finite()) {
        return Err(SimError::Domain(format!(
            "target rate must be > 0, got {target_rate}"
        )));
    }
    if k_users == 0 || m_antennas <= k_users {
        return Err(SimError::Domain(format!(
            "need 1 <= K < M, got K={k_users}, M={m_antennas}"
        )));
    }
    Ok(((target_rate / bandwidth).exp2() - 1.0) / (m_antennas - k_users) as f64)
}

/// BS power at which a user at distance `d` reaches `target_rate` with `Psi = 1`.
pub fn required_bs_power(
    d: f64,
    target_rate: f64,
    k_users: usize,
    m_antennas: usize,
    budget: &LinkBudget,
) -> Result<f64> {
    if !(d >= budget.r0 && d <= budget.cell_radius_r) {
        return Err(SimError::Range {
            d,
            lo: budget.r0,
            hi: budget.cell_radius_r,
        });
    }
    let rho = required_rho(target_rate, budget.bandwidth, k_users, m_antennas)?;
    Ok(rho * k_users as f64 * budget.noise_n0 / budget.attenuation(d)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mimo::{per_ue_rate, RateModelParams};
    use crate::rng::stream_rng;
    use rand::Rng;

    fn table_budget() -> LinkBudget {
        LinkBudget::default()
    }

    #[test]
    fn received_power_at_reference_distance() {
        let b = table_budget();
        assert_eq!(received_power(3.0, 1, b.r0, &b, 1.0).unwrap(), 3.0);
    }

    #[test]
    fn received_power_at_cell_edge() {
        let b = table_budget();
        let p = received_power(1.0, 1, 1000.0, &b, 1.0).unwrap();
        assert!((p - 1.995_262_314_968_879_6e-4).abs() / p < 1e-12, "{p}");
    }

    #[test]
    fn received_power_scaling_and_errors() {
        let b = table_budget();
        let p1 = received_power(1.0, 4, 250.0, &b, 1.0).unwrap();
        let p2 = received_power(1.0, 4, 500.0, &b, 1.0).unwrap();
        assert!((p2 / p1 - 2f64.powf(-3.7)).abs() < 1e-12);
        assert!(matches!(
            received_power(1.0, 1, 50.0, &b, 1.0),
            Err(SimError::NearField { .. })
        ));
        assert!(matches!(
            received_power(1.0, 0, 500.0, &b, 1.0),
            Err(SimError::Domain(_))
        ));
    }

    #[test]
    fn received_power_strictly_decreasing() {
        let b = table_budget();
        let ps: Vec<f64> = (0..=90)
            .map(|i| received_power(1.0, 10, 100.0 + 10.0 * i as f64, &b, 1.0).unwrap())
            .collect();
        assert!(ps.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn snr_cases() {
        let b = table_budget();
        let rho = snr_rho(b.noise_n0 * 5.0, 5, b.r0, &b, 1.0).unwrap();
        assert!((rho - 1.0).abs() < 1e-12);
        let a = snr_rho(1.0, 10, 640.0, &b, 1.0).unwrap();
        let c = snr_rho(2.0, 10, 640.0, &b, 1.0).unwrap();
        assert!((c - 2.0 * a).abs() / c < 1e-15);
        let edge = snr_rho(1.0, 10, 1000.0, &b, 1.0).unwrap();
        assert!((edge - 9.976_311_574_844_4e8).abs() / edge < 1e-9, "{edge}");
    }

    #[test]
    fn required_rho_for_peak_rate() {
        let rho = required_rho(20e6, 5e6, 10, 200).unwrap();
        assert!((rho - 15.0 / 190.0).abs() < 1e-15);
        assert!(required_rho(0.0, 5e6, 10, 200).is_err());
        assert!(required_rho(20e6, 5e6, 10, 10).is_err());
    }

    #[test]
    fn required_power_cases() {
        let b = table_budget();
        let at_r0 = required_bs_power(b.r0, 20e6, 10, 200, &b).unwrap();
        assert!((at_r0 - 15.0 / 190.0 * 10.0 * b.noise_n0).abs() / at_r0 < 1e-14);
        let p = required_bs_power(300.0, 20e6, 10, 200, &b).unwrap();
        let p2 = required_bs_power(600.0, 20e6, 10, 200, &b).unwrap();
        assert!((p2 / p - 2f64.powf(3.7)).abs() < 1e-9);
        assert!(matches!(
            required_bs_power(1000.5, 20e6, 10, 200, &b),
            Err(SimError::Range { .. })
        ));
        assert!(matches!(
            required_bs_power(99.0, 20e6, 10, 200, &b),
            Err(SimError::Range { .. })
        ));
    }

    #[test]
    fn required_power_monotone_in_distance_and_rate() {
        let b = table_budget();
        let ps: Vec<f64> = (0..=90)
            .map(|i| required_bs_power(100.0 + 10.0 * i as f64, 20e6, 10, 200, &b).unwrap())
            .collect();
        assert!(ps.windows(2).all(|w| w[1] > w[0]));
        let lo = required_bs_power(500.0, 10e6, 10, 200, &b).unwrap();
        let hi = required_bs_power(500.0, 20e6, 10, 200, &b).unwrap();
        assert!(hi > lo);
    }

    #[test]
    fn budget_round_trip() {
        let b = table_budget();
        let mut rng = stream_rng(42, 0);
        for _ in 0..50 {
            let d = rng.random_range(b.r0..=b.cell_radius_r);
            let target = rng.random_range(1e5..50e6);
            let p = required_bs_power(d, target, 10, 200, &b).unwrap();
            let rho = snr_rho(p, 10, d, &b, 1.0).unwrap();
            let params = RateModelParams::new(b.bandwidth, rho).unwrap();
            let rate = per_ue_rate(&params, rho * 190.0).unwrap();
            assert!((rate - target).abs() / target < 1e-9, "{rate} vs {target}");
        }
    }

    #[test]
    fn lognormal_shadowing_spread() {
        let mode = ShadowingMode::Lognormal { sigma_db: 8.0, seed: 3 };
        let mut rng = stream_rng(3, 0);
        let n = 100_000;
        let db: Vec<f64> = (0..n).map(|_| 10.0 * mode.draw(&mut rng).log10()).collect();
        let mean = db.iter().sum::<f64>() / n as f64;
        let std = (db.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        assert!((std - 8.0).abs() / 8.0 < 0.02, "std {std}");
        assert!(mean.abs() < 0.1);
    }

    #[test]
    fn deterministic_shadowing_is_unit() {
        let mut rng = stream_rng(0, 0);
        assert_eq!(ShadowingMode::DeterministicUnit.draw(&mut rng), 1.0);
        assert!(ShadowingMode::Lognormal { sigma_db: -1.0, seed: 0 }.validate().is_err());
    }

    #[test]
    fn budget_validation() {
        assert!(table_budget().validate().is_ok());
        let bad = LinkBudget { cell_radius_r: 50.0, ..table_budget() };
        assert!(bad.validate().is_err());
        let bad = LinkBudget { noise_n0: 0.0, ..table_budget() };
        assert!(bad.validate().is_err());
    }
}
