//! Downlink channel model and zero-forcing rate closed forms.
//!
//! The channel `H` is a `K x M` matrix (users by antennas) with i.i.d.
//! circularly-symmetric complex Gaussian entries. Zero forcing uses the
//! right pseudo-inverse `W = H^H (H H^H)^{-1}`, obtained by a Cholesky solve
//! of the `K x K` Gram system. Under ZF every user sees the same SINR,
//! `rho * K / tr((H H^H)^{-1})`, and `tr((H H^H)^{-1}) = ||W||_F^2`.

use nalgebra::{Complex, DMatrix};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Result, SimError};
use crate::rng::{stream_rng, SimRng};

pub type C64 = Complex<f64>;

/// Gram matrices with a 1-norm condition number above this are treated as singular.
pub const MAX_GRAM_CONDITION: f64 = 1e12;

/// Downlink channel `H`, one row per user.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    entries: DMatrix<C64>,
}

impl ChannelMatrix {
    pub fn from_entries(entries: DMatrix<C64>) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(SimError::Dimension(format!(
                "channel must be at least 1x1, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(Self { entries })
    }

    /// Draw a `K x M` channel from the stream keyed by `seed`.
    pub fn sample(k_users: usize, m_antennas: usize, seed: u64) -> Result<Self> {
        Self::sample_with(k_users, m_antennas, &mut stream_rng(seed, 0))
    }

    /// Draw a channel from an existing generator. Entries are filled row by
    /// row, real part before imaginary part.
    pub fn sample_with(k_users: usize, m_antennas: usize, rng: &mut SimRng) -> Result<Self> {
        if k_users == 0 || m_antennas == 0 {
            return Err(SimError::Dimension(format!(
                "need K >= 1 and M >= 1, got K={k_users}, M={m_antennas}"
            )));
        }
        let entries = DMatrix::from_row_iterator(
            k_users,
            m_antennas,
            (0..k_users * m_antennas).map(|_| complex_normal(rng)),
        );
        Ok(Self { entries })
    }

    pub fn k_users(&self) -> usize {
        self.entries.nrows()
    }

    pub fn m_antennas(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    /// `H H^H`, the `K x K` central Wishart matrix.
    pub fn gram(&self) -> DMatrix<C64> {
        &self.entries * self.entries.adjoint()
    }

    /// `tr((H H^H)^{-1})` computed by solving the Gram system against the identity.
    pub fn inverse_gram_trace(&self) -> Result<f64> {
        let chol = checked_gram_cholesky(self)?;
        let k = self.k_users();
        let inv = chol.solve(&DMatrix::<C64>::identity(k, k));
        Ok((0..k).map(|i| inv[(i, i)].re).sum())
    }
}

/// One CN(0, 1) sample: real and imaginary parts each N(0, 1/2).
fn complex_normal(rng: &mut SimRng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

fn checked_gram_cholesky(
    h: &ChannelMatrix,
) -> Result<nalgebra::Cholesky<C64, nalgebra::Dyn>> {
    let (k, m) = (h.k_users(), h.m_antennas());
    if k > m {
        return Err(SimError::Rank(format!(
            "zero forcing needs K <= M, got K={k}, M={m}"
        )));
    }
    let gram = h.gram();
    let norm = one_norm(&gram);
    let chol = gram
        .cholesky()
        .ok_or_else(|| SimError::Rank("Gram matrix is not positive definite".into()))?;
    let cond = norm * one_norm(&chol.solve(&DMatrix::<C64>::identity(k, k)));
    if !(cond <= MAX_GRAM_CONDITION) {
        return Err(SimError::Rank(format!(
            "Gram matrix condition {cond:.3e} exceeds {MAX_GRAM_CONDITION:e}"
        )));
    }
    Ok(chol)
}

/// Maximum absolute column sum.
fn one_norm(m: &DMatrix<C64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Zero-forcing precoder `W` (`M x K`) together with `gamma = ||W||_F^2 / K`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingMatrix {
    entries: DMatrix<C64>,
    gamma: f64,
}

impl BeamformingMatrix {
    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `||W||_F^2`.
    pub fn frobenius_sq(&self) -> f64 {
        frobenius_sq(&self.entries)
    }
}

fn frobenius_sq(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

pub fn zf_beamformer(h: &ChannelMatrix) -> Result<BeamformingMatrix> {
    let chol = checked_gram_cholesky(h)?;
    // (H H^H)^{-1} H, then W is its adjoint since the Gram matrix is Hermitian.
    let entries = chol.solve(h.entries()).adjoint();
    let k = h.k_users();
    let gamma = frobenius_sq(&entries) / k as f64;
    Ok(BeamformingMatrix { entries, gamma })
}

/// `||W||_F^2 / K`.
pub fn normalization_factor(w: &DMatrix<C64>, k_users: usize) -> Result<f64> {
    if k_users == 0 {
        return Err(SimError::Domain("normalization needs K >= 1".into()));
    }
    Ok(frobenius_sq(w) / k_users as f64)
}

/// Common per-user SINR under zero forcing, `rho * K / ||W||_F^2`.
pub fn sinr_zf(rho: f64, h: &ChannelMatrix) -> Result<f64> {
    check_rho(rho)?;
    let w = zf_beamformer(h)?;
    Ok(rho * h.k_users() as f64 / w.frobenius_sq())
}

/// Per-user SINR of an arbitrary precoder normalised by `sqrt(gamma)`:
///
/// `SINR_k = rho |h_k w_k|^2 / gamma / (rho sum_{j != k} |h_k w_j|^2 / gamma + 1)`.
pub fn sinr_per_ue(rho: f64, h: &ChannelMatrix, w: &BeamformingMatrix) -> Result<Vec<f64>> {
    check_rho(rho)?;
    let k = h.k_users();
    if w.entries.ncols() != k || w.entries.nrows() != h.m_antennas() {
        return Err(SimError::Dimension(format!(
            "precoder is {}x{}, channel is {}x{}",
            w.entries.nrows(),
            w.entries.ncols(),
            k,
            h.m_antennas()
        )));
    }
    let gains = h.entries() * w.entries();
    Ok((0..k)
        .map(|u| {
            let signal = gains[(u, u)].norm_sqr() / w.gamma;
            let interference: f64 = (0..k)
                .filter(|&j| j != u)
                .map(|j| gains[(u, j)].norm_sqr() / w.gamma)
                .sum();
            rho * signal / (rho * interference + 1.0)
        })
        .collect())
}

fn check_rho(rho: f64) -> Result<()> {
    if rho >= 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(SimError::Domain(format!("rho must be finite and >= 0, got {rho}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateModelParams {
    bandwidth_hz: f64,
    rho: f64,
}

impl RateModelParams {
    pub fn new(bandwidth_hz: f64, rho: f64) -> Result<Self> {
        if !(bandwidth_hz > 0.0 && bandwidth_hz.is_finite()) {
            return Err(SimError::Domain(format!(
                "bandwidth must be > 0, got {bandwidth_hz}"
            )));
        }
        check_rho(rho)?;
        Ok(Self { bandwidth_hz, rho })
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.bandwidth_hz
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

/// Shannon rate `B log2(1 + sinr)` in bit/s.
pub fn per_ue_rate(params: &RateModelParams, sinr: f64) -> Result<f64> {
    if !(sinr >= 0.0) {
        return Err(SimError::Domain(format!("sinr must be >= 0, got {sinr}")));
    }
    Ok(params.bandwidth_hz * sinr.ln_1p() / std::f64::consts::LN_2)
}

/// Ergodic ZF sum rate `K B log2(1 + rho (M - K))`.
pub fn sum_rate_closed_form(
    k_users: usize,
    m_antennas: usize,
    rho: f64,
    bandwidth_hz: f64,
) -> Result<f64> {
    check_k_below_m(k_users, m_antennas)?;
    let params = RateModelParams::new(bandwidth_hz, rho)?;
    let per_ue = per_ue_rate(&params, rho * (m_antennas - k_users) as f64)?;
    Ok(k_users as f64 * per_ue)
}

/// `E{||W||_F^2} = K / (M - K)`.
pub fn wishart_trace_expectation(k_users: usize, m_antennas: usize) -> Result<f64> {
    check_k_below_m(k_users, m_antennas)?;
    Ok(k_users as f64 / (m_antennas - k_users) as f64)
}

fn check_k_below_m(k_users: usize, m_antennas: usize) -> Result<()> {
    if k_users == 0 || m_antennas <= k_users {
        return Err(SimError::Domain(format!(
            "need 1 <= K < M, got K={k_users}, M={m_antennas}"
        )));
    }
    Ok(())
}

/// `||W||_F^2` for each of `n_trials` channels; trial `i` draws from stream `i` of `seed`.
pub fn trace_samples(
    k_users: usize,
    m_antennas: usize,
    n_trials: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    check_k_below_m(k_users, m_antennas)?;
    if n_trials == 0 {
        return Err(SimError::Domain("n_trials must be >= 1".into()));
    }
    (0..n_trials as u64)
        .into_par_iter()
        .map(|i| {
            let h = ChannelMatrix::sample_with(k_users, m_antennas, &mut stream_rng(seed, i))?;
            Ok(zf_beamformer(&h)?.frobenius_sq())
        })
        .collect()
}

/// Monte Carlo mean of `tr((H H^H)^{-1})`.
pub fn monte_carlo_trace(
    k_users: usize,
    m_antennas: usize,
    n_trials: usize,
    seed: u64,
) -> Result<f64> {
    let samples = trace_samples(k_users, m_antennas, n_trials, seed)?;
    Ok(samples.iter().sum::<f64>() / n_trials as f64)
}

/// Monte Carlo ergodic sum rate, `K E{B log2(1 + rho K / tr((H H^H)^{-1}))}`.
pub fn monte_carlo_sum_rate(
    k_users: usize,
    m_antennas: usize,
    rho: f64,
    bandwidth_hz: f64,
    n_trials: usize,
    seed: u64,
) -> Result<f64> {
    let params = RateModelParams::new(bandwidth_hz, rho)?;
    let samples = trace_samples(k_users, m_antennas, n_trials, seed)?;
    let mut total = 0.0;
    for tr in &samples {
        total += per_ue_rate(&params, rho * k_users as f64 / tr)?;
    }
    Ok(k_users as f64 * total / n_trials as f64)
}
