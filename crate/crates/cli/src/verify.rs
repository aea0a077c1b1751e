//! Self-checks of the zero-forcing model on sampled channels.

use std::fmt;

use cpz_core::mimo::{monte_carlo_trace, sinr_per_ue, sinr_zf, wishart_trace_expectation, zf_beamformer, C64};
use cpz_core::rng::stream_rng;
use cpz_core::{ChannelMatrix, Result};

/// Wishart convergence is only judged with at least this many draws.
pub const MIN_WISHART_TRIALS: usize = 100;
pub const WISHART_REL_TOL: f64 = 0.02;
pub const TRACE_REL_TOL: f64 = 1e-10;
pub const SINR_REL_TOL: f64 = 1e-9;

const SHAPES: [(usize, usize); 3] = [(2, 16), (8, 64), (32, 200)];
const CHANNELS_PER_SHAPE: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        };
        write!(f, "{tag} {:<18} {}", self.name, self.detail)
    }
}

fn outcome(name: &'static str, ok: bool, detail: String) -> CheckOutcome {
    let status = if ok { Status::Pass } else { Status::Fail };
    CheckOutcome { name, status, detail }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub seed: u64,
    pub trials: usize,
    pub zf_tol: f64,
}

fn channels(seed: u64) -> Result<Vec<ChannelMatrix>> {
    let mut out = Vec::new();
    for (si, &(k, m)) in SHAPES.iter().enumerate() {
        for c in 0..CHANNELS_PER_SHAPE {
            let mut rng = stream_rng(seed, si as u64 * CHANNELS_PER_SHAPE + c);
            out.push(ChannelMatrix::sample_with(k, m, &mut rng)?);
        }
    }
    Ok(out)
}

pub fn run_checks(opts: &VerifyOptions) -> Result<Vec<CheckOutcome>> {
    let hs = channels(opts.seed)?;
    let mut zf_dev: f64 = 0.0;
    let mut trace_err: f64 = 0.0;
    let mut sinr_err: f64 = 0.0;
    let rho = 1.0;
    for h in &hs {
        let w = zf_beamformer(h)?;
        let hw = h.entries() * w.entries();
        for i in 0..hw.nrows() {
            for j in 0..hw.ncols() {
                let target = C64::new(if i == j { 1.0 } else { 0.0 }, 0.0);
                zf_dev = zf_dev.max((hw[(i, j)] - target).norm());
            }
        }
        let fro = w.frobenius_sq();
        trace_err = trace_err.max((h.inverse_gram_trace()? - fro).abs() / fro);
        let common = sinr_zf(rho, h)?;
        for s in sinr_per_ue(rho, h, &w)? {
            sinr_err = sinr_err.max((s - common).abs() / common);
        }
    }

    let mut out = vec![
        outcome(
            "zf_identity",
            zf_dev < opts.zf_tol,
            format!("max |HW - I| = {zf_dev:.3e} over {} channels (tol {:e})", hs.len(), opts.zf_tol),
        ),
        outcome(
            "trace_identity",
            trace_err < TRACE_REL_TOL,
            format!("max rel |tr(G^-1) - ||W||_F^2| = {trace_err:.3e} (tol {TRACE_REL_TOL:e})"),
        ),
        outcome(
            "sinr_uniformity",
            sinr_err < SINR_REL_TOL,
            format!("max rel per-UE SINR spread = {sinr_err:.3e} (tol {SINR_REL_TOL:e})"),
        ),
    ];

    if opts.trials < MIN_WISHART_TRIALS {
        out.push(CheckOutcome {
            name: "wishart_trace",
            status: Status::Skipped,
            detail: format!(
                "{} trials below minimum {MIN_WISHART_TRIALS}",
                opts.trials
            ),
        });
    } else {
        let expected = wishart_trace_expectation(10, 200)?;
        let mc = monte_carlo_trace(10, 200, opts.trials, opts.seed)?;
        let rel = (mc - expected).abs() / expected;
        out.push(outcome(
            "wishart_trace",
            rel < WISHART_REL_TOL,
            format!(
                "K=10 M=200 mean {mc:.6} vs {expected:.6}, rel err {rel:.4e} over {} trials (tol {WISHART_REL_TOL})",
                opts.trials
            ),
        ));
    }
    Ok(out)
}
