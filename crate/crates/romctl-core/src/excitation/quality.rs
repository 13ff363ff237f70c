//! Data-quality scoring for collected snapshot sets: output SNR, snapshot
//! correlation conditioning, principal-component grid coverage, channel
//! cross-correlation, Nyquist margin, and 99%-energy rank.

use super::SnapshotSet;
use crate::numerics::{truncated_svd_with, SvdTruncation};
use crate::{fmath, Config, Error, Mat, Result};
use serde::{Deserialize, Serialize};

/// Per-threshold pass flags.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QualityPass {
    pub snr: bool,
    pub corr_condition: bool,
    pub coverage: bool,
    pub cross_correlation: bool,
    pub nyquist: bool,
}

impl QualityPass {
    pub fn all(&self) -> bool {
        self.snr && self.corr_condition && self.coverage && self.cross_correlation && self.nyquist
    }
}

/// Quality metrics of one snapshot set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QualityReport {
    /// Output signal-to-noise ratio in dB (capped for noiseless data).
    pub snr_db: f64,
    /// Conditioning of the energy-relevant snapshot correlation:
    /// `(sigma_1 / sigma_k)^2` with `k` the 99%-energy rank (at least 2),
    /// capped at 1e12 for degenerate data.
    pub corr_condition: f64,
    /// Stratification of the leading-2-PC scores over a ceil(sqrt(M))-bin
    /// grid: occupied bins per axis, averaged, out of the bins available.
    pub coverage: f64,
    /// Largest |Pearson correlation| between input channel pairs at lag 0.
    pub max_cross_correlation: f64,
    /// f_s / (2 f_max).
    pub nyquist_margin: f64,
    /// Smallest rank capturing 99% of snapshot energy.
    pub rank_99: usize,
    pub pass: QualityPass,
}

const CORR_CONDITION_CAP: f64 = 1e12;

/// Scores a snapshot set against the data-quality thresholds. The noise
/// level comes from `noise_estimate` (output-units RMS per channel) when
/// given, otherwise from the pre-excitation quiet window.
pub fn assess_quality(
    snap: &SnapshotSet,
    noise_estimate: Option<f64>,
    f_max_hz: f64,
    config: &Config,
) -> Result<QualityReport> {
    let m_samples = snap.samples();
    if m_samples == 0 {
        return Err(Error::DegenerateInput("empty snapshot set".into()));
    }
    let p = snap.y.nrows();
    let signal_power = snap.y.iter().map(|v| v * v).sum::<f64>() / m_samples as f64;
    if signal_power == 0.0 {
        return Err(Error::DegenerateInput("zero output data, SNR undefined".into()));
    }

    let eta_rms = noise_estimate.unwrap_or_else(|| quiet_window_rms(snap));
    let noise_power = p as f64 * eta_rms * eta_rms;
    let snr_db = if noise_power <= signal_power * 1e-20 {
        config.snr_cap_db
    } else {
        (10.0 * fmath::log10(signal_power / noise_power)).min(config.snr_cap_db)
    };

    // singular spectrum of X (via the Gram route when wide/tall)
    let svd = truncated_svd_with(&snap.x, SvdTruncation::FixedRank(2), 400)?;
    let sigma = &svd.sigma;
    let smax = sigma[0];

    let total_energy: f64 = sigma.iter().map(|s| s * s).sum();
    let mut acc = 0.0;
    let mut rank_99 = sigma.len();
    for (i, s) in sigma.iter().enumerate() {
        acc += s * s;
        if acc >= 0.99 * total_energy {
            rank_99 = i + 1;
            break;
        }
    }

    // conditioning over the subspace the reduction will actually use
    let k_eff = rank_99.max(2).min(sigma.len());
    let s_eff = sigma[k_eff - 1];
    let corr_condition = if s_eff <= smax * 1e-60 {
        CORR_CONDITION_CAP
    } else {
        ((smax / s_eff) * (smax / s_eff)).min(CORR_CONDITION_CAP)
    };

    let coverage = pc_grid_coverage(&snap.x, &svd.u, m_samples);

    let max_cross_correlation = max_channel_correlation(&snap.u);
    let nyquist_margin = snap.excitation.f_s / (2.0 * f_max_hz);

    let pass = QualityPass {
        snr: snr_db > config.snr_min_db,
        corr_condition: corr_condition < config.corr_condition_max,
        coverage: coverage > config.coverage_min,
        cross_correlation: max_cross_correlation < config.xcorr_max,
        nyquist: nyquist_margin > config.nyquist_margin_min,
    };

    Ok(QualityReport {
        snr_db,
        corr_condition,
        coverage,
        max_cross_correlation,
        nyquist_margin,
        rank_99,
        pass,
    })
}

/// RMS fluctuation of the quiet-window outputs around their per-channel mean.
fn quiet_window_rms(snap: &SnapshotSet) -> f64 {
    match &snap.quiet_y {
        Some(q) if q.ncols() >= 2 => {
            let cols = q.ncols() as f64;
            let mut ss = 0.0;
            for i in 0..q.nrows() {
                let mean = q.row(i).sum() / cols;
                for j in 0..q.ncols() {
                    let d = q[(i, j)] - mean;
                    ss += d * d;
                }
            }
            fmath::sqrt(ss / (q.nrows() as f64 * cols))
        }
        _ => 0.0,
    }
}

/// Stratified coverage of the leading-2-PC scores, in the spirit of a Latin
/// hypercube check: bin each axis of the ceil(sqrt(M))-cell grid and report
/// the occupied fraction of bins, averaged over the axes. The grid box is
/// the 1st..99th percentile of the scores per axis, which keeps start-up
/// transients from stretching the box.
fn pc_grid_coverage(x: &Mat, u2: &Mat, m_samples: usize) -> f64 {
    if m_samples == 1 {
        return 0.0;
    }
    let pcs = u2.ncols().min(2);
    let scores = u2.columns(0, pcs).transpose() * x; // pcs x M
    let g = ((m_samples as f64).sqrt().ceil() as usize).max(2);
    let mut fraction_sum = 0.0;
    for i in 0..pcs {
        let (lo, hi) = percentile_bounds(scores.row(i).transpose().as_slice());
        let mut occupied = alloc::vec![false; g];
        for j in 0..m_samples {
            let t = if hi > lo { ((scores[(i, j)] - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.0 };
            occupied[((t * g as f64) as usize).min(g - 1)] = true;
        }
        fraction_sum += occupied.iter().filter(|b| **b).count() as f64 / g as f64;
    }
    fraction_sum / pcs as f64
}

fn percentile_bounds(v: &[f64]) -> (f64, f64) {
    let mut s: alloc::vec::Vec<f64> = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len();
    let lo = s[(n as f64 * 0.01) as usize];
    let hi = s[((n as f64 * 0.99) as usize).min(n - 1)];
    (lo, hi)
}

fn max_channel_correlation(u: &Mat) -> f64 {
    let m = u.ncols();
    if m < 2 {
        return 0.0;
    }
    let n = u.nrows() as f64;
    let means: alloc::vec::Vec<f64> = (0..m).map(|j| u.column(j).sum() / n).collect();
    let mut worst = 0.0f64;
    for a in 0..m {
        for b in (a + 1)..m {
            let mut num = 0.0;
            let mut da = 0.0;
            let mut db = 0.0;
            for k in 0..u.nrows() {
                let xa = u[(k, a)] - means[a];
                let xb = u[(k, b)] - means[b];
                num += xa * xb;
                da += xa * xa;
                db += xb * xb;
            }
            let denom = fmath::sqrt(da * db);
            if denom > 0.0 {
                worst = worst.max((num / denom).abs());
            }
        }
    }
    worst
}
