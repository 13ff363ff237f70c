//! Closed-loop monitoring: per-step metric recording over a sliding window,
//! windowed statistics with identified closed-loop spectral radius, and the
//! diagnostic verdict that routes adaptation.

use crate::control::Margins;
use crate::numerics::{numerical_rank, principal_angle_deg, spectral_radius};
use crate::{Config, Error, Mat, Result, Vector};
use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// Per-step metrics: normalized tracking error, ROM residual, saturation
/// fraction.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StepMetrics {
    pub e_k: f64,
    pub rho_k: f64,
    pub s_k: f64,
}

/// Means over one trailing window plus the identified spectral radius.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WindowStats {
    pub e_avg: f64,
    pub rho_avg: f64,
    pub s_avg: f64,
    pub lambda_max: f64,
    /// The regression was rank deficient; `lambda_max` repeats the previous
    /// value.
    pub lambda_stale: bool,
    pub step: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictKind {
    Good,
    Condition1,
    Condition2,
    Condition3,
    Indeterminate,
    Emergency,
}

impl core::fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let s = match self {
            VerdictKind::Good => "Good",
            VerdictKind::Condition1 => "Condition1",
            VerdictKind::Condition2 => "Condition2",
            VerdictKind::Condition3 => "Condition3",
            VerdictKind::Indeterminate => "Indeterminate",
            VerdictKind::Emergency => "Emergency",
        };
        write!(f, "{s}")
    }
}

/// Adaptation action requested by a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdaptAction {
    BasisEnrichment,
    RlsUpdate,
    Retuning,
    MethodReconsideration,
    EmergencyHalt,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Routing {
    pub target_agent: String,
    pub action: AdaptAction,
}

/// Diagnostic payload carried by every verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diagnostics {
    pub e_avg: f64,
    pub rho_avg: f64,
    pub s_avg: f64,
    pub lambda_max: f64,
    pub rank_recent: usize,
    pub rank_nominal: usize,
    pub subspace_angle_deg: f64,
    pub persistence_windows: usize,
    pub gain_margin_db: f64,
    pub phase_margin_deg: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub diagnostics: Diagnostics,
    pub routing: Option<Routing>,
}

/// Sliding-window monitor state for one closed-loop run.
#[derive(Debug)]
pub struct MonitorState {
    /// Output normalization `W_y = diag(1 / y_max_i)`.
    w_y: Vector,
    /// Full-scale output norm, the floor reference for the residual.
    y_scale: f64,
    u_max: f64,
    inputs: usize,
    step: usize,
    e_buf: VecDeque<f64>,
    rho_buf: VecDeque<f64>,
    s_buf: VecDeque<f64>,
    /// Corrected reduced-state estimates (window + 1 entries for the
    /// regression pairs).
    rhat_buf: VecDeque<Vector>,
    u_buf: VecDeque<Vector>,
    /// Recent full-order snapshots, subsampled.
    x_recent: VecDeque<Vector>,
    history: Vec<WindowStats>,
    steps_since_window: usize,
    last_lambda: f64,
    lambda_seen: bool,
    persist_c1: usize,
    persist_c2: usize,
    persist_c3: usize,
    indeterminate_run: usize,
    emergency_run: usize,
}

impl MonitorState {
    /// `y_max` sets the output normalization; `u_max` the saturation level.
    pub fn new(y_max: Vector, u_max: f64, inputs: usize) -> Self {
        let w_y = Vector::from_fn(y_max.len(), |i, _| 1.0 / y_max[i].abs().max(1e-12));
        let y_scale = y_max.norm();
        MonitorState {
            w_y,
            y_scale,
            u_max,
            inputs,
            step: 0,
            e_buf: VecDeque::new(),
            rho_buf: VecDeque::new(),
            s_buf: VecDeque::new(),
            rhat_buf: VecDeque::new(),
            u_buf: VecDeque::new(),
            x_recent: VecDeque::new(),
            history: Vec::new(),
            steps_since_window: 0,
            last_lambda: 0.0,
            lambda_seen: false,
            persist_c1: 0,
            persist_c2: 0,
            persist_c3: 0,
            indeterminate_run: 0,
            emergency_run: 0,
        }
    }

    pub fn history(&self) -> &[WindowStats] {
        &self.history
    }

    pub fn steps(&self) -> usize {
        self.step
    }

    /// Records one step. `y_pred` is the ROM's one-step-ahead output
    /// prediction (before measurement correction), `r_corr` the corrected
    /// estimate used by the feedback law, and `x_dev` the full-order state
    /// deviation when available (feeds the subspace tests).
    #[allow(clippy::too_many_arguments)]
    pub fn record_step(
        &mut self,
        y: &Vector,
        y_ref: &Vector,
        u: &Vector,
        y_pred: &Vector,
        r_corr: &Vector,
        x_dev: Option<&Vector>,
        config: &Config,
    ) -> StepMetrics {
        let p = y.len() as f64;
        let wy_err = Vector::from_fn(y.len(), |i, _| self.w_y[i] * (y[i] - y_ref[i])).norm();
        let wy_ref = Vector::from_fn(y.len(), |i, _| self.w_y[i] * y_ref[i]).norm();
        // guard for regulation-to-zero references
        let e_k = wy_err / wy_ref.max(1e-6 * p);
        let rho_floor = (config.rho_floor_frac * self.y_scale).max(1e-9);
        let rho_k = (y - y_pred).norm() / y.norm().max(rho_floor);
        let saturated = u.iter().filter(|v| v.abs() > 0.95 * self.u_max).count();
        let s_k = saturated as f64 / self.inputs as f64;

        push_bounded(&mut self.e_buf, e_k, config.window);
        push_bounded(&mut self.rho_buf, rho_k, config.window);
        push_bounded(&mut self.s_buf, s_k, config.window);
        push_bounded(&mut self.rhat_buf, r_corr.clone(), config.window + 1);
        push_bounded(&mut self.u_buf, u.clone(), config.window);
        if self.step % config.xrecent_stride == 0 {
            if let Some(x) = x_dev {
                push_bounded(&mut self.x_recent, x.clone(), config.xrecent_len);
            }
        }
        self.step += 1;
        self.steps_since_window += 1;
        StepMetrics { e_k, rho_k, s_k }
    }

    /// True when a full window has elapsed since the last evaluation
    /// (windows advance every `window_stride` steps after the first full
    /// window).
    pub fn window_ready(&self, config: &Config) -> bool {
        self.step >= config.window && self.steps_since_window >= config.window_stride
    }

    /// Means over the trailing window and the spectral radius of the
    /// closed-loop operator identified from `(r_hat, u)` pairs.
    pub fn window_stats(&mut self, config: &Config) -> Result<WindowStats> {
        if self.step < config.window {
            return Err(Error::domain("no full window recorded yet"));
        }
        self.steps_since_window = 0;
        let n = self.e_buf.len() as f64;
        let e_avg = self.e_buf.iter().sum::<f64>() / n;
        let rho_avg = self.rho_buf.iter().sum::<f64>() / n;
        let s_avg = self.s_buf.iter().sum::<f64>() / n;

        let (lambda_max, lambda_stale) = match self.identify_lambda() {
            Some(l) => {
                self.last_lambda = l;
                self.lambda_seen = true;
                (l, false)
            }
            None => (self.last_lambda, true),
        };
        let stats = WindowStats { e_avg, rho_avg, s_avg, lambda_max, lambda_stale, step: self.step };
        self.history.push(stats);
        Ok(stats)
    }

    /// Least-squares fit `r_{k+1} ~ A r_k + B u_k` over the window; `None`
    /// when the regressors are rank deficient.
    fn identify_lambda(&self) -> Option<f64> {
        // the two buffers fill at the same rate but have different caps, so
        // the estimate buffer may lead the input buffer by one entry whose
        // transition input has already been evicted
        let rlen = self.rhat_buf.len();
        let ulen = self.u_buf.len();
        if rlen < 2 || ulen == 0 {
            return None;
        }
        let offset = rlen.saturating_sub(ulen);
        let pairs = rlen - 1 - offset;
        let r = self.rhat_buf[0].len();
        let m = self.u_buf[0].len();
        if pairs < r + m {
            return None;
        }
        let mut z = Mat::zeros(r + m, pairs);
        let mut target = Mat::zeros(r, pairs);
        for j in 0..pairs {
            let state_idx = j + offset;
            for i in 0..r {
                z[(i, j)] = self.rhat_buf[state_idx][i];
                target[(i, j)] = self.rhat_buf[state_idx + 1][i];
            }
            for ch in 0..m {
                z[(r + ch, j)] = self.u_buf[j][ch];
            }
        }
        let sv = z.clone().singular_values();
        let smax = sv.max();
        if smax <= 0.0 || sv.iter().filter(|&&s| s > smax * 1e-9).count() < r + m {
            return None;
        }
        let pinv = z.clone().pseudo_inverse(smax * 1e-12).ok()?;
        let ab = &target * pinv;
        // only a regression that explains the window is trusted; transients
        // carry unmodeled full-order content and would otherwise produce
        // wild operators
        let fit_residual = (&target - &ab * &z).norm() / target.norm().max(1e-300);
        if fit_residual > 0.2 {
            return None;
        }
        let a_hat = ab.columns(0, r).into_owned();
        Some(spectral_radius(&a_hat))
    }

    /// Evaluates the routing logic against the newest window. `phi_orth` is
    /// an orthonormal basis of the model span; `r` its dimension.
    pub fn diagnose(
        &mut self,
        r: usize,
        phi_orth: &Mat,
        margins: &Margins,
        config: &Config,
    ) -> Result<Verdict> {
        let latest = *self
            .history
            .last()
            .ok_or_else(|| Error::domain("diagnose requires window statistics"))?;

        // subspace tests on the recent-snapshot buffer
        let (rank_recent, theta_deg) = if self.x_recent.len() >= 2 {
            let n = self.x_recent[0].len();
            let cols = self.x_recent.len();
            let x = Mat::from_fn(n, cols, |i, j| self.x_recent[j][i]);
            if x.norm() > 0.0 {
                let smax = x.clone().singular_values().max();
                let rank = numerical_rank(&x, config.rank_tau_factor * smax)?;
                let theta = principal_angle_deg(phi_orth, &x)?;
                (rank, theta)
            } else {
                (0, 0.0)
            }
        } else {
            (r, 0.0)
        };

        // raw per-window triggers
        let lambda_abs = latest.lambda_max.abs();
        let emergency_raw = !latest.lambda_stale && lambda_abs > config.emergency_lambda;
        let rank_grew = rank_recent >= r + 2.max((0.2 * r as f64).ceil() as usize);
        let c1_raw = latest.rho_avg > config.rho_high
            && (rank_grew || theta_deg > config.theta_max_deg);
        let c2_raw = latest.rho_avg > config.rho_high
            && rank_recent <= r + 1
            && theta_deg <= config.theta_max_deg;
        let margin_limited =
            margins.gm_db < config.gm_adapt_db || margins.pm_deg < config.pm_adapt_deg;
        let c3_raw = latest.e_avg > config.e_high
            && latest.rho_avg < config.rho_low
            && (latest.s_avg > config.sat_high || margin_limited);
        let good_raw = latest.e_avg < config.e_good
            && latest.rho_avg < config.rho_good
            && lambda_abs < config.lambda_stable;

        self.emergency_run = if emergency_raw { self.emergency_run + 1 } else { 0 };
        self.persist_c1 = if c1_raw { self.persist_c1 + 1 } else { 0 };
        self.persist_c2 = if c2_raw { self.persist_c2 + 1 } else { 0 };
        self.persist_c3 = if c3_raw { self.persist_c3 + 1 } else { 0 };

        let c2_trend = self.rho_trend_monotone(3);

        let (kind, persistence) = if self.emergency_run >= config.emergency_windows {
            (VerdictKind::Emergency, self.emergency_run)
        } else if self.persist_c1 >= config.persist_condition1 {
            (VerdictKind::Condition1, self.persist_c1)
        } else if self.persist_c2 >= config.persist_condition2 && c2_trend {
            (VerdictKind::Condition2, self.persist_c2)
        } else if self.persist_c3 >= config.persist_condition3 {
            (VerdictKind::Condition3, self.persist_c3)
        } else if good_raw {
            // a good window clears all pending persistence
            self.persist_c1 = 0;
            self.persist_c2 = 0;
            self.persist_c3 = 0;
            self.indeterminate_run = 0;
            self.emergency_run = 0;
            (VerdictKind::Good, 0)
        } else {
            self.indeterminate_run += 1;
            (VerdictKind::Indeterminate, self.indeterminate_run)
        };
        if kind != VerdictKind::Indeterminate {
            self.indeterminate_run = 0;
        }

        let routing = match kind {
            VerdictKind::Condition1 => Some(Routing {
                target_agent: "Data_Agent".into(),
                action: AdaptAction::BasisEnrichment,
            }),
            VerdictKind::Condition2 => Some(Routing {
                target_agent: "ROM_Agent".into(),
                action: AdaptAction::RlsUpdate,
            }),
            VerdictKind::Condition3 => Some(Routing {
                target_agent: "Control_Agent".into(),
                action: AdaptAction::Retuning,
            }),
            VerdictKind::Emergency => Some(Routing {
                target_agent: "Central_Agent".into(),
                action: AdaptAction::EmergencyHalt,
            }),
            VerdictKind::Indeterminate if persistence > config.indeterminate_escalate => {
                Some(Routing {
                    target_agent: "Central_Agent".into(),
                    action: AdaptAction::MethodReconsideration,
                })
            }
            _ => None,
        };

        Ok(Verdict {
            kind,
            diagnostics: Diagnostics {
                e_avg: latest.e_avg,
                rho_avg: latest.rho_avg,
                s_avg: latest.s_avg,
                lambda_max: latest.lambda_max,
                rank_recent,
                rank_nominal: r,
                subspace_angle_deg: theta_deg,
                persistence_windows: persistence,
                gain_margin_db: margins.gm_db,
                phase_margin_deg: margins.pm_deg,
            },
            routing,
        })
    }

    /// Non-strict monotone increase of the windowed residual over the last
    /// `k` windows.
    fn rho_trend_monotone(&self, k: usize) -> bool {
        if self.history.len() < k {
            return false;
        }
        let tail = &self.history[self.history.len() - k..];
        tail.windows(2).all(|w| w[1].rho_avg >= w[0].rho_avg)
    }

    /// Recent full-order snapshot deviations as a matrix (columns are
    /// samples), the data source for basis enrichment.
    pub fn x_recent_matrix(&self) -> Option<Mat> {
        if self.x_recent.len() < 2 {
            return None;
        }
        let n = self.x_recent[0].len();
        let cols = self.x_recent.len();
        Some(Mat::from_fn(n, cols, |i, j| self.x_recent[j][i]))
    }

    /// Clears persistence after an adaptation action so the next trigger
    /// needs fresh evidence.
    pub fn reset_persistence(&mut self) {
        self.persist_c1 = 0;
        self.persist_c2 = 0;
        self.persist_c3 = 0;
        self.indeterminate_run = 0;
        self.emergency_run = 0;
    }
}

fn push_bounded<T>(buf: &mut VecDeque<T>, value: T, cap: usize) {
    if buf.len() == cap {
        buf.pop_front();
    }
    buf.push_back(value);
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn margins_fine() -> Margins {
        Margins { gm_db: 12.0, pm_deg: 60.0, min_sv: 0.8, crossover_found: true }
    }

    fn record_n(
        mon: &mut MonitorState,
        n: usize,
        y: f64,
        y_ref: f64,
        y_pred: f64,
        u: f64,
        cfg: &Config,
    ) {
        for _ in 0..n {
            mon.record_step(
                &Vector::from_element(2, y),
                &Vector::from_element(2, y_ref),
                &Vector::from_element(1, u),
                &Vector::from_element(2, y_pred),
                &Vector::from_element(2, 0.0),
                None,
                cfg,
            );
        }
    }

    #[test]
    fn step_metrics_formulas() {
        let cfg = Config::default();
        let mut mon = MonitorState::new(Vector::from_element(2, 1.0), 5.0, 2);
        // y = y_ref: e = 0
        let m = mon.record_step(
            &Vector::from_element(2, 1.0),
            &Vector::from_element(2, 1.0),
            &Vector::from_element(2, 0.0),
            &Vector::from_element(2, 1.0),
            &Vector::zeros(2),
            None,
            &cfg,
        );
        assert_relative_eq!(m.e_k, 0.0);
        // all channels saturated
        let m = mon.record_step(
            &Vector::from_element(2, 1.0),
            &Vector::from_element(2, 1.0),
            &Vector::from_element(2, 4.9),
            &Vector::from_element(2, 1.0),
            &Vector::zeros(2),
            None,
            &cfg,
        );
        assert_relative_eq!(m.s_k, 1.0);
        // y = [1, 0], y_pred = [0.9, 0]: rho = 0.1
        let m = mon.record_step(
            &Vector::from_vec(alloc::vec![1.0, 0.0]),
            &Vector::from_vec(alloc::vec![1.0, 0.0]),
            &Vector::from_element(2, 0.0),
            &Vector::from_vec(alloc::vec![0.9, 0.0]),
            &Vector::zeros(2),
            None,
            &cfg,
        );
        assert_relative_eq!(m.rho_k, 0.1, epsilon = 1e-12);
    }

    #[test]
    fn constant_tracking_gives_stale_lambda() {
        let cfg = Config::default();
        let mut mon = MonitorState::new(Vector::from_element(2, 1.0), 5.0, 1);
        record_n(&mut mon, cfg.window, 1.0, 1.0, 1.0, 0.0, &cfg);
        let stats = mon.window_stats(&cfg).unwrap();
        assert_relative_eq!(stats.e_avg, 0.0);
        assert!(stats.lambda_stale);
    }

    #[test]
    fn known_closed_loop_operator_is_identified() {
        let cfg = Config::default();
        let mut mon = MonitorState::new(Vector::from_element(1, 1.0), 5.0, 1);
        // r_{k+1} = 0.9 r_k + 0.1 u_k with persistent input
        let mut r = Vector::from_element(1, 1.0);
        let mut rng = crate::seeded_rng(151, 100);
        for k in 0..cfg.window {
            let u = Vector::from_element(1, crate::fmath::sin(k as f64 * 0.9) + rand::Rng::random::<f64>(&mut rng) * 0.1);
            let y = Vector::from_element(1, r[0]);
            mon.record_step(&y, &Vector::from_element(1, 1.0), &u, &y, &r, None, &cfg);
            r = &r * 0.9 + &u * 0.1;
        }
        let stats = mon.window_stats(&cfg).unwrap();
        assert!(!stats.lambda_stale);
        assert_relative_eq!(stats.lambda_max, 0.9, epsilon = 1e-6);
    }

    #[test]
    fn trend_test_matches_examples() {
        let cfg = Config::default();
        let mut mon = MonitorState::new(Vector::from_element(1, 1.0), 5.0, 1);
        for rho in [0.16, 0.17, 0.18] {
            mon.history.push(WindowStats {
                e_avg: 0.0,
                rho_avg: rho,
                s_avg: 0.0,
                lambda_max: 0.5,
                lambda_stale: false,
                step: 0,
            });
        }
        assert!(mon.rho_trend_monotone(3));
        mon.history.clear();
        for rho in [0.16, 0.18, 0.17] {
            mon.history.push(WindowStats {
                e_avg: 0.0,
                rho_avg: rho,
                s_avg: 0.0,
                lambda_max: 0.5,
                lambda_stale: false,
                step: 0,
            });
        }
        assert!(!mon.rho_trend_monotone(3));
        let _ = cfg;
    }

    /// Drives the verdict logic directly by seeding windows and buffers.
    fn synthetic_verdict(
        windows: &[(f64, f64, f64, f64)], // (e, rho, s, lambda)
        rank_recent_dirs: usize,
        in_span: bool,
        margins: &Margins,
        cfg: &Config,
    ) -> VerdictKind {
        let r = 2usize;
        let mut mon = MonitorState::new(Vector::from_element(1, 1.0), 5.0, 1);
        // orthonormal basis = first two axes of R^6
        let mut phi = Mat::zeros(6, r);
        phi[(0, 0)] = 1.0;
        phi[(1, 1)] = 1.0;
        // craft x_recent with the requested rank and alignment
        for j in 0..8 {
            let mut x = Vector::zeros(6);
            let dirs = rank_recent_dirs.max(1);
            let d = j % dirs;
            if in_span && d < r {
                x[d] = 1.0 + j as f64 * 0.1;
            } else {
                x[d.min(5)] = 1.0 + j as f64 * 0.1;
                if !in_span {
                    x[3 + (d % 3)] = 2.0;
                }
            }
            mon.x_recent.push_back(x);
        }
        let mut kind = VerdictKind::Good;
        for &(e, rho, s, l) in windows {
            mon.history.push(WindowStats {
                e_avg: e,
                rho_avg: rho,
                s_avg: s,
                lambda_max: l,
                lambda_stale: false,
                step: 0,
            });
            kind = mon.diagnose(r, &phi, margins, cfg).unwrap().kind;
        }
        kind
    }

    #[test]
    fn nominal_metrics_yield_good() {
        let cfg = Config::default();
        let kind = synthetic_verdict(
            &[(0.02, 0.05, 0.0, 0.9)],
            2,
            true,
            &margins_fine(),
            &cfg,
        );
        assert_eq!(kind, VerdictKind::Good);
    }

    #[test]
    fn drift_signature_routes_to_condition2() {
        let cfg = Config::default();
        // rho high, rank consistent, aligned subspace, monotone trend
        let windows = [
            (0.06, 0.16, 0.0, 0.9),
            (0.06, 0.17, 0.0, 0.9),
            (0.06, 0.182, 0.0, 0.9),
        ];
        let kind = synthetic_verdict(&windows, 2, true, &margins_fine(), &cfg);
        assert_eq!(kind, VerdictKind::Condition2);
    }

    #[test]
    fn subspace_departure_routes_to_condition1() {
        let cfg = Config::default();
        let windows = [
            (0.06, 0.2, 0.0, 0.9),
            (0.06, 0.2, 0.0, 0.9),
            (0.06, 0.2, 0.0, 0.9),
        ];
        // rank grew well past r + max(2, 0.2 r) and left the span
        let kind = synthetic_verdict(&windows, 5, false, &margins_fine(), &cfg);
        assert_eq!(kind, VerdictKind::Condition1);
    }

    #[test]
    fn saturation_routes_to_condition3() {
        let cfg = Config::default();
        let windows = [(0.2, 0.01, 0.5, 0.9), (0.2, 0.01, 0.5, 0.9)];
        let kind = synthetic_verdict(&windows, 2, true, &margins_fine(), &cfg);
        assert_eq!(kind, VerdictKind::Condition3);
    }

    #[test]
    fn sustained_instability_is_an_emergency() {
        let cfg = Config::default();
        let windows = [(0.02, 0.02, 0.0, 1.05), (0.02, 0.02, 0.0, 1.05)];
        let kind = synthetic_verdict(&windows, 2, true, &margins_fine(), &cfg);
        assert_eq!(kind, VerdictKind::Emergency);
        // a single window is not enough
        let kind = synthetic_verdict(&[(0.02, 0.02, 0.0, 1.05)], 2, true, &margins_fine(), &cfg);
        assert_ne!(kind, VerdictKind::Emergency);
    }

    #[test]
    fn persistence_resets_on_good_window() {
        let cfg = Config::default();
        // two drift windows, a good one, then two more: never fires
        let windows = [
            (0.06, 0.16, 0.0, 0.9),
            (0.06, 0.17, 0.0, 0.9),
            (0.01, 0.01, 0.0, 0.9),
            (0.06, 0.16, 0.0, 0.9),
            (0.06, 0.17, 0.0, 0.9),
        ];
        let kind = synthetic_verdict(&windows, 2, true, &margins_fine(), &cfg);
        assert_ne!(kind, VerdictKind::Condition2);
    }

    #[test]
    fn exactly_one_kind_fires_on_a_metric_grid() {
        let cfg = Config::default();
        let margins = margins_fine();
        for &e in &[0.01, 0.08, 0.2] {
            for &rho in &[0.01, 0.08, 0.2] {
                for &s in &[0.0, 0.5] {
                    for &l in &[0.9, 1.05] {
                        for &(rank_dirs, in_span) in &[(2usize, true), (5, false)] {
                            // run long enough that every persistence bound
                            // can be met, then check the verdict is total
                            // and unique (diagnose returns one kind)
                            let windows = [(e, rho, s, l); 6];
                            let kind = synthetic_verdict(
                                &windows,
                                rank_dirs,
                                in_span,
                                &margins,
                                &cfg,
                            );
                            // totality: some verdict came out; uniqueness is
                            // structural (single enum), priority encoded
                            if l > cfg.emergency_lambda {
                                assert_eq!(kind, VerdictKind::Emergency);
                            } else if rho > cfg.rho_high && !in_span {
                                assert_eq!(kind, VerdictKind::Condition1);
                            } else if rho > cfg.rho_high && in_span {
                                assert_eq!(kind, VerdictKind::Condition2);
                            } else if e > cfg.e_high && rho < cfg.rho_low && s > cfg.sat_high {
                                assert_eq!(kind, VerdictKind::Condition3);
                            } else if e < cfg.e_good && rho < cfg.rho_good {
                                assert_eq!(kind, VerdictKind::Good);
                            } else {
                                assert_eq!(kind, VerdictKind::Indeterminate);
                            }
                        }
                    }
                }
            }
        }
    }
}
