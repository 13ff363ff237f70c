//! Every tunable constant of the workflow in one place, overridable from a
//! key-value config file. Defaults follow the design procedure; where the
//! source material gives two values for the same threshold the default is
//! noted on the field.

use serde::{Deserialize, Serialize};

/// Workflow configuration. `Config::default()` is the reference parameter
/// set; deserialization fills omitted fields with the defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    // ---- numerics -------------------------------------------------------
    /// Largest state dimension solved with the Kronecker-vectorized direct
    /// Lyapunov method; larger problems use the Schur-based solver.
    pub lyapunov_direct_max_dim: usize,
    /// Doubling-iteration convergence tolerance for the DARE solver.
    pub dare_tol: f64,
    /// Iteration cap for the DARE doubling iteration.
    pub dare_max_iter: usize,
    /// Required DARE residual (Frobenius norm).
    pub dare_residual_max: f64,
    /// Below this minimum dimension the truncated SVD uses the full dense
    /// decomposition; above it the Gram-matrix route.
    pub svd_exact_cutoff: usize,

    // ---- excitation & data quality --------------------------------------
    /// Minimum output SNR in dB for a snapshot set to pass.
    pub snr_min_db: f64,
    /// Reported SNR cap standing in for "noiseless".
    pub snr_cap_db: f64,
    /// Cap on the snapshot correlation condition number kappa(X^T X).
    /// One source says 1e3, the other 1e6; default 1e6.
    pub corr_condition_max: f64,
    /// Minimum principal-component grid coverage.
    pub coverage_min: f64,
    /// Maximum input channel cross-correlation at lag zero.
    pub xcorr_max: f64,
    /// Minimum Nyquist margin f_s / (2 f_max).
    pub nyquist_margin_min: f64,
    /// Offline excitation amplitude as a fraction of the input bound.
    pub offline_amplitude_frac: f64,
    /// Online (adaptation-time) excitation amplitude fraction.
    pub online_amplitude_frac: f64,
    /// Excitation duration floor in seconds: duration = max(floor, 5 tau_slow).
    pub duration_floor_s: f64,

    // ---- reduced-order model ---------------------------------------------
    /// POD retained-energy fraction.
    pub pod_energy: f64,
    /// Retry-ladder escalation of the POD energy fraction.
    pub pod_energy_retry: f64,
    /// Balanced-truncation relative Hankel singular value cutoff.
    pub bt_hsv_rel_threshold: f64,
    /// DMD eigenvalue magnitude cutoff.
    pub dmd_eig_threshold: f64,
    /// Discrete-time spectral radius bound on A_d. Sources give 0.98 and
    /// 0.95; default 0.98.
    pub disc_radius_max: f64,
    /// Radial clamp target is `disc_radius_max - clamp_epsilon`.
    pub clamp_epsilon: f64,
    /// Continuous margin factor: alpha_min = cont_margin_frac / tau_fast.
    pub cont_margin_frac: f64,
    /// Relative L2 output-error bound for ROM validation.
    pub eps_l2_max: f64,
    /// Frequency-response mismatch bound sup sigma_max(G - G_r).
    pub freq_mismatch_max: f64,
    /// Output-estimator Tikhonov regularization.
    pub estimator_reg: f64,
    /// Cap on kappa(C_r^T C_r + reg I).
    pub estimator_kappa_max: f64,
    /// Number of log-spaced frequency samples for the validation sweep.
    pub freq_grid_points: usize,
    /// Lower edge of the sweep as a fraction of omega_max.
    pub freq_grid_span: f64,
    /// Steps averaged when measuring the FOM/ROM speedup factor.
    pub speedup_steps: usize,
    /// Sampling-period bound factors: T_s <= min(ts_tau_fast_frac * tau_fast,
    /// 1 / (ts_fmax_mult * f_max)). Sources give 10 and 20 for the
    /// multiplier; default the stricter 20.
    pub ts_tau_fast_frac: f64,
    pub ts_fmax_mult: f64,

    // ---- controller -------------------------------------------------------
    /// Default LQR/MPC input penalty rho.
    pub rho_default: f64,
    /// Closed-loop spectral radius bound.
    pub closed_loop_radius_max: f64,
    /// Design-time acceptance margins.
    pub gm_min_db: f64,
    pub pm_min_deg: f64,
    /// Minimum singular value of I + L at crossover for MIMO loops.
    pub min_sv_min: f64,
    /// Adaptation-trigger margins (stricter than design-time).
    pub gm_adapt_db: f64,
    pub pm_adapt_deg: f64,
    /// QP solver KKT tolerance and iteration cap.
    pub qp_tol: f64,
    pub qp_max_iter: usize,
    /// Frequency samples on the unit circle for margin computation.
    pub margin_grid_points: usize,
    /// Cap on the MPC prediction horizon.
    pub mpc_np_cap: usize,
    /// MPC is selected when the estimated command amplitude exceeds this
    /// fraction of the input bound.
    pub mpc_tightness_frac: f64,

    // ---- monitoring --------------------------------------------------------
    /// Metric window length in steps.
    pub window: usize,
    /// Steps between window evaluations (80% overlap of a 50-step window).
    pub window_stride: usize,
    /// "Good" verdict thresholds.
    pub e_good: f64,
    pub rho_good: f64,
    pub lambda_stable: f64,
    /// Condition triggers.
    pub rho_high: f64,
    pub rho_low: f64,
    pub e_high: f64,
    pub sat_high: f64,
    pub theta_max_deg: f64,
    /// Emergency spectral-radius threshold. Sources give 1.02 and 1.01;
    /// default 1.02.
    pub emergency_lambda: f64,
    pub emergency_windows: usize,
    pub persist_condition1: usize,
    pub persist_condition2: usize,
    pub persist_condition3: usize,
    pub indeterminate_escalate: usize,
    /// Residual denominator floor as a fraction of the output full scale
    /// (regularizes the relative residual when outputs pass through zero).
    pub rho_floor_frac: f64,
    /// Numerical-rank tolerance factor: tau = rank_tau_factor * sigma_max.
    pub rank_tau_factor: f64,
    /// Recent-snapshot buffer: capacity and subsampling stride.
    pub xrecent_len: usize,
    pub xrecent_stride: usize,

    // ---- adaptation --------------------------------------------------------
    /// RLS forgetting factor.
    pub lambda_forget: f64,
    /// Initial RLS covariance scale P_0 = rls_p0 * I.
    pub rls_p0: f64,
    /// Residual-energy fraction retained by basis enrichment.
    pub enrich_energy_tol: f64,
    /// Retuning factors for the saturation- and margin-limited branches.
    pub retune_saturation_factor: f64,
    pub retune_margin_factor: f64,
    /// Failed attempts before escalating past retuning / enrichment.
    pub retune_max_attempts: usize,
    pub enrich_max_attempts: usize,

    // ---- pipeline ----------------------------------------------------------
    /// Validate-retry iteration cap per phase.
    pub k_max: usize,
    /// Largest dimension for which dense Gramian-based balanced truncation
    /// is selected.
    pub bt_max_dim: usize,
    /// Number of closed-loop test scenarios (nominal + perturbed).
    pub n_scenarios_nominal: usize,
    pub n_scenarios_perturbed: usize,
    /// Perturbed-scenario parameter variation (fraction).
    pub perturbation_frac: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            lyapunov_direct_max_dim: 64,
            dare_tol: 1e-12,
            dare_max_iter: 200,
            dare_residual_max: 1e-8,
            svd_exact_cutoff: 400,

            snr_min_db: 40.0,
            snr_cap_db: 200.0,
            corr_condition_max: 1e6,
            coverage_min: 0.9,
            xcorr_max: 0.3,
            nyquist_margin_min: 5.0,
            offline_amplitude_frac: 0.8,
            online_amplitude_frac: 0.5,
            duration_floor_s: 300.0,

            pod_energy: 0.995,
            pod_energy_retry: 0.999,
            bt_hsv_rel_threshold: 1e-8,
            dmd_eig_threshold: 1e-3,
            disc_radius_max: 0.98,
            clamp_epsilon: 0.005,
            cont_margin_frac: 0.05,
            eps_l2_max: 0.05,
            freq_mismatch_max: 0.1,
            estimator_reg: 1e-6,
            estimator_kappa_max: 1e6,
            freq_grid_points: 400,
            freq_grid_span: 1e-4,
            speedup_steps: 1000,
            ts_tau_fast_frac: 0.1,
            ts_fmax_mult: 20.0,

            rho_default: 0.1,
            closed_loop_radius_max: 0.98,
            gm_min_db: 6.0,
            pm_min_deg: 30.0,
            min_sv_min: 0.5,
            gm_adapt_db: 8.0,
            pm_adapt_deg: 40.0,
            qp_tol: 1e-6,
            qp_max_iter: 5000,
            margin_grid_points: 720,
            mpc_np_cap: 200,
            mpc_tightness_frac: 0.8,

            window: 50,
            window_stride: 10,
            e_good: 0.05,
            rho_good: 0.10,
            lambda_stable: 0.98,
            rho_high: 0.15,
            rho_low: 0.05,
            e_high: 0.10,
            sat_high: 0.3,
            theta_max_deg: 15.0,
            emergency_lambda: 1.02,
            emergency_windows: 2,
            persist_condition1: 3,
            persist_condition2: 3,
            persist_condition3: 2,
            indeterminate_escalate: 5,
            rho_floor_frac: 0.1,
            rank_tau_factor: 1e-6,
            xrecent_len: 100,
            xrecent_stride: 5,

            lambda_forget: 0.99,
            rls_p0: 1e6,
            enrich_energy_tol: 0.99,
            retune_saturation_factor: 0.7,
            retune_margin_factor: 1.3,
            retune_max_attempts: 2,
            enrich_max_attempts: 2,

            k_max: 5,
            bt_max_dim: 500,
            n_scenarios_nominal: 4,
            n_scenarios_perturbed: 4,
            perturbation_frac: 0.2,
        }
    }
}

impl Config {
    /// Discrete clamp target `disc_radius_max - clamp_epsilon`.
    pub fn clamp_target(&self) -> f64 {
        self.disc_radius_max - self.clamp_epsilon
    }
}
