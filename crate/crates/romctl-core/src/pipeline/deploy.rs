//! Phase-2 orchestration: closed-loop deployment on the full-order plant
//! with windowed monitoring, verdict routing, and the three adaptation
//! actions executed in place.

use super::design::DesignBundle;
use super::trace::*;
use crate::adapt::{
    enrich_basis, post_update_gate, retune, rls_update, GateDecision, RetuneOutcome, RlsState,
};
use crate::control::{design_lqr, design_mpc, loop_margins, Controller, ControllerKind, Margins};
use crate::monitor::{AdaptAction, MonitorState, VerdictKind};
use crate::numerics::zoh_pair;
use crate::rom::{certify_stability, output_estimator, zoh_discretize, ReducedModel};
use crate::systems::{
    make_heat_chain, make_spring_mass_chain, HeatChainConfig, LtiSystem, Plant, SpringChainConfig,
};
use crate::{Config, Error, Mat, Result, Vector};
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// A rebuildable plant description, so scheduled parameter drift can
/// re-instantiate the simulated truth while the designed model stays fixed.
#[derive(Debug, Clone)]
pub enum PlantSpec {
    HeatChain(HeatChainConfig),
    SpringChain(SpringChainConfig),
    /// Explicit matrices (e.g. loaded benchmark files); drift scales `A`.
    Matrices(LtiSystem),
}

impl PlantSpec {
    pub fn build(&self) -> Result<Plant> {
        match self {
            PlantSpec::HeatChain(cfg) => Ok(Plant::Lti(make_heat_chain(cfg)?)),
            PlantSpec::SpringChain(cfg) => make_spring_mass_chain(cfg),
            PlantSpec::Matrices(sys) => Ok(Plant::Lti(sys.clone())),
        }
    }

    /// Returns a copy with the named physical parameter scaled.
    pub fn perturb(&self, param: &str, factor: f64) -> Result<PlantSpec> {
        match (self, param) {
            (PlantSpec::HeatChain(c), "diffusivity") => {
                Ok(PlantSpec::HeatChain(HeatChainConfig { diffusivity: c.diffusivity * factor, ..c.clone() }))
            }
            (PlantSpec::SpringChain(c), "stiffness") => {
                Ok(PlantSpec::SpringChain(SpringChainConfig { stiffness: c.stiffness * factor, ..c.clone() }))
            }
            (PlantSpec::SpringChain(c), "damping") => {
                Ok(PlantSpec::SpringChain(SpringChainConfig { damping: c.damping * factor, ..c.clone() }))
            }
            (PlantSpec::SpringChain(c), "cubic_coeff") => Ok(PlantSpec::SpringChain(SpringChainConfig {
                cubic_coeff: c.cubic_coeff * factor,
                ..c.clone()
            })),
            (PlantSpec::Matrices(sys), "a_scale") => {
                let mut s = sys.clone();
                s.a *= factor;
                Ok(PlantSpec::Matrices(s))
            }
            _ => Err(Error::domain(format!("plant has no driftable parameter named '{param}'"))),
        }
    }
}

/// Output reference program.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReferenceSpec {
    Zero,
    Constant { level: Vec<f64> },
    /// Zero until `at_s`, then the given level.
    Step { at_s: f64, level: Vec<f64> },
}

impl ReferenceSpec {
    fn eval(&self, t: f64, p: usize) -> Vector {
        match self {
            ReferenceSpec::Zero => Vector::zeros(p),
            ReferenceSpec::Constant { level } => Vector::from_fn(p, |i, _| level[i % level.len()]),
            ReferenceSpec::Step { at_s, level } => {
                if t >= *at_s {
                    Vector::from_fn(p, |i, _| level[i % level.len()])
                } else {
                    Vector::zeros(p)
                }
            }
        }
    }
}

/// Multiplicative parameter drift applied to the simulated plant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DriftEvent {
    pub param: String,
    pub factor: f64,
    pub at_step: usize,
    /// 0 = step change; otherwise the factor ramps linearly over this many
    /// steps.
    #[serde(default)]
    pub ramp_steps: usize,
}

/// State-space disturbance injected orthogonally to the model span (drives
/// the subspace-inadequacy path).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DisturbanceSpec {
    pub amplitude: f64,
    pub period_steps: usize,
    pub from_step: usize,
}

/// Additive Gaussian measurement noise at an SNR relative to the reference
/// scale.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MeasurementNoise {
    pub snr_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorMode {
    /// `r_hat = G y` (the deployed configuration).
    OutputFeedback,
    /// `r_hat` projected from the true state (debugging / oracle runs).
    FullState,
}

/// One closed-loop deployment scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub reference: ReferenceSpec,
    #[serde(default)]
    pub drift: Vec<DriftEvent>,
    #[serde(default)]
    pub disturbance: Option<DisturbanceSpec>,
    #[serde(default)]
    pub noise: Option<MeasurementNoise>,
    /// Overrides the designed input box (actuator degradation scenarios).
    #[serde(default)]
    pub bounds_override: Option<(f64, f64)>,
    pub steps: usize,
    #[serde(default = "default_estimator")]
    pub estimator: EstimatorMode,
    #[serde(default)]
    pub adaptation: bool,
    pub seed: u64,
}

fn default_estimator() -> EstimatorMode {
    EstimatorMode::OutputFeedback
}

/// Everything a deployment run produces.
#[derive(Debug)]
pub struct AdaptiveOutcome {
    pub trace: RunTrace,
    /// Output, reference, and input histories (columns are steps).
    pub y: Mat,
    pub y_ref: Mat,
    pub u: Mat,
    /// Full-order state history.
    pub x: Mat,
    pub window_history: Vec<crate::monitor::WindowStats>,
    pub verdicts: Vec<(usize, VerdictKind)>,
    pub adaptation_steps: Vec<(usize, AdaptAction)>,
    pub halted_at: Option<usize>,
    /// Final (possibly adapted) model and controller.
    pub model: ReducedModel,
    pub controller: Controller,
    pub t_s: f64,
}

/// Steps the true plant exactly (ZOH for linear plants, RK4 otherwise).
struct PlantStepper {
    plant: Plant,
    a_d: Option<Mat>,
    b_d: Option<Mat>,
    substeps: usize,
    dt: f64,
}

impl PlantStepper {
    fn new(plant: Plant, t_s: f64, tau_fast: f64) -> Result<Self> {
        let (a_d, b_d, substeps) = match &plant {
            Plant::Lti(sys) => {
                let (a, b) = zoh_pair(&sys.a, &sys.b, t_s)?;
                (Some(a), Some(b), 1)
            }
            Plant::Nonlinear(sys) => {
                let by_tau = (t_s / (0.1 * tau_fast)).ceil() as usize;
                (None, None, by_tau.max(sys.substeps_for(t_s)))
            }
        };
        Ok(PlantStepper { plant, a_d, b_d, substeps, dt: t_s })
    }

    fn step(&self, x: &Vector, u: &Vector) -> Result<Vector> {
        match &self.plant {
            Plant::Lti(_) => {
                Ok(self.a_d.as_ref().unwrap() * x + self.b_d.as_ref().unwrap() * u)
            }
            Plant::Nonlinear(sys) => {
                let ddt = self.dt / self.substeps as f64;
                let n = sys.n();
                let mut state = x.clone();
                let (mut k1, mut k2, mut k3, mut k4) =
                    (Vector::zeros(n), Vector::zeros(n), Vector::zeros(n), Vector::zeros(n));
                for _ in 0..self.substeps {
                    crate::systems::simulate::rk4_step(
                        &*sys.field, &mut state, u, ddt, &mut k1, &mut k2, &mut k3, &mut k4,
                    );
                }
                Ok(state)
            }
        }
    }

    fn output(&self, x: &Vector) -> Vector {
        self.plant.output_matrix() * x
    }
}

/// Runs the closed loop for `scenario.steps` samples: output-feedback state
/// estimation, reference feedforward plus feedback with saturation, windowed
/// monitoring, and (when enabled) dispatch of the adaptation actions the
/// verdicts request. A sustained-instability verdict halts to the safe state
/// `u = 0`.
pub fn run_adaptive(
    bundle: &DesignBundle,
    plant_spec: &PlantSpec,
    scenario: &Scenario,
    config: &Config,
) -> Result<AdaptiveOutcome> {
    let mut model = clone_model(&bundle.model);
    let mut controller = clone_controller(&bundle.controller, scenario.bounds_override);
    let descriptor = &bundle.descriptor;
    let t_s = model.t_s;
    let tau_fast = descriptor.time_constants.tau_fast;
    let p = model.outputs();
    let m = model.inputs();
    let steps = scenario.steps;

    // drift bookkeeping: the live factor per parameter
    let mut live_spec = plant_spec.clone();
    let mut stepper = PlantStepper::new(live_spec.build()?, t_s, tau_fast)?;

    // disturbance direction orthogonal to the model span, chosen to be
    // visible through the output map
    let q_span = model.orthonormal_span();
    let c_full = stepper.plant.output_matrix().clone();
    let disturbance_dir = scenario.disturbance.as_ref().map(|_| {
        let n = q_span.nrows();
        let mut best = Vector::zeros(n);
        let mut best_score = -1.0;
        for j in 0..n {
            let mut e = Vector::zeros(n);
            e[j] = 1.0;
            let resid = &e - &q_span * (q_span.transpose() * &e);
            let rn = resid.norm();
            if rn < 1e-9 {
                continue;
            }
            let unit = &resid / rn;
            let score = (&c_full * &unit).norm() * rn;
            if score > best_score {
                best_score = score;
                best = unit;
            }
        }
        best
    });

    // measurement-noise sigma from the reference scale
    let mut rng = crate::seeded_rng(scenario.seed, 0xADA);
    let noise_sigma = scenario.noise.map(|n| {
        let mut ref_ss = 0.0;
        let mut count = 0usize;
        for k in 0..steps {
            let r = scenario.reference.eval(k as f64 * t_s, p);
            ref_ss += r.norm_squared();
            count += 1;
        }
        let ref_rms = crate::fmath::sqrt(ref_ss / (count.max(1) as f64 * p as f64)).max(1e-6);
        ref_rms * crate::fmath::powf(10.0, -n.snr_db / 20.0)
    });

    let mut trace = RunTrace::default();
    let y_max = Vector::from_fn(p, |i, _| {
        let r_end = scenario.reference.eval(steps as f64 * t_s, p);
        r_end[i].abs().max(1.0)
    });
    let mut monitor = MonitorState::new(y_max, controller.bounds.1.abs().max(controller.bounds.0.abs()), m);

    let x0 = stepper.plant.nominal_state();
    let mut x = x0.clone();
    let mut y_hist = Mat::zeros(p, steps);
    let mut yref_hist = Mat::zeros(p, steps);
    let mut u_hist = Mat::zeros(m, steps);
    let mut x_hist = Mat::zeros(x.len(), steps);
    let mut verdicts = Vec::new();
    let mut adaptation_steps = Vec::new();
    let mut halted_at = None;

    let mut r_hat = Vector::zeros(model.r());
    // free-running model simulation for the residual metric; it re-anchors
    // only when the model itself is updated, so sustained model-plant gaps
    // show up at full size
    let mut r_pred = Vector::zeros(model.r());
    let mut ref_cache: Option<(Vector, Vector, Vector)> = None; // (y_ref, r_ss, u_ss)
    let mut rls: Option<RlsState> = None;
    let mut margins_cache: Margins = controller.margins;
    let mut retune_failures = 0usize;
    let mut enrich_failures = 0usize;
    // transition pairs for the recursive update, refreshed each dispatch
    let mut pair_buf: Vec<(Vector, Vector, Vector)> = Vec::new(); // (r_i, u_i, r_next)

    let normal = rand_distr::StandardNormal;
    for k in 0..steps {
        let t = k as f64 * t_s;
        let y_ref = scenario.reference.eval(t, p);
        let y_ref_next = scenario.reference.eval(t + t_s, p);

        // measure
        let mut y = stepper.output(&x);
        if let Some(sigma) = noise_sigma {
            for v in y.iter_mut() {
                let z: f64 = rand::Rng::sample(&mut rng, normal);
                *v += sigma * z;
            }
        }

        // advance the free-running predictor with the applied input
        let u_prev = if k == 0 { Vector::zeros(m) } else { u_hist.column(k - 1).into_owned() };
        if k > 0 {
            r_pred = model.step(&r_pred, &u_prev);
        }
        let y_pred = model.output(&r_pred);

        // corrected estimate
        let r_corr = match scenario.estimator {
            EstimatorMode::OutputFeedback => &model.g * &y,
            EstimatorMode::FullState => model.project_state(&x),
        };
        if k > 0 {
            pair_buf.push((r_hat.clone(), u_prev.clone(), r_corr.clone()));
            if pair_buf.len() > 4 * config.window {
                pair_buf.remove(0);
            }
        }
        r_hat = r_corr;

        // control: steady-state targets for the (piecewise-constant) reference
        let r_ref = reference_target(&model, &y_ref, &mut ref_cache);
        let r_ref_next = if y_ref_next == y_ref {
            r_ref.clone()
        } else {
            reference_target(&model, &y_ref_next, &mut None)
        };
        let u = if halted_at.is_some() {
            Vector::zeros(m)
        } else {
            crate::control::control_step(&controller, &model, &r_hat, &r_ref, &r_ref_next, config)?.u
        };

        // record
        y_hist.set_column(k, &y);
        yref_hist.set_column(k, &y_ref);
        u_hist.set_column(k, &u);
        x_hist.set_column(k, &x);
        let x_dev = &x - &x0;
        monitor.record_step(&y, &y_ref, &u, &y_pred, &r_hat, Some(&x_dev), config);

        // advance the truth, then apply scheduled drift and disturbance
        x = stepper.step(&x, &u)?;
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::Divergence { step: k, what: "plant state non-finite".into() });
        }
        if let (Some(dist), Some(dir)) = (&scenario.disturbance, &disturbance_dir) {
            if k >= dist.from_step {
                let phase = (k - dist.from_step) as f64 * 2.0 * core::f64::consts::PI
                    / dist.period_steps.max(1) as f64;
                x += dir * (dist.amplitude * crate::fmath::sin(phase));
            }
        }
        for ev in &scenario.drift {
            let factor = drift_factor(ev, k);
            if let Some(f) = factor {
                live_spec = live_spec.perturb(&ev.param, f)?;
                stepper = PlantStepper::new(live_spec.build()?, t_s, tau_fast)?;
            }
        }

        // window boundary: statistics, verdict, dispatch
        if halted_at.is_none() && monitor.window_ready(config) {
            let stats = monitor.window_stats(config)?;
            let phi_orth = model.orthonormal_span();
            let verdict = monitor.diagnose(model.r(), &phi_orth, &margins_cache, config)?;
            verdicts.push((k, verdict.kind));
            trace.push(eval_message(&verdict, &stats, t, &model, &controller, config));

            if scenario.adaptation {
                match verdict.kind {
                    VerdictKind::Emergency => {
                        halted_at = Some(k);
                        adaptation_steps.push((k, AdaptAction::EmergencyHalt));
                        trace.escalations.push(format!(
                            "emergency halt at step {k}: identified spectral radius {:.4}",
                            verdict.diagnostics.lambda_max
                        ));
                    }
                    VerdictKind::Condition2 => {
                        ref_cache = None;
                        let before = summarize(&model, &controller);
                        let anchor_after_update = true;
                        let state = rls.get_or_insert_with(|| {
                            RlsState::from_model(&model.a_d, config.rls_p0, config.lambda_forget)
                                .expect("valid forgetting factor")
                        });
                        for (r_i, u_i, r_next) in pair_buf.drain(..) {
                            rls_update(state, &r_i, &r_next, &u_i, &model.b_d)?;
                        }
                        model.a_d = state.a_d();
                        certify_stability(&mut model, descriptor, config)?;
                        if post_update_gate(&model, &controller, config)? == GateDecision::RecomputeGain
                        {
                            controller = resynthesize(&model, descriptor, &bundle.q_x, &controller, config)
                                .unwrap_or(controller);
                        }
                        margins_cache = loop_margins(&model, &controller.k, config)?;
                        adaptation_steps.push((k, AdaptAction::RlsUpdate));
                        trace.push(adapt_event(k, "Condition2", AdaptAction::RlsUpdate, before, summarize(&model, &controller)));
                        if anchor_after_update {
                            r_pred = r_hat.clone();
                        }
                        monitor.reset_persistence();
                    }
                    VerdictKind::Condition1 => {
                        let before = summarize(&model, &controller);
                        let recent = monitor.x_recent_matrix();
                        match try_enrich(&mut model, plant_spec, recent, descriptor, &bundle.selection.rom_order_range, config) {
                            Ok(true) => {
                                rls = None; // operators changed wholesale
                                controller = resynthesize(&model, descriptor, &bundle.q_x, &controller, config)
                                    .unwrap_or(controller);
                                margins_cache = loop_margins(&model, &controller.k, config)?;
                                adaptation_steps.push((k, AdaptAction::BasisEnrichment));
                                trace.push(adapt_event(k, "Condition1", AdaptAction::BasisEnrichment, before, summarize(&model, &controller)));
                                // reseed the estimates in the grown basis
                                r_hat = match scenario.estimator {
                                    EstimatorMode::OutputFeedback => &model.g * &y,
                                    EstimatorMode::FullState => model.project_state(&x),
                                };
                                r_pred = r_hat.clone();
                                ref_cache = None;
                            }
                            Ok(false) => {
                                enrich_failures += 1;
                                if enrich_failures >= config.enrich_max_attempts {
                                    trace.escalations.push(format!(
                                        "enrichment ineffective at step {k}; requesting method reconsideration"
                                    ));
                                }
                            }
                            Err(e) => {
                                enrich_failures += 1;
                                trace.escalations.push(format!("enrichment failed at step {k}: {e}"));
                            }
                        }
                        monitor.reset_persistence();
                    }
                    VerdictKind::Condition3 => {
                        let before = summarize(&model, &controller);
                        match retune(&controller, &verdict, &model, descriptor, retune_failures, config)? {
                            RetuneOutcome::Retuned { controller: c, .. } => {
                                controller = c;
                                if let Some((lo, hi)) = scenario.bounds_override {
                                    controller.bounds = (lo, hi);
                                }
                                margins_cache = controller.margins;
                                retune_failures = 0;
                                adaptation_steps.push((k, AdaptAction::Retuning));
                                trace.push(adapt_event(k, "Condition3", AdaptAction::Retuning, before, summarize(&model, &controller)));
                            }
                            RetuneOutcome::Escalate { reason } => {
                                retune_failures += 1;
                                trace.escalations.push(format!("retuning at step {k}: {reason}"));
                            }
                        }
                        monitor.reset_persistence();
                    }
                    VerdictKind::Indeterminate => {
                        if let Some(routing) = &verdict.routing {
                            trace.escalations.push(format!(
                                "indeterminate persistence at step {k}; routed to {}",
                                routing.target_agent
                            ));
                        }
                    }
                    VerdictKind::Good => {}
                }
            }
        }
    }

    Ok(AdaptiveOutcome {
        trace,
        y: y_hist,
        y_ref: yref_hist,
        u: u_hist,
        x: x_hist,
        window_history: monitor.history().to_vec(),
        verdicts,
        adaptation_steps,
        halted_at,
        model,
        controller,
        t_s,
    })
}

/// Reduced steady-state target for a constant output reference: least
/// squares on the stacked equations `r = A_d r + B_d u`, `C_r r = y_ref`.
/// Falls back to the estimator map if the solve degenerates.
fn reference_target(
    model: &ReducedModel,
    y_ref: &Vector,
    cache: &mut Option<(Vector, Vector, Vector)>,
) -> Vector {
    if let Some((cached_ref, r_ss, _)) = cache.as_ref() {
        if cached_ref == y_ref {
            return r_ss.clone();
        }
    }
    let r = model.r();
    let m = model.inputs();
    let p = model.outputs();
    let mut stack = Mat::zeros(r + p, r + m);
    stack
        .view_mut((0, 0), (r, r))
        .copy_from(&(&model.a_d - Mat::identity(r, r)));
    stack.view_mut((0, r), (r, m)).copy_from(&model.b_d);
    stack.view_mut((r, 0), (p, r)).copy_from(&model.c_r);
    let mut rhs = Vector::zeros(r + p);
    rhs.rows_mut(r, p).copy_from(y_ref);
    let smax = stack.clone().singular_values().max();
    let sol = stack
        .pseudo_inverse(smax * 1e-10)
        .map(|pi| pi * rhs)
        .unwrap_or_else(|_| Vector::zeros(r + m));
    let r_ss = sol.rows(0, r).into_owned();
    let u_ss = sol.rows(r, m).into_owned();
    *cache = Some((y_ref.clone(), r_ss.clone(), u_ss));
    r_ss
}

fn drift_factor(ev: &DriftEvent, k: usize) -> Option<f64> {
    if ev.ramp_steps == 0 {
        // single multiplicative step
        (k == ev.at_step).then_some(ev.factor)
    } else if k >= ev.at_step && k < ev.at_step + ev.ramp_steps {
        // apply the per-step slice of the ramp so the cumulative product
        // reaches the factor at the end
        Some(crate::fmath::powf(ev.factor, 1.0 / ev.ramp_steps as f64))
    } else {
        None
    }
}

/// Grows the basis with the components of the recent closed-loop snapshots
/// orthogonal to the current span; downstream operators rebuild by
/// re-projection of the nominal full-order model. Returns whether the basis
/// actually grew.
fn try_enrich(
    model: &mut ReducedModel,
    plant_spec: &PlantSpec,
    recent: Option<Mat>,
    descriptor: &crate::systems::SystemDescriptor,
    order_range: &crate::rom::OrderRange,
    config: &Config,
) -> Result<bool> {
    let snap = match recent {
        Some(x) if x.norm() > 0.0 => x,
        _ => return Ok(false),
    };
    let phi_orth = model.orthonormal_span();
    let out = enrich_basis(&phi_orth, &snap, config.enrich_energy_tol, order_range.hi)?;
    if out.noop {
        return Ok(false);
    }
    let plant = plant_spec.build()?;
    rebuild_by_projection(model, &plant, &out.phi_new, descriptor, config)?;
    Ok(true)
}

/// Galerkin re-projection of the nominal full-order dynamics onto a new
/// orthonormal basis, refreshing every dependent operator.
pub(crate) fn rebuild_by_projection(
    model: &mut ReducedModel,
    plant: &Plant,
    phi_new: &Mat,
    descriptor: &crate::systems::SystemDescriptor,
    config: &Config,
) -> Result<()> {
    let (a_lin, b_lin) = match plant {
        Plant::Lti(sys) => (sys.a.clone(), sys.b.clone()),
        Plant::Nonlinear(sys) => crate::systems::linearize(sys, &sys.x0, &sys.u0)?,
    };
    let a_r = phi_new.transpose() * &a_lin * phi_new;
    let b_r = phi_new.transpose() * &b_lin;
    let c_r = plant.output_matrix() * phi_new;
    let disc = zoh_discretize(&a_r, &b_r, model.t_s, descriptor, config)?;
    let (g, kappa) = output_estimator(&c_r, config.estimator_reg)?;

    model.phi = phi_new.clone();
    model.left = None;
    model.a_r = Some(a_r.clone());
    model.b_r = Some(b_r.clone());
    model.c_r = c_r;
    model.a_d = disc.a_d;
    model.b_d = disc.b_d;
    model.t_s = disc.t_s_used;
    model.t_s_adapted |= disc.adapted;
    model.g = g;
    model.estimator_kappa = kappa;
    if let crate::rom::ReducedOrderDynamics::Nonlinear(field) = &mut model.dynamics {
        field.phi = phi_new.clone();
        field.a_r = a_r;
        field.b_r = b_r;
        field.a_lin = a_lin;
        if let Some(deim) = field.deim.take() {
            field.deim = Some(deim.with_projector(phi_new));
        }
    }
    certify_stability(model, descriptor, config)?;
    Ok(())
}

fn resynthesize(
    model: &ReducedModel,
    descriptor: &crate::systems::SystemDescriptor,
    q_x: &Vector,
    previous: &Controller,
    config: &Config,
) -> Option<Controller> {
    let built = match previous.kind {
        ControllerKind::Lqr => design_lqr(model, q_x, previous.rho, previous.bounds, config),
        ControllerKind::Mpc => design_mpc(model, descriptor, q_x, previous.rho, config),
    };
    built.ok()
}

fn clone_model(model: &ReducedModel) -> ReducedModel {
    ReducedModel {
        method: model.method,
        phi: model.phi.clone(),
        left: model.left.clone(),
        a_r: model.a_r.clone(),
        b_r: model.b_r.clone(),
        c_r: model.c_r.clone(),
        a_d: model.a_d.clone(),
        b_d: model.b_d.clone(),
        g: model.g.clone(),
        estimator_kappa: model.estimator_kappa,
        t_s: model.t_s,
        t_s_adapted: model.t_s_adapted,
        energy_captured: model.energy_captured,
        dynamics: match &model.dynamics {
            crate::rom::ReducedOrderDynamics::Linear => crate::rom::ReducedOrderDynamics::Linear,
            crate::rom::ReducedOrderDynamics::Nonlinear(f) => {
                crate::rom::ReducedOrderDynamics::Nonlinear(crate::rom::ReducedField {
                    field: f.field.clone(),
                    phi: f.phi.clone(),
                    x0: f.x0.clone(),
                    u0: f.u0.clone(),
                    a_r: f.a_r.clone(),
                    b_r: f.b_r.clone(),
                    a_lin: f.a_lin.clone(),
                    deim: f.deim.clone(),
                    substeps: f.substeps,
                })
            }
        },
        certificates: model.certificates,
    }
}

fn clone_controller(ctrl: &Controller, bounds_override: Option<(f64, f64)>) -> Controller {
    Controller {
        kind: ctrl.kind,
        k: ctrl.k.clone(),
        p: ctrl.p.clone(),
        rho: ctrl.rho,
        q_x: ctrl.q_x.clone(),
        bounds: bounds_override.unwrap_or(ctrl.bounds),
        margins: ctrl.margins,
        dare_residual: ctrl.dare_residual,
        closed_loop_radius: ctrl.closed_loop_radius,
        mpc: ctrl.mpc.clone(),
    }
}

fn summarize(model: &ReducedModel, ctrl: &Controller) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    m.insert("r".to_string(), model.r() as f64);
    m.insert("rho".to_string(), ctrl.rho);
    m.insert("a_d_norm".to_string(), model.a_d.norm());
    m.insert("disc_margin".to_string(), model.certificates.disc_margin);
    m.insert("closed_loop_radius".to_string(), ctrl.closed_loop_radius);
    m
}

fn eval_message(
    verdict: &crate::monitor::Verdict,
    stats: &crate::monitor::WindowStats,
    timestamp: f64,
    model: &ReducedModel,
    controller: &Controller,
    config: &Config,
) -> TraceMessage {
    let d = &verdict.diagnostics;
    if verdict.kind == VerdictKind::Good {
        TraceMessage::EvalGood(EvalGoodMessage {
            agent_name: "Evaluation_Agent".into(),
            verdict: "Good".into(),
            timestamp,
            performance_acceptable: true,
            metrics_current: MetricsCurrent {
                e_k: stats.e_avg,
                rho_k: stats.rho_avg,
                s_k: stats.s_avg,
                lambda_max: stats.lambda_max,
            },
            windowed_averages: WindowedAverages {
                e_avg: stats.e_avg,
                rho_avg: stats.rho_avg,
                s_avg: stats.s_avg,
            },
            thresholds: Thresholds {
                e_good: config.e_good,
                rho_good: config.rho_good,
                lambda_stable: config.lambda_stable,
            },
            decision: "All metrics within acceptable bounds".into(),
            workflow_status: "complete".into(),
        })
    } else {
        let (target, action) = match &verdict.routing {
            Some(r) => (r.target_agent.clone(), r.action),
            None => ("Evaluation_Agent".into(), AdaptAction::MethodReconsideration),
        };
        let priority = match verdict.kind {
            VerdictKind::Emergency => "emergency",
            VerdictKind::Condition1 | VerdictKind::Condition2 => "medium",
            VerdictKind::Condition3 => "medium",
            _ => "medium",
        };
        let reason = match verdict.kind {
            VerdictKind::Condition1 => "Subspace inadequacy detected",
            VerdictKind::Condition2 => "Parametric drift detected",
            VerdictKind::Condition3 => "Control inadequacy detected",
            VerdictKind::Emergency => "Sustained closed-loop instability",
            _ => "Metrics outside covered combinations",
        };
        TraceMessage::EvalAdapt(EvalAdaptMessage {
            agent_name: "Evaluation_Agent".into(),
            verdict: "No".into(),
            condition_triggered: verdict.kind.to_string(),
            timestamp,
            windowed_averages: WindowedAverages {
                e_avg: d.e_avg,
                rho_avg: d.rho_avg,
                s_avg: d.s_avg,
            },
            diagnostics: EvalDiagnostics {
                rho_avg: d.rho_avg,
                e_avg: d.e_avg,
                s_avg: d.s_avg,
                lambda_max: d.lambda_max,
                rank_recent: d.rank_recent,
                rank_nominal: d.rank_nominal,
                subspace_angle_deg: d.subspace_angle_deg,
                persistence_windows: d.persistence_windows,
                stability_margin_db: d.gain_margin_db,
                current_rom_method: model.method,
                current_controller_type: controller.kind,
            },
            routing: RoutingBlock {
                target_agent: target.clone(),
                action,
                reason: reason.into(),
                priority: priority.into(),
                method_change_recommended: matches!(
                    verdict.kind,
                    VerdictKind::Emergency | VerdictKind::Indeterminate
                ),
            },
            adaptation_required: !matches!(verdict.kind, VerdictKind::Indeterminate),
            next_action: format!("Route to {target} for {action:?}"),
        })
    }
}

fn adapt_event(
    step: usize,
    condition: &str,
    action: AdaptAction,
    before: BTreeMap<String, f64>,
    after: BTreeMap<String, f64>,
) -> TraceMessage {
    let mut certificates = BTreeMap::new();
    if let (Some(m), Some(r)) = (after.get("disc_margin"), after.get("closed_loop_radius")) {
        certificates.insert("disc_margin".to_string(), *m);
        certificates.insert("closed_loop_radius".to_string(), *r);
    }
    TraceMessage::AdaptEvent(AdaptEventMessage {
        step,
        condition: condition.into(),
        action,
        parameters_before: before,
        parameters_after: after,
        certificates,
    })
}
