//! ROM fidelity validation: time-domain output error on holdout data,
//! frequency-response mismatch on a dense log grid, and the measured
//! FOM-to-ROM speedup.

use super::ReducedModel;
use crate::clock::MonotonicClock;
use crate::excitation::SnapshotSet;
use crate::numerics::{log_grid, zoh_pair, FreqResponder};
use crate::systems::{Plant, SystemDescriptor};
use crate::{C64, Config, Error, Mat, Result, Vector};
use serde::{Deserialize, Serialize};

/// Validation metrics for a constructed reduced model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RomReport {
    /// Retained-energy fraction of the construction criterion.
    pub energy_captured: f64,
    /// Relative L2 output error on the holdout record.
    pub eps_l2: f64,
    /// `sup sigma_max(G - G_r)` over the validation grid; absent for
    /// nonlinear plants where no transfer matrix exists.
    pub freq_mismatch: Option<f64>,
    /// Trajectory NRMSE substitute reported for nonlinear plants.
    pub traj_nrmse: Option<f64>,
    pub cont_margin: f64,
    pub disc_margin: f64,
    pub estimator_kappa: f64,
    /// Wall-time FOM/ROM step ratio (present when a clock was supplied).
    pub speedup: Option<f64>,
    pub output_error_ok: bool,
    pub frequency_ok: bool,
}

impl RomReport {
    pub fn pass(&self) -> bool {
        self.output_error_ok && self.frequency_ok
    }
}

/// Simulates the reduced model over the holdout record and scores it.
pub fn validate_rom(
    plant: &Plant,
    model: &ReducedModel,
    holdout: &SnapshotSet,
    descriptor: &SystemDescriptor,
    config: &Config,
    clock: Option<&dyn MonotonicClock>,
) -> Result<RomReport> {
    if holdout.u.ncols() != model.inputs() {
        return Err(Error::dim("holdout inputs do not match the model"));
    }
    let y_rom = simulate_reduced(model, &holdout.u, holdout.samples());
    let err = (&holdout.y - &y_rom).norm();
    let eps_l2 = err / holdout.y.norm().max(1e-300);

    let (freq_mismatch, traj_nrmse) = match plant {
        Plant::Lti(sys) => {
            let mismatch = frequency_mismatch(sys, model, descriptor, config)?;
            (Some(mismatch), None)
        }
        Plant::Nonlinear(_) => (None, Some(eps_l2)),
    };

    let speedup = clock.map(|c| measure_speedup(plant, model, descriptor, config, c)).transpose()?;

    Ok(RomReport {
        energy_captured: model.energy_captured,
        eps_l2,
        freq_mismatch,
        traj_nrmse,
        cont_margin: model.certificates.cont_margin,
        disc_margin: model.certificates.disc_margin,
        estimator_kappa: model.estimator_kappa,
        speedup,
        output_error_ok: eps_l2 < config.eps_l2_max,
        frequency_ok: freq_mismatch.map(|f| f < config.freq_mismatch_max).unwrap_or(true),
    })
}

/// Drives the reduced model with the recorded inputs from the nominal state.
pub fn simulate_reduced(model: &ReducedModel, u: &Mat, steps: usize) -> Mat {
    let p = model.outputs();
    let mut y = Mat::zeros(p, steps);
    let mut r = Vector::zeros(model.r());
    for j in 0..steps.min(u.nrows()) {
        let uj = u.row(j).transpose();
        r = model.step(&r, &uj);
        y.set_column(j, &model.output(&r));
    }
    y
}

/// `sup sigma_max(G(j w) - G_r(j w))` over a dense log grid spanning the
/// descriptor bandwidth. The ROM response comes from its continuous
/// operators when they exist, otherwise from the discrete ones evaluated on
/// the unit circle.
fn frequency_mismatch(
    sys: &crate::systems::LtiSystem,
    model: &ReducedModel,
    descriptor: &SystemDescriptor,
    config: &Config,
) -> Result<f64> {
    let omega_max = descriptor.omega_max();
    let grid = log_grid(omega_max * config.freq_grid_span, omega_max, config.freq_grid_points);
    let fom = FreqResponder::new(&sys.a, &sys.b, &sys.c)?;
    let rom_cont = match (&model.a_r, &model.b_r) {
        (Some(a_r), Some(b_r)) => Some(FreqResponder::new(a_r, b_r, &model.c_r)?),
        _ => None,
    };
    let rom_disc = if rom_cont.is_none() {
        Some(FreqResponder::new(&model.a_d, &model.b_d, &model.c_r)?)
    } else {
        None
    };
    let mut sup = 0.0f64;
    for &w in &grid {
        let g = fom.eval(C64::new(0.0, w));
        let g_r = if let Some(fr) = &rom_cont {
            fr.eval(C64::new(0.0, w))
        } else {
            let z = C64::new(0.0, w * model.t_s).exp();
            rom_disc.as_ref().unwrap().eval(z)
        };
        let diff = g - g_r;
        sup = sup.max(diff.svd(false, false).singular_values.max());
    }
    Ok(sup)
}

/// Wall-time ratio of one FOM step to one ROM step, averaged over
/// `config.speedup_steps` steps.
fn measure_speedup(
    plant: &Plant,
    model: &ReducedModel,
    descriptor: &SystemDescriptor,
    config: &Config,
    clock: &dyn MonotonicClock,
) -> Result<f64> {
    let steps = config.speedup_steps.max(1);
    let u_fom = Vector::from_element(plant.inputs(), 0.3);
    let u_rom = Vector::from_element(model.inputs(), 0.3);

    let fom_nanos = match plant {
        Plant::Lti(sys) => {
            let (a_d, b_d) = zoh_pair(&sys.a, &sys.b, model.t_s)?;
            let mut x = Vector::from_element(sys.n(), 0.01);
            let start = clock.now_nanos();
            for _ in 0..steps {
                x = &a_d * &x + &b_d * &u_fom;
            }
            let t = clock.now_nanos() - start;
            core::hint::black_box(x.norm());
            t
        }
        Plant::Nonlinear(sys) => {
            let by_tau = (model.t_s / (0.1 * descriptor.time_constants.tau_fast)).ceil() as usize;
            let sub = by_tau.max(sys.substeps_for(model.t_s));
            let dt = model.t_s / sub as f64;
            let mut x = sys.x0.clone();
            let n = sys.n();
            let (mut k1, mut k2, mut k3, mut k4) =
                (Vector::zeros(n), Vector::zeros(n), Vector::zeros(n), Vector::zeros(n));
            let start = clock.now_nanos();
            for _ in 0..steps {
                for _ in 0..sub {
                    crate::systems::simulate::rk4_step(
                        &*sys.field, &mut x, &u_fom, dt, &mut k1, &mut k2, &mut k3, &mut k4,
                    );
                }
            }
            let t = clock.now_nanos() - start;
            core::hint::black_box(x.norm());
            t
        }
    };

    let mut r = Vector::from_element(model.r(), 0.01);
    let start = clock.now_nanos();
    for _ in 0..steps {
        r = model.step(&r, &u_rom);
    }
    let rom_nanos = (clock.now_nanos() - start).max(1);
    core::hint::black_box(r.norm());

    Ok(fom_nanos as f64 / rom_nanos as f64)
}
