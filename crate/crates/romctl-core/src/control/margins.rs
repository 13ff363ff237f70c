//! Loop-margin certification from the discrete loop transfer
//! `L(z) = K (zI - A_d)^{-1} B_d` sampled on the unit circle.

use crate::rom::ReducedModel;
use crate::numerics::FreqResponder;
use crate::{fmath, C64, Config, Mat, Result};
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// Classical margins plus the return-difference singular value. Missing
/// crossings are reported as infinity with `crossover_found = false`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Margins {
    pub gm_db: f64,
    pub pm_deg: f64,
    /// `sigma_min(I + L)` at the gain-crossover frequency.
    pub min_sv: f64,
    pub crossover_found: bool,
}

/// SISO loops pass on classical margins, MIMO loops on the return-difference
/// bound.
pub fn margins_pass(m: &Margins, inputs: usize, gm_min_db: f64, pm_min_deg: f64, min_sv_min: f64) -> bool {
    if inputs == 1 {
        m.gm_db > gm_min_db && m.pm_deg > pm_min_deg
    } else {
        m.min_sv > min_sv_min
    }
}

/// Samples the loop on `config.margin_grid_points` points of the upper unit
/// circle. SISO margins come from interpolated gain/phase crossings; MIMO
/// margins are the guaranteed bounds implied by the worst return-difference
/// singular value (`gm = -20 log10(1 - s)`, `pm = 2 asin(s / 2)`).
pub fn loop_margins(model: &ReducedModel, k: &Mat, config: &Config) -> Result<Margins> {
    let m = model.inputs();
    let responder = FreqResponder::new(&model.a_d, &model.b_d, k)?;
    let points = config.margin_grid_points.max(8);

    let mut mag = Vec::with_capacity(points);
    let mut phase = Vec::with_capacity(points);
    let mut sv_return_diff = Vec::with_capacity(points);
    let mut sigma_bar = Vec::with_capacity(points);
    let eye = Mat::identity(m, m).map(|x| C64::new(x, 0.0));

    for j in 0..points {
        let theta = core::f64::consts::PI * (j as f64 + 1.0) / points as f64;
        let z = C64::new(fmath::cos(theta), fmath::sin(theta));
        let l = responder.eval(z);
        let svd = l.clone().svd(false, false);
        sigma_bar.push(svd.singular_values.max());
        let rd = (&eye + &l).svd(false, false);
        sv_return_diff.push(rd.singular_values.min());
        if m == 1 {
            mag.push(l[(0, 0)].norm());
            phase.push(l[(0, 0)].arg());
        }
    }

    // sigma_max(L) crossing of unity locates the crossover
    let mut crossover_idx = None;
    for j in 1..points {
        if (sigma_bar[j - 1] - 1.0) * (sigma_bar[j] - 1.0) <= 0.0 && sigma_bar[j - 1] != sigma_bar[j] {
            crossover_idx = Some(j);
            break;
        }
    }
    let min_sv = match crossover_idx {
        Some(j) => sv_return_diff[j - 1].min(sv_return_diff[j]),
        None => f64::INFINITY,
    };

    if m == 1 {
        // unwrap the phase
        let mut unwrapped = phase.clone();
        for j in 1..points {
            let mut d = unwrapped[j] - unwrapped[j - 1];
            while d > core::f64::consts::PI {
                unwrapped[j] -= 2.0 * core::f64::consts::PI;
                d = unwrapped[j] - unwrapped[j - 1];
            }
            while d < -core::f64::consts::PI {
                unwrapped[j] += 2.0 * core::f64::consts::PI;
                d = unwrapped[j] - unwrapped[j - 1];
            }
        }
        // gain margin: phase crossing of -180 degrees (mod 2 pi)
        let mut gm_db = f64::INFINITY;
        for j in 1..points {
            let a = angle_to_minus_pi(unwrapped[j - 1]);
            let b = angle_to_minus_pi(unwrapped[j]);
            if a * b <= 0.0 && (a - b).abs() < core::f64::consts::PI {
                let t = if (a - b).abs() > 1e-300 { a / (a - b) } else { 0.0 };
                let m_at = mag[j - 1] + t * (mag[j] - mag[j - 1]);
                if m_at > 1e-300 {
                    gm_db = gm_db.min(-20.0 * fmath::log10(m_at));
                }
            }
        }
        // phase margin: |L| crossing of unity
        let mut pm_deg = f64::INFINITY;
        let mut found_gain_cross = false;
        for j in 1..points {
            let a = mag[j - 1] - 1.0;
            let b = mag[j] - 1.0;
            if a * b <= 0.0 && a != b {
                found_gain_cross = true;
                let t = a / (a - b);
                let ph = unwrapped[j - 1] + t * (unwrapped[j] - unwrapped[j - 1]);
                let candidate = 180.0 + ph * 180.0 / core::f64::consts::PI;
                // margin relative to the nearest -180 wrap
                let wrapped = candidate.rem_euclid(360.0);
                let dist = wrapped.min(360.0 - wrapped);
                pm_deg = pm_deg.min(dist);
            }
        }
        Ok(Margins {
            gm_db,
            pm_deg,
            min_sv,
            crossover_found: found_gain_cross || gm_db.is_finite(),
        })
    } else {
        // guaranteed margins from the worst return-difference singular value
        let s_min_global = sv_return_diff.iter().copied().fold(f64::INFINITY, f64::min);
        let gm_db = if s_min_global < 1.0 {
            -20.0 * fmath::log10(1.0 - s_min_global)
        } else {
            f64::INFINITY
        };
        let pm_deg = 2.0 * fmath::asin((s_min_global / 2.0).min(1.0)) * 180.0 / core::f64::consts::PI;
        Ok(Margins { gm_db, pm_deg, min_sv, crossover_found: crossover_idx.is_some() })
    }
}

fn angle_to_minus_pi(phi: f64) -> f64 {
    // signed distance from phi to the nearest odd multiple of pi
    let two_pi = 2.0 * core::f64::consts::PI;
    let w = (phi - core::f64::consts::PI).rem_euclid(two_pi);
    if w >= core::f64::consts::PI {
        w - two_pi
    } else {
        w
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::rom::{ReducedModel, ReducedOrderDynamics, RomMethod, StabilityCertificates};
    use crate::Vector;

    pub(crate) fn toy_model(a_d: Mat, b_d: Mat, c_r: Mat, t_s: f64) -> ReducedModel {
        let (g, kappa) = crate::rom::output_estimator(&c_r, 1e-6).unwrap();
        ReducedModel {
            method: RomMethod::PodGalerkin,
            phi: Mat::identity(a_d.nrows(), a_d.nrows()),
            left: None,
            a_r: None,
            b_r: None,
            c_r,
            a_d,
            b_d,
            g,
            estimator_kappa: kappa,
            t_s,
            t_s_adapted: false,
            energy_captured: 1.0,
            dynamics: ReducedOrderDynamics::Linear,
            certificates: StabilityCertificates {
                cont_margin: 1.0,
                disc_margin: 0.5,
                cont_margin_ok: true,
                clamped: 0,
                basis_residual: 0.0,
            },
        }
    }

    #[test]
    fn zero_gain_leaves_the_loop_open() {
        let model = toy_model(
            Mat::from_element(1, 1, 0.5),
            Mat::identity(1, 1),
            Mat::identity(1, 1),
            0.1,
        );
        let k = Mat::zeros(1, 1);
        let m = loop_margins(&model, &k, &Config::default()).unwrap();
        assert!(m.gm_db.is_infinite());
        assert!(!m.crossover_found);
    }

    #[test]
    fn scalar_loop_matches_dense_grid_oracle() {
        // L(z) = 1.2 / (z - 0.5)
        let model = toy_model(
            Mat::from_element(1, 1, 0.5),
            Mat::identity(1, 1),
            Mat::identity(1, 1),
            0.1,
        );
        let k = Mat::from_element(1, 1, 1.2);
        let cfg = Config::default();
        let m = loop_margins(&model, &k, &cfg).unwrap();

        // closed form: phase crossover at z = -1, |L| = 1.2/1.5 = 0.8
        let gm_expect = -20.0 * fmath::log10(1.2_f64 / 1.5);
        assert!((m.gm_db - gm_expect).abs() < 0.02, "gm {} vs {}", m.gm_db, gm_expect);

        // oracle: same computation on a 4x grid
        let fine = Config { margin_grid_points: 2880, ..cfg };
        let o = loop_margins(&model, &k, &fine).unwrap();
        assert!((m.gm_db - o.gm_db).abs() < 0.05);
        assert!((m.pm_deg - o.pm_deg).abs() < 0.5, "pm {} vs {}", m.pm_deg, o.pm_deg);
        assert!(m.crossover_found);

        // hand check of the phase margin: |L| = 1 at |e^{j th} - 0.5| = 1.2
        // cos th = (1 + 0.25 - 1.44) / (2 * 0.5)
        let th = fmath::acos((1.0 + 0.25 - 1.44) / 1.0);
        let z = C64::new(fmath::cos(th), fmath::sin(th));
        let phase = (C64::new(1.2, 0.0) / (z - C64::new(0.5, 0.0))).arg();
        let pm_expect = 180.0 + phase * 180.0 / core::f64::consts::PI;
        assert!((m.pm_deg - pm_expect).abs() < 0.5, "pm {} vs {}", m.pm_deg, pm_expect);
    }

    #[test]
    fn mimo_margins_from_return_difference() {
        let a = Mat::from_diagonal(&Vector::from_vec(alloc::vec![0.5, 0.3]));
        let model = toy_model(a, Mat::identity(2, 2), Mat::identity(2, 2), 0.1);
        let k = Mat::from_diagonal(&Vector::from_vec(alloc::vec![0.4, 0.2]));
        let m = loop_margins(&model, &k, &Config::default()).unwrap();
        assert!(m.min_sv > 0.0);
        assert!(m.pm_deg > 0.0);
        assert!(margins_pass(&m, 2, 6.0, 30.0, 0.5) == (m.min_sv > 0.5));
    }
}
