//! Reference simulators: exact zero-order-hold propagation for LTI plants,
//! classical RK4 for nonlinear ones, and finite-difference linearization.

use super::{LtiSystem, NonlinearSystem};
use crate::numerics::zoh_pair;
use crate::{Error, Mat, Result, Vector};
use alloc::format;

/// Sampled closed- or open-loop trajectory. Column `k` of `states`/`outputs`
/// is the sample at time `k * dt`; inputs are held constant over each step.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Mat,
    pub outputs: Mat,
    pub dt: f64,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.states.ncols() - 1
    }
}

fn check_sim_args(n: usize, m: usize, u: &Mat, x0: &Vector, dt: f64, steps: usize) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::domain(format!("dt must be positive, got {dt}")));
    }
    if u.nrows() < steps {
        return Err(Error::dim(format!(
            "input sequence has {} rows, need at least {steps}",
            u.nrows()
        )));
    }
    if u.ncols() != m {
        return Err(Error::dim(format!("input has {} channels, expected {m}", u.ncols())));
    }
    if x0.len() != n {
        return Err(Error::dim(format!("x0 has length {}, expected {n}", x0.len())));
    }
    Ok(())
}

/// Exact piecewise-constant-input propagation:
/// `x_{k+1} = e^{A dt} x_k + (int_0^dt e^{A tau} dtau) B u_k`.
pub fn simulate_lti(sys: &LtiSystem, u: &Mat, x0: &Vector, dt: f64, steps: usize) -> Result<Trajectory> {
    check_sim_args(sys.n(), sys.inputs(), u, x0, dt, steps)?;
    let (a_d, b_d) = zoh_pair(&sys.a, &sys.b, dt)?;
    let n = sys.n();
    let p = sys.outputs();
    let mut states = Mat::zeros(n, steps + 1);
    let mut outputs = Mat::zeros(p, steps + 1);
    let mut x = x0.clone();
    states.set_column(0, &x);
    outputs.set_column(0, &(&sys.c * &x));
    for k in 0..steps {
        let uk = u.row(k).transpose();
        x = &a_d * &x + &b_d * uk;
        states.set_column(k + 1, &x);
        outputs.set_column(k + 1, &(&sys.c * &x));
    }
    Ok(Trajectory { states, outputs, dt })
}

/// Classical fourth-order Runge-Kutta with the input held over each step.
pub fn simulate_nonlinear(
    sys: &NonlinearSystem,
    u: &Mat,
    x0: &Vector,
    dt: f64,
    steps: usize,
) -> Result<Trajectory> {
    check_sim_args(sys.n(), sys.inputs(), u, x0, dt, steps)?;
    let n = sys.n();
    let p = sys.outputs();
    let mut states = Mat::zeros(n, steps + 1);
    let mut outputs = Mat::zeros(p, steps + 1);
    let mut x = x0.clone();
    states.set_column(0, &x);
    outputs.set_column(0, &(&sys.c * &x));
    let mut k1 = Vector::zeros(n);
    let mut k2 = Vector::zeros(n);
    let mut k3 = Vector::zeros(n);
    let mut k4 = Vector::zeros(n);
    for k in 0..steps {
        let uk = u.row(k).transpose();
        rk4_step(&*sys.field, &mut x, &uk, dt, &mut k1, &mut k2, &mut k3, &mut k4);
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::Divergence { step: k, what: "state became non-finite".into() });
        }
        states.set_column(k + 1, &x);
        outputs.set_column(k + 1, &(&sys.c * &x));
    }
    Ok(Trajectory { states, outputs, dt })
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn rk4_step(
    field: &dyn super::VectorField,
    x: &mut Vector,
    u: &Vector,
    dt: f64,
    k1: &mut Vector,
    k2: &mut Vector,
    k3: &mut Vector,
    k4: &mut Vector,
) {
    field.eval(x, u, k1);
    let x2 = &*x + &*k1 * (dt / 2.0);
    field.eval(&x2, u, k2);
    let x3 = &*x + &*k2 * (dt / 2.0);
    field.eval(&x3, u, k3);
    let x4 = &*x + &*k3 * dt;
    field.eval(&x4, u, k4);
    *x += (&*k1 + &*k2 * 2.0 + &*k3 * 2.0 + &*k4) * (dt / 6.0);
}

/// Central finite-difference Jacobians of `f` at `(x0, u0)` with step
/// `1e-6 (1 + |component|)`.
pub fn linearize(sys: &NonlinearSystem, x0: &Vector, u0: &Vector) -> Result<(Mat, Mat)> {
    let n = sys.n();
    let m = sys.inputs();
    if x0.len() != n || u0.len() != m {
        return Err(Error::dim("x0/u0 lengths inconsistent with the system"));
    }
    let mut a = Mat::zeros(n, n);
    let mut fp = Vector::zeros(n);
    let mut fm = Vector::zeros(n);
    for j in 0..n {
        let h = 1e-6 * (1.0 + x0[j].abs());
        let mut xp = x0.clone();
        xp[j] += h;
        let mut xm = x0.clone();
        xm[j] -= h;
        sys.field.eval(&xp, u0, &mut fp);
        sys.field.eval(&xm, u0, &mut fm);
        for i in 0..n {
            let d = (fp[i] - fm[i]) / (2.0 * h);
            if !d.is_finite() {
                return Err(Error::domain("non-finite difference quotient in linearization"));
            }
            a[(i, j)] = d;
        }
    }
    let mut b = Mat::zeros(n, m);
    for j in 0..m {
        let h = 1e-6 * (1.0 + u0[j].abs());
        let mut up = u0.clone();
        up[j] += h;
        let mut um = u0.clone();
        um[j] -= h;
        sys.field.eval(x0, &up, &mut fp);
        sys.field.eval(x0, &um, &mut fm);
        for i in 0..n {
            let d = (fp[i] - fm[i]) / (2.0 * h);
            if !d.is_finite() {
                return Err(Error::domain("non-finite difference quotient in linearization"));
            }
            b[(i, j)] = d;
        }
    }
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fmath;
    use crate::systems::{make_spring_mass_chain, Plant, SpringChainConfig, VectorField};
    use alloc::sync::Arc;
    use approx::assert_relative_eq;

    #[test]
    fn pure_integrator() {
        // A = 0, B = I, u = c: x_k = x0 + k dt c
        let sys = LtiSystem::new(Mat::zeros(2, 2), Mat::identity(2, 2), Mat::identity(2, 2)).unwrap();
        let steps = 7;
        let c = [0.5, -1.5];
        let u = Mat::from_fn(steps, 2, |_, j| c[j]);
        let x0 = Vector::from_vec(alloc::vec![1.0, 2.0]);
        let traj = simulate_lti(&sys, &u, &x0, 0.1, steps).unwrap();
        for k in 0..=steps {
            assert_relative_eq!(traj.states[(0, k)], 1.0 + k as f64 * 0.1 * 0.5, epsilon = 1e-12);
            assert_relative_eq!(traj.states[(1, k)], 2.0 - k as f64 * 0.1 * 1.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn scalar_step_response_closed_form() {
        // a = -1, b = 1, u = 1, x0 = 0: x_k = 1 - e^{-k dt}
        let sys = LtiSystem::new(
            Mat::from_element(1, 1, -1.0),
            Mat::from_element(1, 1, 1.0),
            Mat::identity(1, 1),
        )
        .unwrap();
        let steps = 50;
        let dt = 0.05;
        let u = Mat::from_element(steps, 1, 1.0);
        let traj = simulate_lti(&sys, &u, &Vector::zeros(1), dt, steps).unwrap();
        for k in 0..=steps {
            let expect = 1.0 - fmath::exp(-(k as f64) * dt);
            assert!((traj.states[(0, k)] - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn autonomous_decay_is_bounded() {
        let mut rng = crate::seeded_rng(61, 10);
        let a = crate::numerics::test_util::random_stable(&mut rng, 4);
        let sys = LtiSystem::new(a.clone(), Mat::zeros(4, 1), Mat::identity(4, 4)).unwrap();
        let u = Mat::zeros(30, 1);
        let x0 = Vector::from_fn(4, |i, _| 1.0 + i as f64);
        let traj = simulate_lti(&sys, &u, &x0, 0.2, 30).unwrap();
        for k in 0..=30 {
            let bound = crate::numerics::matrix_exponential(&a, k as f64 * 0.2)
                .unwrap()
                .norm()
                * x0.norm();
            assert!(traj.states.column(k).norm() <= bound + 1e-9);
        }
    }

    #[test]
    fn zoh_halved_step_agrees_at_common_times() {
        let mut rng = crate::seeded_rng(62, 11);
        let a = crate::numerics::test_util::random_stable(&mut rng, 3);
        let b = Mat::from_fn(3, 1, |_, _| rand::Rng::random::<f64>(&mut rng));
        let sys = LtiSystem::new(a, b, Mat::identity(3, 3)).unwrap();
        let steps = 20;
        let dt = 0.3;
        let u = Mat::from_fn(steps, 1, |k, _| if k % 3 == 0 { 1.0 } else { -0.5 });
        // same piecewise-constant signal sampled at dt/2
        let u_half = Mat::from_fn(2 * steps, 1, |k, _| u[(k / 2, 0)]);
        let t1 = simulate_lti(&sys, &u, &Vector::zeros(3), dt, steps).unwrap();
        let t2 = simulate_lti(&sys, &u_half, &Vector::zeros(3), dt / 2.0, 2 * steps).unwrap();
        for k in 0..=steps {
            let d = (t1.states.column(k) - t2.states.column(2 * k)).norm();
            assert!(d < 1e-9, "mismatch {d} at step {k}");
        }
    }

    struct ScalarDecay;
    impl VectorField for ScalarDecay {
        fn dim(&self) -> usize {
            1
        }
        fn inputs(&self) -> usize {
            1
        }
        fn eval(&self, x: &Vector, _u: &Vector, out: &mut Vector) {
            out[0] = -x[0];
        }
    }

    #[test]
    fn rk4_matches_exponential_and_shows_fourth_order() {
        let sys = NonlinearSystem::new(
            Arc::new(ScalarDecay),
            Mat::identity(1, 1),
            Vector::zeros(1),
            Vector::zeros(1),
        )
        .unwrap();
        let x0 = Vector::from_element(1, 1.0);
        let run = |dt: f64| {
            let steps = (1.0 / dt).round() as usize;
            let u = Mat::zeros(steps, 1);
            let traj = simulate_nonlinear(&sys, &u, &x0, dt, steps).unwrap();
            traj.states[(0, steps)]
        };
        let exact = fmath::exp(-1.0);
        let e1 = (run(0.01) - exact).abs();
        assert!(e1 < 1e-8, "error {e1}");
        let e2 = (run(0.02) - exact).abs();
        let ratio = e2 / e1.max(1e-300);
        assert!((10.0..22.0).contains(&ratio), "order ratio {ratio}");
    }

    #[test]
    fn zero_field_constant_trajectory() {
        struct Zero;
        impl VectorField for Zero {
            fn dim(&self) -> usize {
                2
            }
            fn inputs(&self) -> usize {
                1
            }
            fn eval(&self, _x: &Vector, _u: &Vector, out: &mut Vector) {
                out.fill(0.0);
            }
        }
        let sys = NonlinearSystem::new(
            Arc::new(Zero),
            Mat::identity(2, 2),
            Vector::zeros(2),
            Vector::zeros(1),
        )
        .unwrap();
        let x0 = Vector::from_vec(alloc::vec![1.0, -2.0]);
        let traj =
            simulate_nonlinear(&sys, &Mat::zeros(5, 1), &x0, 0.1, 5).unwrap();
        for k in 0..=5 {
            assert_relative_eq!(traj.states.column(k).into_owned(), x0, epsilon = 1e-15);
        }
    }

    #[test]
    fn linearize_recovers_linear_maps_exactly() {
        struct Affine {
            a: Mat,
            b: Mat,
        }
        impl VectorField for Affine {
            fn dim(&self) -> usize {
                self.a.nrows()
            }
            fn inputs(&self) -> usize {
                self.b.ncols()
            }
            fn eval(&self, x: &Vector, u: &Vector, out: &mut Vector) {
                out.copy_from(&(&self.a * x + &self.b * u));
            }
        }
        let mut rng = crate::seeded_rng(63, 12);
        let a = Mat::from_fn(3, 3, |_, _| rand::Rng::random::<f64>(&mut rng) - 0.5);
        let b = Mat::from_fn(3, 2, |_, _| rand::Rng::random::<f64>(&mut rng) - 0.5);
        let sys = NonlinearSystem::new(
            Arc::new(Affine { a: a.clone(), b: b.clone() }),
            Mat::identity(3, 3),
            Vector::zeros(3),
            Vector::zeros(2),
        )
        .unwrap();
        let (al, bl) = linearize(&sys, &Vector::zeros(3), &Vector::zeros(2)).unwrap();
        assert!((al - a).norm() < 1e-6);
        assert!((bl - b).norm() < 1e-6);
    }

    #[test]
    fn quadratic_has_zero_jacobian_at_origin() {
        struct Quad;
        impl VectorField for Quad {
            fn dim(&self) -> usize {
                1
            }
            fn inputs(&self) -> usize {
                1
            }
            fn eval(&self, x: &Vector, _u: &Vector, out: &mut Vector) {
                out[0] = x[0] * x[0];
            }
        }
        let sys = NonlinearSystem::new(
            Arc::new(Quad),
            Mat::identity(1, 1),
            Vector::zeros(1),
            Vector::zeros(1),
        )
        .unwrap();
        let (a, _) = linearize(&sys, &Vector::zeros(1), &Vector::zeros(1)).unwrap();
        assert!(a[(0, 0)].abs() < 1e-9);
    }

    #[test]
    fn cubic_chain_linearization_matches_linear_variant() {
        let base = SpringChainConfig {
            n_masses: 3,
            stiffness: 2.0,
            damping: 0.4,
            cubic_coeff: 0.0,
            n_inputs: 1,
            n_outputs: 1,
            output_scale: 1.0,
        };
        let lin = match make_spring_mass_chain(&base).unwrap() {
            Plant::Lti(s) => s,
            _ => unreachable!(),
        };
        let cubic = match make_spring_mass_chain(&SpringChainConfig { cubic_coeff: 5.0, ..base }).unwrap() {
            Plant::Nonlinear(s) => s,
            _ => unreachable!(),
        };
        let (a, b) = linearize(&cubic, &Vector::zeros(6), &Vector::zeros(1)).unwrap();
        assert!((a - &lin.a).norm() < 1e-5);
        assert!((b - &lin.b).norm() < 1e-5);
    }
}
