//! Box-constrained QP via accelerated projected gradient with adaptive
//! restart. The KKT residual is the norm of the projected gradient step.

use crate::{Mat, Vector};

#[derive(Debug, Clone)]
pub struct QpResult {
    pub x: Vector,
    pub iters: usize,
    pub converged: bool,
    pub kkt_residual: f64,
}

fn project(x: &mut Vector, lo: &Vector, hi: &Vector) {
    for i in 0..x.len() {
        x[i] = x[i].clamp(lo[i], hi[i]);
    }
}

/// Minimizes `0.5 x^T H x + f^T x` subject to `lo <= x <= hi`. `lipschitz`
/// must upper-bound the largest eigenvalue of `H`.
pub fn solve_box_qp(
    h: &Mat,
    f: &Vector,
    lo: &Vector,
    hi: &Vector,
    x0: &Vector,
    lipschitz: f64,
    tol: f64,
    max_iter: usize,
) -> QpResult {
    let step = 1.0 / lipschitz.max(1e-300);
    let mut x = x0.clone();
    project(&mut x, lo, hi);
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut kkt = f64::INFINITY;
    for it in 0..max_iter {
        let g = h * &y + f;
        let mut x_new = &y - &g * step;
        project(&mut x_new, lo, hi);

        // KKT residual: projected-gradient fixed-point error at x_new
        let g_new = h * &x_new + f;
        let mut probe = &x_new - &g_new * step;
        project(&mut probe, lo, hi);
        kkt = (&x_new - &probe).amax() / step;
        if kkt <= tol {
            return QpResult { x: x_new, iters: it + 1, converged: true, kkt_residual: kkt };
        }

        let dx = &x_new - &x;
        // restart the momentum when it points against the gradient
        if g.dot(&dx) > 0.0 {
            t = 1.0;
            y = x_new.clone();
        } else {
            let t_new = 0.5 * (1.0 + crate::fmath::sqrt(1.0 + 4.0 * t * t));
            y = &x_new + &dx * ((t - 1.0) / t_new);
            project(&mut y, lo, hi);
            t = t_new;
        }
        x = x_new;
    }
    QpResult { x, iters: max_iter, converged: false, kkt_residual: kkt }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unconstrained_matches_linear_solve() {
        let mut rng = crate::seeded_rng(111, 60);
        let g = Mat::from_fn(5, 5, |_, _| rand::Rng::random::<f64>(&mut rng) - 0.5);
        let h = &g * g.transpose() + Mat::identity(5, 5);
        let f = Vector::from_fn(5, |i, _| i as f64 - 2.0);
        let lo = Vector::from_element(5, -1e6);
        let hi = Vector::from_element(5, 1e6);
        let lips = h.clone().symmetric_eigen().eigenvalues.max();
        let sol = solve_box_qp(&h, &f, &lo, &hi, &Vector::zeros(5), lips, 1e-10, 20_000);
        assert!(sol.converged);
        let exact = h.clone().cholesky().unwrap().solve(&(-&f));
        assert!((sol.x - exact).norm() < 1e-7);
    }

    #[test]
    fn active_box_is_respected() {
        // minimizer of (x - 3)^2 under x <= 1 is x = 1
        let h = Mat::from_element(1, 1, 2.0);
        let f = Vector::from_element(1, -6.0);
        let lo = Vector::from_element(1, -1.0);
        let hi = Vector::from_element(1, 1.0);
        let sol = solve_box_qp(&h, &f, &lo, &hi, &Vector::zeros(1), 2.0, 1e-10, 1000);
        assert!(sol.converged);
        assert_relative_eq!(sol.x[0], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn degenerate_box_pins_the_solution() {
        let h = Mat::identity(2, 2);
        let f = Vector::from_vec(alloc::vec![5.0, -5.0]);
        let lo = Vector::zeros(2);
        let hi = Vector::zeros(2);
        let sol = solve_box_qp(&h, &f, &lo, &hi, &Vector::from_element(2, 3.0), 1.0, 1e-10, 100);
        assert!(sol.converged);
        assert_eq!(sol.x.as_slice(), &[0.0, 0.0]);
    }
}
