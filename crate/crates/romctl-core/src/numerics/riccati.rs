//! Discrete algebraic Riccati solver: structure-preserving doubling with a
//! Newton-Kleinman refinement fallback, plus the Stein (discrete Lyapunov)
//! solver the refinement relies on.

use super::{ensure_finite, ensure_square, spectral_radius, symmetrize};
use crate::{Error, Mat, Result};
use alloc::format;

/// Stabilizing DARE solution together with its certificates.
#[derive(Debug, Clone)]
pub struct DareSolution {
    /// Symmetric positive-definite Riccati solution.
    pub p: Mat,
    /// LQR gain `K = (R + B^T P B)^{-1} B^T P A`.
    pub k: Mat,
    /// Frobenius norm of the Riccati residual.
    pub residual: f64,
    /// Spectral radius of `A - B K`.
    pub closed_loop_radius: f64,
    /// Doubling iterations used.
    pub iterations: usize,
}

/// Solves `P = A^T P A - A^T P B (R + B^T P B)^{-1} B^T P A + Q` for the
/// stabilizing `P` and gain `K`. `(A, B)` must be stabilizable, `Q` PSD,
/// `R` PD.
pub fn solve_dare(a: &Mat, b: &Mat, q: &Mat, r: &Mat) -> Result<DareSolution> {
    solve_dare_with(a, b, q, r, 1e-12, 200, 1e-8)
}

/// [`solve_dare`] with explicit doubling tolerance, iteration cap, and
/// required residual.
pub fn solve_dare_with(
    a: &Mat,
    b: &Mat,
    q: &Mat,
    r: &Mat,
    tol: f64,
    max_iter: usize,
    residual_max: f64,
) -> Result<DareSolution> {
    ensure_square(a, "A")?;
    ensure_finite(a, "A")?;
    let n = a.nrows();
    let m = b.ncols();
    if b.nrows() != n {
        return Err(Error::dim(format!("B has {} rows, expected {n}", b.nrows())));
    }
    if q.nrows() != n || q.ncols() != n {
        return Err(Error::dim("Q dimension mismatch"));
    }
    if r.nrows() != m || r.ncols() != m {
        return Err(Error::dim("R dimension mismatch"));
    }
    let r_chol = r
        .clone()
        .cholesky()
        .ok_or_else(|| Error::domain("R is not positive definite"))?;
    let q = symmetrize(q);

    // doubling iteration on (A_k, G_k, H_k); H_k converges to P
    let g0 = b * r_chol.solve(&b.transpose());
    let mut ak = a.clone();
    let mut gk = symmetrize(&g0);
    let mut hk = q.clone();
    let eye = Mat::identity(n, n);
    let mut iterations = max_iter;
    let mut converged = false;
    for it in 0..max_iter {
        let lu = (&eye + &gk * &hk).lu();
        let x1 = lu
            .solve(&ak)
            .ok_or_else(|| Error::Synthesis("doubling iteration hit a singular pencil".into()))?;
        let x2 = lu
            .solve(&gk)
            .ok_or_else(|| Error::Synthesis("doubling iteration hit a singular pencil".into()))?;
        let a_next = &ak * &x1;
        let g_next = symmetrize(&(&gk + &ak * &x2 * ak.transpose()));
        let h_next = symmetrize(&(&hk + ak.transpose() * &hk * &x1));
        let delta = (&h_next - &hk).norm();
        let scale = h_next.norm().max(1.0);
        if !delta.is_finite() || scale > 1e14 {
            return Err(Error::Synthesis(
                "doubling iteration diverged; (A, B) is likely not stabilizable".into(),
            ));
        }
        ak = a_next;
        gk = g_next;
        hk = h_next;
        if delta <= tol * scale {
            iterations = it + 1;
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Synthesis(format!(
            "DARE doubling did not converge in {max_iter} iterations"
        )));
    }

    let mut p = hk;
    let mut k = gain(a, b, r, &p)?;
    let mut residual = dare_residual(a, b, &q, r, &p)?;

    // Newton-Kleinman refinement when the doubling result is not tight enough
    if residual > residual_max {
        for _ in 0..20 {
            let a_cl = a - b * &k;
            let rhs = symmetrize(&(&q + k.transpose() * r * &k));
            p = solve_discrete_lyapunov(&a_cl, &rhs)?;
            k = gain(a, b, r, &p)?;
            let res_new = dare_residual(a, b, &q, r, &p)?;
            let stalled = res_new >= residual * 0.5;
            residual = res_new;
            if residual <= residual_max * 0.01 || stalled {
                break;
            }
        }
    }
    if residual > residual_max {
        return Err(Error::Convergence(format!(
            "DARE residual {residual:.3e} exceeds {residual_max:.1e}"
        )));
    }

    let closed_loop_radius = spectral_radius(&(a - b * &k));
    if closed_loop_radius >= 1.0 {
        return Err(Error::Synthesis(format!(
            "closed loop is not Schur stable (rho = {closed_loop_radius:.6})"
        )));
    }
    Ok(DareSolution { p, k, residual, closed_loop_radius, iterations })
}

fn gain(a: &Mat, b: &Mat, r: &Mat, p: &Mat) -> Result<Mat> {
    let s = r + b.transpose() * p * b;
    let chol = s
        .cholesky()
        .ok_or_else(|| Error::Synthesis("R + B^T P B is not positive definite".into()))?;
    Ok(chol.solve(&(b.transpose() * p * a)))
}

fn dare_residual(a: &Mat, b: &Mat, q: &Mat, r: &Mat, p: &Mat) -> Result<f64> {
    let s = r + b.transpose() * p * b;
    let chol = s
        .cholesky()
        .ok_or_else(|| Error::Synthesis("R + B^T P B is not positive definite".into()))?;
    let cross = a.transpose() * p * b;
    let rhs = a.transpose() * p * a - &cross * chol.solve(&cross.transpose()) + q;
    Ok((rhs - p).norm())
}

/// Stein equation solver: returns `P` with `P = A^T P A + Q` for Schur-stable
/// `A` (squaring-based Smith iteration, quadratically convergent).
pub fn solve_discrete_lyapunov(a: &Mat, q: &Mat) -> Result<Mat> {
    ensure_square(a, "A")?;
    let mut p = symmetrize(q);
    let mut m = a.transpose();
    for _ in 0..200 {
        let m_norm = m.norm();
        if m_norm * m_norm * p.norm() < 1e-16 * p.norm().max(1.0) || m_norm < 1e-150 {
            return Ok(symmetrize(&p));
        }
        p = symmetrize(&(&p + &m * &p * m.transpose()));
        m = &m * &m;
        if !p.iter().all(|x| x.is_finite()) {
            return Err(Error::Stability("Stein iteration diverged; A is not Schur stable".into()));
        }
    }
    Ok(symmetrize(&p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    #[test]
    fn scalar_no_dynamics() {
        // a = 0: P = Q = 1, K = 0
        let sol = solve_dare(
            &Mat::from_element(1, 1, 0.0),
            &Mat::from_element(1, 1, 1.0),
            &Mat::from_element(1, 1, 1.0),
            &Mat::from_element(1, 1, 1.0),
        )
        .unwrap();
        assert_relative_eq!(sol.p[(0, 0)], 1.0, epsilon = 1e-10);
        assert_relative_eq!(sol.k[(0, 0)], 0.0, epsilon = 1e-10);
    }

    #[test]
    fn scalar_golden_ratio() {
        // a = b = q = r = 1: p^2 = p + 1 => p = (1 + sqrt 5) / 2
        let one = Mat::from_element(1, 1, 1.0);
        let sol = solve_dare(&one, &one, &one, &one).unwrap();
        let golden = (1.0 + crate::fmath::sqrt(5.0)) / 2.0;
        assert_relative_eq!(sol.p[(0, 0)], golden, epsilon = 1e-10);
        assert_relative_eq!(sol.k[(0, 0)], golden / (1.0 + golden), epsilon = 1e-10);
    }

    #[test]
    fn random_systems_meet_residual_and_stability() {
        let mut rng = crate::seeded_rng(23, 4);
        for _ in 0..20 {
            let n = 2 + (rng.random::<u32>() % 4) as usize;
            let m = 1 + (rng.random::<u32>() % 2) as usize;
            // Schur-stable A scaled under 1, so always stabilizable
            let mut a = Mat::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
            a *= 0.9 / spectral_radius(&a).max(1e-6);
            let b = Mat::from_fn(n, m, |_, _| rng.random::<f64>() - 0.5);
            let q = {
                let g = Mat::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
                &g * g.transpose()
            };
            let r = Mat::identity(m, m) * (0.1 + rng.random::<f64>());
            let sol = solve_dare(&a, &b, &q, &r).unwrap();
            assert!(sol.residual <= 1e-8, "residual {}", sol.residual);
            assert!(sol.closed_loop_radius < 1.0);
        }
    }

    #[test]
    fn unstabilizable_pair_is_rejected() {
        // unstable mode with no input authority
        let a = Mat::from_row_slice(2, 2, &[1.5, 0.0, 0.0, 0.5]);
        let b = Mat::from_row_slice(2, 1, &[0.0, 1.0]);
        let q = Mat::identity(2, 2);
        let r = Mat::identity(1, 1);
        assert!(solve_dare(&a, &b, &q, &r).is_err());
    }

    #[test]
    fn singular_r_is_rejected() {
        let a = Mat::identity(2, 2) * 0.5;
        let b = Mat::identity(2, 2);
        let q = Mat::identity(2, 2);
        let r = Mat::zeros(2, 2);
        assert!(matches!(solve_dare(&a, &b, &q, &r), Err(Error::Domain(_))));
    }

    #[test]
    fn stein_matches_series() {
        let a = Mat::from_row_slice(2, 2, &[0.5, 0.2, -0.1, 0.3]);
        let q = Mat::identity(2, 2);
        let p = solve_discrete_lyapunov(&a, &q).unwrap();
        // oracle: truncated series sum (A^T)^k Q A^k
        let mut oracle = Mat::zeros(2, 2);
        let mut pw = Mat::identity(2, 2);
        for _ in 0..200 {
            oracle += pw.transpose() * &q * &pw;
            pw = &a * pw;
        }
        assert!((p - oracle).norm() < 1e-12);
    }
}
