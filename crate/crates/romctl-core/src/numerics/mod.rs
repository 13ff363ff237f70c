//! Dense linear-algebra kernels: matrix exponential, Lyapunov and discrete
//! Riccati solvers, truncated SVD, numerical rank, principal angles, and the
//! frequency-response evaluator shared by validation and margin checks.
//!
//! All operations are pure functions over immutable inputs.

mod freq;
mod lyapunov;
mod matexp;
mod riccati;
mod svd;

pub use freq::FreqResponder;
pub use lyapunov::{solve_continuous_lyapunov, solve_continuous_lyapunov_with};
pub use matexp::{matrix_exponential, zoh_pair};
pub use riccati::{solve_dare, solve_dare_with, solve_discrete_lyapunov, DareSolution};
pub use svd::{
    numerical_rank, principal_angle_deg, truncated_svd, truncated_svd_with, SvdTruncation,
    TruncatedSvd,
};

use crate::{C64, CMat, Error, Mat, Result};
use alloc::format;
use alloc::vec::Vec;

pub(crate) fn ensure_finite(m: &Mat, name: &str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} contains non-finite entries")))
    }
}

pub(crate) fn ensure_square(m: &Mat, name: &str) -> Result<()> {
    if m.nrows() == m.ncols() && m.nrows() > 0 {
        Ok(())
    } else {
        Err(Error::dim(format!(
            "{name} must be square and non-empty, got {}x{}",
            m.nrows(),
            m.ncols()
        )))
    }
}

/// 0.5 (M + M^T).
pub fn symmetrize(m: &Mat) -> Mat {
    0.5 * (m + m.transpose())
}

pub(crate) fn complexify(m: &Mat) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

/// Largest eigenvalue magnitude.
pub fn spectral_radius(m: &Mat) -> f64 {
    m.complex_eigenvalues().iter().map(|l| l.norm()).fold(0.0, f64::max)
}

/// Largest eigenvalue real part.
pub fn max_re_eigenvalue(m: &Mat) -> f64 {
    m.complex_eigenvalues().iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max)
}

/// Induced 1-norm (max absolute column sum).
pub fn norm_l1(m: &Mat) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// 2-norm condition number from singular values; `f64::INFINITY` when rank
/// deficient to working precision.
pub fn condition_number(m: &Mat) -> f64 {
    let sv = m.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    if smin <= smax * 1e-300 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

/// Radial projection of eigenvalues of `a` onto the disk of radius `cap`,
/// performed on the real Schur form so the result stays real and the modified
/// spectrum is exact. Returns the projected matrix and how many eigenvalues
/// moved.
pub fn clamp_spectral_radius(a: &Mat, cap: f64) -> Result<(Mat, usize)> {
    ensure_square(a, "A")?;
    let n = a.nrows();
    let scale = norm_l1(a).max(1.0);
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), f64::EPSILON, 100_000)
        .ok_or_else(|| Error::Convergence("Schur decomposition did not converge".into()))?;
    let (q, mut t) = schur.unpack();
    let mut clamped = 0;
    let mut i = 0;
    while i < n {
        let in_2x2 = i + 1 < n && t[(i + 1, i)].abs() > 1e-14 * scale;
        if in_2x2 {
            let (p, qq, r, s) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let tr = 0.5 * (p + s);
            let det = p * s - qq * r;
            let disc = tr * tr - det;
            let rho = if disc < 0.0 {
                crate::fmath::sqrt(det.max(0.0))
            } else {
                let sq = crate::fmath::sqrt(disc);
                (tr + sq).abs().max((tr - sq).abs())
            };
            if rho > cap {
                let f = cap / rho;
                t[(i, i)] *= f;
                t[(i, i + 1)] *= f;
                t[(i + 1, i)] *= f;
                t[(i + 1, i + 1)] *= f;
                clamped += 2;
            }
            i += 2;
        } else {
            if t[(i, i)].abs() > cap {
                t[(i, i)] = cap * t[(i, i)].signum();
                clamped += 1;
            }
            i += 1;
        }
    }
    Ok((&q * t * q.transpose(), clamped))
}

/// Log-spaced grid over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && points >= 2);
    let (llo, lhi) = (crate::fmath::log10(lo), crate::fmath::log10(hi));
    (0..points)
        .map(|i| {
            let t = i as f64 / (points - 1) as f64;
            crate::fmath::powf(10.0, llo + t * (lhi - llo))
        })
        .collect()
}


#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn clamp_moves_only_offending_eigenvalues() {
        // real eigenvalue 1.01 plus a stable complex pair
        let a = Mat::from_row_slice(
            3,
            3,
            &[1.01, 0.0, 0.0, 0.0, 0.3, 0.5, 0.0, -0.5, 0.3],
        );
        let (c, moved) = clamp_spectral_radius(&a, 0.975).unwrap();
        assert_eq!(moved, 1);
        assert_relative_eq!(spectral_radius(&c), 0.975, max_relative = 1e-10);
        // the stable pair is untouched
        let eigs = c.complex_eigenvalues();
        let pair_norm = eigs.iter().filter(|l| l.im.abs() > 1e-12).map(|l| l.norm()).next().unwrap();
        assert_relative_eq!(pair_norm, crate::fmath::hypot(0.3, 0.5), max_relative = 1e-10);
    }

    #[test]
    fn clamp_complex_pair() {
        let a = Mat::from_row_slice(2, 2, &[0.8, 0.8, -0.8, 0.8]);
        let rho0 = spectral_radius(&a);
        assert!(rho0 > 1.0);
        let (c, moved) = clamp_spectral_radius(&a, 0.975).unwrap();
        assert_eq!(moved, 2);
        assert_relative_eq!(spectral_radius(&c), 0.975, max_relative = 1e-10);
    }

    #[test]
    fn l1_norm_matches_definition() {
        let a = Mat::from_row_slice(2, 2, &[1.0, -3.0, 2.0, 0.5]);
        assert_relative_eq!(norm_l1(&a), 3.5);
    }
}
