//! Continuous Lyapunov solver `A W + W A^T + Q = 0` for Hurwitz `A`.
//!
//! Small problems go through the Kronecker-vectorized direct solve; larger
//! ones through a Schur-form substitution (complex Schur keeps the
//! back-substitution strictly triangular).

use super::{complexify, ensure_finite, ensure_square, symmetrize};
use crate::{C64, CMat, Error, Mat, Result};
use alloc::format;

/// Dimension at or below which the direct Kronecker solve is used when no
/// config is in scope. Mirrors `Config::lyapunov_direct_max_dim`.
pub(crate) const DIRECT_MAX_DIM: usize = 64;

/// Solves `A W + W A^T + Q = 0`. `A` must be Hurwitz and `Q` symmetric PSD.
pub fn solve_continuous_lyapunov(a: &Mat, q: &Mat) -> Result<Mat> {
    solve_continuous_lyapunov_with(a, q, DIRECT_MAX_DIM)
}

/// Same as [`solve_continuous_lyapunov`] with an explicit crossover point
/// between the direct and Schur-based methods.
pub fn solve_continuous_lyapunov_with(a: &Mat, q: &Mat, direct_max_dim: usize) -> Result<Mat> {
    ensure_square(a, "A")?;
    ensure_finite(a, "A")?;
    ensure_square(q, "Q")?;
    ensure_finite(q, "Q")?;
    let n = a.nrows();
    if q.nrows() != n {
        return Err(Error::dim(format!("Q is {}x{}, expected {n}x{n}", q.nrows(), q.ncols())));
    }
    let q_norm = q.norm();
    if (q - q.transpose()).norm() > 1e-8 * q_norm.max(1.0) {
        return Err(Error::domain("Q is asymmetric beyond tolerance"));
    }
    let q = symmetrize(q);

    let w = if n <= direct_max_dim {
        let max_re = super::max_re_eigenvalue(a);
        if max_re >= 0.0 {
            return Err(Error::Stability(format!(
                "A is not Hurwitz (max Re lambda = {max_re:.3e})"
            )));
        }
        solve_direct(a, &q)?
    } else {
        solve_schur(a, &q)?
    };

    // residual gate with one refinement pass if needed
    let mut w = symmetrize(&w);
    let tol = 1e-10;
    for _ in 0..2 {
        let res = a * &w + &w * a.transpose() + &q;
        if res.norm() <= tol * q_norm.max(1e-300) {
            return Ok(w);
        }
        let dw = if n <= direct_max_dim {
            solve_direct(a, &res)?
        } else {
            solve_schur(a, &res)?
        };
        w = symmetrize(&(&w + dw));
    }
    let res = (a * &w + &w * a.transpose() + &q).norm();
    if res <= tol * q_norm.max(1e-300) {
        Ok(w)
    } else {
        Err(Error::Convergence(format!(
            "Lyapunov residual {res:.3e} exceeds {tol:.1e} * ||Q||"
        )))
    }
}

/// (I (x) A + A (x) I) vec(W) = -vec(Q).
fn solve_direct(a: &Mat, q: &Mat) -> Result<Mat> {
    let n = a.nrows();
    let eye = Mat::identity(n, n);
    let big = eye.kronecker(a) + a.kronecker(&eye);
    let rhs = nalgebra::DVector::from_column_slice(q.as_slice());
    let sol = big
        .lu()
        .solve(&(-rhs))
        .ok_or_else(|| Error::Convergence("Kronecker Lyapunov system is singular".into()))?;
    Ok(Mat::from_column_slice(n, n, sol.as_slice()))
}

/// Complex-Schur substitution: with A = U T U^H, W = U Y U^H where
/// T Y + Y T^H = -U^H Q U is solved entry-wise from the bottom-right corner.
fn solve_schur(a: &Mat, q: &Mat) -> Result<Mat> {
    let n = a.nrows();
    let ac = complexify(a);
    let schur = nalgebra::linalg::Schur::try_new(ac, f64::EPSILON, 200_000)
        .ok_or_else(|| Error::Convergence("complex Schur decomposition did not converge".into()))?;
    let (u, t) = schur.unpack();
    let max_re = (0..n).map(|i| t[(i, i)].re).fold(f64::NEG_INFINITY, f64::max);
    if max_re >= 0.0 {
        return Err(Error::Stability(format!(
            "A is not Hurwitz (max Re lambda = {max_re:.3e})"
        )));
    }

    let qt = u.adjoint() * complexify(q) * &u;
    let mut y = CMat::zeros(n, n);
    for j in (0..n).rev() {
        for i in (0..n).rev() {
            let mut s = -qt[(i, j)];
            for k in (i + 1)..n {
                s -= t[(i, k)] * y[(k, j)];
            }
            for k in (j + 1)..n {
                s -= y[(i, k)] * t[(j, k)].conj();
            }
            let denom = t[(i, i)] + t[(j, j)].conj();
            y[(i, j)] = s / denom;
        }
    }
    let w = &u * y * u.adjoint();
    Ok(w.map(|c: C64| c.re))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::test_util::{random_psd, random_stable};
    use approx::assert_relative_eq;
    use rand::Rng;

    #[test]
    fn scalar_case() {
        // -2w + 2 = 0 => w = 1
        let a = Mat::from_element(1, 1, -1.0);
        let q = Mat::from_element(1, 1, 2.0);
        let w = solve_continuous_lyapunov(&a, &q).unwrap();
        assert_relative_eq!(w[(0, 0)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn decoupled_diagonal() {
        let a = Mat::from_diagonal(&crate::Vector::from_vec(alloc::vec![-1.0, -2.0]));
        let q = Mat::identity(2, 2);
        let w = solve_continuous_lyapunov(&a, &q).unwrap();
        assert_relative_eq!(w[(0, 0)], 0.5, epsilon = 1e-12);
        assert_relative_eq!(w[(1, 1)], 0.25, epsilon = 1e-12);
        assert_relative_eq!(w[(0, 1)], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn schur_path_matches_direct() {
        let mut rng = crate::seeded_rng(3, 2);
        for n in [4usize, 9, 17] {
            let a = random_stable(&mut rng, n);
            let q = random_psd(&mut rng, n) + Mat::identity(n, n) * 0.1;
            let w_direct = solve_continuous_lyapunov_with(&a, &q, usize::MAX).unwrap();
            let w_schur = solve_continuous_lyapunov_with(&a, &q, 0).unwrap();
            assert!((w_direct - &w_schur).norm() < 1e-9 * w_schur.norm().max(1.0));
        }
    }

    #[test]
    fn solution_is_symmetric_psd() {
        let mut rng = crate::seeded_rng(5, 3);
        let a = random_stable(&mut rng, 6);
        let g = Mat::from_fn(6, 2, |_, _| rng.random::<f64>() - 0.5);
        let q = &g * g.transpose();
        let w = solve_continuous_lyapunov(&a, &q).unwrap();
        assert!((&w - w.transpose()).norm() < 1e-12 * w.norm().max(1.0));
        let mut eigs: alloc::vec::Vec<f64> = w.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let w2 = w.norm();
        assert!(eigs[0] >= -1e-10 * w2, "min eig {} vs norm {}", eigs[0], w2);
    }

    #[test]
    fn rejects_unstable_and_asymmetric() {
        let a = Mat::from_element(1, 1, 0.5);
        let q = Mat::from_element(1, 1, 1.0);
        assert!(matches!(solve_continuous_lyapunov(&a, &q), Err(Error::Stability(_))));

        let a = Mat::from_diagonal(&crate::Vector::from_vec(alloc::vec![-1.0, -1.0]));
        let q = Mat::from_row_slice(2, 2, &[1.0, 0.5, -0.5, 1.0]);
        assert!(matches!(solve_continuous_lyapunov(&a, &q), Err(Error::Domain(_))));
    }
}
