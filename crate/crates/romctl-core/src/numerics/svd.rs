//! Truncated SVD with an energy or fixed-rank criterion, numerical rank, and
//! principal angles between subspaces.
//!
//! Tall or wide snapshot matrices beyond the exact-SVD cutoff use the Gram
//! route (symmetric eigendecomposition of the smaller Gramian) followed by a
//! QR re-orthonormalization of the computed basis.

use super::{ensure_finite, symmetrize};
use crate::fmath;
use crate::{Error, Mat, Result, Vector};
use alloc::format;
use alloc::vec::Vec;

/// Basis truncation criterion.
#[derive(Debug, Clone, Copy)]
pub enum SvdTruncation {
    /// Keep the smallest rank capturing this fraction of squared singular
    /// value energy.
    Energy(f64),
    /// Keep exactly this many modes (clamped to the available rank).
    FixedRank(usize),
}

/// Result of [`truncated_svd`]: `u`/`v` hold the retained modes, `sigma` the
/// full singular spectrum of the input.
#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    pub u: Mat,
    pub sigma: Vector,
    pub v: Mat,
    pub rank: usize,
}

impl TruncatedSvd {
    /// Fraction of squared singular-value energy captured by the retained
    /// modes.
    pub fn energy_captured(&self) -> f64 {
        let total: f64 = self.sigma.iter().map(|s| s * s).sum();
        if total == 0.0 {
            return 0.0;
        }
        let kept: f64 = self.sigma.iter().take(self.rank).map(|s| s * s).sum();
        kept / total
    }
}

/// Default crossover between the exact dense SVD and the Gram route.
pub(crate) const EXACT_CUTOFF: usize = 400;

/// Energy- or rank-truncated SVD of `x`.
pub fn truncated_svd(x: &Mat, criterion: SvdTruncation) -> Result<TruncatedSvd> {
    truncated_svd_with(x, criterion, EXACT_CUTOFF)
}

/// [`truncated_svd`] with an explicit exact-SVD cutoff (the Gram route kicks
/// in when `min(nrows, ncols)` exceeds it).
pub fn truncated_svd_with(x: &Mat, criterion: SvdTruncation, exact_cutoff: usize) -> Result<TruncatedSvd> {
    ensure_finite(x, "X")?;
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(Error::dim("X is empty"));
    }
    if x.norm() == 0.0 {
        return Err(Error::DegenerateInput("all-zero snapshot matrix has no basis".into()));
    }
    if let SvdTruncation::Energy(e) = criterion {
        if !(0.0 < e && e <= 1.0) {
            return Err(Error::domain(format!("energy fraction must be in (0, 1], got {e}")));
        }
    }

    let (u_all, sigma, v_all) = if x.nrows().min(x.ncols()) <= exact_cutoff {
        exact_svd(x)?
    } else {
        gram_svd(x)?
    };

    let total: f64 = sigma.iter().map(|s| s * s).sum();
    let rank = match criterion {
        SvdTruncation::FixedRank(r) => r.min(sigma.len()).max(1),
        SvdTruncation::Energy(e) => {
            let mut acc = 0.0;
            let mut r = sigma.len();
            for (i, s) in sigma.iter().enumerate() {
                acc += s * s;
                if acc >= e * total {
                    r = i + 1;
                    break;
                }
            }
            r
        }
    };

    Ok(TruncatedSvd {
        u: u_all.columns(0, rank.min(u_all.ncols())).into_owned(),
        sigma,
        v: v_all.columns(0, rank.min(v_all.ncols())).into_owned(),
        rank,
    })
}

fn exact_svd(x: &Mat) -> Result<(Mat, Vector, Mat)> {
    let svd = x.clone().svd(true, true);
    let u = svd.u.ok_or_else(|| Error::Convergence("SVD did not produce U".into()))?;
    let vt = svd.v_t.ok_or_else(|| Error::Convergence("SVD did not produce V^T".into()))?;
    Ok((u, svd.singular_values, vt.transpose()))
}

/// Method of snapshots: eigendecompose the smaller Gramian, recover the other
/// factor, re-orthonormalize with QR.
fn gram_svd(x: &Mat) -> Result<(Mat, Vector, Mat)> {
    let (n, m) = (x.nrows(), x.ncols());
    let wide = n <= m;
    let gram = if wide { x * x.transpose() } else { x.transpose() * x };
    let eig = symmetrize(&gram).symmetric_eigen();
    // sort eigenpairs descending
    let k = gram.nrows();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
    let sigma = Vector::from_iterator(
        k,
        order.iter().map(|&i| fmath::sqrt(eig.eigenvalues[i].max(0.0))),
    );
    let mut w = Mat::zeros(k, k);
    for (col, &i) in order.iter().enumerate() {
        w.set_column(col, &eig.eigenvectors.column(i));
    }

    let smax = sigma[0];
    let cut = (0..k).take_while(|&i| sigma[i] > smax * 1e-13).count().max(1);
    let (u, v) = if wide {
        let u = w.columns(0, cut).into_owned();
        let mut v = x.transpose() * &u;
        for j in 0..cut {
            let s = sigma[j].max(1e-300);
            v.column_mut(j).scale_mut(1.0 / s);
        }
        (reorthonormalize(u), reorthonormalize(v))
    } else {
        let v = w.columns(0, cut).into_owned();
        let mut u = x * &v;
        for j in 0..cut {
            let s = sigma[j].max(1e-300);
            u.column_mut(j).scale_mut(1.0 / s);
        }
        (reorthonormalize(u), reorthonormalize(v))
    };
    Ok((u, sigma, v))
}

fn reorthonormalize(m: Mat) -> Mat {
    let cols = m.ncols();
    let qr = m.qr();
    qr.q().columns(0, cols).into_owned()
}

/// Number of singular values strictly greater than `tau`.
pub fn numerical_rank(x: &Mat, tau: f64) -> Result<usize> {
    ensure_finite(x, "X")?;
    if !tau.is_finite() || tau < 0.0 {
        return Err(Error::domain(format!("tolerance must be >= 0, got {tau}")));
    }
    if x.norm() == 0.0 {
        return Ok(0);
    }
    let sv = x.clone().singular_values();
    Ok(sv.iter().filter(|&&s| s > tau).count())
}

/// Largest principal angle (degrees) between `span(U)` and `span(X)`:
/// `acos` of the smallest singular value of `U^T Q_X`, where `Q_X` is an
/// orthonormal basis for the columns of `X`.
pub fn principal_angle_deg(u: &Mat, x: &Mat) -> Result<f64> {
    ensure_finite(u, "U")?;
    ensure_finite(x, "X")?;
    if u.nrows() != x.nrows() {
        return Err(Error::dim(format!(
            "U has {} rows but X has {}",
            u.nrows(),
            x.nrows()
        )));
    }
    if x.norm() == 0.0 {
        return Err(Error::DegenerateInput("zero snapshot matrix has no span".into()));
    }
    // rank-revealing orthonormal basis of X
    let qr = x.clone().col_piv_qr();
    let r = qr.r();
    let rmax = r[(0, 0)].abs().max(1e-300);
    let rank = (0..r.nrows().min(r.ncols()))
        .take_while(|&i| r[(i, i)].abs() > 1e-12 * rmax)
        .count()
        .max(1);
    let qx = qr.q().columns(0, rank).into_owned();

    let prod = u.transpose() * qx;
    let sv = prod.singular_values();
    let smin = sv.min().clamp(0.0, 1.0);
    Ok(fmath::acos(smin) * 180.0 / core::f64::consts::PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    #[test]
    fn rank_one_column() {
        let c = Vector::from_vec(alloc::vec![3.0, 4.0]);
        let mut x = Mat::zeros(2, 3);
        x.set_column(1, &c);
        let t = truncated_svd(&x, SvdTruncation::Energy(0.99)).unwrap();
        assert_eq!(t.rank, 1);
        assert_relative_eq!(t.sigma[0], 5.0, epsilon = 1e-12);
        assert_relative_eq!(t.u.column(0).map(|v| v.abs()), c / 5.0, epsilon = 1e-12);
    }

    #[test]
    fn equal_singular_values_force_full_retention() {
        let x = Mat::identity(3, 3);
        let t = truncated_svd(&x, SvdTruncation::Energy(0.995)).unwrap();
        assert_eq!(t.rank, 3);
    }

    #[test]
    fn constructed_rank_two_energy_split() {
        // X = u v^T + 0.01 w z^T with orthonormal u,w and v,z
        let n = 10;
        let m = 20;
        let mut u = Vector::zeros(n);
        u[0] = 1.0;
        let mut w = Vector::zeros(n);
        w[1] = 1.0;
        let mut v = Vector::zeros(m);
        v[0] = 1.0;
        let mut z = Vector::zeros(m);
        z[1] = 1.0;
        let x = &u * v.transpose() + 0.01 * &w * z.transpose();
        // sigma = [1, 0.01]: energy ratio 1/(1+1e-4) > 0.995 => rank 1
        let t = truncated_svd(&x, SvdTruncation::Energy(0.995)).unwrap();
        assert_eq!(t.rank, 1);
        // demanding more energy than sigma_1 carries forces rank 2
        let t2 = truncated_svd(&x, SvdTruncation::Energy(0.9999999)).unwrap();
        assert_eq!(t2.rank, 2);
    }

    #[test]
    fn reconstruction_error_equals_tail_energy() {
        let mut rng = crate::seeded_rng(41, 5);
        let x = Mat::from_fn(8, 12, |_, _| rng.random::<f64>() - 0.5);
        for r in [1usize, 3, 6] {
            let t = truncated_svd(&x, SvdTruncation::FixedRank(r)).unwrap();
            let recon = &t.u * Mat::from_diagonal(&t.sigma.rows(0, r).into_owned()) * t.v.transpose();
            let err2 = (&x - recon).norm_squared();
            let tail: f64 = t.sigma.iter().skip(r).map(|s| s * s).sum();
            assert!((err2 - tail).abs() < 1e-10 * x.norm_squared());
        }
    }

    #[test]
    fn gram_route_agrees_with_exact() {
        let mut rng = crate::seeded_rng(42, 6);
        let x = Mat::from_fn(30, 14, |_, _| rng.random::<f64>() - 0.5);
        let exact = truncated_svd_with(&x, SvdTruncation::FixedRank(5), 400).unwrap();
        let gram = truncated_svd_with(&x, SvdTruncation::FixedRank(5), 1).unwrap();
        for i in 0..5 {
            assert_relative_eq!(exact.sigma[i], gram.sigma[i], max_relative = 1e-9);
        }
        // orthonormality of the gram-route basis
        let gu = &gram.u;
        assert!((gu.transpose() * gu - Mat::identity(5, 5)).norm() < 1e-12);
        // same subspace
        let angle = principal_angle_deg(&exact.u, &gram.u).unwrap();
        assert!(angle < 1e-6, "angle {angle}");
    }

    #[test]
    fn zero_matrix_is_degenerate() {
        let x = Mat::zeros(3, 3);
        assert!(matches!(
            truncated_svd(&x, SvdTruncation::Energy(0.995)),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn numerical_rank_cases() {
        let x = Mat::from_diagonal(&Vector::from_vec(alloc::vec![1.0, 1e-9]));
        assert_eq!(numerical_rank(&x, 1e-6).unwrap(), 1);
        assert_eq!(numerical_rank(&Mat::zeros(4, 2), 1e-6).unwrap(), 0);
        assert!(matches!(numerical_rank(&x, -1.0), Err(Error::Domain(_))));

        // random rank-3 construction, 6 x 10
        let mut rng = crate::seeded_rng(43, 7);
        let a = Mat::from_fn(6, 3, |_, _| rng.random::<f64>() - 0.5);
        let b = Mat::from_fn(3, 10, |_, _| rng.random::<f64>() - 0.5);
        let x = a * b;
        let smax = x.clone().singular_values().max();
        assert_eq!(numerical_rank(&x, 1e-6 * smax).unwrap(), 3);
    }

    #[test]
    fn principal_angle_geometry() {
        let mut e1 = Mat::zeros(2, 1);
        e1[(0, 0)] = 1.0;
        let mut e2 = Mat::zeros(2, 1);
        e2[(1, 0)] = 1.0;
        // contained subspace
        assert!(principal_angle_deg(&e1, &(&e1 * 7.5)).unwrap() < 1e-7);
        // orthogonal subspaces
        assert_relative_eq!(principal_angle_deg(&e1, &e2).unwrap(), 90.0, epsilon = 1e-9);
        // 45 degrees
        let diag = Mat::from_column_slice(2, 1, &[1.0, 1.0]);
        assert_relative_eq!(principal_angle_deg(&e1, &diag).unwrap(), 45.0, epsilon = 1e-9);
        // zero X
        assert!(matches!(
            principal_angle_deg(&e1, &Mat::zeros(2, 1)),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn span_invariance_under_mixing() {
        let mut rng = crate::seeded_rng(44, 8);
        let raw = Mat::from_fn(6, 3, |_, _| rng.random::<f64>() - 0.5);
        let u = raw.qr().q().columns(0, 3).into_owned();
        let mixer = Mat::from_fn(3, 3, |i, j| if i == j { 1.0 } else { 0.3 * rng.random::<f64>() });
        let x = &u * mixer;
        assert!(principal_angle_deg(&u, &x).unwrap() < 1e-8);
    }
}
