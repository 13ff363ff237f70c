//! Discrete empirical interpolation: a basis for the nonlinear term plus a
//! greedy interpolation index set, so the reduced dynamics sample the
//! nonlinearity at O(q) components instead of evaluating all N.

use crate::numerics::{truncated_svd, SvdTruncation};
use crate::{Error, Mat, Result, Vector};
use alloc::format;
use alloc::vec::Vec;

/// Interpolation data: `f(x) ~ Phi_f (P^T Phi_f)^{-1} f|_I(x)`.
#[derive(Debug, Clone)]
pub struct DeimData {
    /// Nonlinearity basis (N x q).
    pub phi_f: Mat,
    /// Interpolation indices (q distinct rows of the state).
    pub indices: Vec<usize>,
    /// `(P^T Phi_f)^{-1}` (q x q).
    pub interp: Mat,
    /// Reduced projector `Phi^T Phi_f (P^T Phi_f)^{-1}` (r x q), attached
    /// once the state basis is known.
    pub projector: Option<Mat>,
}

impl DeimData {
    /// Full-order reconstruction from sampled components.
    pub fn approximate(&self, f_at_indices: &Vector) -> Vector {
        &self.phi_f * (&self.interp * f_at_indices)
    }

    /// Attaches the reduced projector for the state basis `phi`.
    pub fn with_projector(mut self, phi: &Mat) -> Self {
        self.projector = Some(phi.transpose() * &self.phi_f * &self.interp);
        self
    }
}

/// Builds the interpolation basis and greedy index set from snapshots of the
/// nonlinear term (one column per sampled state).
pub fn build_deim(nonlinear_snapshots: &Mat, q: usize) -> Result<DeimData> {
    if q == 0 {
        return Err(Error::domain("q must be at least 1"));
    }
    let svd = truncated_svd(nonlinear_snapshots, SvdTruncation::FixedRank(q))?;
    let available = svd
        .sigma
        .iter()
        .filter(|&&s| s > svd.sigma[0] * 1e-12)
        .count();
    if q > available {
        return Err(Error::domain(format!(
            "q = {q} exceeds the snapshot rank {available}"
        )));
    }
    let modes = svd.u.columns(0, q).into_owned();

    let mut indices: Vec<usize> = Vec::with_capacity(q);
    indices.push(argmax_abs(&modes.column(0).into_owned()));
    for l in 1..q {
        let u_l = modes.column(l).into_owned();
        // residual of u_l after interpolating with the current basis
        let sub = gather_rows(&modes.columns(0, l).into_owned(), &indices);
        let rhs = gather(&u_l, &indices);
        let c = sub
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Conditioning("DEIM interpolation system is singular".into()))?;
        let residual = &u_l - modes.columns(0, l) * c;
        indices.push(argmax_abs(&residual));
    }

    let pf = gather_rows(&modes, &indices);
    let interp = pf
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Conditioning("P^T Phi_f is singular".into()))?;

    debug_assert!(indices.iter().all(|&i| i < nonlinear_snapshots.nrows()));
    Ok(DeimData { phi_f: modes, indices, interp, projector: None })
}

fn argmax_abs(v: &Vector) -> usize {
    let mut best = 0;
    let mut val = -1.0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > val {
            val = x.abs();
            best = i;
        }
    }
    best
}

fn gather(v: &Vector, idx: &[usize]) -> Vector {
    Vector::from_iterator(idx.len(), idx.iter().map(|&i| v[i]))
}

fn gather_rows(m: &Mat, idx: &[usize]) -> Mat {
    Mat::from_fn(idx.len(), m.ncols(), |i, j| m[(idx[i], j)])
}
