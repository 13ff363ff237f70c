//! Transfer-matrix evaluation `C (sI - A)^{-1} B` reused by ROM validation,
//! loop margins, and the frequency-domain criteria. A one-time Hessenberg
//! reduction brings the per-frequency solve down to O(n^2).

use super::{complexify, ensure_square};
use crate::{C64, CMat, Error, Mat, Result};

pub struct FreqResponder {
    /// C Q, premultiplied by the Hessenberg similarity.
    cq: CMat,
    /// Q^T B.
    qb: CMat,
    /// Upper Hessenberg form of A.
    h: Mat,
    /// Feedthrough added to every evaluation (identity for return-difference
    /// computations, zero otherwise).
    d: CMat,
}

impl FreqResponder {
    pub fn new(a: &Mat, b: &Mat, c: &Mat) -> Result<Self> {
        ensure_square(a, "A")?;
        let n = a.nrows();
        if b.nrows() != n || c.ncols() != n {
            return Err(Error::dim("B/C dimensions inconsistent with A"));
        }
        let (q, h) = a.clone().hessenberg().unpack();
        Ok(FreqResponder {
            cq: complexify(&(c * &q)),
            qb: complexify(&(q.transpose() * b)),
            h,
            d: CMat::zeros(c.nrows(), b.ncols()),
        })
    }

    /// Adds a constant feedthrough `D` to every evaluation.
    pub fn with_feedthrough(mut self, d: &Mat) -> Self {
        self.d = complexify(d);
        self
    }

    pub fn outputs(&self) -> usize {
        self.cq.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.qb.ncols()
    }

    /// `C (sI - A)^{-1} B + D` at the complex point `s`. For continuous-time
    /// systems pass `s = j omega`; for discrete-time pass `s = e^{j omega
    /// T_s}`.
    pub fn eval(&self, s: C64) -> CMat {
        let n = self.h.nrows();
        let m = self.qb.ncols();
        // (sI - H) x = qb, solved by Hessenberg elimination with row pivoting
        let mut a = CMat::from_fn(n, n, |i, j| {
            let v = -self.h[(i, j)];
            if i == j {
                C64::new(v + s.re, s.im)
            } else {
                C64::new(v, 0.0)
            }
        });
        let mut rhs = self.qb.clone();
        for k in 0..n.saturating_sub(1) {
            if a[(k + 1, k)].norm_sqr() > a[(k, k)].norm_sqr() {
                for j in k..n {
                    let t = a[(k, j)];
                    a[(k, j)] = a[(k + 1, j)];
                    a[(k + 1, j)] = t;
                }
                for j in 0..m {
                    let t = rhs[(k, j)];
                    rhs[(k, j)] = rhs[(k + 1, j)];
                    rhs[(k + 1, j)] = t;
                }
            }
            let piv = a[(k, k)];
            if piv.norm_sqr() == 0.0 {
                continue; // s sits on an eigenvalue; downstream norms become inf
            }
            let l = a[(k + 1, k)] / piv;
            if l.norm_sqr() != 0.0 {
                for j in k..n {
                    let akj = a[(k, j)];
                    a[(k + 1, j)] -= l * akj;
                }
                for j in 0..m {
                    let rkj = rhs[(k, j)];
                    rhs[(k + 1, j)] -= l * rkj;
                }
            }
        }
        // back substitution
        let mut x = CMat::zeros(n, m);
        for j in 0..m {
            for i in (0..n).rev() {
                let mut s_acc = rhs[(i, j)];
                for k in (i + 1)..n {
                    s_acc -= a[(i, k)] * x[(k, j)];
                }
                let piv = a[(i, i)];
                x[(i, j)] = if piv.norm_sqr() == 0.0 {
                    C64::new(f64::INFINITY, 0.0)
                } else {
                    s_acc / piv
                };
            }
        }
        &self.cq * x + &self.d
    }

    /// Largest singular value of the response at `s`.
    pub fn sigma_max(&self, s: C64) -> f64 {
        let g = self.eval(s);
        g.svd(false, false).singular_values.max()
    }
}
