//! Matrix exponential by 13th-order Pade approximation with scaling and
//! squaring, plus the augmented-matrix form that yields the exact zero-order
//! hold pair (e^{A T}, integral of e^{A tau} dtau * B).

use super::{ensure_finite, ensure_square, norm_l1};
use crate::fmath;
use crate::{Error, Mat, Result};
use alloc::format;

// Pade-13 numerator/denominator coefficients.
const B: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// e^{A t} for square real `A` and `t >= 0`.
pub fn matrix_exponential(a: &Mat, t: f64) -> Result<Mat> {
    ensure_square(a, "A")?;
    ensure_finite(a, "A")?;
    if !t.is_finite() || t < 0.0 {
        return Err(Error::domain(format!("t must be finite and >= 0, got {t}")));
    }
    expm(&(a * t))
}

fn expm(m: &Mat) -> Result<Mat> {
    let n = m.nrows();
    let eye = Mat::identity(n, n);

    // scale so the Pade argument has 1-norm below 0.5
    let norm = norm_l1(m);
    let s = if norm <= 0.5 {
        0
    } else {
        fmath::log2(norm / 0.5).ceil() as u32
    };
    let a = m / fmath::powi(2.0, s as i32);

    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;

    let u_inner = &a6 * (B[13] * &a6 + B[11] * &a4 + B[9] * &a2)
        + B[7] * &a6
        + B[5] * &a4
        + B[3] * &a2
        + B[1] * &eye;
    let u = &a * u_inner;
    let v = &a6 * (B[12] * &a6 + B[10] * &a4 + B[8] * &a2)
        + B[6] * &a6
        + B[4] * &a4
        + B[2] * &a2
        + B[0] * &eye;

    let mut r = (&v - &u)
        .lu()
        .solve(&(&v + &u))
        .ok_or_else(|| Error::Convergence("Pade denominator is singular".into()))?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

/// Exact zero-order-hold pair for `dx/dt = A x + B u` at step `dt`:
/// `A_d = e^{A dt}` and `B_d = (integral_0^dt e^{A tau} dtau) B`, computed
/// from one exponential of the augmented matrix `[[A, B], [0, 0]]`.
pub fn zoh_pair(a: &Mat, b: &Mat, dt: f64) -> Result<(Mat, Mat)> {
    ensure_square(a, "A")?;
    let (n, m) = (a.nrows(), b.ncols());
    if b.nrows() != n {
        return Err(Error::dim(format!(
            "B has {} rows, expected {}",
            b.nrows(),
            n
        )));
    }
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::domain(format!("dt must be positive, got {dt}")));
    }
    let mut aug = Mat::zeros(n + m, n + m);
    aug.view_mut((0, 0), (n, n)).copy_from(a);
    aug.view_mut((0, n), (n, m)).copy_from(b);
    let e = expm(&(aug * dt))?;
    let a_d = e.view((0, 0), (n, n)).into_owned();
    let b_d = e.view((0, n), (n, m)).into_owned();
    Ok((a_d, b_d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Vector;
    use approx::assert_relative_eq;

    /// Plain Taylor series, the independent oracle for small arguments.
    fn taylor_expm(a: &Mat, terms: usize) -> Mat {
        let n = a.nrows();
        let mut sum = Mat::identity(n, n);
        let mut term = Mat::identity(n, n);
        for k in 1..=terms {
            term = &term * a / k as f64;
            sum += &term;
        }
        sum
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let a = Mat::zeros(3, 3);
        let e = matrix_exponential(&a, 5.0).unwrap();
        assert_relative_eq!(e, Mat::identity(3, 3), epsilon = 1e-15);
    }

    #[test]
    fn scalar_closed_form() {
        let a = Mat::from_element(1, 1, -1.0);
        let e = matrix_exponential(&a, 1.0).unwrap();
        assert_relative_eq!(e[(0, 0)], 0.36787944117144233, epsilon = 1e-12);
    }

    #[test]
    fn rotation_by_half_pi() {
        let a = Mat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let t = core::f64::consts::FRAC_PI_2;
        let e = matrix_exponential(&a, t).unwrap();
        let oracle = taylor_expm(&(&a * t), 30);
        assert_relative_eq!(e, oracle, epsilon = 1e-12);
        assert_relative_eq!(e[(0, 1)], 1.0, epsilon = 1e-12);
        assert_relative_eq!(e[(1, 0)], -1.0, epsilon = 1e-12);
    }

    #[test]
    fn semigroup_property_on_random_stable() {
        use crate::numerics::test_util::random_stable;
        let mut rng = crate::seeded_rng(7, 0);
        for _ in 0..5 {
            let a = random_stable(&mut rng, 5);
            for (s, t) in [(0.1, 0.1), (0.1, 1.0), (1.0, 1.0)] {
                let est = matrix_exponential(&a, s + t).unwrap();
                let e1 = matrix_exponential(&a, s).unwrap();
                let e2 = matrix_exponential(&a, t).unwrap();
                let prod = &e1 * &e2;
                assert!((est - prod).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let a = Mat::zeros(2, 3);
        assert!(matches!(matrix_exponential(&a, 1.0), Err(Error::Dimension(_))));
        let nan = Mat::from_element(2, 2, f64::NAN);
        assert!(matches!(matrix_exponential(&nan, 1.0), Err(Error::Domain(_))));
        let a = Mat::identity(2, 2);
        assert!(matches!(matrix_exponential(&a, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn zoh_pair_pure_integrator() {
        // A = 0: A_d = I, B_d = dt * B
        let a = Mat::zeros(2, 2);
        let b = Mat::from_row_slice(2, 1, &[1.0, 2.0]);
        let (ad, bd) = zoh_pair(&a, &b, 0.25).unwrap();
        assert_relative_eq!(ad, Mat::identity(2, 2), epsilon = 1e-14);
        assert_relative_eq!(bd, &b * 0.25, epsilon = 1e-14);
    }

    #[test]
    fn zoh_pair_scalar_closed_form() {
        let a = Mat::from_element(1, 1, -2.0);
        let b = Mat::from_element(1, 1, 3.0);
        let (ad, bd) = zoh_pair(&a, &b, 0.1).unwrap();
        assert_relative_eq!(ad[(0, 0)], fmath::exp(-0.2), epsilon = 1e-13);
        assert_relative_eq!(bd[(0, 0)], (1.0 - fmath::exp(-0.2)) / 2.0 * 3.0, epsilon = 1e-13);
    }

    #[test]
    fn matches_taylor_on_random_stable() {
        let mut rng = crate::seeded_rng(11, 1);
        let a = crate::numerics::test_util::random_stable(&mut rng, 6);
        let e = matrix_exponential(&a, 0.3).unwrap();
        let oracle = taylor_expm(&(&a * 0.3), 40);
        assert!((e - oracle).norm() < 1e-11);
        let _ = Vector::zeros(1);
    }
}
