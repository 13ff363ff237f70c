//! Desk-scale benchmark generators: a 1-D heat-equation chain (thermal PDE
//! class) and a spring-mass chain with optional cubic stiffening (structural
//! class; the cubic term exercises the nonlinear reduction path).

use super::{LtiSystem, NonlinearSystem, Plant, VectorField};
use crate::{Error, Mat, Result, Vector};
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// 1-D heat equation on `n` interior grid points with Dirichlet ends, grid
/// spacing 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeatChainConfig {
    pub n: usize,
    pub diffusivity: f64,
    pub n_inputs: usize,
    pub n_outputs: usize,
}

/// Finite-difference heat chain: `A` tridiagonal with `-2 kappa` on the
/// diagonal and `kappa` off it, actuators and sensors at evenly spread grid
/// points. Symmetric negative definite, hence always Hurwitz.
pub fn make_heat_chain(cfg: &HeatChainConfig) -> Result<LtiSystem> {
    let HeatChainConfig { n, diffusivity: kappa, n_inputs, n_outputs } = *cfg;
    if n < 3 {
        return Err(Error::domain(format!("heat chain needs n >= 3, got {n}")));
    }
    if !(kappa > 0.0) {
        return Err(Error::domain("diffusivity must be positive"));
    }
    if n_inputs == 0 || n_inputs > n || n_outputs == 0 || n_outputs > n {
        return Err(Error::domain("actuator/sensor counts must be in [1, n]"));
    }
    let mut a = Mat::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = -2.0 * kappa;
        if i + 1 < n {
            a[(i, i + 1)] = kappa;
            a[(i + 1, i)] = kappa;
        }
    }
    let mut b = Mat::zeros(n, n_inputs);
    for (j, idx) in spread_indices(n, n_inputs).into_iter().enumerate() {
        b[(idx, j)] = 1.0;
    }
    let mut c = Mat::zeros(n_outputs, n);
    for (j, idx) in spread_indices(n, n_outputs).into_iter().enumerate() {
        c[(j, idx)] = 1.0;
    }
    LtiSystem::new(a, b, c)
}

/// `count` distinct indices spread evenly over `0..n`.
pub(crate) fn spread_indices(n: usize, count: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(count);
    let mut prev: isize = -1;
    for j in 0..count {
        let raw = ((j as f64 + 1.0) * n as f64 / (count as f64 + 1.0)).round() as isize;
        let idx = raw.max(prev + 1).min((n - 1) as isize - (count - 1 - j) as isize);
        out.push(idx.max(0) as usize);
        prev = idx;
    }
    out
}

/// Chain of unit masses attached to a wall on one side, viscous damping, and
/// springs with force `F(d) = k d + k3 d^3`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpringChainConfig {
    pub n_masses: usize,
    pub stiffness: f64,
    pub damping: f64,
    pub cubic_coeff: f64,
    pub n_inputs: usize,
    pub n_outputs: usize,
    /// Sensor gain applied to the measured positions.
    #[serde(default = "default_output_scale")]
    pub output_scale: f64,
}

fn default_output_scale() -> f64 {
    1.0
}

struct SpringChainField {
    n_masses: usize,
    k: f64,
    c: f64,
    k3: f64,
    input_idx: Vec<usize>,
}

impl SpringChainField {
    #[inline]
    fn spring_force(&self, d: f64) -> f64 {
        self.k * d + self.k3 * d * d * d
    }

    /// Net acceleration on mass `i` from neighbors, damping, and actuation.
    #[inline]
    fn accel(&self, x: &Vector, u: &Vector, i: usize) -> f64 {
        let nm = self.n_masses;
        let q = |j: isize| -> f64 {
            if j < 0 {
                0.0 // wall attachment on the left
            } else {
                x[j as usize]
            }
        };
        let qi = x[i];
        let vi = x[nm + i];
        let mut f = -self.spring_force(qi - q(i as isize - 1));
        if i + 1 < nm {
            f += self.spring_force(x[i + 1] - qi);
        }
        f -= self.c * vi;
        for (ch, &idx) in self.input_idx.iter().enumerate() {
            if idx == i {
                f += u[ch];
            }
        }
        f
    }
}

impl VectorField for SpringChainField {
    fn dim(&self) -> usize {
        2 * self.n_masses
    }
    fn inputs(&self) -> usize {
        self.input_idx.len()
    }
    fn eval(&self, x: &Vector, u: &Vector, out: &mut Vector) {
        let nm = self.n_masses;
        for i in 0..nm {
            out[i] = x[nm + i];
            out[nm + i] = self.accel(x, u, i);
        }
    }
    fn eval_component(&self, x: &Vector, u: &Vector, i: usize) -> f64 {
        let nm = self.n_masses;
        if i < nm {
            x[nm + i]
        } else {
            self.accel(x, u, i - nm)
        }
    }
}

/// State is `[positions; velocities]` (dimension `2 n_masses`); linear when
/// `cubic_coeff` is zero. Forces act at evenly spread masses, outputs are
/// positions at evenly spread masses.
pub fn make_spring_mass_chain(cfg: &SpringChainConfig) -> Result<Plant> {
    let SpringChainConfig { n_masses, stiffness, damping, cubic_coeff, n_inputs, n_outputs, output_scale } =
        *cfg;
    if n_masses < 1 {
        return Err(Error::domain("need at least one mass"));
    }
    if !(stiffness > 0.0) || !(damping >= 0.0) || !(cubic_coeff >= 0.0) {
        return Err(Error::domain("stiffness must be positive, damping and cubic_coeff non-negative"));
    }
    if n_inputs == 0 || n_inputs > n_masses || n_outputs == 0 || n_outputs > n_masses {
        return Err(Error::domain("force/sensor counts must be in [1, n_masses]"));
    }
    let n = 2 * n_masses;
    let input_idx = spread_indices(n_masses, n_inputs);
    let output_idx = spread_indices(n_masses, n_outputs);

    if !(output_scale > 0.0) {
        return Err(Error::domain("output scale must be positive"));
    }
    let mut c_mat = Mat::zeros(n_outputs, n);
    for (j, &idx) in output_idx.iter().enumerate() {
        c_mat[(j, idx)] = output_scale;
    }

    if cubic_coeff == 0.0 {
        let mut a = Mat::zeros(n, n);
        for i in 0..n_masses {
            a[(i, n_masses + i)] = 1.0;
            // left spring always present (wall for i = 0)
            a[(n_masses + i, i)] -= stiffness;
            if i > 0 {
                a[(n_masses + i, i - 1)] += stiffness;
            }
            // right spring except at the free end
            if i + 1 < n_masses {
                a[(n_masses + i, i)] -= stiffness;
                a[(n_masses + i, i + 1)] += stiffness;
            }
            a[(n_masses + i, n_masses + i)] = -damping;
        }
        let mut b = Mat::zeros(n, n_inputs);
        for (j, &idx) in input_idx.iter().enumerate() {
            b[(n_masses + idx, j)] = 1.0;
        }
        Ok(Plant::Lti(LtiSystem::new(a, b, c_mat)?))
    } else {
        let field = SpringChainField {
            n_masses,
            k: stiffness,
            c: damping,
            k3: cubic_coeff,
            input_idx,
        };
        let sys = NonlinearSystem::new(
            Arc::new(field),
            c_mat,
            Vector::zeros(n),
            Vector::zeros(n_inputs),
        )?;
        Ok(Plant::Nonlinear(sys))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fmath;
    use approx::assert_relative_eq;

    #[test]
    fn textbook_stencil() {
        let sys = make_heat_chain(&HeatChainConfig {
            n: 3,
            diffusivity: 1.0,
            n_inputs: 1,
            n_outputs: 1,
        })
        .unwrap();
        let expect = Mat::from_row_slice(3, 3, &[-2.0, 1.0, 0.0, 1.0, -2.0, 1.0, 0.0, 1.0, -2.0]);
        assert_relative_eq!(sys.a, expect);
    }

    #[test]
    fn heat_chain_is_hurwitz() {
        for n in [3usize, 10, 37] {
            let sys = make_heat_chain(&HeatChainConfig {
                n,
                diffusivity: 2.5,
                n_inputs: 2.min(n),
                n_outputs: 3.min(n),
            })
            .unwrap();
            let max_re = crate::numerics::max_re_eigenvalue(&sys.a);
            assert!(max_re < 0.0, "n = {n}: max Re = {max_re}");
        }
    }

    #[test]
    fn heat_chain_slowest_eigenvalue_matches_laplacian_spectrum() {
        let n = 50;
        let kappa = 1.3;
        let sys = make_heat_chain(&HeatChainConfig {
            n,
            diffusivity: kappa,
            n_inputs: 1,
            n_outputs: 1,
        })
        .unwrap();
        let mut eigs: alloc::vec::Vec<f64> =
            sys.a.symmetric_eigen().eigenvalues.iter().copied().collect();
        eigs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let slowest = eigs[0];
        let analytic = -kappa * core::f64::consts::PI.powi(2) / ((n as f64 + 1.0).powi(2));
        assert!(
            (slowest - analytic).abs() <= 0.02 * analytic.abs(),
            "slowest {slowest} vs analytic {analytic}"
        );
        // exact dispersion relation
        let exact = -2.0 * kappa * (1.0 - fmath::cos(core::f64::consts::PI / (n as f64 + 1.0)));
        assert_relative_eq!(slowest, exact, max_relative = 1e-10);
    }

    #[test]
    fn spring_chain_linear_construction() {
        let plant = make_spring_mass_chain(&SpringChainConfig {
            n_masses: 2,
            stiffness: 1.0,
            damping: 0.1,
            cubic_coeff: 0.0,
            n_inputs: 1,
            n_outputs: 1,
            output_scale: 1.0,
        })
        .unwrap();
        match plant {
            Plant::Lti(sys) => assert_eq!(sys.n(), 4),
            _ => panic!("expected a linear plant"),
        }
    }

    #[test]
    fn cubic_chain_equilibrium_at_origin() {
        // NonlinearSystem::new rejects a bogus equilibrium, so success is the assertion
        for k3 in [0.5, 10.0] {
            let plant = make_spring_mass_chain(&SpringChainConfig {
                n_masses: 4,
                stiffness: 2.0,
                damping: 0.3,
                cubic_coeff: k3,
                n_inputs: 2,
                n_outputs: 2,
                output_scale: 1.0,
            })
            .unwrap();
            assert!(plant.is_nonlinear());
        }
    }

    #[test]
    fn single_mass_natural_frequency() {
        let k = 3.7;
        let plant = make_spring_mass_chain(&SpringChainConfig {
            n_masses: 1,
            stiffness: k,
            damping: 0.0,
            cubic_coeff: 0.0,
            n_inputs: 1,
            n_outputs: 1,
            output_scale: 1.0,
        })
        .unwrap();
        let sys = match plant {
            Plant::Lti(s) => s,
            _ => unreachable!(),
        };
        let eigs = sys.a.complex_eigenvalues();
        let im = eigs.iter().map(|l| l.im.abs()).fold(0.0, f64::max);
        assert_relative_eq!(im, fmath::sqrt(k), epsilon = 1e-10);
    }

    #[test]
    fn spread_indices_are_distinct_and_in_range() {
        for (n, c) in [(3usize, 1usize), (10, 4), (10, 10), (48, 8)] {
            let idx = spread_indices(n, c);
            assert_eq!(idx.len(), c);
            for w in idx.windows(2) {
                assert!(w[0] < w[1]);
            }
            assert!(*idx.last().unwrap() < n);
        }
    }
}
