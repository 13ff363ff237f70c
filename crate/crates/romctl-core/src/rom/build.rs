//! The three reduction routes: POD-Galerkin (linear or nonlinear plants),
//! balanced truncation, and DMD with control.

use super::{
    build_deim, certify_stability, output_estimator, zoh_discretize, ReducedField, ReducedModel,
    ReducedOrderDynamics, StabilityCertificates,
};
use crate::excitation::SnapshotSet;
use crate::numerics::{
    solve_continuous_lyapunov_with, symmetrize, truncated_svd_with, SvdTruncation,
};
use crate::rom::RomMethod;
use crate::systems::{linearize, LtiSystem, Plant, SystemDescriptor};
use crate::{Config, Error, Mat, Result};
use alloc::format;
use alloc::vec::Vec;

/// Admissible reduced-order interval, usually the selector's
/// `[ceil(0.05 N), ceil(0.15 N)]` recommendation.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct OrderRange {
    pub lo: usize,
    pub hi: usize,
}

impl OrderRange {
    pub fn full(n: usize) -> Self {
        OrderRange { lo: 1, hi: n }
    }
    pub fn recommended(n: usize) -> Self {
        let lo = (0.05 * n as f64).ceil() as usize;
        let hi = (0.15 * n as f64).ceil() as usize;
        OrderRange { lo: lo.max(1), hi: hi.max(lo.max(1)) }
    }
    fn clamp(&self, r: usize, available: usize) -> usize {
        r.clamp(self.lo, self.hi).min(available).max(1)
    }
}

fn empty_certificates() -> StabilityCertificates {
    StabilityCertificates {
        cont_margin: 0.0,
        disc_margin: 0.0,
        cont_margin_ok: false,
        clamped: 0,
        basis_residual: 0.0,
    }
}

/// POD basis from the snapshot energy criterion, Galerkin projection of the
/// dynamics, ZOH discretization, estimator, and stability certification.
/// Nonlinear plants get the projected vector field with the interpolation
/// shortcut for the nonlinear residual.
pub fn build_pod_galerkin(
    plant: &Plant,
    snap: &SnapshotSet,
    energy: f64,
    order_range: &OrderRange,
    descriptor: &SystemDescriptor,
    config: &Config,
) -> Result<ReducedModel> {
    if !(0.9 < energy && energy < 1.0) {
        return Err(Error::domain(format!("energy fraction must be in (0.9, 1), got {energy}")));
    }
    let max_modes = snap.x.nrows().min(snap.x.ncols()).min(order_range.hi.max(1));
    let svd = truncated_svd_with(&snap.x, SvdTruncation::FixedRank(max_modes), config.svd_exact_cutoff)?;
    let total: f64 = svd.sigma.iter().map(|s| s * s).sum();
    let mut acc = 0.0;
    let mut r_energy = svd.sigma.len();
    for (i, s) in svd.sigma.iter().enumerate() {
        acc += s * s;
        if acc >= energy * total {
            r_energy = i + 1;
            break;
        }
    }
    let available = svd.u.ncols();
    let r = order_range.clamp(r_energy, available);
    let phi = svd.u.columns(0, r).into_owned();
    let energy_captured: f64 = svd.sigma.iter().take(r).map(|s| s * s).sum::<f64>() / total;
    let basis_residual = (phi.transpose() * &phi - Mat::identity(r, r)).norm();

    let t_s_nominal = snap.dt;
    let (a_r, b_r, c_r, dynamics_parts) = match plant {
        Plant::Lti(sys) => {
            let a_r = phi.transpose() * &sys.a * &phi;
            let b_r = phi.transpose() * &sys.b;
            let c_r = &sys.c * &phi;
            (a_r, b_r, c_r, None)
        }
        Plant::Nonlinear(sys) => {
            let (a_lin, b_lin) = linearize(sys, &sys.x0, &sys.u0)?;
            let a_r = phi.transpose() * &a_lin * &phi;
            let b_r = phi.transpose() * &b_lin;
            let c_r = &sys.c * &phi;

            // snapshots of the nonlinear residual n(x) = f(x, u) - A dx - B du
            let m_cols = snap.x.ncols();
            let mut f_snaps = Mat::zeros(sys.n(), m_cols);
            let mut fx = crate::Vector::zeros(sys.n());
            for j in 0..m_cols {
                let x = snap.x.column(j).into_owned();
                let u = snap.u.row(j).transpose();
                sys.field.eval(&x, &u, &mut fx);
                let dx = &x - &sys.x0;
                let du = &u - &sys.u0;
                let lin = &a_lin * dx + &b_lin * du;
                f_snaps.set_column(j, &(&fx - lin));
            }
            let deim = if f_snaps.norm() > 1e-12 * (1.0 + snap.x.norm()) {
                let f_rank = {
                    let sv = truncated_svd_with(&f_snaps, SvdTruncation::FixedRank(r), config.svd_exact_cutoff)?;
                    sv.sigma.iter().filter(|&&s| s > sv.sigma[0] * 1e-10).count()
                };
                let q = r.min(f_rank).max(1);
                Some(build_deim(&f_snaps, q)?.with_projector(&phi))
            } else {
                None
            };
            (a_r, b_r, c_r, Some((a_lin, deim, sys)))
        }
    };

    let disc = zoh_discretize(&a_r, &b_r, t_s_nominal, descriptor, config)?;
    let (g, estimator_kappa) = output_estimator(&c_r, config.estimator_reg)?;
    if estimator_kappa > config.estimator_kappa_max {
        return Err(Error::Conditioning(format!(
            "estimator condition number {estimator_kappa:.3e} exceeds {:.1e}",
            config.estimator_kappa_max
        )));
    }

    let dynamics = match dynamics_parts {
        None => ReducedOrderDynamics::Linear,
        Some((a_lin, deim, sys)) => {
            let by_tau =
                (disc.t_s_used / (0.1 * descriptor.time_constants.tau_fast)).ceil() as usize;
            let substeps = by_tau.max(sys.substeps_for(disc.t_s_used));
            ReducedOrderDynamics::Nonlinear(ReducedField {
                field: sys.field.clone(),
                phi: phi.clone(),
                x0: sys.x0.clone(),
                u0: sys.u0.clone(),
                a_r: a_r.clone(),
                b_r: b_r.clone(),
                a_lin,
                deim,
                substeps,
            })
        }
    };

    let mut model = ReducedModel {
        method: RomMethod::PodGalerkin,
        phi,
        left: None,
        a_r: Some(a_r),
        b_r: Some(b_r),
        c_r,
        a_d: disc.a_d,
        b_d: disc.b_d,
        g,
        estimator_kappa,
        t_s: disc.t_s_used,
        t_s_adapted: disc.adapted,
        energy_captured,
        dynamics,
        certificates: StabilityCertificates { basis_residual, ..empty_certificates() },
    };
    certify_stability(&mut model, descriptor, config)?;
    Ok(model)
}

/// Square-root balanced truncation: Gramian factors, Hankel singular values,
/// and the balancing projections. Keeps every state with
/// `sigma_i / sigma_1 > hsv_rel_threshold`, clamped to the order range.
pub fn build_balanced_truncation(
    sys: &LtiSystem,
    hsv_rel_threshold: f64,
    order_range: Option<&OrderRange>,
    descriptor: &SystemDescriptor,
    config: &Config,
) -> Result<(ReducedModel, Vec<f64>)> {
    let n = sys.n();
    let wc = solve_continuous_lyapunov_with(
        &sys.a,
        &(&sys.b * sys.b.transpose()),
        config.lyapunov_direct_max_dim,
    )
    .map_err(|e| match e {
        Error::Stability(_) => Error::Stability("balanced truncation needs a Hurwitz plant".into()),
        other => other,
    })?;
    let wo = solve_continuous_lyapunov_with(
        &sys.a.transpose(),
        &(sys.c.transpose() * &sys.c),
        config.lyapunov_direct_max_dim,
    )?;

    let lc = psd_factor(&wc);
    let lo = psd_factor(&wo);
    let svd = (lo.transpose() * &lc).svd(true, true);
    let u = svd.u.as_ref().expect("SVD with vectors");
    let vt = svd.v_t.as_ref().expect("SVD with vectors");
    let hankel: Vec<f64> = svd.singular_values.iter().copied().collect();
    let sigma1 = hankel[0].max(1e-300);

    let by_threshold = hankel.iter().filter(|&&s| s / sigma1 > hsv_rel_threshold).count().max(1);
    let positive = hankel.iter().filter(|&&s| s > sigma1 * 1e-14).count().max(1);
    let r_want = match order_range {
        Some(range) => range.clamp(by_threshold, positive),
        None => by_threshold.min(positive),
    };
    let r_floor = order_range.map(|o| o.lo.min(r_want)).unwrap_or(1).max(1);

    // weakly observable balanced tails ruin the output-estimator
    // conditioning; walk the order down until the estimator is usable
    let mut chosen = None;
    for r_try in (r_floor..=r_want).rev() {
        let sig_inv_sqrt = Mat::from_fn(r_try, r_try, |i, j| {
            if i == j {
                1.0 / crate::fmath::sqrt(hankel[i])
            } else {
                0.0
            }
        });
        let t_right = &lc * vt.rows(0, r_try).transpose() * &sig_inv_sqrt; // N x r
        let w_left = &sig_inv_sqrt * u.columns(0, r_try).transpose() * lo.transpose(); // r x N
        let c_r = &sys.c * &t_right;
        let (g, estimator_kappa) = output_estimator(&c_r, config.estimator_reg)?;
        if estimator_kappa <= config.estimator_kappa_max {
            chosen = Some((r_try, t_right, w_left, c_r, g, estimator_kappa));
            break;
        }
    }
    let (r, t_right, w_left, c_r, g, estimator_kappa) = chosen.ok_or_else(|| {
        Error::Conditioning(format!(
            "no order in [{r_floor}, {r_want}] meets the estimator conditioning cap {:.1e}",
            config.estimator_kappa_max
        ))
    })?;

    let a_r = &w_left * &sys.a * &t_right;
    let b_r = &w_left * &sys.b;
    let basis_residual = (&w_left * &t_right - Mat::identity(r, r)).norm();

    let hankel_total: f64 = hankel.iter().sum();
    let energy_captured = hankel.iter().take(r).sum::<f64>() / hankel_total.max(1e-300);

    let t_s_nominal = 1.0 / descriptor.f_s_hz();
    let disc = zoh_discretize(&a_r, &b_r, t_s_nominal, descriptor, config)?;

    let mut model = ReducedModel {
        method: RomMethod::BalancedTruncation,
        phi: t_right,
        left: Some(w_left),
        a_r: Some(a_r),
        b_r: Some(b_r),
        c_r,
        a_d: disc.a_d,
        b_d: disc.b_d,
        g,
        estimator_kappa,
        t_s: disc.t_s_used,
        t_s_adapted: disc.adapted,
        energy_captured,
        dynamics: ReducedOrderDynamics::Linear,
        certificates: StabilityCertificates { basis_residual, ..empty_certificates() },
    };
    certify_stability(&mut model, descriptor, config)?;
    let _ = n;
    Ok((model, hankel))
}

/// Hankel singular values `sigma_i = sqrt(lambda_i(W_c W_o))` via the same
/// Gramian factorization the balanced reduction uses.
pub fn hankel_singular_values(sys: &LtiSystem, config: &Config) -> Result<Vec<f64>> {
    let wc = solve_continuous_lyapunov_with(
        &sys.a,
        &(&sys.b * sys.b.transpose()),
        config.lyapunov_direct_max_dim,
    )?;
    let wo = solve_continuous_lyapunov_with(
        &sys.a.transpose(),
        &(sys.c.transpose() * &sys.c),
        config.lyapunov_direct_max_dim,
    )?;
    let lc = psd_factor(&wc);
    let lo = psd_factor(&wo);
    let sv = (lo.transpose() * lc).singular_values();
    Ok(sv.iter().copied().collect())
}

/// Symmetric PSD square-root factor `L` with `L L^T = W`.
fn psd_factor(w: &Mat) -> Mat {
    let eig = symmetrize(w).symmetric_eigen();
    let n = w.nrows();
    let mut l = eig.eigenvectors;
    for j in 0..n {
        let s = crate::fmath::sqrt(eig.eigenvalues[j].max(0.0));
        l.column_mut(j).scale_mut(s);
    }
    l
}

/// Exact DMD with control on the POD-projected space: least-squares fit of
/// `[A_d B_d]` advancing projected snapshots one sample. Modes with
/// `|lambda| <= eig_threshold` are zeroed on the Schur form.
pub fn build_dmd(
    snap: &SnapshotSet,
    eig_threshold: f64,
    energy: f64,
    order_range: &OrderRange,
    descriptor: &SystemDescriptor,
    config: &Config,
) -> Result<ReducedModel> {
    let m_cols = snap.x.ncols();
    if m_cols < 2 {
        return Err(Error::dim("DMD needs at least two snapshot columns"));
    }
    let max_modes = snap.x.nrows().min(m_cols).min(order_range.hi.max(1));
    let svd = truncated_svd_with(&snap.x, SvdTruncation::FixedRank(max_modes), config.svd_exact_cutoff)?;
    let total: f64 = svd.sigma.iter().map(|s| s * s).sum();
    let mut acc = 0.0;
    let mut r_energy = svd.sigma.len();
    for (i, s) in svd.sigma.iter().enumerate() {
        acc += s * s;
        if acc >= energy * total {
            r_energy = i + 1;
            break;
        }
    }
    let r = order_range.clamp(r_energy, svd.u.ncols());
    let phi = svd.u.columns(0, r).into_owned();
    let energy_captured: f64 = svd.sigma.iter().take(r).map(|s| s * s).sum::<f64>() / total;
    let basis_residual = (phi.transpose() * &phi - Mat::identity(r, r)).norm();

    // transition pairs: column j results from applying input row j to j-1
    let m_in = snap.u.ncols();
    let pairs = m_cols - 1;
    let r1 = phi.transpose() * snap.x.columns(0, pairs);
    let r2 = phi.transpose() * snap.x.columns(1, pairs);
    let mut z = Mat::zeros(r + m_in, pairs);
    z.view_mut((0, 0), (r, pairs)).copy_from(&r1);
    for j in 0..pairs {
        for ch in 0..m_in {
            z[(r + ch, j)] = snap.u[(j + 1, ch)];
        }
    }

    let sv = z.clone().singular_values();
    let smax = sv.max();
    let z_rank = sv.iter().filter(|&&s| s > smax * 1e-10).count();
    let pinv = z
        .clone()
        .pseudo_inverse(smax * 1e-12)
        .map_err(|e| Error::Conditioning(format!("regressor pseudo-inverse failed: {e}")))?;
    let ab = &r2 * pinv;
    let a_d = ab.columns(0, r).into_owned();
    let b_d = ab.columns(r, m_in).into_owned();

    let fit_residual = (&r2 - &a_d * &r1 - &b_d * z.rows(r, m_in)).norm() / r2.norm().max(1e-300);
    if z_rank < r && fit_residual > 0.5 {
        return Err(Error::Conditioning(format!(
            "rank-deficient DMD regression (rank {z_rank} < {r}) with relative residual {fit_residual:.2}"
        )));
    }

    let (a_d, discarded) = zero_negligible_modes(&a_d, eig_threshold)?;

    let c_r = {
        // output map on the projected space needs the plant's C; recover it
        // from the snapshot data by least squares y ~ C_r (phi^T x)
        let proj = phi.transpose() * &snap.x;
        let pinv_proj = proj
            .clone()
            .pseudo_inverse(proj.clone().singular_values().max() * 1e-12)
            .map_err(|e| Error::Conditioning(format!("output-map fit failed: {e}")))?;
        &snap.y * pinv_proj
    };
    let (g, estimator_kappa) = output_estimator(&c_r, config.estimator_reg)?;
    if estimator_kappa > config.estimator_kappa_max {
        return Err(Error::Conditioning(format!(
            "estimator condition number {estimator_kappa:.3e} exceeds {:.1e}",
            config.estimator_kappa_max
        )));
    }

    let mut model = ReducedModel {
        method: RomMethod::Dmd,
        phi,
        left: None,
        a_r: None,
        b_r: None,
        c_r,
        a_d,
        b_d,
        g,
        estimator_kappa,
        t_s: snap.dt,
        t_s_adapted: false,
        energy_captured,
        dynamics: ReducedOrderDynamics::Linear,
        certificates: StabilityCertificates {
            basis_residual,
            clamped: discarded,
            ..empty_certificates()
        },
    };
    certify_stability(&mut model, descriptor, config)?;
    model.certificates.clamped += discarded;
    Ok(model)
}

/// Zeroes Schur blocks whose eigenvalue magnitude is at or below the
/// threshold; returns the filtered matrix and the number of zeroed modes.
fn zero_negligible_modes(a: &Mat, threshold: f64) -> Result<(Mat, usize)> {
    let rho = crate::numerics::spectral_radius(a);
    let eigs = a.complex_eigenvalues();
    if eigs.iter().all(|l| l.norm() > threshold) {
        return Ok((a.clone(), 0));
    }
    let n = a.nrows();
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), f64::EPSILON, 100_000)
        .ok_or_else(|| Error::Convergence("Schur decomposition did not converge".into()))?;
    let (q, mut t) = schur.unpack();
    let scale = rho.max(1.0);
    let mut zeroed = 0;
    let mut i = 0;
    while i < n {
        let in_2x2 = i + 1 < n && t[(i + 1, i)].abs() > 1e-14 * scale;
        if in_2x2 {
            let det = t[(i, i)] * t[(i + 1, i + 1)] - t[(i, i + 1)] * t[(i + 1, i)];
            if crate::fmath::sqrt(det.abs()) <= threshold {
                t[(i, i)] = 0.0;
                t[(i, i + 1)] = 0.0;
                t[(i + 1, i)] = 0.0;
                t[(i + 1, i + 1)] = 0.0;
                zeroed += 2;
            }
            i += 2;
        } else {
            if t[(i, i)].abs() <= threshold {
                t[(i, i)] = 0.0;
                zeroed += 1;
            }
            i += 1;
        }
    }
    Ok((&q * t * q.transpose(), zeroed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::excitation::{ExcitationKind, ExcitationSpec};
    use crate::numerics::spectral_radius;
    use crate::Vector;
    use approx::assert_relative_eq;

    fn descriptor(n: usize, m: usize, p: usize) -> SystemDescriptor {
        use crate::systems::*;
        SystemDescriptor {
            system_type: SystemType::ParabolicPde,
            physics: Physics::Thermal,
            linearity: Linearity { kind: LinearityKind::Lti, details: None },
            dimensions: Dimensions { n, m, p },
            time_constants: TimeConstants { tau_slow: 30.0, tau_fast: 10.0, ratio: None },
            sampling_requirements: Some(SamplingRequirements {
                f_s_recommended_hz: 1.2,
                dt_s: None,
            }),
            control_objective: ControlObjective {
                kind: ObjectiveKind::Tracking,
                error_tolerance: 0.02,
                reference_amplitude: Some(1.0),
                input_per_output: None,
            },
            constraints: Constraints {
                input_bounds: InputBounds { u_min: -5.0, u_max: 5.0 },
                state_bounds: None,
            },
        }
    }

    fn snapshot_set(x: Mat, u: Mat, y: Mat, dt: f64) -> SnapshotSet {
        let spec = ExcitationSpec {
            kind: ExcitationKind::Prbs,
            f_s: 1.0 / dt,
            duration: x.ncols() as f64 * dt,
            amplitude: 1.0,
            bit_duration: Some(dt),
            band: None,
            settle_s: None,
            channels: u.ncols(),
            seed: 0,
        };
        SnapshotSet { u, x, y, dt, excitation: spec, quiet_y: None }
    }

    #[test]
    fn pod_recovers_a_planted_two_dimensional_subspace() {
        // snapshots confined to span{v1, v2}
        let n = 12;
        let mut v1 = Vector::zeros(n);
        v1[0] = 1.0;
        v1[3] = 2.0;
        let mut v2 = Vector::zeros(n);
        v2[5] = -1.0;
        v2[7] = 0.5;
        let m_cols = 30;
        let x = Mat::from_fn(n, m_cols, |i, j| {
            let a = crate::fmath::sin(j as f64 * 0.7);
            let b = crate::fmath::cos(j as f64 * 0.3);
            a * v1[i] + b * v2[i]
        });
        let sys = LtiSystem::new(
            Mat::identity(n, n) * -0.1,
            Mat::zeros(n, 1).map_with_location(|i, _, _| if i == 0 { 1.0 } else { 0.0 }),
            Mat::identity(n, n).rows(0, 2).into_owned(),
        )
        .unwrap();
        let snap = snapshot_set(x.clone(), Mat::zeros(m_cols, 1), Mat::zeros(2, m_cols), 0.5);
        let model = build_pod_galerkin(
            &Plant::Lti(sys),
            &snap,
            0.999,
            &OrderRange::full(n),
            &descriptor(n, 1, 2),
            &Config::default(),
        )
        .unwrap();
        assert_eq!(model.r(), 2);
        // exact reconstruction of the snapshots
        let recon = &model.phi * (model.phi.transpose() * &x);
        assert!((recon - &x).norm() < 1e-10 * x.norm());
        assert!(model.certificates.basis_residual < 1e-12);
    }

    #[test]
    fn balanced_truncation_keeps_the_strong_state() {
        // decoupled channels keep both gramians diagonal:
        // wc = wo = diag(b1^2/2, b2^2/20) = diag(1, 0.1), already balanced
        let b1 = crate::fmath::sqrt(2.0);
        let b2 = crate::fmath::sqrt(2.0);
        let sys = LtiSystem::new(
            Mat::from_diagonal(&Vector::from_vec(alloc::vec![-1.0, -10.0])),
            Mat::from_row_slice(2, 2, &[b1, 0.0, 0.0, b2]),
            Mat::from_row_slice(2, 2, &[b1, 0.0, 0.0, b2]),
        )
        .unwrap();
        let (model, hankel) = build_balanced_truncation(
            &sys,
            0.5, // cuts the weak state (sigma2/sigma1 = 0.1)
            None,
            &descriptor(2, 2, 2),
            &Config::default(),
        )
        .unwrap();
        assert_eq!(model.r(), 1);
        assert_relative_eq!(hankel[0], 1.0, max_relative = 1e-8);
        assert_relative_eq!(hankel[1], 0.1, max_relative = 1e-8);
        // slow state survives
        let a_r = model.a_r.as_ref().unwrap();
        assert_relative_eq!(a_r[(0, 0)], -1.0, max_relative = 1e-6);
        assert!(model.certificates.basis_residual < 1e-8);
    }

    #[test]
    fn balanced_truncation_hankel_values_match_kronecker_oracle() {
        let mut rng = crate::seeded_rng(101, 50);
        let a = crate::numerics::test_util::random_stable(&mut rng, 6);
        let b = Mat::from_fn(6, 2, |_, _| rand::Rng::random::<f64>(&mut rng) - 0.5);
        let c = Mat::from_fn(2, 6, |_, _| rand::Rng::random::<f64>(&mut rng) - 0.5);
        let sys = LtiSystem::new(a.clone(), b.clone(), c.clone()).unwrap();
        let (_, hankel) = build_balanced_truncation(
            &sys,
            1e-8,
            None,
            &descriptor(6, 2, 2),
            &Config::default(),
        )
        .unwrap();
        // oracle: sqrt(eig(Wc Wo)) from the direct Kronecker solves
        let wc = crate::numerics::solve_continuous_lyapunov(&a, &(&b * b.transpose())).unwrap();
        let wo = crate::numerics::solve_continuous_lyapunov(&a.transpose(), &(c.transpose() * &c)).unwrap();
        let mut oracle: alloc::vec::Vec<f64> = (&wc * &wo)
            .complex_eigenvalues()
            .iter()
            .map(|l| crate::fmath::sqrt(l.re.max(0.0)))
            .collect();
        oracle.sort_by(|x, y| y.partial_cmp(x).unwrap());
        for i in 0..6 {
            assert!((hankel[i] - oracle[i]).abs() < 1e-8 * oracle[0].max(1.0));
        }
    }

    #[test]
    fn balanced_truncation_rejects_unstable_plants() {
        let sys = LtiSystem::new(
            Mat::from_element(1, 1, 0.2),
            Mat::identity(1, 1),
            Mat::identity(1, 1),
        )
        .unwrap();
        assert!(matches!(
            build_balanced_truncation(&sys, 1e-8, None, &descriptor(1, 1, 1), &Config::default()),
            Err(Error::Stability(_))
        ));
    }

    #[test]
    fn dmd_recovers_a_known_discrete_system() {
        // data generated by a known stable 2x2 system with inputs
        let a_true = Mat::from_row_slice(2, 2, &[0.9, 0.1, -0.05, 0.8]);
        let b_true = Mat::from_column_slice(2, 1, &[0.5, 1.0]);
        let steps = 60;
        let mut rng = crate::seeded_rng(102, 51);
        let mut u = Mat::zeros(steps, 1);
        for k in 0..steps {
            u[(k, 0)] = rand::Rng::random::<f64>(&mut rng) * 2.0 - 1.0;
        }
        let mut x = Mat::zeros(2, steps);
        let mut state = Vector::zeros(2);
        for j in 0..steps {
            state = &a_true * &state + &b_true * u.row(j).transpose();
            x.set_column(j, &state);
        }
        let y = x.rows(0, 1).into_owned() * 0.5;
        let snap = snapshot_set(x, u, y, 0.1);
        let model = build_dmd(
            &snap,
            1e-3,
            0.9999999999,
            &OrderRange::full(2),
            &descriptor(2, 1, 1),
            &Config::default(),
        )
        .unwrap();
        assert_eq!(model.r(), 2);
        // recovered operator equals the generator in the projected basis
        let phi = &model.phi;
        let a_proj = phi.transpose() * &a_true * phi;
        let resid = (&model.a_d - a_proj).norm();
        assert!(resid < 1e-8, "residual {resid}");
    }

    #[test]
    fn dmd_constant_data_yields_unit_dc_mode() {
        let col = Vector::from_vec(alloc::vec![1.0, 2.0]);
        let x = Mat::from_fn(2, 20, |i, _| col[i]);
        let y = x.rows(0, 1).into_owned();
        let snap = snapshot_set(x, Mat::zeros(20, 1), y, 0.1);
        let cfg = Config {
            disc_radius_max: 1.01, // DC mode sits exactly at 1
            ..Config::default()
        };
        let model = build_dmd(
            &snap,
            1e-3,
            0.999999,
            &OrderRange::full(1),
            &descriptor(2, 1, 1),
            &cfg,
        )
        .unwrap();
        assert_eq!(model.r(), 1);
        assert_relative_eq!(spectral_radius(&model.a_d), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn dmd_matches_zoh_spectrum_of_the_plant() {
        // excite exactly four eigenmodes so the snapshot data spans an
        // invariant subspace; the fitted eigenvalues must then be e^{lambda dt}
        // of those modes
        let sys = crate::systems::make_heat_chain(&crate::systems::HeatChainConfig {
            n: 12,
            diffusivity: 3.0,
            n_inputs: 1,
            n_outputs: 2,
        })
        .unwrap();
        let eig = sys.a.clone().symmetric_eigen();
        let mut order: alloc::vec::Vec<usize> = (0..12).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
        let b = Mat::from_fn(12, 4, |i, j| eig.eigenvectors[(i, order[j])]);
        let modes: alloc::vec::Vec<f64> = (0..4).map(|j| eig.eigenvalues[order[j]]).collect();
        let sys = LtiSystem::new(sys.a.clone(), b, sys.c.clone() * 0.5).unwrap();

        let dt = 0.05;
        let steps = 400;
        let mut rng = crate::seeded_rng(103, 52);
        let u = Mat::from_fn(steps, 4, |_, _| rand::Rng::random::<f64>(&mut rng) * 2.0 - 1.0);
        let traj = crate::systems::simulate_lti(&sys, &u, &Vector::zeros(12), dt, steps).unwrap();
        let x = traj.states.columns(1, steps).into_owned();
        let y = traj.outputs.columns(1, steps).into_owned();
        let snap = snapshot_set(x, u, y, dt);
        let cfg = Config {
            disc_radius_max: 0.9999, // keep certification from clamping the slow mode
            ..Config::default()
        };
        let model = build_dmd(
            &snap,
            1e-3,
            0.9999999999999,
            &OrderRange { lo: 4, hi: 4 },
            &descriptor(12, 4, 2),
            &cfg,
        )
        .unwrap();
        let mut fitted: alloc::vec::Vec<f64> =
            model.a_d.complex_eigenvalues().iter().map(|l| l.re).collect();
        fitted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for i in 0..4 {
            let zoh = crate::fmath::exp(modes[i] * dt);
            assert!(
                (fitted[i] - zoh).abs() < 1e-6,
                "mode {i}: fitted {} vs zoh {}",
                fitted[i],
                zoh
            );
        }
    }

    #[test]
    fn negligible_modes_are_zeroed() {
        let a = Mat::from_diagonal(&Vector::from_vec(alloc::vec![0.9, 1e-5]));
        let (filtered, zeroed) = zero_negligible_modes(&a, 1e-3).unwrap();
        assert_eq!(zeroed, 1);
        assert_relative_eq!(filtered[(0, 0)], 0.9, epsilon = 1e-12);
        assert!(filtered[(1, 1)].abs() < 1e-15);
    }
}
