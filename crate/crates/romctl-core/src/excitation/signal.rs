//! Excitation design per reduction method and deterministic signal
//! synthesis: maximal-length PRBS, phase-rotated multisine, cyclically
//! delayed chirp, and a per-channel step/impulse battery.

use super::{excitation_kind_for, ExcitationKind, ExcitationSpec};
use crate::rom::RomMethod;
use crate::systems::SystemDescriptor;
use crate::{fmath, Config, Error, Mat, Result};
use alloc::format;
use alloc::vec::Vec;
use rand::Rng;

/// Offline design uses 80% of the input bound; online (adaptation-time)
/// collection backs off to 50%.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExcitationMode {
    Offline,
    Online,
}

/// Maps the reduction method to its excitation class and resolves every
/// signal parameter from the descriptor.
pub fn design_excitation(
    method: RomMethod,
    descriptor: &SystemDescriptor,
    seed: u64,
    mode: ExcitationMode,
    config: &Config,
) -> Result<ExcitationSpec> {
    descriptor.validate()?;
    let kind = excitation_kind_for(method);
    let f_s = descriptor.f_s_hz();
    let tau_slow = descriptor.time_constants.tau_slow;
    let tau_fast = descriptor.time_constants.tau_fast;
    let m = descriptor.dimensions.m;

    let amplitude_frac = match mode {
        ExcitationMode::Offline => config.offline_amplitude_frac,
        ExcitationMode::Online => config.online_amplitude_frac,
    };
    let amplitude = amplitude_frac * descriptor.input_amplitude();

    let mut duration = match mode {
        ExcitationMode::Offline => (5.0 * tau_slow).max(config.duration_floor_s),
        // short re-identification burst during adaptation
        ExcitationMode::Online => (10.0 * tau_fast).max(50.0 / f_s),
    };
    let mut bit_duration = None;
    let mut band = None;
    let mut settle_s = None;
    match kind {
        ExcitationKind::Prbs => {
            bit_duration = Some(tau_fast.max(5.0 / f_s));
        }
        ExcitationKind::Multisine | ExcitationKind::Chirp => {
            let omega_max = descriptor.omega_max();
            band = Some((omega_max / 100.0, omega_max));
        }
        ExcitationKind::StepImpulse => {
            let settle = 5.0 * tau_slow;
            settle_s = Some(settle);
            // one step and one impulse per channel with settling gaps
            let battery = m as f64 * (3.0 * settle + 2.0 / f_s);
            duration = duration.max(battery);
        }
    }

    Ok(ExcitationSpec {
        kind,
        f_s,
        duration,
        amplitude,
        bit_duration,
        band,
        settle_s,
        channels: m,
        seed,
    })
}

/// Deterministic synthesis of the excitation time series (`steps x m`).
/// Every sample lies within the spec amplitude; the result depends only on
/// the spec (including its seed).
pub fn generate_signal(spec: &ExcitationSpec, steps: usize) -> Result<Mat> {
    let expected = spec.steps();
    if steps == 0 || steps.abs_diff(expected) > 1 {
        return Err(Error::dim(format!(
            "requested {steps} steps but duration * f_s = {expected}"
        )));
    }
    let m = spec.channels;
    let mut u = Mat::zeros(steps, m);
    match spec.kind {
        ExcitationKind::Prbs => prbs(spec, steps, &mut u)?,
        ExcitationKind::Multisine => multisine(spec, steps, &mut u)?,
        ExcitationKind::Chirp => chirp(spec, steps, &mut u)?,
        ExcitationKind::StepImpulse => step_impulse(spec, steps, &mut u)?,
    }
    debug_assert!(u.iter().all(|v| v.abs() <= spec.amplitude + 1e-12));
    Ok(u)
}

// ---- PRBS ----------------------------------------------------------------

/// Fibonacci LFSR over the listed feedback exponents. All masks below give
/// maximal sequences (verified by the period test).
pub(crate) struct Lfsr {
    state: u32,
    mask: u32,
    order: u32,
}

const LFSR_TAPS: [(u32, &[u32]); 14] = [
    (3, &[3, 2]),
    (4, &[4, 3]),
    (5, &[5, 3]),
    (6, &[6, 5]),
    (7, &[7, 6]),
    (8, &[8, 6, 5, 4]),
    (9, &[9, 5]),
    (10, &[10, 7]),
    (11, &[11, 9]),
    (12, &[12, 11, 10, 4]),
    (13, &[13, 12, 11, 8]),
    (14, &[14, 13, 12, 2]),
    (15, &[15, 14]),
    (16, &[16, 15, 13, 4]),
];

impl Lfsr {
    pub(crate) fn new(order: u32, init: u32) -> Self {
        let taps = LFSR_TAPS
            .iter()
            .find(|(k, _)| *k == order)
            .map(|(_, t)| *t)
            .expect("unsupported LFSR order");
        let mask = taps.iter().fold(0u32, |acc, &e| acc | (1 << (order - e)));
        let state = init & ((1 << order) - 1);
        Lfsr { state: if state == 0 { 1 } else { state }, mask, order }
    }

    pub(crate) fn step(&mut self) -> bool {
        let out = self.state & 1;
        let fb = (self.state & self.mask).count_ones() & 1;
        self.state = (self.state >> 1) | (fb << (self.order - 1));
        out == 1
    }
}

fn prbs(spec: &ExcitationSpec, steps: usize, u: &mut Mat) -> Result<()> {
    let bit_duration = spec
        .bit_duration
        .ok_or_else(|| Error::domain("PRBS spec is missing bit_duration"))?;
    let samples_per_bit = ((bit_duration * spec.f_s).round() as usize).max(1);
    let bits_needed = steps.div_ceil(samples_per_bit);
    // smallest supported order whose period covers the record
    let order = (3..=16u32)
        .find(|k| (1u64 << k) - 1 >= bits_needed as u64)
        .unwrap_or(16)
        .max(7);
    let mut rng = crate::seeded_rng(spec.seed, 0xB175);
    for ch in 0..spec.channels {
        let init: u32 = rng.random();
        let mut lfsr = Lfsr::new(order, init);
        let mut bit = lfsr.step();
        let mut in_bit = 0usize;
        for k in 0..steps {
            if in_bit == samples_per_bit {
                bit = lfsr.step();
                in_bit = 0;
            }
            u[(k, ch)] = if bit { spec.amplitude } else { -spec.amplitude };
            in_bit += 1;
        }
    }
    Ok(())
}

// ---- multisine -------------------------------------------------------------

const MULTISINE_TONES: usize = 16;

fn multisine(spec: &ExcitationSpec, steps: usize, u: &mut Mat) -> Result<()> {
    let (omega_lo, omega_hi) = spec
        .band
        .ok_or_else(|| Error::domain("multisine spec is missing its band"))?;
    let k_tones = MULTISINE_TONES.min(steps / 4).max(2);
    let dt = spec.dt();
    let m = spec.channels as f64;
    for ch in 0..spec.channels {
        let mut peak = 0.0f64;
        let mut raw = Vec::with_capacity(steps);
        for k in 0..steps {
            let t = k as f64 * dt;
            let mut s = 0.0;
            for tone in 0..k_tones {
                let frac = (tone + 1) as f64 / k_tones as f64;
                let omega = omega_lo + (omega_hi - omega_lo) * frac;
                // Schroeder phases keep the crest factor low; the per-tone
                // channel rotation decorrelates channels at lag zero
                let schroeder =
                    -core::f64::consts::PI * (tone * (tone + 1)) as f64 / k_tones as f64;
                let rot = 2.0 * core::f64::consts::PI * ch as f64 * tone as f64 / m;
                s += fmath::sin(omega * t + schroeder + rot);
            }
            peak = peak.max(s.abs());
            raw.push(s);
        }
        let scale = if peak > 0.0 { spec.amplitude / peak } else { 0.0 };
        for (k, s) in raw.into_iter().enumerate() {
            u[(k, ch)] = scale * s;
        }
    }
    Ok(())
}

// ---- chirp ------------------------------------------------------------------

fn chirp(spec: &ExcitationSpec, steps: usize, u: &mut Mat) -> Result<()> {
    let (omega_lo, omega_hi) = spec
        .band
        .ok_or_else(|| Error::domain("chirp spec is missing its band"))?;
    let dt = spec.dt();
    let total = steps as f64 * dt;
    let (f0, f1) = (
        omega_lo / (2.0 * core::f64::consts::PI),
        omega_hi / (2.0 * core::f64::consts::PI),
    );
    for ch in 0..spec.channels {
        // cyclic time shift decorrelates channels
        let delay = total * ch as f64 / spec.channels as f64;
        for k in 0..steps {
            let mut tau = k as f64 * dt + delay;
            while tau >= total {
                tau -= total;
            }
            let phase = 2.0 * core::f64::consts::PI * (f0 * tau + 0.5 * (f1 - f0) * tau * tau / total);
            u[(k, ch)] = spec.amplitude * fmath::sin(phase);
        }
    }
    Ok(())
}

// ---- step / impulse battery ---------------------------------------------------

fn step_impulse(spec: &ExcitationSpec, steps: usize, u: &mut Mat) -> Result<()> {
    let settle = spec
        .settle_s
        .ok_or_else(|| Error::domain("step/impulse spec is missing settle_s"))?;
    let per_channel = steps / spec.channels;
    if per_channel < 4 {
        return Err(Error::dim("record too short for a per-channel step/impulse battery"));
    }
    let hold = ((settle * spec.f_s).round() as usize).clamp(1, per_channel / 3);
    for ch in 0..spec.channels {
        let base = ch * per_channel;
        // step, settle, then a one-sample impulse
        for k in 0..hold {
            u[(base + k, ch)] = spec.amplitude;
        }
        let impulse_at = base + 2 * hold;
        if impulse_at < base + per_channel {
            u[(impulse_at, ch)] = spec.amplitude;
        }
    }
    Ok(())
}
