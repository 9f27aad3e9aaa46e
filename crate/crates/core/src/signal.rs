//! Uniformly sampled acceleration records and the net-zero checks on them.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

// unused when std's inherent float methods are in scope
#[allow(unused_imports)]
use num_traits::Float as _;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::pso::unit_f64;

/// Default relative tolerance for the net-zero velocity/displacement check.
pub const DEFAULT_NET_ZERO_TOL: f64 = 1e-3;

/// A uniformly sampled time history in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    sample_rate: f64,
    samples: Vec<f64>,
    t0: f64,
}

#[allow(clippy::len_without_is_empty)]
impl Signal {
    pub fn new(sample_rate: f64, samples: Vec<f64>) -> Result<Self> {
        Self::with_start(sample_rate, samples, 0.0)
    }

    pub fn with_start(sample_rate: f64, samples: Vec<f64>, t0: f64) -> Result<Self> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::InvalidSignal("sample rate must be positive and finite"));
        }
        if samples.is_empty() {
            return Err(Error::InvalidSignal("no samples"));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSignal("non-finite sample"));
        }
        if !t0.is_finite() {
            return Err(Error::InvalidSignal("non-finite start time"));
        }
        Ok(Signal { sample_rate, samples, t0 })
    }

    pub fn zeros(sample_rate: f64, len: usize) -> Result<Self> {
        Self::new(sample_rate, vec![0.0; len])
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// `(len - 1) / sample_rate`.
    pub fn duration(&self) -> f64 {
        (self.samples.len() - 1) as f64 / self.sample_rate
    }

    /// Time stamp of sample `i`.
    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 / self.sample_rate
    }

    pub fn peak_abs(&self) -> f64 {
        peak_abs(&self.samples)
    }

    pub fn scaled(&self, factor: f64) -> Signal {
        Signal {
            sample_rate: self.sample_rate,
            samples: self.samples.iter().map(|v| v * factor).collect(),
            t0: self.t0,
        }
    }

    /// Copy of the record extended with trailing zeros up to `len` samples.
    pub fn zero_padded(&self, len: usize) -> Signal {
        let mut samples = self.samples.clone();
        if samples.len() < len {
            samples.resize(len, 0.0);
        }
        Signal { sample_rate: self.sample_rate, samples, t0: self.t0 }
    }

    pub(crate) fn from_parts(sample_rate: f64, samples: Vec<f64>, t0: f64) -> Signal {
        debug_assert!(!samples.is_empty());
        Signal { sample_rate, samples, t0 }
    }
}

pub(crate) fn peak_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Acceleration, velocity and displacement on a shared time base.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionTriple {
    pub acceleration: Signal,
    pub velocity: Signal,
    pub displacement: Signal,
}

/// Terminal velocity and displacement relative to their peaks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    pub residual_velocity_ratio: f64,
    pub residual_displacement_ratio: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Cumulative trapezoidal integral; the first sample equals `initial_value`.
pub fn integrate(sig: &Signal, initial_value: f64) -> Signal {
    let half_dt = 0.5 * sig.dt();
    let x = sig.samples();
    let mut out = Vec::with_capacity(x.len());
    let mut acc = initial_value;
    out.push(acc);
    for w in x.windows(2) {
        acc += half_dt * (w[0] + w[1]);
        out.push(acc);
    }
    Signal::from_parts(sig.sample_rate, out, sig.t0)
}

/// Integrates twice from rest.
pub fn motion_of(accel: &Signal) -> MotionTriple {
    let velocity = integrate(accel, 0.0);
    let displacement = integrate(&velocity, 0.0);
    MotionTriple { acceleration: accel.clone(), velocity, displacement }
}

fn terminal_ratio(values: &[f64]) -> f64 {
    let peak = peak_abs(values);
    if peak == 0.0 {
        0.0
    } else {
        values[values.len() - 1].abs() / peak
    }
}

/// Checks the net-zero condition at the last sample of `accel`.
pub fn residual_motion(accel: &Signal, tolerance: f64) -> Result<ResidualReport> {
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(Error::arg("tolerance", "must be positive"));
    }
    let motion = motion_of(accel);
    let rv = terminal_ratio(motion.velocity.samples());
    let rd = terminal_ratio(motion.displacement.samples());
    Ok(ResidualReport {
        residual_velocity_ratio: rv,
        residual_displacement_ratio: rd,
        tolerance,
        pass: rv <= tolerance && rd <= tolerance,
    })
}

const SURROGATE_CARRIERS: usize = 40;
const SURROGATE_FMIN: f64 = 50.0;

/// Deterministic broadband surrogate for a measured impact shock.
///
/// Sums [`SURROGATE_CARRIERS`] log-spaced decaying carriers of the form
/// `t e^{-bt} cos(wt + phi)` between 50 Hz and `fmax`, with mildly random
/// phase, amplitude and damping, then removes the terminal velocity and
/// displacement with two slow correction pulses so that the record itself
/// integrates to rest.
///
/// The carriers are heavily damped and start together so their spectra merge
/// into a smooth, rising band; large random phase or onset offsets would
/// notch it between carriers.
pub fn synth_reference(fs: f64, duration: f64, fmax: f64, seed: u64) -> Result<Signal> {
    if !(fmax.is_finite() && fmax > SURROGATE_FMIN) {
        return Err(Error::arg("fmax", "must exceed 50 Hz"));
    }
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::arg("duration", "must be positive"));
    }
    if !(fs.is_finite() && fs >= 10.0 * fmax) {
        return Err(Error::SampleRateTooLow { fs, required: 10.0 * fmax });
    }
    let n = (duration * fs).round() as usize + 1;
    if n < 16 {
        return Err(Error::arg("duration", "shorter than 16 samples"));
    }
    let dt = 1.0 / fs;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = vec![0.0; n];

    let span = (fmax / SURROGATE_FMIN).ln();
    for k in 0..SURROGATE_CARRIERS {
        let f = SURROGATE_FMIN * (span * k as f64 / (SURROGATE_CARRIERS - 1) as f64).exp();
        let w = 2.0 * PI * f;
        let q = 1.0 + 0.5 * unit_f64(&mut rng);
        let phase = 0.1 * PI * (2.0 * unit_f64(&mut rng) - 1.0);
        // rung out well before the end even at the lowest carriers
        let b = (w / (2.0 * q)).max(16.0 / duration);
        // peak of t e^{-bt} is 1 / (b e)
        let amp = (0.9 + 0.2 * unit_f64(&mut rng)) * (f / fmax).powf(1.5) * b * core::f64::consts::E;
        for (i, s) in samples.iter_mut().enumerate() {
            let t = i as f64 * dt;
            *s += amp * t * (-b * t).exp() * (w * t + phase).cos();
        }
    }

    remove_terminal_motion(&mut samples, dt);
    Ok(Signal::from_parts(fs, samples, 0.0))
}

/// Adds `alpha * sin^2(pi t/T) + beta * sin(2 pi t/T)` so that the discrete
/// trapezoidal velocity and displacement both end at zero.
fn remove_terminal_motion(samples: &mut [f64], dt: f64) {
    let n = samples.len();
    let span = (n - 1) as f64;
    let p1: Vec<f64> = (0..n).map(|i| (PI * i as f64 / span).sin().powi(2)).collect();
    let p2: Vec<f64> = (0..n).map(|i| (2.0 * PI * i as f64 / span).sin()).collect();
    let (v0, d0) = terminal_motion(samples, dt);
    let (v1, d1) = terminal_motion(&p1, dt);
    let (v2, d2) = terminal_motion(&p2, dt);
    let det = v1 * d2 - v2 * d1;
    if det == 0.0 {
        return;
    }
    let alpha = (-v0 * d2 + v2 * d0) / det;
    let beta = (-v1 * d0 + v0 * d1) / det;
    for ((s, a), b) in samples.iter_mut().zip(&p1).zip(&p2) {
        *s += alpha * a + beta * b;
    }
}

fn terminal_motion(x: &[f64], dt: f64) -> (f64, f64) {
    let half = 0.5 * dt;
    let (mut v, mut d) = (0.0, 0.0);
    for w in x.windows(2) {
        let v_next = v + half * (w[0] + w[1]);
        d += half * (v + v_next);
        v = v_next;
    }
    (v, d)
}
