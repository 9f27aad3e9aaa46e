//! Shock response spectra.
//!
//! [`srs`] runs the ramp-invariant recursive SDOF filter (exact at the
//! sample instants for a piecewise-linear base acceleration); [`srs_oracle`]
//! integrates the same oscillator with fixed-step RK4 as an independent
//! check. Both report the absolute-acceleration maximax over the record
//! followed by free ring-down.

use alloc::vec::Vec;
use core::f64::consts::PI;

// unused when std's inherent float methods are in scope
#[allow(unused_imports)]
use num_traits::Float as _;

use crate::error::{Error, Result};
use crate::signal::Signal;

pub const DEFAULT_Q_SRS: f64 = 10.0;
pub const DEFAULT_TOLERANCE_DB: f64 = 3.0;

/// Free ring-down after the record, in units of `2 q_srs / w_n` (60 dB).
pub const SRS_RING_DOWN_TIME_CONSTANTS: f64 = 6.907_755_278_982_137;

/// Breakpoint specification `(frequency Hz, peak acceleration m/s^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SrsSpec {
    breakpoints: Vec<(f64, f64)>,
    tolerance_db: f64,
}

impl SrsSpec {
    pub fn new(breakpoints: Vec<(f64, f64)>, tolerance_db: f64) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::arg("breakpoints", "need at least two"));
        }
        for &(f, a) in &breakpoints {
            if !(f.is_finite() && f > 0.0) {
                return Err(Error::arg("breakpoints", "frequencies must be positive"));
            }
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::arg("breakpoints", "accelerations must be positive"));
            }
        }
        if breakpoints.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::arg("breakpoints", "frequencies must be strictly increasing"));
        }
        if !(tolerance_db.is_finite() && tolerance_db > 0.0) {
            return Err(Error::arg("tolerance_db", "must be positive"));
        }
        Ok(SrsSpec { breakpoints, tolerance_db })
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    pub fn tolerance_db(&self) -> f64 {
        self.tolerance_db
    }

    pub fn with_tolerance(mut self, tolerance_db: f64) -> Result<Self> {
        if !(tolerance_db.is_finite() && tolerance_db > 0.0) {
            return Err(Error::arg("tolerance_db", "must be positive"));
        }
        self.tolerance_db = tolerance_db;
        Ok(self)
    }

    pub fn fmin(&self) -> f64 {
        self.breakpoints[0].0
    }

    pub fn fmax(&self) -> f64 {
        self.breakpoints[self.breakpoints.len() - 1].0
    }
}

/// Maximax absolute acceleration on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SrsCurve {
    pub freqs: Vec<f64>,
    pub values: Vec<f64>,
    pub q_srs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DbErrorReport {
    /// `20 log10(actual / target)`; `-inf` where the actual SRS is zero.
    pub per_freq_db: Vec<f64>,
    pub max_abs_db: f64,
    pub tolerance_db: f64,
    pub pass: bool,
    /// Set when some actual value was zero.
    pub zero_response: bool,
}

/// Ramp-invariant absolute-acceleration SDOF filter at one natural frequency.
///
/// `y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - E^2 y[n-2] + 2C y[n-1]` with
/// `E = exp(-zeta wn T)`, `C = E cos(wd T)`, `S = E sin(wd T)`,
/// `S' = S / (wd T)`, `b = [1 - S', 2(S' - C), E^2 - S']`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdofFilter {
    fn_hz: f64,
    b: [f64; 3],
    c: f64,
    e2: f64,
    s: f64,
    ring_down: usize,
}

impl SdofFilter {
    pub fn new(fn_hz: f64, fs: f64, q_srs: f64) -> Result<Self> {
        check_freq(fn_hz, fs)?;
        check_q(q_srs)?;
        let wn = 2.0 * PI * fn_hz;
        let zeta = 1.0 / (2.0 * q_srs);
        let dt = 1.0 / fs;
        let wd = wn * (1.0 - zeta * zeta).sqrt();
        let e = (-zeta * wn * dt).exp();
        let c = e * (wd * dt).cos();
        let s = e * (wd * dt).sin();
        let sp = s / (wd * dt);
        let ring_down = (SRS_RING_DOWN_TIME_CONSTANTS * 2.0 * q_srs / wn * fs).ceil() as usize;
        Ok(SdofFilter { fn_hz, b: [1.0 - sp, 2.0 * (sp - c), e * e - sp], c, e2: e * e, s, ring_down })
    }

    pub fn natural_frequency(&self) -> f64 {
        self.fn_hz
    }

    /// Maximax response to `x` followed by the ring-down.
    ///
    /// The free decay is stopped as soon as the modal amplitude bound falls
    /// below the running maximum; no later sample can exceed it, so the
    /// result equals a run over the full ring-down.
    pub fn maximax(&self, x: &[f64]) -> f64 {
        let [b0, b1, b2] = self.b;
        let (c1, c2) = (2.0 * self.c, -self.e2);
        let mut st = [0.0; 4];
        let mut peak = 0.0f64;
        for &x0 in x {
            let [x1, x2, y1, y2] = st;
            let y = (b0 * x0 + b1 * x1 + b2 * x2 + c2 * y2) + c1 * y1;
            st = [x0, x1, y, y1];
            if y.abs() > peak {
                peak = y.abs();
            }
        }
        self.ring_down(st, peak)
    }

    /// Upper bound on `sum |h[n]|` of the impulse response: the exact partial
    /// sum plus a geometric bound on the remainder.
    pub fn l1_gain(&self) -> f64 {
        let [b0, b1, b2] = self.b;
        let (c1, c2) = (2.0 * self.c, -self.e2);
        let e = self.e2.sqrt();
        let (mut x1, mut x2, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0);
        let mut sum = 0.0;
        for n in 0.. {
            let x0 = if n == 0 { 1.0 } else { 0.0 };
            let y = (b0 * x0 + b1 * x1 + b2 * x2 + c2 * y2) + c1 * y1;
            (x2, x1, y2, y1) = (x1, x0, y1, y);
            sum += y.abs();
            if n >= 2 {
                let re = y1 - self.c * y2;
                let im = self.s * y2;
                let amp = (re * re + im * im).sqrt() / self.s.abs();
                let rest = amp * e / (1.0 - e);
                if rest <= 1e-6 * sum {
                    return sum + rest;
                }
            }
        }
        unreachable!()
    }

    /// Continues from state `[x1, x2, y1, y2]` with zero input.
    fn ring_down(&self, [mut x1, mut x2, mut y1, mut y2]: [f64; 4], mut peak: f64) -> f64 {
        let [_, b1, b2] = self.b;
        let (c1, c2) = (2.0 * self.c, -self.e2);
        for k in 0..self.ring_down {
            let y = (b1 * x1 + b2 * x2 + c2 * y2) + c1 * y1;
            x2 = x1;
            x1 = 0.0;
            y2 = y1;
            y1 = y;
            peak = peak.max(y.abs());
            if k >= 1 {
                // homogeneous from here: |y[j]| <= |y1 - conj(p) y2| / Im(p)
                let re = y1 - self.c * y2;
                let im = self.s * y2;
                let bound2 = (re * re + im * im) / (self.s * self.s);
                if bound2 <= peak * peak {
                    break;
                }
            }
        }
        peak
    }
}

/// Filters run side by side in [`SrsPlan`].
pub(crate) const LANES: usize = 8;

/// Up to [`LANES`] SDOF filters stepped together over a record that may
/// arrive in pieces.
pub(crate) struct LaneGroup<'a> {
    filters: &'a [SdofFilter],
    b0: [f64; LANES],
    b1: [f64; LANES],
    b2: [f64; LANES],
    c1: [f64; LANES],
    c2: [f64; LANES],
    y1: [f64; LANES],
    y2: [f64; LANES],
    peak: [f64; LANES],
    x1: f64,
    x2: f64,
}

impl<'a> LaneGroup<'a> {
    pub(crate) fn new(filters: &'a [SdofFilter]) -> Self {
        debug_assert!(filters.len() <= LANES);
        let mut g = LaneGroup {
            filters,
            b0: [0.0; LANES],
            b1: [0.0; LANES],
            b2: [0.0; LANES],
            c1: [0.0; LANES],
            c2: [0.0; LANES],
            y1: [0.0; LANES],
            y2: [0.0; LANES],
            peak: [0.0; LANES],
            x1: 0.0,
            x2: 0.0,
        };
        for (l, f) in filters.iter().enumerate() {
            [g.b0[l], g.b1[l], g.b2[l]] = f.b;
            g.c1[l] = 2.0 * f.c;
            g.c2[l] = -f.e2;
        }
        g
    }

    pub(crate) fn run(&mut self, x: &[f64]) {
        let (b0, b1, b2, c1, c2) = (&self.b0, &self.b1, &self.b2, &self.c1, &self.c2);
        let (y1, y2, peak) = (&mut self.y1, &mut self.y2, &mut self.peak);
        let (mut x1, mut x2) = (self.x1, self.x2);
        for &x0 in x {
            for l in 0..LANES {
                // y1 enters last to keep the loop-carried chain short
                let y = (b0[l] * x0 + b1[l] * x1 + b2[l] * x2 + c2[l] * y2[l]) + c1[l] * y1[l];
                y2[l] = y1[l];
                y1[l] = y;
                let a = y.abs();
                if a > peak[l] {
                    peak[l] = a;
                }
            }
            x2 = x1;
            x1 = x0;
        }
        self.x1 = x1;
        self.x2 = x2;
    }

    /// Running maxima so far.
    pub(crate) fn peaks(&self) -> &[f64] {
        &self.peak[..self.filters.len()]
    }

    /// True when no later output can beat the running maxima, provided every
    /// input still to come is bounded by `future_max` in magnitude. `gains`
    /// are the filters' impulse-response l1 norms.
    pub(crate) fn settled(&self, gains: &[f64], future_max: f64) -> bool {
        self.filters.iter().zip(gains).enumerate().all(|(l, (f, &g))| {
            // free response of the current state
            let [_, b1, b2] = f.b;
            let a1 = (b1 * self.x1 + b2 * self.x2 + self.c2[l] * self.y2[l]) + self.c1[l] * self.y1[l];
            let a2 = (b2 * self.x1 + self.c2[l] * self.y1[l]) + self.c1[l] * a1;
            let re = a2 - f.c * a1;
            let im = f.s * a1;
            let free = a1.abs().max(a2.abs()).max((re * re + im * im).sqrt() / f.s.abs());
            (free + g * future_max) * (1.0 + 1e-9) <= self.peak[l]
        })
    }

    /// Final maxima after the record ends and the filters ring down.
    pub(crate) fn finish(&self, out: &mut [f64]) {
        for (l, (f, o)) in self.filters.iter().zip(out).enumerate() {
            *o = f.ring_down([self.x1, self.x2, self.y1[l], self.y2[l]], self.peak[l]);
        }
    }
}

fn check_freq(fn_hz: f64, fs: f64) -> Result<()> {
    if !(fn_hz.is_finite() && fn_hz > 0.0) {
        return Err(Error::arg("fn", "natural frequency must be positive"));
    }
    if fn_hz >= 0.5 * fs {
        return Err(Error::arg("fn", "natural frequency must be below Nyquist"));
    }
    Ok(())
}

fn check_q(q_srs: f64) -> Result<()> {
    if !(q_srs.is_finite() && q_srs > 0.5) {
        return Err(Error::arg("q_srs", "must exceed 0.5"));
    }
    Ok(())
}

/// Precomputed SDOF bank for repeated SRS evaluation at one sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct SrsPlan {
    fs: f64,
    q_srs: f64,
    filters: Vec<SdofFilter>,
}

impl SrsPlan {
    pub fn new(fs: f64, freqs: &[f64], q_srs: f64) -> Result<Self> {
        check_q(q_srs)?;
        if freqs.is_empty() {
            return Err(Error::arg("freqs", "empty frequency grid"));
        }
        if freqs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::arg("freqs", "must be strictly increasing"));
        }
        let filters = freqs.iter().map(|&f| SdofFilter::new(f, fs, q_srs)).collect::<Result<Vec<_>>>()?;
        Ok(SrsPlan { fs, q_srs, filters })
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn freqs(&self) -> Vec<f64> {
        self.filters.iter().map(|f| f.fn_hz).collect()
    }

    pub(crate) fn filters(&self) -> &[SdofFilter] {
        &self.filters
    }

    pub fn evaluate_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, f) in out.chunks_mut(LANES).zip(self.filters.chunks(LANES)) {
            let mut g = LaneGroup::new(f);
            g.run(x);
            g.finish(o);
        }
    }

    pub fn evaluate(&self, sig: &Signal) -> Result<SrsCurve> {
        if (sig.sample_rate() - self.fs).abs() > 1e-9 * self.fs {
            return Err(Error::RateMismatch { expected: self.fs, found: sig.sample_rate() });
        }
        let mut values = alloc::vec![0.0; self.filters.len()];
        self.evaluate_into(sig.samples(), &mut values);
        Ok(SrsCurve { freqs: self.freqs(), values, q_srs: self.q_srs })
    }
}

/// Maximax absolute-acceleration SRS of `sig` at each of `freqs`.
pub fn srs(sig: &Signal, freqs: &[f64], q_srs: f64) -> Result<SrsCurve> {
    SrsPlan::new(sig.sample_rate(), freqs, q_srs)?.evaluate(sig)
}

/// Minimum RK4 steps per natural period.
const ORACLE_STEPS_PER_PERIOD: f64 = 32.0;

/// Maximax absolute acceleration at one natural frequency by RK4 integration
/// of `z'' + (wn/q) z' + wn^2 z = -a_base(t)` in relative coordinates, with
/// `a_base` linearly interpolated between samples (zero before the first
/// sample and after the last). The response is read at the sample instants.
pub fn srs_oracle(sig: &Signal, fn_hz: f64, q_srs: f64) -> Result<f64> {
    let fs = sig.sample_rate();
    check_freq(fn_hz, fs)?;
    check_q(q_srs)?;
    let wn = 2.0 * PI * fn_hz;
    let two_zeta_wn = wn / q_srs;
    let wn2 = wn * wn;
    let substeps = ((ORACLE_STEPS_PER_PERIOD * fn_hz / fs).ceil() as usize).max(1);
    let h = 1.0 / (fs * substeps as f64);
    let pad = (SRS_RING_DOWN_TIME_CONSTANTS * 2.0 * q_srs / wn * fs).ceil() as usize;
    let x = sig.samples();
    let input = |i: isize| -> f64 {
        if i < 0 || i as usize >= x.len() {
            0.0
        } else {
            x[i as usize]
        }
    };
    let deriv = |z: f64, v: f64, a: f64| (v, -a - two_zeta_wn * v - wn2 * z);

    let (mut z, mut v) = (0.0, 0.0);
    let mut peak = 0.0f64;
    // interval (i-1, i) for i = 0 .. len + pad, starting at rest at t = -T
    for i in 0..(x.len() + pad) as isize {
        let (a0, a1) = (input(i - 1), input(i));
        for j in 0..substeps {
            let f0 = j as f64 / substeps as f64;
            let f1 = (j as f64 + 1.0) / substeps as f64;
            let fm = 0.5 * (f0 + f1);
            let ua = a0 + (a1 - a0) * f0;
            let um = a0 + (a1 - a0) * fm;
            let ub = a0 + (a1 - a0) * f1;
            let (k1z, k1v) = deriv(z, v, ua);
            let (k2z, k2v) = deriv(z + 0.5 * h * k1z, v + 0.5 * h * k1v, um);
            let (k3z, k3v) = deriv(z + 0.5 * h * k2z, v + 0.5 * h * k2v, um);
            let (k4z, k4v) = deriv(z + h * k3z, v + h * k3v, ub);
            z += h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
            v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        }
        let abs_accel = -(two_zeta_wn * v + wn2 * z);
        peak = peak.max(abs_accel.abs());
    }
    Ok(peak)
}

/// Log-log interpolation of the breakpoints; frequencies outside the
/// breakpoint range are clamped to the end values.
pub fn spec_interpolate(spec: &SrsSpec, freqs: &[f64]) -> Result<SrsCurve> {
    if freqs.is_empty() {
        return Err(Error::arg("freqs", "empty frequency grid"));
    }
    let bp = &spec.breakpoints;
    let values = freqs
        .iter()
        .map(|&f| {
            if !(f.is_finite() && f > 0.0) {
                return Err(Error::arg("freqs", "must be positive"));
            }
            if f < spec.fmin() || f > spec.fmax() {
                log::warn!("{f} Hz is outside the specification range; clamping");
            }
            if f <= bp[0].0 {
                return Ok(bp[0].1);
            }
            if f >= bp[bp.len() - 1].0 {
                return Ok(bp[bp.len() - 1].1);
            }
            let i = bp.partition_point(|&(bf, _)| bf <= f);
            let (f0, a0) = bp[i - 1];
            let (f1, a1) = bp[i];
            if f == f0 || a0 == a1 {
                return Ok(a0);
            }
            let t = (f / f0).ln() / (f1 / f0).ln();
            Ok((a0.ln() + t * (a1 / a0).ln()).exp())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SrsCurve { freqs: freqs.to_vec(), values, q_srs: DEFAULT_Q_SRS })
}

/// Per-frequency amplitude error in dB against `target`.
pub fn db_error(actual: &SrsCurve, target: &SrsCurve, tolerance_db: f64) -> Result<DbErrorReport> {
    if actual.freqs.len() != target.freqs.len()
        || actual.freqs.iter().zip(&target.freqs).any(|(a, b)| (a - b).abs() > 1e-9 * b.abs())
    {
        return Err(Error::arg("actual", "frequency grid differs from target"));
    }
    if target.values.iter().any(|&v| !(v.is_finite() && v > 0.0)) {
        return Err(Error::arg("target", "values must be positive"));
    }
    let mut zero_response = false;
    let per_freq_db: Vec<f64> = actual
        .values
        .iter()
        .zip(&target.values)
        .map(|(&a, &t)| {
            if a > 0.0 {
                20.0 * (a / t).log10()
            } else {
                zero_response = true;
                f64::NEG_INFINITY
            }
        })
        .collect();
    let max_abs_db = per_freq_db.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(DbErrorReport {
        pass: !zero_response && max_abs_db <= tolerance_db,
        per_freq_db,
        max_abs_db,
        tolerance_db,
        zero_response,
    })
}
