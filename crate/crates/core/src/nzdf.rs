//! Net zero displacement filters.
//!
//! The analog prototype is
//!
//! ```text
//!            K s^M
//! H(s) = -----------------------  ,  2 <= M <= 2N-1
//!        (s^2 + (w/Q) s + w^2)^N
//! ```
//!
//! with `K` fixed so that `|H(jw)| = 1`. The lower bound on `M` puts at least
//! a double zero at DC, which cancels the double integration from
//! acceleration to displacement; the upper bound keeps the impulse response
//! finite at `t = 0+`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

// unused when std's inherent float methods are in scope
#[allow(unused_imports)]
use num_traits::Float as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::Signal;

pub const DEFAULT_Q: f64 = 5.0;
pub const DEFAULT_N: u32 = 2;
pub const DEFAULT_M: u32 = 2;

/// Ring-down length in units of the pole time constant `2Q/w`.
///
/// `ln(1e5)`: the pole envelope `e^{-wt/2Q}` drops by 100 dB. The double
/// pole contributes a `t e^{-wt/2Q}` term, which still sits near -60 dB of
/// its peak at this point.
pub const RING_DOWN_TIME_CONSTANTS: f64 = 11.512_925_464_970_229;

/// True iff `2 <= m <= 2n - 1`.
pub fn validate_order(m: u32, n: u32) -> bool {
    m >= 2 && m <= (2 * n).saturating_sub(1)
}

/// Analog NZDF parameters. `K` is derived, never set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NzdfParams {
    fc: f64,
    q: f64,
    n: u32,
    m: u32,
}

impl NzdfParams {
    /// Defaults `Q = 5`, `N = 2`, `M = 2`.
    pub fn new(fc: f64) -> Result<Self> {
        Self::with_order(fc, DEFAULT_Q, DEFAULT_N, DEFAULT_M)
    }

    pub fn with_order(fc: f64, q: f64, n: u32, m: u32) -> Result<Self> {
        if !(fc.is_finite() && fc > 0.0) {
            return Err(Error::arg("fc", "must be positive"));
        }
        if !(q.is_finite() && q > 0.5) {
            return Err(Error::arg("q", "must exceed 0.5"));
        }
        if !validate_order(m, n) {
            return Err(Error::InvalidOrder { m, n });
        }
        Ok(NzdfParams { fc, q, n, m })
    }

    pub fn fc(&self) -> f64 {
        self.fc
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Center angular frequency (rad/s).
    pub fn omega(&self) -> f64 {
        2.0 * PI * self.fc
    }

    /// Unity-peak gain, `(w^2/Q)^N / w^M`; `(w/Q)^2` for the defaults.
    pub fn k(&self) -> f64 {
        let w = self.omega();
        (w * w / self.q).powi(self.n as i32) / w.powi(self.m as i32)
    }

    /// Pole time constant `2Q/w` (s).
    pub fn time_constant(&self) -> f64 {
        2.0 * self.q / self.omega()
    }

    pub fn ring_down_seconds(&self) -> f64 {
        RING_DOWN_TIME_CONSTANTS * self.time_constant()
    }
}

/// Analog frequency response at `f_eval` Hz.
pub fn nzdf_gain(f_eval: f64, params: &NzdfParams) -> Complex64 {
    let w = params.omega();
    let s = Complex64::new(0.0, 2.0 * PI * f_eval);
    let den = s * s + s * (w / params.q) + w * w;
    s.powu(params.m) * params.k() / den.powu(params.n)
}

/// Normalized bandwidth `(w_ub - w_lb) / w` between the two frequencies
/// where `|H| = 2^{-1/2}`, for `N = 2`, `M = 2`.
pub fn q_to_beta(q: f64) -> Result<f64> {
    let c = SQRT_2 - 1.0;
    let radicand = 4.0 * c * q * q - 2.0 * SQRT_2 + 3.0;
    if radicand.is_nan() || radicand < 0.0 {
        return Err(Error::Domain("inner radicand of the Q-beta relation is negative"));
    }
    let root = radicand.sqrt();
    let two_q2 = 2.0 * q * q;
    let upper = (two_q2 + root + c) / two_q2;
    let lower = (two_q2 - root + c) / two_q2;
    if lower.is_nan() || lower < 0.0 {
        return Err(Error::Domain("lower band edge is imaginary"));
    }
    Ok(upper.sqrt() - lower.sqrt())
}

pub const BETA_TO_Q_BRACKET: (f64, f64) = (0.8, 1.0e4);

/// Inverts [`q_to_beta`] by bisection on [`BETA_TO_Q_BRACKET`].
pub fn beta_to_q(beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::arg("beta", "must lie in (0, 1)"));
    }
    let (mut lo, mut hi) = BETA_TO_Q_BRACKET;
    // beta decreases with Q
    let f = |q: f64| q_to_beta(q).map(|b| b - beta);
    let (f_lo, f_hi) = (f(lo)?, f(hi)?);
    if f_lo < 0.0 || f_hi > 0.0 {
        return Err(Error::NoRoot { lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 * mid.max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Group delay at the center frequency, `tau = 2NQ/w` (s).
pub fn group_delay(params: &NzdfParams) -> f64 {
    2.0 * params.n as f64 * params.q / params.omega()
}

/// One second-order section, `y = b0 x + b1 x1 + b2 x2 - a1 y1 - a2 y2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    pub fn response(&self, z_inv: Complex64) -> Complex64 {
        let z2 = z_inv * z_inv;
        let num = z_inv * self.b[1] + z2 * self.b[2] + self.b[0];
        let den = z_inv * self.a[0] + z2 * self.a[1] + 1.0;
        num / den
    }

    /// Roots of `z^2 + a1 z + a2`.
    pub fn poles(&self) -> [Complex64; 2] {
        let (a1, a2) = (self.a[0], self.a[1]);
        let disc = Complex64::new(a1 * a1 - 4.0 * a2, 0.0).sqrt();
        [(-disc - a1) * 0.5, (disc - a1) * 0.5]
    }

    /// Bilinear image of `(n2 s^2 + n1 s + n0) / (s^2 + d1 s + d0)` with
    /// `s = k (1 - z^-1) / (1 + z^-1)`.
    fn bilinear(num: [f64; 3], den: [f64; 2], k: f64) -> Biquad {
        let [n0, n1, n2] = num;
        let [d0, d1] = den;
        let k2 = k * k;
        let a0 = k2 + d1 * k + d0;
        Biquad {
            b: [(n2 * k2 + n1 * k + n0) / a0, (2.0 * n0 - 2.0 * n2 * k2) / a0, (n2 * k2 - n1 * k + n0) / a0],
            a: [(2.0 * d0 - 2.0 * k2) / a0, (k2 - d1 * k + d0) / a0],
        }
    }
}

/// Transposed direct form II state.
#[derive(Debug, Clone, Copy, Default)]
struct SectionState {
    s1: f64,
    s2: f64,
}

impl SectionState {
    #[inline]
    fn step(&mut self, c: &Biquad, x: f64) -> f64 {
        let y = c.b[0] * x + self.s1;
        self.s1 = c.b[1] * x - c.a[0] * y + self.s2;
        self.s2 = c.b[2] * x - c.a[1] * y;
        y
    }
}

/// Discrete NZDF: a cascade of `N` bilinear-transformed sections.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitalNzdf {
    params: NzdfParams,
    fs: f64,
    sections: Vec<Biquad>,
}

/// Bilinear transform of the analog NZDF, pre-warped at `fc`, with the
/// cascade gain at `fc` renormalized to exactly one.
///
/// `H` factors into `N` resonators `g s^m / (s^2 + (w/Q) s + w^2)`, each
/// with unit gain at `w`; the `M` zeros at DC are spread as evenly as
/// possible over the sections.
pub fn discretize(params: &NzdfParams, fs: f64) -> Result<DigitalNzdf> {
    let fc = params.fc;
    if !(fs.is_finite() && fs > 2.0 * fc) {
        return Err(Error::SampleRateTooLow { fs, required: 2.0 * fc });
    }
    if fs < 10.0 * fc {
        log::warn!("fs = {fs} Hz is below 10x fc = {fc} Hz; the digital NZDF will be warped");
    }
    let w = params.omega();
    let q = params.q;
    let k = w / (w / (2.0 * fs)).tan();
    let n = params.n;
    let mut sections = Vec::with_capacity(n as usize);
    for i in 0..n {
        let zeros = params.m / n + u32::from(i < params.m % n);
        let num = match zeros {
            0 => [w * w / q, 0.0, 0.0],
            1 => [0.0, w / q, 0.0],
            _ => [0.0, 0.0, 1.0 / q],
        };
        sections.push(Biquad::bilinear(num, [w * w, w / q], k));
    }
    let mut filt = DigitalNzdf { params: *params, fs, sections };
    let g = filt.response(fc).norm();
    for b in filt.sections[0].b.iter_mut() {
        *b /= g;
    }
    Ok(filt)
}

impl DigitalNzdf {
    pub fn params(&self) -> &NzdfParams {
        &self.params
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    /// Frequency response at `f` Hz.
    pub fn response(&self, f: f64) -> Complex64 {
        let z_inv = Complex64::from_polar(1.0, -2.0 * PI * f / self.fs);
        self.sections.iter().fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(z_inv))
    }

    /// Number of zero samples appended by [`apply_filter`].
    pub fn ring_down_samples(&self) -> usize {
        (self.params.ring_down_seconds() * self.fs).ceil() as usize
    }

    /// One leading zero, then the response to `input` followed by `pad`
    /// zeros.
    ///
    /// The leading sample records the rest state the recursion starts from;
    /// trapezoidal integration from it then matches the bilinear design and
    /// the double zero at DC shows up as exact net zero motion.
    pub fn filter_padded(&self, input: &[f64], pad: usize) -> Vec<f64> {
        let mut out = vec![0.0; 1 + input.len() + pad];
        out[1..=input.len()].copy_from_slice(input);
        for section in &self.sections {
            let mut st = SectionState::default();
            for v in out[1..].iter_mut() {
                *v = st.step(section, *v);
            }
        }
        out
    }
}

fn check_rate(filt: &DigitalNzdf, sig: &Signal) -> Result<()> {
    let (expected, found) = (filt.fs, sig.sample_rate());
    if (expected - found).abs() > 1e-9 * expected {
        return Err(Error::RateMismatch { expected, found });
    }
    Ok(())
}

/// Causal filtering from rest, extended by the ring-down padding.
///
/// The output starts one sample before the input (see
/// [`DigitalNzdf::filter_padded`]).
pub fn apply_filter(filt: &DigitalNzdf, sig: &Signal) -> Result<Signal> {
    check_rate(filt, sig)?;
    let out = filt.filter_padded(sig.samples(), filt.ring_down_samples());
    Signal::with_start(sig.sample_rate(), out, sig.t0() - sig.dt())
}

/// Response to a unit-area impulse (`fs` at t = 0) over `duration` seconds,
/// plus ring-down. Like every [`apply_filter`] output it starts at rest one
/// sample early, at t0 = -1/fs.
pub fn impulse_response(filt: &DigitalNzdf, duration: f64) -> Result<Signal> {
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(Error::arg("duration", "must be non-negative"));
    }
    let n = (duration * filt.fs).round() as usize + 1;
    let mut x = vec![0.0; n];
    x[0] = filt.fs;
    apply_filter(filt, &Signal::new(filt.fs, x)?)
}

/// `a t^{N-1} e^{-bt} cos(w_c t + phi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammatoneParams {
    pub a: f64,
    pub n: u32,
    pub b: f64,
    pub fc_carrier: f64,
    pub phi: f64,
}

impl GammatoneParams {
    /// The Gammatone sharing the NZDF's poles, with amplitude and phase of
    /// the leading `t^{N-1} e^{pt}` term of the NZDF impulse response.
    pub fn matched_to(params: &NzdfParams) -> GammatoneParams {
        let w = params.omega();
        let b = w / (2.0 * params.q);
        let wd = (w * w - b * b).sqrt();
        let pole = Complex64::new(-b, wd);
        let factorial: f64 = (1..params.n).map(f64::from).product();
        let residue = pole.powu(params.m) * params.k() / (Complex64::new(0.0, 2.0 * wd).powu(params.n) * factorial);
        GammatoneParams { a: 2.0 * residue.norm(), n: params.n, b, fc_carrier: wd / (2.0 * PI), phi: residue.arg() }
    }
}

/// Samples a Gammatone over `[0, duration]`.
pub fn gammatone_impulse(gp: &GammatoneParams, fs: f64, duration: f64) -> Result<Signal> {
    if !(gp.b.is_finite() && gp.b > 0.0) || gp.n == 0 {
        return Err(Error::arg("gammatone", "need b > 0 and N >= 1"));
    }
    if !(fs.is_finite() && fs > 4.0 * gp.fc_carrier) {
        return Err(Error::SampleRateTooLow { fs, required: 4.0 * gp.fc_carrier });
    }
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(Error::arg("duration", "must be non-negative"));
    }
    let wc = 2.0 * PI * gp.fc_carrier;
    let n = (duration * fs).round() as usize + 1;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / fs;
            gp.a * t.powi(gp.n as i32 - 1) * (-gp.b * t).exp() * (wc * t + gp.phi).cos()
        })
        .collect();
    Signal::new(fs, samples)
}

/// One row of a Bode table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodePoint {
    pub freq_hz: f64,
    pub mag_db: f64,
    pub phase_deg: f64,
}

/// `n` log-spaced frequencies from `fmin` to `fmax` inclusive.
pub fn log_grid(fmin: f64, fmax: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![fmin];
    }
    let span = (fmax / fmin).ln();
    (0..n).map(|i| fmin * (span * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Magnitude (dB) and unwrapped phase (degrees) of `response` over `freqs`.
pub fn bode<F: Fn(f64) -> Complex64>(response: F, freqs: &[f64]) -> Vec<BodePoint> {
    let mut out = Vec::with_capacity(freqs.len());
    let mut prev: Option<f64> = None;
    for &f in freqs {
        let h = response(f);
        let mut phase = h.arg().to_degrees();
        if let Some(p) = prev {
            phase -= 360.0 * ((phase - p) / 360.0).round();
        }
        prev = Some(phase);
        out.push(BodePoint { freq_hz: f, mag_db: 20.0 * h.norm().log10(), phase_deg: phase });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_bounds() {
        assert!(validate_order(2, 2));
        assert!(validate_order(3, 2));
        assert!(!validate_order(1, 2));
        assert!(!validate_order(4, 2));
        assert!(!validate_order(2, 1));
        assert!(NzdfParams::with_order(1000.0, 5.0, 2, 4).is_err());
    }

    #[test]
    fn default_k_is_w_over_q_squared() {
        let p = NzdfParams::new(1000.0).unwrap();
        let w = p.omega();
        assert!((p.k() / (w / 5.0).powi(2) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gain_matches_closed_form_for_defaults() {
        let p = NzdfParams::new(730.0).unwrap();
        let w = p.omega();
        for f in [1.0, 100.0, 730.0, 2000.0] {
            let s = Complex64::new(0.0, 2.0 * PI * f);
            let d = s * s * 5.0 + s * w + 5.0 * w * w;
            let expected = s * s * w * w / (d * d);
            assert!((nzdf_gain(f, &p) - expected).norm() <= 1e-12 * expected.norm());
        }
        assert_eq!(nzdf_gain(0.0, &p).norm(), 0.0);
    }

    #[test]
    fn unity_gain_at_center_for_other_orders() {
        for (m, n) in [(2, 2), (3, 2), (2, 3), (5, 3)] {
            let p = NzdfParams::with_order(1234.0, 7.0, n, m).unwrap();
            assert!((nzdf_gain(1234.0, &p).norm() - 1.0).abs() < 1e-12);
            let d = discretize(&p, 100_000.0).unwrap();
            assert!((d.response(1234.0).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn q_to_beta_rejects_nothing_in_bracket() {
        assert!(q_to_beta(BETA_TO_Q_BRACKET.0).is_ok());
        assert!(q_to_beta(BETA_TO_Q_BRACKET.1).is_ok());
    }

    #[test]
    fn beta_to_q_errors() {
        assert!(beta_to_q(0.0).is_err());
        assert!(beta_to_q(1.0).is_err());
        assert!(matches!(beta_to_q(0.95), Err(Error::NoRoot { .. })));
        assert!(matches!(beta_to_q(1e-6), Err(Error::NoRoot { .. })));
    }

    #[test]
    fn group_delay_scaling() {
        let p1 = NzdfParams::new(1000.0).unwrap();
        let p2 = NzdfParams::new(2000.0).unwrap();
        assert!((group_delay(&p1) - 20.0 / (2.0 * PI * 1000.0)).abs() < 1e-15);
        assert!((group_delay(&p1) / group_delay(&p2) - 2.0).abs() < 1e-12);
        assert!((group_delay(&p1) * p1.omega() - 20.0).abs() < 1e-12);
    }

    #[test]
    fn discretize_requires_nyquist_margin() {
        let p = NzdfParams::new(1000.0).unwrap();
        assert!(discretize(&p, 2000.0).is_err());
        assert!(discretize(&p, 2100.0).is_ok());
    }

    #[test]
    fn double_zero_at_dc_is_exact() {
        let p = NzdfParams::new(100.0).unwrap();
        let d = discretize(&p, 100_000.0).unwrap();
        for s in d.sections() {
            assert_eq!(s.b[0] + s.b[1] + s.b[2], 0.0);
        }
    }

    #[test]
    fn rate_mismatch_is_an_error() {
        let d = discretize(&NzdfParams::new(1000.0).unwrap(), 100_000.0).unwrap();
        let sig = Signal::zeros(50_000.0, 10).unwrap();
        assert!(matches!(apply_filter(&d, &sig), Err(Error::RateMismatch { .. })));
    }

    #[test]
    fn zero_in_zero_out() {
        let d = discretize(&NzdfParams::new(1000.0).unwrap(), 100_000.0).unwrap();
        let out = apply_filter(&d, &Signal::zeros(100_000.0, 100).unwrap()).unwrap();
        assert_eq!(out.len(), 1 + 100 + d.ring_down_samples());
        assert!(out.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gammatone_starts_at_zero_for_order_two() {
        let gp = GammatoneParams { a: 1.0, n: 2, b: 600.0, fc_carrier: 1000.0, phi: 0.3 };
        let g = gammatone_impulse(&gp, 100_000.0, 0.01).unwrap();
        assert_eq!(g.samples()[0], 0.0);
        assert!(gammatone_impulse(&gp, 4000.0, 0.01).is_err());
    }

    #[test]
    fn bode_phase_is_unwrapped() {
        let p = NzdfParams::new(1000.0).unwrap();
        let pts = bode(|f| nzdf_gain(f, &p), &log_grid(10.0, 100_000.0, 400));
        for w in pts.windows(2) {
            assert!((w[1].phase_deg - w[0].phase_deg).abs() < 180.0);
        }
        // s^2 / (...)^2 runs from +180 to -180 degrees
        assert!((pts[0].phase_deg - pts[399].phase_deg - 360.0).abs() < 5.0);
    }
}
