//! Fractional-octave NZDF bank and the normalized basis matrix.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

// unused when std's inherent float methods are in scope
#[allow(unused_imports)]
use num_traits::Float as _;

use crate::error::{Error, Result};
use crate::nzdf::{discretize, NzdfParams};
use crate::signal::{motion_of, peak_abs, Signal};

pub const DEFAULT_POINTS_PER_OCTAVE: u32 = 6;

/// Geometric grid `fmin 2^(k/ppo)`, extended to the first point at or above
/// `fmax`.
#[derive(Debug, Clone, PartialEq)]
pub struct BankLayout {
    pub fmin: f64,
    pub fmax: f64,
    pub points_per_octave: u32,
    pub centers: Vec<f64>,
}

impl BankLayout {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn max_center(&self) -> f64 {
        self.centers[self.centers.len() - 1]
    }
}

pub fn make_layout(fmin: f64, fmax: f64, ppo: u32) -> Result<BankLayout> {
    if !(fmin.is_finite() && fmin > 0.0) {
        return Err(Error::arg("fmin", "must be positive"));
    }
    if !(fmax.is_finite() && fmax > fmin) {
        return Err(Error::arg("fmax", "must exceed fmin"));
    }
    if ppo == 0 {
        return Err(Error::arg("ppo", "must be at least 1"));
    }
    let steps = (f64::from(ppo) * (fmax / fmin).log2() - 1e-9).ceil().max(0.0) as u32;
    let centers = (0..=steps).map(|k| fmin * 2f64.powf(f64::from(k) / f64::from(ppo))).collect();
    Ok(BankLayout { fmin, fmax, points_per_octave: ppo, centers })
}

/// Reference filtered through every bank filter, each column scaled to unit
/// peak. All columns share one length: a leading rest sample, the reference
/// and the longest ring-down, which belongs to the lowest center.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisMatrix {
    pub layout: BankLayout,
    pub fs: f64,
    pub columns: Vec<Signal>,
    /// Peak of each column before normalization (m/s^2).
    pub norms: Vec<f64>,
}

impl BasisMatrix {
    pub fn column_len(&self) -> usize {
        self.columns[0].len()
    }

    /// `sum_i x_i a_i`, accumulated in column order.
    pub fn combine_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.columns.len());
        out.iter_mut().for_each(|v| *v = 0.0);
        for (xi, col) in x.iter().zip(&self.columns) {
            for (o, a) in out.iter_mut().zip(col.samples()) {
                *o += xi * a;
            }
        }
    }

    pub fn combine(&self, x: &[f64]) -> Result<Signal> {
        if x.len() != self.columns.len() {
            return Err(Error::arg("x", format!("expected {} coefficients", self.columns.len())));
        }
        let mut out = alloc::vec![0.0; self.column_len()];
        self.combine_into(x, &mut out);
        Signal::new(self.fs, out)
    }
}

/// Filters `reference` through one NZDF (default parameters) per center.
pub fn build_basis(reference: &Signal, layout: &BankLayout) -> Result<BasisMatrix> {
    let fs = reference.sample_rate();
    let top = layout.max_center();
    if fs < 2.5 * top {
        return Err(Error::SampleRateTooLow { fs, required: 2.5 * top });
    }
    if fs < 10.0 * top {
        log::warn!("fs = {fs} Hz is below 10x the top bank center {top} Hz");
    }
    let filters = layout.centers.iter().map(|&fc| discretize(&NzdfParams::new(fc)?, fs)).collect::<Result<Vec<_>>>()?;
    let pad = filters.iter().map(|f| f.ring_down_samples()).max().unwrap_or(0);
    let ref_peak = reference.peak_abs();

    let mut columns = Vec::with_capacity(filters.len());
    let mut norms = Vec::with_capacity(filters.len());
    for (filt, &fc) in filters.iter().zip(&layout.centers) {
        let mut col = filt.filter_padded(reference.samples(), pad);
        let peak = peak_abs(&col);
        if peak <= 1e-12 * ref_peak || peak == 0.0 {
            return Err(Error::NoEnergyAtCenter { fc });
        }
        let inv = 1.0 / peak;
        col.iter_mut().for_each(|v| *v *= inv);
        columns.push(Signal::with_start(fs, col, reference.t0() - reference.dt())?);
        norms.push(peak);
    }
    Ok(BasisMatrix { layout: layout.clone(), fs, columns, norms })
}

/// `(max|a| / (w max|v|), max|a| / (w^2 max|u|))` for a column centered at
/// `fc`; both are one for a pure tone.
pub fn four_coordinate_check(column: &Signal, fc: f64) -> Result<(f64, f64)> {
    let w = 2.0 * PI * fc;
    let m = motion_of(column);
    let a = m.acceleration.peak_abs();
    let v = m.velocity.peak_abs();
    let u = m.displacement.peak_abs();
    if v == 0.0 {
        return Err(Error::ZeroPeak("velocity"));
    }
    if u == 0.0 {
        return Err(Error::ZeroPeak("displacement"));
    }
    Ok((a / (w * v), a / (w * w * u)))
}
