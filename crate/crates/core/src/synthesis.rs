//! Coefficient search and end-to-end synthesis.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

// unused when std's inherent float methods are in scope
#[allow(unused_imports)]
use num_traits::Float as _;

use crate::error::{Error, Result};
use crate::filterbank::{build_basis, make_layout, BankLayout, BasisMatrix, DEFAULT_POINTS_PER_OCTAVE};
use crate::pso::{pso_minimize_batch, PsoConfig};
use crate::signal::{residual_motion, ResidualReport, Signal, DEFAULT_NET_ZERO_TOL};
use crate::srs::{db_error, spec_interpolate, DbErrorReport, LaneGroup, SdofFilter, SrsCurve, SrsPlan, SrsSpec, LANES};

/// SRS values below `OBJECTIVE_FLOOR * max(target)` are raised to it before
/// taking logs.
pub const OBJECTIVE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisResult {
    pub coefficients: Vec<f64>,
    pub synthesized: Signal,
    pub srs: SrsCurve,
    pub target: SrsCurve,
    pub srs_report: DbErrorReport,
    pub residuals: ResidualReport,
    pub objective_value: f64,
    pub iterations_used: usize,
    pub seed: u64,
    /// Global-best objective per PSO iteration.
    pub history: Vec<f64>,
}

/// Bank centers merged with the breakpoint frequencies, ascending.
pub fn verification_grid(layout: &BankLayout, spec: &SrsSpec) -> Vec<f64> {
    let mut grid: Vec<f64> = layout.centers.iter().copied().chain(spec.breakpoints().iter().map(|&(f, _)| f)).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|b, a| (*b - *a).abs() <= 1e-9 * a.abs());
    grid
}

/// Reusable evaluator of `|| log10 SRS(A x) - log10 target ||_2`.
///
/// The combination is formed block by block. A group of SDOF filters stops
/// early once its maxima can no longer change, judged from per-column bounds
/// on the remaining samples, and once every group has stopped the rest of
/// the record is skipped. Values are the same as a full evaluation.
pub struct Objective<'a> {
    basis: &'a BasisMatrix,
    plan: SrsPlan,
    gains: Vec<f64>,
    log_target: Vec<f64>,
    floor: f64,
    /// `tail_max[i][b]`: largest `|a_i|` from block `b` on.
    tail_max: Vec<Vec<f64>>,
    block: Vec<f64>,
    values: Vec<f64>,
}

/// Samples per block in [`Objective`].
const BLOCK: usize = 512;

impl<'a> Objective<'a> {
    pub fn new(basis: &'a BasisMatrix, target: &SrsCurve, q_srs: f64) -> Result<Self> {
        if target.values.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::arg("target", "values must be positive"));
        }
        let plan = SrsPlan::new(basis.fs, &target.freqs, q_srs)?;
        let gains = plan.filters().iter().map(SdofFilter::l1_gain).collect();
        let max_target = target.values.iter().fold(0.0f64, |m, &v| m.max(v));
        let tail_max = basis
            .columns
            .iter()
            .map(|col| {
                let mut t: Vec<f64> =
                    col.samples().chunks(BLOCK).map(|c| c.iter().fold(0.0f64, |m, v| m.max(v.abs()))).collect();
                t.push(0.0);
                for b in (0..t.len() - 1).rev() {
                    t[b] = t[b].max(t[b + 1]);
                }
                t
            })
            .collect();
        Ok(Objective {
            basis,
            plan,
            gains,
            log_target: target.values.iter().map(|v| v.log10()).collect(),
            floor: OBJECTIVE_FLOOR * max_target,
            tail_max,
            block: vec![0.0; BLOCK],
            values: vec![0.0; target.freqs.len()],
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.columns.len()
    }

    /// Panics if `x` has the wrong length.
    pub fn eval(&mut self, x: &[f64]) -> f64 {
        self.eval_with_cutoff(x, f64::INFINITY)
    }

    /// Like [`eval`](Self::eval), but may return any value `>= cutoff` as soon
    /// as the misfit is known to reach it.
    pub fn eval_with_cutoff(&mut self, x: &[f64], cutoff: f64) -> f64 {
        assert_eq!(x.len(), self.dim());
        let len = self.basis.column_len();
        let filters = self.plan.filters();
        let mut groups: Vec<(LaneGroup, bool)> = filters.chunks(LANES).map(|f| (LaneGroup::new(f), true)).collect();

        for (b, start) in (0..len).step_by(BLOCK).enumerate() {
            let end = (start + BLOCK).min(len);
            let buf = &mut self.block[..end - start];
            buf.iter_mut().for_each(|v| *v = 0.0);
            for (xi, col) in x.iter().zip(&self.basis.columns) {
                for (o, a) in buf.iter_mut().zip(&col.samples()[start..end]) {
                    *o += xi * a;
                }
            }
            let future: f64 = x.iter().zip(&self.tail_max).map(|(xi, t)| xi.abs() * t[b + 1]).sum();
            for (k, (g, active)) in groups.iter_mut().enumerate() {
                if *active {
                    g.run(buf);
                    *active = !g.settled(&self.gains[k * LANES..], future);
                }
            }
            if groups.iter().all(|(_, active)| !active) {
                break;
            }
            if cutoff.is_finite() {
                let lb = self.lower_bound(&groups);
                if lb >= cutoff * (1.0 + 1e-12) {
                    return lb;
                }
            }
        }

        for (k, (g, active)) in groups.iter().enumerate() {
            let out = &mut self.values[k * LANES..(k * LANES + g.peaks().len())];
            if *active {
                g.finish(out);
            } else {
                out.copy_from_slice(g.peaks());
            }
        }
        self.misfit(&self.values)
    }

    fn misfit(&self, values: &[f64]) -> f64 {
        values
            .iter()
            .zip(&self.log_target)
            .map(|(&v, &lt)| {
                let d = v.max(self.floor).log10() - lt;
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// The running maxima can only grow, so every term already above its
    /// target contributes at least its current size.
    fn lower_bound(&self, groups: &[(LaneGroup, bool)]) -> f64 {
        let mut sum = 0.0;
        for (k, (g, _)) in groups.iter().enumerate() {
            for (&p, &lt) in g.peaks().iter().zip(&self.log_target[k * LANES..]) {
                let d = p.max(self.floor).log10() - lt;
                if d > 0.0 {
                    sum += d * d;
                }
            }
        }
        sum.sqrt()
    }

    /// Evaluates several positions with per-position cutoffs (see
    /// [`pso_minimize_batch`]).
    pub fn eval_batch(&mut self, xs: &[Vec<f64>], cutoffs: &[f64], out: &mut [f64]) {
        for ((x, &c), o) in xs.iter().zip(cutoffs).zip(out) {
            *o = self.eval_with_cutoff(x, c);
        }
    }
}

/// Log-SRS misfit of the combination `A x` against `target`.
pub fn objective(x: &[f64], basis: &BasisMatrix, target: &SrsCurve, q_srs: f64) -> Result<f64> {
    if x.len() != basis.columns.len() {
        return Err(Error::arg("x", format!("expected {} coefficients", basis.columns.len())));
    }
    Ok(Objective::new(basis, target, q_srs)?.eval(x))
}

/// Per-column coefficient `target(fc_i) / SRS(a_i)(fc_i)`.
pub fn warm_start(basis: &BasisMatrix, spec: &SrsSpec, q_srs: f64) -> Result<Vec<f64>> {
    let target = spec_interpolate(spec, &basis.layout.centers)?;
    basis
        .columns
        .iter()
        .zip(&basis.layout.centers)
        .zip(&target.values)
        .map(|((col, &fc), &t)| {
            let own = SdofFilter::new(fc, basis.fs, q_srs)?.maximax(col.samples());
            if own > 0.0 {
                Ok(t / own)
            } else {
                Err(Error::NoEnergyAtCenter { fc })
            }
        })
        .collect()
}

/// Builds the basis, searches coefficients, and verifies the result.
///
/// Missing the SRS tolerance is reported through `srs_report.pass`, not as
/// an error.
pub fn synthesize(
    spec: &SrsSpec,
    reference: &Signal,
    layout: &BankLayout,
    cfg: &PsoConfig,
    q_srs: f64,
) -> Result<SynthesisResult> {
    cfg.validate()?;
    let basis = build_basis(reference, layout)?;
    synthesize_with_basis(spec, &basis, cfg, q_srs)
}

/// [`synthesize`] on a prebuilt basis.
pub fn synthesize_with_basis(
    spec: &SrsSpec,
    basis: &BasisMatrix,
    cfg: &PsoConfig,
    q_srs: f64,
) -> Result<SynthesisResult> {
    cfg.validate()?;
    let grid = verification_grid(&basis.layout, spec);
    let target = spec_interpolate(spec, &grid)?;
    let warm = warm_start(basis, spec, q_srs)?;
    let bounds: Vec<(f64, f64)> = warm.iter().map(|&w| (-cfg.bounds_scale * w, cfg.bounds_scale * w)).collect();

    let mut obj = Objective::new(basis, &target, q_srs)?;
    let eval = |xs: &[Vec<f64>], cut: &[f64], out: &mut [f64]| obj.eval_batch(xs, cut, out);
    let outcome = pso_minimize_batch(warm.len(), eval, &bounds, cfg, &[warm])?;

    let synthesized = basis.combine(&outcome.x_best)?;
    let srs = obj.plan.evaluate(&synthesized)?;
    let srs_report = db_error(&srs, &target, spec.tolerance_db())?;
    let residuals = residual_motion(&synthesized, DEFAULT_NET_ZERO_TOL)?;
    Ok(SynthesisResult {
        coefficients: outcome.x_best,
        synthesized,
        srs,
        target,
        srs_report,
        residuals,
        objective_value: outcome.value,
        iterations_used: outcome.iterations,
        seed: cfg.seed,
        history: outcome.history,
    })
}

/// Standalone check of any record against a specification, on the default
/// sixth-octave grid spanning the breakpoints.
pub fn verify(sig: &Signal, spec: &SrsSpec, q_srs: f64, net_zero_tol: f64) -> Result<(DbErrorReport, ResidualReport)> {
    let layout = make_layout(spec.fmin(), spec.fmax(), DEFAULT_POINTS_PER_OCTAVE)?;
    verify_on(sig, spec, &verification_grid(&layout, spec), q_srs, net_zero_tol).map(|(_, _, db, res)| (db, res))
}

/// Like [`verify`] on an explicit grid; also returns the computed SRS and
/// the interpolated target.
pub fn verify_on(
    sig: &Signal,
    spec: &SrsSpec,
    freqs: &[f64],
    q_srs: f64,
    net_zero_tol: f64,
) -> Result<(SrsCurve, SrsCurve, DbErrorReport, ResidualReport)> {
    let target = spec_interpolate(spec, freqs)?;
    let actual = crate::srs::srs(sig, freqs, q_srs)?;
    let db = db_error(&actual, &target, spec.tolerance_db())?;
    let res = residual_motion(sig, net_zero_tol)?;
    Ok((actual, target, db, res))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::synth_reference;
    use crate::srs::srs;

    fn fixture() -> (SrsSpec, BasisMatrix) {
        let reference = synth_reference(20_000.0, 0.05, 2_000.0, 3).unwrap();
        let layout = make_layout(100.0, 1_000.0, 3).unwrap();
        let spec = SrsSpec::new(vec![(100.0, 50.0), (400.0, 400.0), (1_000.0, 400.0)], 3.0).unwrap();
        (spec, build_basis(&reference, &layout).unwrap())
    }

    #[test]
    fn grid_merges_breakpoints() {
        let layout = make_layout(100.0, 1_000.0, 3).unwrap();
        let spec = SrsSpec::new(vec![(100.0, 1.0), (150.0, 2.0), (1_000.0, 2.0)], 3.0).unwrap();
        let grid = verification_grid(&layout, &spec);
        // 100 Hz is already a center; 150 Hz and 1000 Hz are not
        assert_eq!(grid.len(), layout.len() + 2);
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
        assert!(grid.contains(&150.0));
    }

    #[test]
    fn zero_coefficients_hit_the_floor() {
        let (spec, basis) = fixture();
        let target = spec_interpolate(&spec, &basis.layout.centers).unwrap();
        let value = objective(&vec![0.0; basis.columns.len()], &basis, &target, 10.0).unwrap();
        let floor = OBJECTIVE_FLOOR * 400.0;
        let expected = target.values.iter().map(|t| (floor.log10() - t.log10()).powi(2)).sum::<f64>().sqrt();
        assert!((value - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn objective_is_scale_invariant() {
        let (spec, basis) = fixture();
        let target = spec_interpolate(&spec, &basis.layout.centers).unwrap();
        let x = warm_start(&basis, &spec, 10.0).unwrap();
        let a = objective(&x, &basis, &target, 10.0).unwrap();
        let x3: Vec<f64> = x.iter().map(|v| -3.0 * v).collect();
        let t3 = SrsCurve { values: target.values.iter().map(|v| 3.0 * v).collect(), ..target.clone() };
        let b = objective(&x3, &basis, &t3, 10.0).unwrap();
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn objective_matches_direct_srs() {
        let (spec, basis) = fixture();
        let target = spec_interpolate(&spec, &basis.layout.centers).unwrap();
        let x: Vec<f64> = (0..basis.columns.len()).map(|i| 50.0 + 30.0 * (i as f64).sin()).collect();
        let sig = basis.combine(&x).unwrap();
        let s = srs(&sig, &target.freqs, 10.0).unwrap();
        let direct =
            s.values.iter().zip(&target.values).map(|(v, t)| (v.log10() - t.log10()).powi(2)).sum::<f64>().sqrt();
        let value = objective(&x, &basis, &target, 10.0).unwrap();
        assert_eq!(value, direct);
    }

    #[test]
    fn cutoff_only_raises_rejected_values() {
        let (spec, basis) = fixture();
        let target = spec_interpolate(&spec, &basis.layout.centers).unwrap();
        let mut obj = Objective::new(&basis, &target, 10.0).unwrap();
        let warm = warm_start(&basis, &spec, 10.0).unwrap();
        let exact = obj.eval(&warm);
        assert_eq!(obj.eval_with_cutoff(&warm, exact * 2.0), exact);
        assert!(obj.eval_with_cutoff(&warm, exact * 0.5) >= exact * 0.5);
    }

    #[test]
    fn synthesis_is_reproducible() {
        let (spec, basis) = fixture();
        let cfg = PsoConfig { swarm_size: 20, max_iters: 30, seed: 5, ..PsoConfig::default() };
        let a = synthesize_with_basis(&spec, &basis, &cfg, 10.0).unwrap();
        let b = synthesize_with_basis(&spec, &basis, &cfg, 10.0).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.synthesized.len(), basis.column_len());
        assert_eq!(a.synthesized, basis.combine(&a.coefficients).unwrap());
        let again = objective(&a.coefficients, &basis, &a.target, 10.0).unwrap();
        assert_eq!(a.objective_value, again);
        assert!(a.residuals.pass);
        assert!(a.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn warm_start_needs_energy() {
        let (spec, _) = fixture();
        let silent = Signal::zeros(20_000.0, 1_001).unwrap();
        let layout = make_layout(100.0, 1_000.0, 3).unwrap();
        let cfg = PsoConfig::default();
        assert!(synthesize(&spec, &silent, &layout, &cfg, 10.0).is_err());
    }
}
