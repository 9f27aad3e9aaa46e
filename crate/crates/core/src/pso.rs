//! Seeded global-best particle swarm.
//!
//! Each particle draws from its own ChaCha stream (`seed`, stream = particle
//! index), particles are updated in index order and the global best is only
//! refreshed after the whole swarm has been evaluated, so a run is a pure
//! function of its inputs.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Uniform draw in `[0, 1)` from the top 53 bits.
pub(crate) fn unit_f64<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Fraction of the box width a particle may move per iteration.
pub const VELOCITY_CLAMP: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsoConfig {
    pub swarm_size: usize,
    pub max_iters: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Half-width of the search box relative to the warm start (used by
    /// synthesis, not by [`pso_minimize`] itself).
    pub bounds_scale: f64,
    pub seed: u64,
    pub stall_iters: usize,
    pub stall_tol: f64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        PsoConfig {
            swarm_size: 120,
            max_iters: 600,
            inertia: 0.72,
            cognitive: 1.49,
            social: 1.49,
            bounds_scale: 4.0,
            seed: 1,
            stall_iters: 80,
            stall_tol: 1e-4,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.swarm_size < 10 {
            return Err(Error::arg("swarm_size", "must be at least 10"));
        }
        for (name, v) in [
            ("inertia", self.inertia),
            ("cognitive", self.cognitive),
            ("social", self.social),
            ("stall_tol", self.stall_tol),
        ] {
            if !v.is_finite() {
                return Err(Error::arg(name, "must be finite"));
            }
        }
        if !(self.bounds_scale.is_finite() && self.bounds_scale > 0.0) {
            return Err(Error::arg("bounds_scale", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsoOutcome {
    pub x_best: Vec<f64>,
    pub value: f64,
    /// Swarm updates performed after the initial evaluation.
    pub iterations: usize,
    /// Global-best value after initialization and after every update.
    pub history: Vec<f64>,
}

/// Minimizes `eval` over the box `bounds`.
///
/// `seeds` replace the random initial positions of the first particles
/// (clamped into the box). Non-finite objective values count as `+inf`.
pub fn pso_minimize<F>(
    dim: usize,
    mut eval: F,
    bounds: &[(f64, f64)],
    cfg: &PsoConfig,
    seeds: &[Vec<f64>],
) -> Result<PsoOutcome>
where
    F: FnMut(&[f64]) -> f64,
{
    let batch = |xs: &[Vec<f64>], _: &[f64], out: &mut [f64]| {
        for (o, x) in out.iter_mut().zip(xs) {
            *o = eval(x);
        }
    };
    pso_minimize_batch(dim, batch, bounds, cfg, seeds)
}

/// [`pso_minimize`] with the whole swarm handed to `eval` at once.
///
/// `eval(positions, cutoffs, out)` writes one value per position. `cutoffs[i]`
/// is particle `i`'s best value so far; once a value is known to be at least
/// its cutoff, any number `>= cutoff` may be written instead. Such a particle
/// is left unchanged either way, so the trajectory is the same as with exact
/// values.
pub fn pso_minimize_batch<F>(
    dim: usize,
    mut eval: F,
    bounds: &[(f64, f64)],
    cfg: &PsoConfig,
    seeds: &[Vec<f64>],
) -> Result<PsoOutcome>
where
    F: FnMut(&[Vec<f64>], &[f64], &mut [f64]),
{
    cfg.validate()?;
    if dim == 0 {
        return Err(Error::arg("dim", "must be at least 1"));
    }
    if bounds.len() != dim {
        return Err(Error::arg("bounds", "one interval per dimension"));
    }
    if bounds.iter().any(|&(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi)) {
        return Err(Error::arg("bounds", "intervals must be finite and ordered"));
    }
    if seeds.len() > cfg.swarm_size || seeds.iter().any(|s| s.len() != dim) {
        return Err(Error::arg("seeds", "wrong count or dimension"));
    }
    let fitness = |v: f64| if v.is_finite() { v } else { f64::INFINITY };
    let vmax: Vec<f64> = bounds.iter().map(|&(lo, hi)| VELOCITY_CLAMP * (hi - lo)).collect();

    let mut rngs: Vec<ChaCha8Rng> = (0..cfg.swarm_size)
        .map(|i| {
            let mut r = ChaCha8Rng::seed_from_u64(cfg.seed);
            r.set_stream(i as u64);
            r
        })
        .collect();

    let mut pos = vec![vec![0.0; dim]; cfg.swarm_size];
    let mut vel = vec![vec![0.0; dim]; cfg.swarm_size];
    for (i, (p, v)) in pos.iter_mut().zip(vel.iter_mut()).enumerate() {
        let rng = &mut rngs[i];
        for d in 0..dim {
            let (lo, hi) = bounds[d];
            p[d] = match seeds.get(i) {
                Some(s) => s[d].clamp(lo, hi),
                None => lo + unit_f64(rng) * (hi - lo),
            };
            v[d] = 0.5 * vmax[d] * (2.0 * unit_f64(rng) - 1.0);
        }
    }

    let mut best_pos = pos.clone();
    let mut best_val = vec![f64::INFINITY; cfg.swarm_size];
    let mut values = vec![0.0; cfg.swarm_size];
    eval(&pos, &best_val, &mut values);
    for (b, &v) in best_val.iter_mut().zip(&values) {
        *b = fitness(v);
    }
    let mut g = argmin(&best_val);
    let mut g_pos = best_pos[g].clone();
    let mut g_val = best_val[g];
    let mut history = vec![g_val];

    let mut iterations = 0;
    for it in 1..=cfg.max_iters {
        for i in 0..cfg.swarm_size {
            let rng = &mut rngs[i];
            let (p, v, pb) = (&mut pos[i], &mut vel[i], &best_pos[i]);
            for d in 0..dim {
                let r1 = unit_f64(rng);
                let r2 = unit_f64(rng);
                let mut vd =
                    cfg.inertia * v[d] + cfg.cognitive * r1 * (pb[d] - p[d]) + cfg.social * r2 * (g_pos[d] - p[d]);
                vd = vd.clamp(-vmax[d], vmax[d]);
                let (lo, hi) = bounds[d];
                let mut xd = p[d] + vd;
                if xd < lo {
                    xd = lo;
                    vd = 0.0;
                } else if xd > hi {
                    xd = hi;
                    vd = 0.0;
                }
                p[d] = xd;
                v[d] = vd;
            }
        }
        eval(&pos, &best_val, &mut values);
        for i in 0..cfg.swarm_size {
            let f = fitness(values[i]);
            if f < best_val[i] {
                best_val[i] = f;
                best_pos[i].copy_from_slice(&pos[i]);
            }
        }
        g = argmin(&best_val);
        if best_val[g] < g_val {
            g_val = best_val[g];
            g_pos.copy_from_slice(&best_pos[g]);
        }
        history.push(g_val);
        iterations = it;
        if it >= cfg.stall_iters && history[it - cfg.stall_iters] - g_val < cfg.stall_tol {
            break;
        }
    }

    Ok(PsoOutcome { x_best: g_pos, value: g_val, iterations, history })
}

/// First index of the smallest value.
fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    best
}
