//! Deep-cut ellipsoid method minimizing the largest normalized block violation
//! `G(y) = max_b −λ_min(F_b(y)) / s_b` over a box of decision variables.

use rayon::prelude::*;

use super::{LmiBlock, Op1Problem, FEASIBILITY_MARGIN};
use crate::error::{Error, Result};
use crate::symlin::sym_eig;

#[derive(Clone, Copy, Debug)]
pub struct EllipsoidOptions {
    pub max_iterations: usize,
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub point: Vec<f64>,
    pub iterations: usize,
    /// Best value of the normalized violation `G` reached.
    pub violation: f64,
}

struct Ellipsoid {
    center: Vec<f64>,
    shape: Vec<f64>,
    m: usize,
}

enum CutResult {
    Ok,
    Empty,
    Degenerate,
}

impl Ellipsoid {
    fn new(bounds: &[(f64, f64)]) -> Self {
        let m = bounds.len();
        let center: Vec<f64> = bounds.iter().map(|(l, h)| 0.5 * (l + h)).collect();
        let mut shape = vec![0.0; m * m];
        for (i, (l, h)) in bounds.iter().enumerate() {
            let half = (0.5 * (h - l)).max(1e-12);
            shape[i * m + i] = m as f64 * half * half;
        }
        Self { center, shape, m }
    }

    fn shape_times(&self, g: &[f64]) -> Vec<f64> {
        let m = self.m;
        (0..m)
            .map(|i| (0..m).map(|j| self.shape[i * m + j] * g[j]).sum())
            .collect()
    }

    /// Width of the ellipsoid along `g`: `√(gᵀ E g)`.
    fn width(&self, g: &[f64]) -> f64 {
        let eg = self.shape_times(g);
        eg.iter()
            .zip(g)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            .max(0.0)
            .sqrt()
    }

    /// Keeps `{z : gᵀ(z − c) ≤ −depth}` with `depth ≥ 0`.
    fn cut(&mut self, g: &[f64], depth: f64) -> CutResult {
        let m = self.m as f64;
        let eg = self.shape_times(g);
        let gg: f64 = eg.iter().zip(g).map(|(a, b)| a * b).sum();
        if !(gg > 0.0) || !gg.is_finite() {
            return CutResult::Degenerate;
        }
        let w = gg.sqrt();
        let alpha = depth / w;
        if alpha >= 1.0 {
            return CutResult::Empty;
        }
        let b: Vec<f64> = eg.iter().map(|v| v / w).collect();
        if self.m == 1 {
            // interval update
            let half = self.shape[0].sqrt();
            let lo = self.center[0] - half;
            let hi = self.center[0] + half;
            let sign = g[0].signum();
            let bound = self.center[0] - sign * depth / g[0].abs();
            let (lo, hi) = if sign > 0.0 {
                (lo, bound.min(hi))
            } else {
                (bound.max(lo), hi)
            };
            self.center[0] = 0.5 * (lo + hi);
            self.shape[0] = (0.5 * (hi - lo)).powi(2);
            return CutResult::Ok;
        }
        let step = (1.0 + m * alpha) / (m + 1.0);
        for i in 0..self.m {
            self.center[i] -= step * b[i];
        }
        let scale = m * m * (1.0 - alpha * alpha) / (m * m - 1.0);
        let rank = 2.0 * (1.0 + m * alpha) / ((m + 1.0) * (1.0 + alpha));
        for i in 0..self.m {
            for j in 0..self.m {
                let v = scale * (self.shape[i * self.m + j] - rank * b[i] * b[j]);
                self.shape[i * self.m + j] = v;
            }
        }
        for i in 0..self.m {
            for j in (i + 1)..self.m {
                let v = 0.5 * (self.shape[i * self.m + j] + self.shape[j * self.m + i]);
                self.shape[i * self.m + j] = v;
                self.shape[j * self.m + i] = v;
            }
        }
        CutResult::Ok
    }
}

/// Scale bound `s_b ≥ ‖F_b(y)‖_max` on the whole search box.
fn block_scale(b: &LmiBlock, bounds: &[(f64, f64)]) -> f64 {
    let mut s = b.constant.max_abs();
    for (i, f) in &b.terms {
        let (l, h) = bounds[*i];
        s += f.max_abs() * l.abs().max(h.abs());
    }
    s.max(1.0)
}

/// Normalized violation of one block and its subgradient.
fn block_violation(b: &LmiBlock, scale: f64, y: &[f64], m: usize) -> (f64, Vec<f64>) {
    let f = b.eval(y);
    let Ok(e) = sym_eig(&f) else {
        return (f64::INFINITY, vec![0.0; m]);
    };
    let k = e.values.len() - 1;
    let v = e.vector(k);
    let mut g = vec![0.0; m];
    for (i, fi) in &b.terms {
        g[*i] -= fi.quad_form(&v) / scale;
    }
    (-e.values[k] / scale, g)
}

/// Minimizes `G` over the box until every block clears `FEASIBILITY_MARGIN · s_b`,
/// a lower bound proves this impossible, or the iteration budget runs out.
pub(super) fn minimize_max_violation(
    prob: &Op1Problem,
    reps: &[usize],
    bounds: &[(f64, f64)],
    opts: EllipsoidOptions,
) -> Result<SolveOutcome> {
    let m = bounds.len();
    let blocks: Vec<&LmiBlock> = reps.iter().map(|&i| &prob.blocks[i]).collect();
    let scales: Vec<f64> = blocks.iter().map(|b| block_scale(b, bounds)).collect();
    let target = -FEASIBILITY_MARGIN;
    let mut ell = Ellipsoid::new(bounds);
    let mut best_value = f64::INFINITY;
    let mut best_block = 0usize;
    let mut lower_bound = f64::NEG_INFINITY;

    for it in 0..opts.max_iterations {
        let c = ell.center.clone();
        if let Some((i, below)) = bounds
            .iter()
            .enumerate()
            .map(|(i, (l, h))| {
                (
                    i,
                    if c[i] < *l {
                        Some(true)
                    } else if c[i] > *h {
                        Some(false)
                    } else {
                        None
                    },
                )
            })
            .find_map(|(i, side)| side.map(|s| (i, s)))
        {
            let mut g = vec![0.0; m];
            let depth = if below {
                g[i] = -1.0;
                bounds[i].0 - c[i]
            } else {
                g[i] = 1.0;
                c[i] - bounds[i].1
            };
            match ell.cut(&g, depth) {
                CutResult::Ok => continue,
                CutResult::Empty => {
                    return Err(Error::Infeasible {
                        mu: prob.mu,
                        block: reps[best_block],
                        slack: best_value,
                    })
                }
                CutResult::Degenerate => break,
            }
        }

        let (worst, value, grad) = blocks
            .par_iter()
            .zip(scales.par_iter())
            .enumerate()
            .map(|(k, (b, s))| {
                let (v, g) = block_violation(b, *s, &c, m);
                (k, v, g)
            })
            .reduce(
                || (usize::MAX, f64::NEG_INFINITY, Vec::new()),
                |a, b| {
                    if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                        b
                    } else {
                        a
                    }
                },
            );
        if value < best_value {
            best_value = value;
            best_block = worst;
        }
        if value <= target {
            return Ok(SolveOutcome {
                point: c,
                iterations: it + 1,
                violation: value,
            });
        }
        let width = ell.width(&grad);
        lower_bound = lower_bound.max(value - width);
        if lower_bound > target {
            return Err(Error::Infeasible {
                mu: prob.mu,
                block: reps[best_block],
                slack: best_value,
            });
        }
        match ell.cut(&grad, value - target) {
            CutResult::Ok => {}
            CutResult::Empty => {
                return Err(Error::Infeasible {
                    mu: prob.mu,
                    block: reps[best_block],
                    slack: best_value,
                })
            }
            CutResult::Degenerate => break,
        }
    }
    Err(Error::Inconclusive {
        mu: prob.mu,
        iterations: opts.max_iterations,
    })
}
