//! Dense two-phase tableau simplex with Bland's rule for `min cᵀx`, `Ax ≤ b`,
//! `x` free. Intended for small problems and cross-checks.

use super::LpProblem;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct DenseLp {
    pub c: Vec<f64>,
    /// Row-major `rows × cols`.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct DenseSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const STALL_LIMIT: usize = 50;
/// Relative right-hand-side perturbation against degeneracy.
const PERTURBATION: f64 = 1e-9;

struct Tableau {
    t: Vec<f64>,
    width: usize,
    rows: usize,
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * self.width + c]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width;
        let p = self.at(pr, pc);
        for c in 0..w {
            self.t[pr * w + c] /= p;
        }
        let prow: Vec<f64> = self.t[pr * w..(pr + 1) * w].to_vec();
        for r in 0..=self.rows + 1 {
            if r == pr {
                continue;
            }
            let f = self.t[r * w + pc];
            if f != 0.0 {
                for c in 0..w {
                    self.t[r * w + c] -= f * prow[c];
                }
            }
        }
        self.basis[pr] = pc;
    }

    /// Minimizes the objective stored in row `obj` over columns `< ncols`.
    /// Dantzig pricing, switching to Bland's rule during degenerate stalls.
    fn run(&mut self, obj: usize, ncols: usize, cap: usize, iters: &mut usize) -> Result<()> {
        let rhs = self.width - 1;
        let scale = (0..ncols).fold(1.0f64, |m, c| m.max(self.at(obj, c).abs()));
        let cost_tol = COST_TOL * scale;
        let mut stall = 0;
        loop {
            let entering = if stall < STALL_LIMIT {
                (0..ncols)
                    .filter(|&c| self.at(obj, c) < -cost_tol)
                    .min_by(|&a, &b| self.at(obj, a).total_cmp(&self.at(obj, b)))
            } else {
                (0..ncols).find(|&c| self.at(obj, c) < -cost_tol)
            };
            let Some(pc) = entering else {
                return Ok(());
            };
            if *iters >= cap {
                return Err(Error::LpIterationCap(cap));
            }
            *iters += 1;
            let mut best: Option<(f64, usize, usize)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a > PIVOT_TOL {
                    let ratio = self.at(r, rhs) / a;
                    let better = match best {
                        None => true,
                        Some((br, _, bb)) => {
                            ratio < br - 1e-12 || (ratio <= br + 1e-12 && self.basis[r] < bb)
                        }
                    };
                    if better {
                        best = Some((ratio, r, self.basis[r]));
                    }
                }
            }
            let Some((ratio, pr, _)) = best else {
                return Err(Error::LpUnbounded);
            };
            stall = if ratio.abs() <= 1e-12 { stall + 1 } else { 0 };
            self.pivot(pr, pc);
        }
    }
}

impl DenseLp {
    pub fn new(c: Vec<f64>, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() * c.len() {
            return Err(Error::DimensionMismatch {
                expected: b.len() * c.len(),
                got: a.len(),
            });
        }
        Ok(Self { c, a, b })
    }

    /// Dense copy of the LP with `V_0` fixed at zero, which removes the
    /// constant-shift direction of `V`.
    pub fn from_problem(prob: &LpProblem) -> Self {
        let cols = prob.variable_count();
        let rows = prob.rows();
        let mut a = vec![0.0; rows.len() * cols];
        let mut b = Vec::with_capacity(rows.len());
        for (r, row) in rows.iter().enumerate() {
            for &(j, v) in &row.coeffs {
                if j != 0 {
                    a[r * cols + j] += v;
                }
            }
            b.push(row.rhs);
        }
        Self {
            c: prob.objective(),
            a,
            b,
        }
    }

    pub fn rows(&self) -> usize {
        self.b.len()
    }

    pub fn cols(&self) -> usize {
        self.c.len()
    }

    pub fn solve(&self, cap: usize) -> Result<DenseSolution> {
        let (m, n) = (self.rows(), self.cols());
        // columns: x⁺ (n), x⁻ (n), slacks (m), artificials (m), rhs
        let art0 = 2 * n + m;
        let width = art0 + m + 1;
        let rhs = width - 1;
        let mut t = vec![0.0; (m + 2) * width];
        let mut basis = vec![0; m];
        let b: Vec<f64> = self
            .b
            .iter()
            .enumerate()
            .map(|(r, v)| {
                v + PERTURBATION * (1.0 + v.abs()) * (1.0 + ((r * 7919) % 997) as f64 / 997.0)
            })
            .collect();
        for r in 0..m {
            let sign = if b[r] < 0.0 { -1.0 } else { 1.0 };
            for j in 0..n {
                let v = sign * self.a[r * n + j];
                t[r * width + j] = v;
                t[r * width + n + j] = -v;
            }
            t[r * width + 2 * n + r] = sign;
            t[r * width + rhs] = sign * b[r];
            if sign > 0.0 {
                basis[r] = 2 * n + r;
            } else {
                t[r * width + art0 + r] = 1.0;
                basis[r] = art0 + r;
            }
        }
        // row m: phase II objective; row m+1: phase I objective
        for j in 0..n {
            t[m * width + j] = self.c[j];
            t[m * width + n + j] = -self.c[j];
        }
        for r in 0..m {
            if basis[r] >= art0 {
                for c in 0..width {
                    if c < art0 || c == rhs {
                        t[(m + 1) * width + c] -= t[r * width + c];
                    }
                }
            }
        }
        let mut tab = Tableau {
            t,
            width,
            rows: m,
            basis,
        };
        let mut iterations = 0;
        tab.run(m + 1, art0, cap, &mut iterations)?;
        if -tab.at(m + 1, rhs) > 1e-8 * (1.0 + self.b.iter().fold(0.0f64, |a, v| a.max(v.abs()))) {
            return Err(Error::LpInfeasible);
        }
        // drive remaining artificials out of the basis
        for r in 0..m {
            if tab.basis[r] >= art0 {
                if let Some(pc) = (0..art0).find(|&c| tab.at(r, c).abs() > 1e-9) {
                    tab.pivot(r, pc);
                }
            }
        }
        tab.run(m, art0, cap, &mut iterations)?;
        // slack columns hold B⁻¹ up to row signs, which recovers the unperturbed basic solution
        let mut x = vec![0.0; n];
        for r in 0..m {
            let bcol = tab.basis[r];
            let v: f64 = (0..m).map(|k| tab.at(r, 2 * n + k) * self.b[k]).sum();
            if bcol < n {
                x[bcol] += v;
            } else if bcol < 2 * n {
                x[bcol - n] -= v;
            }
        }
        let objective = self.c.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(DenseSolution {
            x,
            objective,
            iterations,
        })
    }
}
