//! The Lyapunov-type function stage: per-vertex eigenvalue bounds `μ(x_k)` for a
//! fixed metric, the linear program for a CPA function `V` minimizing `Q`, and
//! the monolithic semidefinite form for export.

pub mod ipm;
pub mod mps;
mod op2;
pub mod simplex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Triangulation;
use crate::symlin::{cond2, PdPencil, SymMatrix};
use crate::sysmodel::SystemModel;

pub use op2::{assemble_op2_full_sdp, Op2Problem, Op2Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MuSource {
    DirectFormula,
    LpVariable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexMuTable {
    pub values: Vec<f64>,
    pub source: MuSource,
    /// Largest generalized eigenvalue at each vertex (direct formula only).
    pub lambda_max: Vec<f64>,
    /// Interpolation correction added at each vertex (direct formula only).
    pub correction: Vec<f64>,
}

impl VertexMuTable {
    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `A(x) = P·Df(x) + Df(x)ᵀ·P` for a constant metric.
pub fn lyapunov_operator(model: &dyn SystemModel, p: &SymMatrix, x: &[f64]) -> SymMatrix {
    p.lyapunov_sum(&model.jacobian(x))
}

/// `μ(x_k) = λ_max(A(x_k), P) + h²·2n³·B₃·κ₂(P)` at every vertex, with `h` and
/// `B₃` maximized over the simplices incident to `x_k`.
pub fn vertex_mu_simplified(
    tstar: &Triangulation,
    model: &dyn SystemModel,
    p: &SymMatrix,
    c: f64,
) -> Result<VertexMuTable> {
    let n = tstar.dim();
    if model.dim() != n || p.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if model.dim() != n {
                model.dim()
            } else {
                p.dim()
            },
        });
    }
    let pencil = PdPencil::new(p)?;
    if c < pencil.max_eig() * (1.0 - 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "C = {c} is below the largest eigenvalue {} of P",
            pencil.max_eig()
        )));
    }
    let kappa = cond2(p)?;
    let n3 = (n as f64).powi(3);
    let rows: Vec<(f64, f64)> = (0..tstar.vertex_count())
        .into_par_iter()
        .map(|k| {
            let x = tstar.vertex(k);
            let lam = pencil.lambda_max(&lyapunov_operator(model, p, x))?;
            let mut h: f64 = 0.0;
            let mut b3: f64 = 0.0;
            for &s in tstar.incident_simplices(k) {
                let simplex = tstar.simplex(s);
                h = h.max(simplex.diameter);
                b3 = b3.max(model.third_bound(simplex));
            }
            Ok((lam, h * h * 2.0 * n3 * b3 * kappa))
        })
        .collect::<Result<_>>()?;
    Ok(VertexMuTable {
        values: rows.iter().map(|(l, c)| l + c).collect(),
        lambda_max: rows.iter().map(|r| r.0).collect(),
        correction: rows.iter().map(|r| r.1).collect(),
        source: MuSource::DirectFormula,
    })
}

/// Per-simplex data of the LP: vertex ids, shape-matrix inverse, and `f` at the vertices.
#[derive(Clone, Debug)]
pub struct LpElement {
    pub vertex_ids: Vec<usize>,
    /// `∇V = grad · (V_1 − V_0, …, V_n − V_0)`
    pub grad: Vec<Vec<f64>>,
    /// `g_k` with `∇V · f(x_k) = Σ_m g_k[m] (V_m − V_0)`, `m = 1..=n`.
    pub flow: Vec<Vec<f64>>,
    /// Interpolation-error coefficient multiplying `D^V = Σ aux`.
    pub err: f64,
}

/// `min Q` subject to the gradient-bound rows and the vertex rows, in `A x ≤ b` form.
///
/// Variables: `V(x_k)` for every vertex, then `n` gradient-bound shares per
/// simplex, then `Q`. Rows per simplex: `2n` gradient rows
/// `±[∇V]_a − aux_a ≤ 0`, then `n+1` vertex rows
/// `∇V·f(x_k) + err·Σ aux − Q ≤ −m̃ μ(x_k)`.
#[derive(Clone, Debug)]
pub struct LpProblem {
    pub n: usize,
    pub vertex_count: usize,
    pub m_tilde: usize,
    pub mu: Vec<f64>,
    pub elements: Vec<LpElement>,
}

/// A sparse row `Σ coeffs · x ≤ rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct LpRow {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl LpProblem {
    pub fn variable_count(&self) -> usize {
        self.vertex_count + self.n * self.elements.len() + 1
    }

    pub fn row_count(&self) -> usize {
        self.elements.len() * (2 * self.n + self.n + 1)
    }

    pub fn q_index(&self) -> usize {
        self.variable_count() - 1
    }

    pub fn aux_index(&self, simplex: usize, axis: usize) -> usize {
        self.vertex_count + simplex * self.n + axis
    }

    pub fn variable_name(&self, j: usize) -> String {
        if j < self.vertex_count {
            format!("V{j}")
        } else if j == self.q_index() {
            "Q".to_string()
        } else {
            format!("A{}", j - self.vertex_count)
        }
    }

    pub fn objective(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.variable_count()];
        c[self.q_index()] = 1.0;
        c
    }

    /// Rows of simplex `s` in canonical order.
    pub fn element_rows(&self, s: usize) -> Vec<LpRow> {
        let e = &self.elements[s];
        let n = self.n;
        let ids = &e.vertex_ids;
        let expand = |w: &[f64]| -> Vec<(usize, f64)> {
            let mut out = Vec::with_capacity(n + 1);
            out.push((ids[0], -w.iter().sum::<f64>()));
            for m in 1..=n {
                out.push((ids[m], w[m - 1]));
            }
            out
        };
        let mut rows = Vec::with_capacity(3 * n + 1);
        for a in 0..n {
            for sign in [1.0, -1.0] {
                let mut coeffs: Vec<(usize, f64)> = expand(&e.grad[a])
                    .into_iter()
                    .map(|(j, v)| (j, sign * v))
                    .collect();
                coeffs.push((self.aux_index(s, a), -1.0));
                rows.push(LpRow { coeffs, rhs: 0.0 });
            }
        }
        for (k, &v) in ids.iter().enumerate() {
            let mut coeffs = expand(&e.flow[k]);
            for a in 0..n {
                coeffs.push((self.aux_index(s, a), e.err));
            }
            coeffs.push((self.q_index(), -1.0));
            rows.push(LpRow {
                coeffs,
                rhs: -(self.m_tilde as f64) * self.mu[v],
            });
        }
        rows
    }

    pub fn rows(&self) -> Vec<LpRow> {
        (0..self.elements.len())
            .flat_map(|s| self.element_rows(s))
            .collect()
    }

    /// `∇V` on simplex `s`.
    pub fn gradient(&self, s: usize, v: &[f64]) -> Vec<f64> {
        let e = &self.elements[s];
        let v0 = v[e.vertex_ids[0]];
        e.grad
            .iter()
            .map(|w| {
                w.iter()
                    .zip(&e.vertex_ids[1..])
                    .map(|(c, &id)| c * (v[id] - v0))
                    .sum()
            })
            .collect()
    }

    /// Left-hand side of the vertex row `(s, k)` with `aux = |∇V|`, minus `Q`.
    pub fn vertex_row_value(&self, s: usize, k: usize, v: &[f64]) -> f64 {
        let e = &self.elements[s];
        let v0 = v[e.vertex_ids[0]];
        let flow: f64 = e.flow[k]
            .iter()
            .zip(&e.vertex_ids[1..])
            .map(|(c, &id)| c * (v[id] - v0))
            .sum();
        let d: f64 = self.gradient(s, v).iter().map(|g| g.abs()).sum();
        flow + e.err * d + self.m_tilde as f64 * self.mu[e.vertex_ids[k]]
    }

    /// Smallest feasible `Q` for given `V` (with the tightest `aux`).
    pub fn q_for(&self, v: &[f64]) -> f64 {
        (0..self.elements.len())
            .into_par_iter()
            .map(|s| {
                (0..=self.n)
                    .map(|k| self.vertex_row_value(s, k, v))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .reduce(|| f64::NEG_INFINITY, f64::max)
    }

    /// Full primal point `(V, aux = |∇V|, Q = q_for(V))`.
    pub fn repaired_point(&self, v: &[f64]) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.variable_count());
        x.extend_from_slice(v);
        for s in 0..self.elements.len() {
            x.extend(self.gradient(s, v).into_iter().map(f64::abs));
        }
        x.push(self.q_for(v));
        x
    }

    /// Largest row violation `Σ a·x − b` at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        (0..self.elements.len())
            .into_par_iter()
            .map(|s| {
                self.element_rows(s)
                    .iter()
                    .map(|r| r.coeffs.iter().map(|(j, a)| a * x[*j]).sum::<f64>() - r.rhs)
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .reduce(|| f64::NEG_INFINITY, f64::max)
    }
}

/// Default per-simplex error coefficient `h_ξ²·n·B*_ξ`.
pub fn conservative_err_bound(tstar: &Triangulation, model: &dyn SystemModel) -> Vec<f64> {
    let n = tstar.dim() as f64;
    tstar
        .simplices()
        .iter()
        .map(|s| s.diameter * s.diameter * n * model.hessian_bound(s))
        .collect()
}

pub fn assemble_lp(
    tstar: &Triangulation,
    model: &dyn SystemModel,
    mu_table: &VertexMuTable,
    m_tilde: usize,
    err_bound: Option<&[f64]>,
) -> Result<LpProblem> {
    let n = tstar.dim();
    if model.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: model.dim(),
        });
    }
    if mu_table.values.len() != tstar.vertex_count() {
        return Err(Error::Mismatch(format!(
            "mu table has {} entries for {} vertices",
            mu_table.values.len(),
            tstar.vertex_count()
        )));
    }
    if m_tilde == 0 {
        return Err(Error::InvalidParameter("m_tilde must be at least 1".into()));
    }
    let default_err;
    let err = match err_bound {
        Some(e) => {
            if e.len() != tstar.simplex_count() {
                return Err(Error::Mismatch(format!(
                    "error bound has {} entries for {} simplices",
                    e.len(),
                    tstar.simplex_count()
                )));
            }
            e
        }
        None => {
            default_err = conservative_err_bound(tstar, model);
            &default_err[..]
        }
    };
    let fields: Vec<Vec<f64>> = tstar
        .vertices()
        .par_iter()
        .map(|x| model.field(x))
        .collect();
    let elements = tstar
        .simplices()
        .par_iter()
        .enumerate()
        .map(|(s, simplex)| {
            let xinv = &simplex.shape_inverse;
            let grad = (0..n)
                .map(|a| (0..n).map(|m| xinv[(a, m)]).collect())
                .collect();
            let flow = simplex
                .vertex_ids
                .iter()
                .map(|&v| xinv.tr_mul_vec(&fields[v]))
                .collect();
            LpElement {
                vertex_ids: simplex.vertex_ids.clone(),
                grad,
                flow,
                err: err[s],
            }
        })
        .collect();
    Ok(LpProblem {
        n,
        vertex_count: tstar.vertex_count(),
        m_tilde,
        mu: mu_table.values.clone(),
        elements,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LpMethod {
    /// Simplex for small problems, interior point otherwise.
    #[default]
    Auto,
    Simplex,
    InteriorPoint,
}

#[derive(Clone, Copy, Debug)]
pub struct LpOptions {
    pub method: LpMethod,
    pub max_iterations: usize,
    /// Relative optimality tolerance.
    pub gap_tol: f64,
    /// Row count up to which `Auto` picks the simplex method.
    pub simplex_row_limit: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            method: LpMethod::Auto,
            max_iterations: 0,
            gap_tol: 1e-6,
            simplex_row_limit: 2_000,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LpSolution {
    pub v: Vec<f64>,
    pub aux: Vec<f64>,
    pub q: f64,
    pub method: LpMethod,
    pub iterations: usize,
    /// Best known lower bound on the optimal `Q`, when the method provides one.
    pub lower_bound: Option<f64>,
}

impl LpSolution {
    /// Relative gap between `q` and the lower bound.
    pub fn relative_gap(&self) -> Option<f64> {
        self.lower_bound
            .map(|lb| (self.q - lb).max(0.0) / self.q.abs().max(1.0))
    }
}

/// Solves the LP and returns an exactly row-feasible point: `aux = |∇V|` and
/// `Q` is the largest vertex-row value.
pub fn solve_lp(prob: &LpProblem, opts: &LpOptions) -> Result<LpSolution> {
    let method = match opts.method {
        LpMethod::Auto if prob.row_count() <= opts.simplex_row_limit => LpMethod::Simplex,
        LpMethod::Auto => LpMethod::InteriorPoint,
        m => m,
    };
    let (v, iterations, lower_bound) = match method {
        LpMethod::Simplex => {
            let dense = simplex::DenseLp::from_problem(prob);
            let cap = if opts.max_iterations == 0 {
                50 * (dense.rows() + dense.cols()) + 1000
            } else {
                opts.max_iterations
            };
            let sol = dense.solve(cap)?;
            let v = sol.x[..prob.vertex_count].to_vec();
            (v, sol.iterations, Some(sol.objective))
        }
        _ => {
            let sol = ipm::solve(
                prob,
                &ipm::IpmOptions {
                    max_iterations: if opts.max_iterations == 0 {
                        200
                    } else {
                        opts.max_iterations
                    },
                    tol: (opts.gap_tol * 1e-2).max(1e-12),
                },
            )?;
            (sol.v, sol.iterations, Some(sol.dual_objective))
        }
    };
    let x = prob.repaired_point(&v);
    let q = x[prob.q_index()];
    Ok(LpSolution {
        aux: x[prob.vertex_count..prob.q_index()].to_vec(),
        v,
        q,
        method,
        iterations,
        lower_bound: lower_bound.map(|lb: f64| lb.min(q)),
    })
}

/// Diagnostic bound on the number of positive generalized eigenvalues.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MTildeEstimate {
    pub m_tilde: usize,
    pub vertex_max: usize,
    pub sample_max: usize,
    pub samples: usize,
}

/// Largest count of positive generalized eigenvalues of `(A(x), P)` over the
/// vertices and `samples` uniform points. Evidence only, not a proof.
pub fn estimate_m_tilde(
    tstar: &Triangulation,
    model: &dyn SystemModel,
    p: &SymMatrix,
    tol: f64,
    samples: usize,
    seed: u64,
) -> Result<MTildeEstimate> {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    let pencil = PdPencil::new(p)?;
    let count = |x: &[f64]| -> Result<usize> {
        let a = lyapunov_operator(model, p, x);
        Ok(pencil.eigvals(&a)?.into_iter().filter(|&l| l > tol).count())
    };
    let vertex_max = tstar
        .vertices()
        .par_iter()
        .map(|x| count(x))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .unwrap_or(0);
    let dom = tstar.domain();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<f64>> = (0..samples)
        .map(|_| {
            dom.lo()
                .iter()
                .zip(dom.hi())
                .map(|(l, h)| rng.gen_range(*l..=*h))
                .collect()
        })
        .collect();
    let sample_max = points
        .par_iter()
        .map(|x| count(x))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .unwrap_or(0);
    Ok(MTildeEstimate {
        m_tilde: vertex_max.max(sample_max),
        vertex_max,
        sample_max,
        samples,
    })
}
