//! Assembly of the metric feasibility problem (a CPA Riemannian metric `P`
//! satisfying vertex-wise LMIs), an in-process solver for small instances, and
//! bisection over the eigenvalue bound `μ`.

mod ellipsoid;
pub mod sdpa;

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{GridSpec, Triangulation};
use crate::symlin::{sym_eigvals, SymMatrix};
use crate::sysmodel::SystemModel;

pub use ellipsoid::{EllipsoidOptions, SolveOutcome};

/// Relative margin a block must clear to count as satisfied.
pub const FEASIBILITY_MARGIN: f64 = 1e-8;

/// `E_ν = n²[(1+4√n)·B_ν·D_ν + 2n·B_{3,ν}·C_ν]`
pub fn e_nu(n: usize, b: f64, d: f64, b3: f64, c: f64) -> f64 {
    let nf = n as f64;
    nf * nf * ((1.0 + 4.0 * nf.sqrt()) * b * d + 2.0 * nf * b3 * c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Op1Mode {
    /// One shared matrix `P` on the whole domain.
    Constant,
    /// A CPA matrix field with independent values at every vertex.
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum VarRole {
    /// Entry `(i, j)`, `i ≤ j`, of `P` (at `vertex` in full mode).
    PEntry {
        vertex: Option<usize>,
        i: usize,
        j: usize,
    },
    /// Upper eigenvalue bound `C` (per simplex in full mode).
    CBound { simplex: Option<usize> },
    /// Per-axis share of the gradient bound `D_ν`.
    DAux { simplex: usize, axis: usize },
    /// Epigraph variable for `max_ν C_ν`.
    MaxC,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub role: VarRole,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockKind {
    /// `P(x_k) − ε₀ I ⪰ 0`
    LowerBound,
    /// `C I − P(x_k) ⪰ 0`
    UpperBound,
    /// `aux_axis ∓ [w_ij]_axis ≥ 0`
    GradientBound {
        entry: usize,
        axis: usize,
        negative: bool,
    },
    /// `μ P(x_k) − A(x_k) − h² E I ⪰ 0`
    Vertex,
    /// `t − C_ν ≥ 0`
    MaxC,
    /// `aux_axis ∓ [∇μ]_axis ≥ 0` in the monolithic second problem
    MuGradient { axis: usize, negative: bool },
    /// `aux_axis ∓ [∇V]_axis ≥ 0` in the monolithic second problem
    VGradient { axis: usize, negative: bool },
    /// `Q − ∇V·f(x_k) − err·D^V − m̃ μ(x_k) ≥ 0`
    Decay,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockLabel {
    pub kind: BlockKind,
    pub simplex: Option<usize>,
    pub vertex: Option<usize>,
}

/// Affine matrix map `y ↦ F₀ + Σ yᵢ Fᵢ`, required to be positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct LmiBlock {
    pub label: BlockLabel,
    pub constant: SymMatrix,
    pub terms: Vec<(usize, SymMatrix)>,
}

impl LmiBlock {
    pub fn dim(&self) -> usize {
        self.constant.dim()
    }

    pub fn eval(&self, y: &[f64]) -> SymMatrix {
        let mut m = self.constant.clone();
        for (i, f) in &self.terms {
            m.axpy(y[*i], f);
        }
        m
    }

    /// Smallest eigenvalue of the block at `y`.
    pub fn min_eig(&self, y: &[f64]) -> f64 {
        match sym_eigvals(&self.eval(y)) {
            Ok(v) => *v.last().unwrap(),
            Err(_) => f64::NEG_INFINITY,
        }
    }

    /// Required clearance `1e−8 · max(1, ‖F(y)‖_max)`.
    pub fn margin(&self, y: &[f64]) -> f64 {
        FEASIBILITY_MARGIN * self.eval(y).max_abs().max(1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplexConstants {
    pub h: f64,
    pub b2: f64,
    pub b3: f64,
}

#[derive(Clone, Debug)]
pub struct Op1Problem {
    pub mode: Op1Mode,
    pub n: usize,
    pub mu: f64,
    pub eps0: f64,
    pub grid: GridSpec,
    pub variables: Vec<Variable>,
    pub blocks: Vec<LmiBlock>,
    pub constants: Vec<SimplexConstants>,
    /// Linear objective, all zero for a pure feasibility problem.
    pub objective: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Op1Options {
    /// Add an epigraph variable and minimize `max_ν C_ν` (full mode only).
    pub minimize_max_c: bool,
}

fn check_params(mu: f64, eps0: f64) -> Result<()> {
    if !(eps0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eps0 must be positive, got {eps0}"
        )));
    }
    if !mu.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "mu must be finite, got {mu}"
        )));
    }
    Ok(())
}

fn check_model(tri: &Triangulation, model: &dyn SystemModel) -> Result<()> {
    if tri.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: tri.dim(),
            got: model.dim(),
        });
    }
    Ok(())
}

fn simplex_constants(tri: &Triangulation, model: &dyn SystemModel) -> Vec<SimplexConstants> {
    tri.simplices()
        .iter()
        .map(|s| SimplexConstants {
            h: s.diameter,
            b2: model.hessian_bound(s),
            b3: model.third_bound(s),
        })
        .collect()
}

fn upper_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            v.push((i, j));
        }
    }
    v
}

/// Constant-metric variant: one `P` for every vertex, `D_ν = 0`.
pub fn assemble_op1_const(
    tri: &Triangulation,
    model: &dyn SystemModel,
    mu: f64,
    eps0: f64,
) -> Result<Op1Problem> {
    check_params(mu, eps0)?;
    check_model(tri, model)?;
    let n = tri.dim();
    let pairs = upper_pairs(n);
    let c_var = pairs.len();
    let mut variables: Vec<Variable> = pairs
        .iter()
        .map(|&(i, j)| Variable {
            name: format!("P_{}_{}", i + 1, j + 1),
            role: VarRole::PEntry { vertex: None, i, j },
        })
        .collect();
    variables.push(Variable {
        name: "C".into(),
        role: VarRole::CBound { simplex: None },
    });

    let constants = simplex_constants(tri, model);
    let units: Vec<SymMatrix> = pairs
        .iter()
        .map(|&(i, j)| SymMatrix::unit(n, i, j))
        .collect();
    let jacobians: Vec<_> = tri
        .vertices()
        .par_iter()
        .map(|x| model.jacobian(x))
        .collect();
    let nf = n as f64;

    let mut blocks = Vec::with_capacity(tri.simplex_count() * (n + 1) + 2);
    blocks.push(LmiBlock {
        label: BlockLabel {
            kind: BlockKind::LowerBound,
            simplex: None,
            vertex: None,
        },
        constant: SymMatrix::identity(n).scaled(-eps0),
        terms: units.iter().cloned().enumerate().collect(),
    });
    let mut upper_terms: Vec<(usize, SymMatrix)> = units
        .iter()
        .enumerate()
        .map(|(k, u)| (k, u.scaled(-1.0)))
        .collect();
    upper_terms.push((c_var, SymMatrix::identity(n)));
    blocks.push(LmiBlock {
        label: BlockLabel {
            kind: BlockKind::UpperBound,
            simplex: None,
            vertex: None,
        },
        constant: SymMatrix::zeros(n),
        terms: upper_terms,
    });

    let vertex_blocks: Vec<LmiBlock> = tri
        .simplices()
        .par_iter()
        .enumerate()
        .flat_map_iter(|(s, simplex)| {
            let k = constants[s];
            let e_coef = k.h * k.h * 2.0 * nf.powi(3) * k.b3;
            let units = &units;
            let jacobians = &jacobians;
            simplex.vertex_ids.iter().map(move |&v| {
                let jac = &jacobians[v];
                let mut terms: Vec<(usize, SymMatrix)> = units
                    .iter()
                    .enumerate()
                    .map(|(idx, u)| {
                        let mut t = u.scaled(mu);
                        t.axpy(-1.0, &u.lyapunov_sum(jac));
                        (idx, t)
                    })
                    .collect();
                if e_coef != 0.0 {
                    terms.push((c_var, SymMatrix::identity(n).scaled(-e_coef)));
                }
                LmiBlock {
                    label: BlockLabel {
                        kind: BlockKind::Vertex,
                        simplex: Some(s),
                        vertex: Some(v),
                    },
                    constant: SymMatrix::zeros(n),
                    terms,
                }
            })
        })
        .collect();
    blocks.extend(vertex_blocks);

    Ok(Op1Problem {
        mode: Op1Mode::Constant,
        n,
        mu,
        eps0,
        grid: tri.grid().clone(),
        objective: vec![0.0; variables.len()],
        variables,
        blocks,
        constants,
    })
}

/// Full CPA-metric variant with per-vertex `P`, per-simplex `C_ν` and gradient
/// bounds `D_ν = Σ_k aux_k`.
pub fn assemble_op1_full(
    tri: &Triangulation,
    model: &dyn SystemModel,
    mu: f64,
    eps0: f64,
    options: Op1Options,
) -> Result<Op1Problem> {
    check_params(mu, eps0)?;
    check_model(tri, model)?;
    let n = tri.dim();
    let pairs = upper_pairs(n);
    let np = pairs.len();
    let nv = tri.vertex_count();
    let ns = tri.simplex_count();
    let p_var = |v: usize, e: usize| v * np + e;
    let c_var = |s: usize| nv * np + s * (1 + n);
    let aux_var = |s: usize, a: usize| nv * np + s * (1 + n) + 1 + a;

    let mut variables = Vec::with_capacity(nv * np + ns * (1 + n) + 1);
    for v in 0..nv {
        for &(i, j) in &pairs {
            variables.push(Variable {
                name: format!("P_{v}_{}_{}", i + 1, j + 1),
                role: VarRole::PEntry {
                    vertex: Some(v),
                    i,
                    j,
                },
            });
        }
    }
    for s in 0..ns {
        variables.push(Variable {
            name: format!("C_{s}"),
            role: VarRole::CBound { simplex: Some(s) },
        });
        for a in 0..n {
            variables.push(Variable {
                name: format!("D_{s}_{}", a + 1),
                role: VarRole::DAux {
                    simplex: s,
                    axis: a,
                },
            });
        }
    }
    let max_c_var = variables.len();
    if options.minimize_max_c {
        variables.push(Variable {
            name: "Cmax".into(),
            role: VarRole::MaxC,
        });
    }

    let constants = simplex_constants(tri, model);
    let units: Vec<SymMatrix> = pairs
        .iter()
        .map(|&(i, j)| SymMatrix::unit(n, i, j))
        .collect();
    let one = |v: f64| SymMatrix::diag(&[v]);
    let nf = n as f64;

    let mut blocks = Vec::new();
    for v in 0..nv {
        blocks.push(LmiBlock {
            label: BlockLabel {
                kind: BlockKind::LowerBound,
                simplex: None,
                vertex: Some(v),
            },
            constant: SymMatrix::identity(n).scaled(-eps0),
            terms: units
                .iter()
                .enumerate()
                .map(|(e, u)| (p_var(v, e), u.clone()))
                .collect(),
        });
    }

    let per_simplex: Vec<Vec<LmiBlock>> = tri
        .simplices()
        .par_iter()
        .enumerate()
        .map(|(s, simplex)| {
            let mut out = Vec::new();
            let k = constants[s];
            let ids = &simplex.vertex_ids;
            for &v in ids {
                let mut terms: Vec<(usize, SymMatrix)> = units
                    .iter()
                    .enumerate()
                    .map(|(e, u)| (p_var(v, e), u.scaled(-1.0)))
                    .collect();
                terms.push((c_var(s), SymMatrix::identity(n)));
                out.push(LmiBlock {
                    label: BlockLabel {
                        kind: BlockKind::UpperBound,
                        simplex: Some(s),
                        vertex: Some(v),
                    },
                    constant: SymMatrix::zeros(n),
                    terms,
                });
            }
            // [w_e]_a = Σ_m Xinv[a][m-1] (P_e(x_m) − P_e(x_0))
            let xinv = &simplex.shape_inverse;
            for e in 0..np {
                for a in 0..n {
                    for negative in [false, true] {
                        let sign = if negative { 1.0 } else { -1.0 };
                        let mut terms = vec![(aux_var(s, a), one(1.0))];
                        let mut base = 0.0;
                        for m in 1..=n {
                            let c = xinv[(a, m - 1)];
                            terms.push((p_var(ids[m], e), one(sign * c)));
                            base -= c;
                        }
                        terms.push((p_var(ids[0], e), one(sign * base)));
                        out.push(LmiBlock {
                            label: BlockLabel {
                                kind: BlockKind::GradientBound {
                                    entry: e,
                                    axis: a,
                                    negative,
                                },
                                simplex: Some(s),
                                vertex: None,
                            },
                            constant: one(0.0),
                            terms,
                        });
                    }
                }
            }
            // μP(x_k) − P(x_k)Df − DfᵀP(x_k) − (w_ij·f(x_k)) − h²E_ν I
            let h2 = k.h * k.h;
            let d_coef = h2 * nf * nf * (1.0 + 4.0 * nf.sqrt()) * k.b2;
            let c_coef = h2 * nf * nf * 2.0 * nf * k.b3;
            for &v in ids {
                let x = tri.vertex(v);
                let jac = model.jacobian(x);
                let fx = model.field(x);
                // directional derivative of entry e along f: Σ_a [w_e]_a f_a
                let g: Vec<f64> = (1..=n)
                    .map(|m| (0..n).map(|a| xinv[(a, m - 1)] * fx[a]).sum())
                    .collect();
                let g0: f64 = -g.iter().sum::<f64>();
                let mut terms: Vec<(usize, SymMatrix)> = Vec::new();
                for (e, u) in units.iter().enumerate() {
                    for (pos, &vm) in ids.iter().enumerate() {
                        let mut t = SymMatrix::zeros(n);
                        if vm == v {
                            t = u.scaled(mu);
                            t.axpy(-1.0, &u.lyapunov_sum(&jac));
                        }
                        let gm = if pos == 0 { g0 } else { g[pos - 1] };
                        t.axpy(-gm, u);
                        if t.max_abs() != 0.0 {
                            terms.push((p_var(vm, e), t));
                        }
                    }
                }
                if c_coef != 0.0 {
                    terms.push((c_var(s), SymMatrix::identity(n).scaled(-c_coef)));
                }
                if d_coef != 0.0 {
                    for a in 0..n {
                        terms.push((aux_var(s, a), SymMatrix::identity(n).scaled(-d_coef)));
                    }
                }
                out.push(LmiBlock {
                    label: BlockLabel {
                        kind: BlockKind::Vertex,
                        simplex: Some(s),
                        vertex: Some(v),
                    },
                    constant: SymMatrix::zeros(n),
                    terms,
                });
            }
            if options.minimize_max_c {
                out.push(LmiBlock {
                    label: BlockLabel {
                        kind: BlockKind::MaxC,
                        simplex: Some(s),
                        vertex: None,
                    },
                    constant: one(0.0),
                    terms: vec![(max_c_var, one(1.0)), (c_var(s), one(-1.0))],
                });
            }
            out
        })
        .collect();
    blocks.extend(per_simplex.into_iter().flatten());

    let mut objective = vec![0.0; variables.len()];
    if options.minimize_max_c {
        objective[max_c_var] = 1.0;
    }
    Ok(Op1Problem {
        mode: Op1Mode::Full,
        n,
        mu,
        eps0,
        grid: tri.grid().clone(),
        variables,
        blocks,
        constants,
        objective,
    })
}

impl Op1Problem {
    pub fn variable_count(&self) -> usize {
        self.variables.len()
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Search box for the in-process solver, with `C ≤ c_cap`.
    pub fn variable_bounds(&self, c_cap: f64) -> Vec<(f64, f64)> {
        let aux_cap = self.aux_cap(c_cap);
        self.variables
            .iter()
            .map(|v| match v.role {
                VarRole::PEntry { i, j, .. } if i == j => (self.eps0, c_cap),
                VarRole::PEntry { .. } => (-c_cap, c_cap),
                VarRole::CBound { .. } | VarRole::MaxC => (self.eps0, c_cap),
                VarRole::DAux { .. } => (0.0, aux_cap),
            })
            .collect()
    }

    fn aux_cap(&self, c_cap: f64) -> f64 {
        // |[w]_a| ≤ 2·c_cap·Σ_m |Xinv[a][m]| for entries bounded by c_cap
        let mut worst: f64 = 0.0;
        for b in &self.blocks {
            if let BlockKind::GradientBound { .. } = b.label.kind {
                let s: f64 = b.terms.iter().skip(1).map(|(_, m)| m[(0, 0)].abs()).sum();
                worst = worst.max(s);
            }
        }
        (worst * c_cap).max(1.0)
    }

    /// Decision vector for a constant `P` with bound `c`.
    pub fn const_vector(&self, p: &SymMatrix, c: f64) -> Result<Vec<f64>> {
        if self.mode != Op1Mode::Constant {
            return Err(Error::Mismatch("not a constant-metric problem".into()));
        }
        if p.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: p.dim(),
            });
        }
        let mut y = p.upper();
        y.push(c);
        Ok(y)
    }

    /// Smallest clearance `λ_min(F_b) − margin_b` over all blocks, and the block attaining it.
    pub fn worst_block(&self, y: &[f64]) -> (usize, f64) {
        self.blocks
            .par_iter()
            .enumerate()
            .map(|(i, b)| (i, b.min_eig(y) - b.margin(y)))
            .reduce(
                || (usize::MAX, f64::INFINITY),
                |a, b| {
                    if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) {
                        b
                    } else {
                        a
                    }
                },
            )
    }

    /// True when every block clears its margin at `y`.
    pub fn is_feasible(&self, y: &[f64]) -> bool {
        self.worst_block(y).1 >= 0.0
    }

    /// Groups bitwise-identical blocks; returns representatives and multiplicities.
    pub fn unique_blocks(&self) -> Vec<usize> {
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut reps = Vec::new();
        for (i, b) in self.blocks.iter().enumerate() {
            let mut key: Vec<u64> = b.constant.upper().iter().map(|v| v.to_bits()).collect();
            for (idx, m) in &b.terms {
                key.push(*idx as u64);
                key.extend(m.upper().iter().map(|v| v.to_bits()));
            }
            seen.entry(key).or_insert_with(|| {
                reps.push(i);
                i
            });
        }
        reps
    }
}

/// Verified constant metric.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstMetric {
    pub mu: f64,
    pub p: SymMatrix,
    pub c: f64,
    /// Smallest block clearance `λ_min − margin` at the returned point.
    pub clearance: f64,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct FeasibilityOptions {
    pub c_cap: f64,
    pub max_iterations: usize,
}

impl FeasibilityOptions {
    pub fn for_eps0(eps0: f64) -> Self {
        Self {
            c_cap: 1e3 * eps0,
            max_iterations: 20_000,
        }
    }
}

/// Searches for a constant `P` satisfying every block of a constant-mode problem.
///
/// A returned metric has been re-verified against every block. Failure is either
/// [`Error::Infeasible`] (no point of the search box clears the margin) or
/// [`Error::Inconclusive`] (iteration budget exhausted).
pub fn solve_const_feasibility(prob: &Op1Problem, opts: FeasibilityOptions) -> Result<ConstMetric> {
    if prob.mode != Op1Mode::Constant {
        return Err(Error::Mismatch(
            "in-process metric solve supports the constant variant only".into(),
        ));
    }
    let y = solve_block_feasibility(prob, opts)?;
    let np = prob.n * (prob.n + 1) / 2;
    let p = SymMatrix::from_upper(prob.n, &y.point[..np])?;
    let mut best = ConstMetric {
        mu: prob.mu,
        p,
        c: y.point[np],
        clearance: prob.worst_block(&y.point).1,
        iterations: y.iterations,
    };
    if let Some(normalized) = normalize_const(prob, &best)? {
        best = normalized;
    }
    Ok(best)
}

/// Rescales `P` so its smallest eigenvalue sits just above `ε₀` and `C` just
/// above `λ_max(P)`; kept only if every block still verifies.
fn normalize_const(prob: &Op1Problem, m: &ConstMetric) -> Result<Option<ConstMetric>> {
    let ev = sym_eigvals(&m.p)?;
    let lmin = *ev.last().unwrap();
    if !(lmin > 0.0) {
        return Ok(None);
    }
    let t = prob.eps0 * (1.0 + 1e-6) / lmin;
    let p = m.p.scaled(t);
    let c = ev[0] * t * (1.0 + 1e-6);
    let y = prob.const_vector(&p, c)?;
    let (_, clearance) = prob.worst_block(&y);
    if clearance >= 0.0 {
        Ok(Some(ConstMetric {
            mu: m.mu,
            p,
            c,
            clearance,
            iterations: m.iterations,
        }))
    } else {
        Ok(None)
    }
}

/// Generic in-process solve on any (small) block problem; the result is verified.
pub fn solve_block_feasibility(
    prob: &Op1Problem,
    opts: FeasibilityOptions,
) -> Result<SolveOutcome> {
    let bounds = prob.variable_bounds(opts.c_cap);
    let reps = prob.unique_blocks();
    let out = ellipsoid::minimize_max_violation(
        prob,
        &reps,
        &bounds,
        EllipsoidOptions {
            max_iterations: opts.max_iterations,
        },
    )?;
    let (block, clearance) = prob.worst_block(&out.point);
    if clearance < 0.0 {
        return Err(Error::Infeasible {
            mu: prob.mu,
            block,
            slack: clearance,
        });
    }
    Ok(out)
}

/// Result of bisection over `μ`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BisectionResult {
    pub mu_star: f64,
    pub metric: ConstMetric,
    /// `(μ, feasible)` for every probe, in order.
    pub probes: Vec<(f64, bool)>,
}

/// Bisection for the least `μ ∈ [0, mu_hi]` at which the constant-metric problem
/// is certified feasible, to within `tol`.
pub fn bisect_mu(
    tri: &Triangulation,
    model: &dyn SystemModel,
    eps0: f64,
    mu_hi: f64,
    tol: f64,
    opts: FeasibilityOptions,
) -> Result<BisectionResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol must be positive, got {tol}"
        )));
    }
    let mut probes = Vec::new();
    let prob = assemble_op1_const(tri, model, mu_hi, eps0)?;
    let mut best = solve_const_feasibility(&prob, opts)?;
    probes.push((mu_hi, true));
    let mut lo = 0.0_f64.min(mu_hi);
    let mut hi = mu_hi;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let prob = assemble_op1_const(tri, model, mid, eps0)?;
        match solve_const_feasibility(&prob, opts) {
            Ok(m) => {
                hi = mid;
                best = m;
                probes.push((mid, true));
            }
            Err(Error::Infeasible { .. } | Error::Inconclusive { .. }) => {
                lo = mid;
                probes.push((mid, false));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(BisectionResult {
        mu_star: hi,
        metric: best,
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_box_triangulation, AxisBox};
    use crate::symlin::Mat;
    use crate::sysmodel::linear_model;

    fn square(counts: Vec<usize>) -> Triangulation {
        let bx = AxisBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        build_box_triangulation(&bx, &GridSpec::covering(&bx, counts).unwrap()).unwrap()
    }

    #[test]
    fn e_nu_formula() {
        assert_eq!(e_nu(3, 24.5, 0.0, 0.0, 5.0), 0.0);
        let n = 2.0_f64;
        let expect = n * n * ((1.0 + 4.0 * n.sqrt()) * 2.0 * 3.0 + 2.0 * n * 0.5 * 7.0);
        assert_eq!(e_nu(2, 2.0, 3.0, 0.5, 7.0), expect);
    }

    #[test]
    fn scalar_case_block() {
        let bx = AxisBox::new(vec![0.0], vec![1.0]).unwrap();
        let t = build_box_triangulation(&bx, &GridSpec::covering(&bx, vec![1]).unwrap()).unwrap();
        let m = linear_model(Mat::diag(&[-1.0]));
        let prob = assemble_op1_const(&t, &m, -1.5, 0.1).unwrap();
        assert_eq!(prob.variable_count(), 2);
        assert_eq!(prob.block_count(), 2 + 2);
        let vb = &prob.blocks[2];
        // μp − (−2p) = (μ + 2)p
        assert_eq!(vb.terms[0].1[(0, 0)], -1.5 + 2.0);
        let y = prob.const_vector(&SymMatrix::diag(&[1.0]), 2.0).unwrap();
        assert!(prob.is_feasible(&y));
        let prob = assemble_op1_const(&t, &m, -2.5, 0.1).unwrap();
        assert!(!prob.is_feasible(&y));
    }

    #[test]
    fn huge_mu_identity_feasible() {
        let t = square(vec![2, 2]);
        let m = linear_model(Mat::from_rows(&[vec![3.0, -7.0], vec![2.0, -1.0]]).unwrap());
        let prob = assemble_op1_const(&t, &m, 1e6, 0.1).unwrap();
        let y = prob
            .const_vector(&SymMatrix::identity(2), 1.0 + 1e-3)
            .unwrap();
        assert!(prob.is_feasible(&y));
    }

    #[test]
    fn full_mode_variable_count() {
        let t = square(vec![1, 1]);
        let m = linear_model(Mat::diag(&[1.0, -2.0]));
        let prob = assemble_op1_full(&t, &m, 3.0, 0.1, Op1Options::default()).unwrap();
        assert_eq!(
            prob.variable_count(),
            3 * t.vertex_count() + t.simplex_count() * (1 + 2)
        );
        // constant P with small aux is feasible for the linear model at μ = 3
        let mut y = vec![0.0; prob.variable_count()];
        for v in 0..t.vertex_count() {
            y[v * 3] = 1.0;
            y[v * 3 + 2] = 1.0;
        }
        for s in 0..t.simplex_count() {
            y[3 * t.vertex_count() + s * 3] = 1.0 + 1e-3;
            y[3 * t.vertex_count() + s * 3 + 1] = 1e-3;
            y[3 * t.vertex_count() + s * 3 + 2] = 1e-3;
        }
        assert!(prob.is_feasible(&y));
        let with_max = assemble_op1_full(
            &t,
            &m,
            3.0,
            0.1,
            Op1Options {
                minimize_max_c: true,
            },
        )
        .unwrap();
        assert_eq!(with_max.variable_count(), prob.variable_count() + 1);
        assert_eq!(with_max.objective.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn linear_toy_solves_near_scalar_answer() {
        let t = square(vec![2, 2]);
        let m = linear_model(Mat::diag(&[1.0, -2.0]));
        let prob = assemble_op1_const(&t, &m, 2.0 + 1e-3, 0.1).unwrap();
        let sol = solve_const_feasibility(&prob, FeasibilityOptions::for_eps0(0.1)).unwrap();
        let y = prob.const_vector(&sol.p, sol.c).unwrap();
        assert!(prob.is_feasible(&y));
        let ev = sym_eigvals(&sol.p).unwrap();
        assert!((ev[1] - 0.1).abs() < 1e-6);
        let prob = assemble_op1_const(&t, &m, 1.5, 0.1).unwrap();
        assert!(solve_const_feasibility(&prob, FeasibilityOptions::for_eps0(0.1)).is_err());
    }

    #[test]
    fn bisection_linear_and_degenerate_tol() {
        let t = square(vec![2, 2]);
        let m = linear_model(Mat::diag(&[1.0, -2.0]));
        let opts = FeasibilityOptions::for_eps0(0.1);
        let r = bisect_mu(&t, &m, 0.1, 10.0, 0.05, opts).unwrap();
        assert!((r.mu_star - 2.0).abs() <= 0.05);
        let r = bisect_mu(&t, &m, 0.1, 10.0, 20.0, opts).unwrap();
        assert_eq!(r.mu_star, 10.0);
        assert_eq!(r.probes.len(), 1);
    }
}
