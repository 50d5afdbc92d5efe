//! Entropy bounds from the optimization results, the analytic Lorenz reference
//! value, and the empirical singular-value estimate.

use std::f64::consts::LN_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Triangulation;
use crate::lyapopt::{lyapunov_operator, vertex_mu_simplified};
use crate::symlin::{singular_values, PdPencil, SymMatrix};
use crate::sysmodel::{integrate, integrate_with_variational, SystemModel};

/// `Λ / (2 ln 2)`
pub fn bound_from_q(q: f64) -> f64 {
    q / (2.0 * LN_2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PipelineVariant {
    /// `Λ = m̃ · max μ(x_k)` with a constant `V`.
    ConstantMetric,
    /// `Λ = Q` from the Lyapunov LP.
    LyapunovLp,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProblemSizes {
    pub vertices: usize,
    pub simplices: usize,
    pub variables: usize,
    pub constraints: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    /// `max(0, Λ / (2 ln 2))` in bits per unit time.
    pub bound: f64,
    pub raw_bound: f64,
    pub lambda: f64,
    pub m_tilde: usize,
    pub variant: PipelineVariant,
    /// Wall-clock seconds per stage.
    pub timings: Vec<(String, f64)>,
    pub sizes: ProblemSizes,
}

impl EntropyReport {
    pub fn new(lambda: f64, m_tilde: usize, variant: PipelineVariant) -> Self {
        let raw = bound_from_q(lambda);
        Self {
            bound: raw.max(0.0),
            raw_bound: raw,
            lambda,
            m_tilde,
            variant,
            timings: Vec::new(),
            sizes: ProblemSizes::default(),
        }
    }
}

/// Bound with `V` constant: `Λ = m̃ · max_k μ(x_k)` over the vertices of `t`.
pub fn const_p_bound(
    t: &Triangulation,
    model: &dyn SystemModel,
    p: &SymMatrix,
    m_tilde: usize,
) -> Result<EntropyReport> {
    let c = PdPencil::new(p)?.max_eig();
    let table = vertex_mu_simplified(t, model, p, c)?;
    let mut r = EntropyReport::new(
        m_tilde as f64 * table.max(),
        m_tilde,
        PipelineVariant::ConstantMetric,
    );
    r.sizes = ProblemSizes {
        vertices: t.vertex_count(),
        simplices: t.simplex_count(),
        variables: 0,
        constraints: 0,
    };
    Ok(r)
}

/// `(1/(2 ln 2)) · (√((σ−1)² + 4rσ) − (σ+1))`
pub fn analytic_lorenz_bound(sigma: f64, r: f64) -> Result<f64> {
    let disc = (sigma - 1.0).powi(2) + 4.0 * r * sigma;
    if !(disc >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "negative discriminant {disc} for sigma = {sigma}, r = {r}"
        )));
    }
    Ok((disc.sqrt() - (sigma + 1.0)) / (2.0 * LN_2))
}

/// `max over starts of (1/t) Σ_i max(0, log₂ α_i)` with `α_i` the singular
/// values of the linearized flow. A diagnostic indication, not a bound.
pub fn empirical_entropy_estimate(
    model: &dyn SystemModel,
    starts: &[Vec<f64>],
    t: f64,
    steps: usize,
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter("duration must be positive".into()));
    }
    let values = starts
        .par_iter()
        .map(|x0| {
            let sol = integrate_with_variational(model, x0, t, steps)?;
            Ok(singular_values(&sol.fundamental)
                .into_iter()
                .map(|a| a.log2().max(0.0))
                .sum::<f64>()
                / t)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(values.into_iter().fold(0.0, f64::max))
}

/// `count` points along one orbit from `x0`, after discarding a transient,
/// spaced `spacing` time units apart.
pub fn orbit_samples(
    model: &dyn SystemModel,
    x0: &[f64],
    transient: f64,
    count: usize,
    spacing: f64,
    dt: f64,
) -> Result<Vec<Vec<f64>>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter("time step must be positive".into()));
    }
    let steps = |d: f64| ((d / dt).ceil() as usize).max(1);
    let mut x = integrate(model, x0, transient, steps(transient))?;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(x.clone());
        x = integrate(model, &x, spacing, steps(spacing))?;
    }
    Ok(out)
}

/// Largest sum of the `d` largest generalized eigenvalues of `(A(x_k), P)` over
/// the vertices, for `d = 1..=n`.
pub fn lambda_d_diagnostic(
    t: &Triangulation,
    model: &dyn SystemModel,
    p: &SymMatrix,
) -> Result<Vec<f64>> {
    let n = t.dim();
    let pencil = PdPencil::new(p)?;
    let per_vertex = t
        .vertices()
        .par_iter()
        .map(|x| {
            let ev = pencil.eigvals(&lyapunov_operator(model, p, x))?;
            Ok((1..=n).map(|d| ev[..d].iter().sum()).collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..n)
        .map(|d| {
            per_vertex
                .iter()
                .map(|v| v[d])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_box_triangulation, AxisBox, GridSpec};
    use crate::symlin::Mat;
    use crate::sysmodel::linear_model;

    #[test]
    fn bound_from_q_values() {
        assert_eq!(bound_from_q(0.0), 0.0);
        assert!((bound_from_q(23.909) - 17.247).abs() < 1e-3);
        assert!((bound_from_q(21.311) - 15.373).abs() < 1e-3);
    }

    #[test]
    fn analytic_reference() {
        assert!((analytic_lorenz_bound(10.0, 28.0).unwrap() - 17.0638).abs() < 5e-4);
        assert!((analytic_lorenz_bound(10.0, 0.0).unwrap() + 1.0 / LN_2).abs() < 1e-12);
        assert!(analytic_lorenz_bound(1.0, -1.0).is_err());
    }

    #[test]
    fn linear_bounds() {
        let bx = AxisBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let t =
            build_box_triangulation(&bx, &GridSpec::covering(&bx, vec![2, 2]).unwrap()).unwrap();
        let m = linear_model(Mat::diag(&[1.0, -2.0]));
        let r = const_p_bound(&t, &m, &SymMatrix::identity(2), 1).unwrap();
        assert!((r.bound - 1.0 / LN_2).abs() < 1e-12);
        let stable = linear_model(Mat::diag(&[-1.0, -2.0]));
        let r = const_p_bound(&t, &stable, &SymMatrix::identity(2), 1).unwrap();
        assert_eq!(r.bound, 0.0);
        assert!(r.raw_bound < 0.0);
        let d = lambda_d_diagnostic(&t, &m, &SymMatrix::identity(2)).unwrap();
        assert!((d[0] - 2.0).abs() < 1e-12 && (d[1] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn linear_empirical_is_exact() {
        let m = linear_model(Mat::diag(&[0.7, -2.0]));
        let e =
            empirical_entropy_estimate(&m, &[vec![0.1, 0.2], vec![-0.3, 0.0]], 5.0, 5000).unwrap();
        assert!((e - 0.7 / LN_2).abs() < 1e-9);
    }
}
