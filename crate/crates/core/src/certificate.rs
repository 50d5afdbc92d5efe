//! Self-contained entropy certificate and its independent re-verification.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cpa::{CpaMatrixField, CpaScalarField};
use crate::entropy::bound_from_q;
use crate::error::{Error, Result};
use crate::geometry::{AxisBox, GridSpec, Subdivision, Triangulation};
use crate::lyapopt::{assemble_lp, LpMethod, VertexMuTable};
use crate::symlin::{psd_slack, SymMatrix};
use crate::sysmodel::{ModelSpec, SystemModel};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MetricField {
    Constant {
        p: SymMatrix,
    },
    /// Vertex values on the triangulation `T`.
    Cpa {
        values: Vec<SymMatrix>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum ErrBound {
    /// `h_ξ² · n · B*_ξ` on every simplex.
    Conservative,
    Custom {
        values: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub field: MetricField,
    /// Upper eigenvalue bound `C`.
    pub c: f64,
    /// Eigenvalue bound `μ` at which the metric was found feasible.
    pub mu: f64,
    pub eps0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative clearance required of metric blocks.
    pub feasibility: f64,
    /// Relative tolerance of the re-verification checks.
    pub verification: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverInfo {
    pub metric_iterations: usize,
    pub bisection_probes: usize,
    pub lp_method: LpMethod,
    pub lp_iterations: usize,
    pub lp_lower_bound: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyCertificate {
    pub model: ModelSpec,
    pub domain: AxisBox,
    pub subdivision: Subdivision,
    pub grid: Option<GridSpec>,
    pub grid_star: GridSpec,
    pub metric: MetricRecord,
    pub mu_table: VertexMuTable,
    pub v: Vec<f64>,
    pub m_tilde: usize,
    pub q: f64,
    pub bound: f64,
    pub err_bound: ErrBound,
    pub tolerances: Tolerances,
    pub solver: SolverInfo,
}

impl EntropyCertificate {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn tstar(&self) -> Result<Triangulation> {
        Triangulation::build(&self.domain, &self.grid_star, self.subdivision)
    }

    pub fn t(&self) -> Result<Option<Triangulation>> {
        self.grid
            .as_ref()
            .map(|g| Triangulation::build(&self.domain, g, self.subdivision))
            .transpose()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub vertex_rows_checked: usize,
    pub vertex_row_violations: usize,
    /// Largest `∇V·f(x_k) + err·|∇V|₁ + m̃μ(x_k) − Q`.
    pub worst_vertex_row: f64,
    pub vertex_lmi_violations: usize,
    /// Largest `λ_max(A(x_k) − μ(x_k) P(x_k))`.
    pub worst_vertex_lmi: f64,
    pub samples: usize,
    pub sample_psd_violations: usize,
    pub worst_sample_psd: f64,
    pub sample_decay_violations: usize,
    pub worst_sample_decay: f64,
    pub bound_mismatch: bool,
}

impl VerificationReport {
    pub fn is_clean(&self) -> bool {
        self.vertex_row_violations == 0
            && self.vertex_lmi_violations == 0
            && self.sample_psd_violations == 0
            && self.sample_decay_violations == 0
            && !self.bound_mismatch
    }

    pub fn violation_count(&self) -> usize {
        self.vertex_row_violations
            + self.vertex_lmi_violations
            + self.sample_psd_violations
            + self.sample_decay_violations
            + usize::from(self.bound_mismatch)
    }
}

enum Metric<'t> {
    Constant(SymMatrix),
    Cpa(CpaMatrixField<'t>),
}

impl Metric<'_> {
    /// `P(x)` and `A(x) = P Df + Dfᵀ P + P'(x)`.
    fn at(&self, model: &dyn SystemModel, x: &[f64]) -> Result<(SymMatrix, SymMatrix)> {
        let j = model.jacobian(x);
        match self {
            Metric::Constant(p) => Ok((p.clone(), p.lyapunov_sum(&j))),
            Metric::Cpa(f) => {
                let p = f.eval(x)?;
                let a = p.lyapunov_sum(&j).add(&f.orbital_derivative(x, model)?);
                Ok((p, a))
            }
        }
    }
}

/// Re-checks every vertex row and vertex LMI exactly and `samples` random
/// points of the domain, all with relative tolerance `tol`.
pub fn verify_certificate(
    cert: &EntropyCertificate,
    model: &dyn SystemModel,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<VerificationReport> {
    let tstar = cert.tstar()?;
    let t = cert.t()?;
    let n = tstar.dim();
    if model.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: model.dim(),
        });
    }
    if cert.v.len() != tstar.vertex_count() || cert.mu_table.values.len() != tstar.vertex_count() {
        return Err(Error::Mismatch(
            "certificate vectors do not match the triangulation".into(),
        ));
    }
    let metric = match &cert.metric.field {
        MetricField::Constant { p } => Metric::Constant(p.clone()),
        MetricField::Cpa { values } => {
            let t = t
                .as_ref()
                .ok_or_else(|| Error::Mismatch("CPA metric needs the grid of T".into()))?;
            Metric::Cpa(CpaMatrixField::new(t, values.clone())?)
        }
    };
    let err = match &cert.err_bound {
        ErrBound::Conservative => None,
        ErrBound::Custom { values } => Some(values.as_slice()),
    };
    let lp = assemble_lp(&tstar, model, &cert.mu_table, cert.m_tilde, err)?;
    let q_tol = tol * cert.q.abs().max(1.0);
    let mut report = VerificationReport {
        worst_vertex_row: f64::NEG_INFINITY,
        worst_vertex_lmi: f64::NEG_INFINITY,
        worst_sample_psd: f64::NEG_INFINITY,
        worst_sample_decay: f64::NEG_INFINITY,
        samples,
        ..Default::default()
    };

    let rows: Vec<f64> = (0..lp.elements.len())
        .into_par_iter()
        .flat_map_iter(|s| {
            let lp = &lp;
            let v = &cert.v;
            (0..=n).map(move |k| lp.vertex_row_value(s, k, v) - cert.q)
        })
        .collect();
    report.vertex_rows_checked = rows.len();
    report.vertex_row_violations = rows.iter().filter(|&&r| r > q_tol).count();
    report.worst_vertex_row = rows.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let in_metric_domain = |x: &[f64]| match &t {
        Some(t) if matches!(metric, Metric::Cpa(_)) => t.domain().contains(x, 1e-12),
        _ => true,
    };
    let lmi = |x: &[f64], mu: f64| -> Result<(f64, f64)> {
        let (p, a) = metric.at(model, x)?;
        let m = a.sub(&p.scaled(mu));
        Ok((psd_slack(&m), m.max_abs().max(1.0)))
    };
    let vertex_lmi: Vec<(f64, f64)> = (0..tstar.vertex_count())
        .into_par_iter()
        .filter(|&k| in_metric_domain(tstar.vertex(k)))
        .map(|k| lmi(tstar.vertex(k), cert.mu_table.values[k]))
        .collect::<Result<_>>()?;
    for (slack, scale) in vertex_lmi {
        report.worst_vertex_lmi = report.worst_vertex_lmi.max(slack);
        if slack > tol * scale {
            report.vertex_lmi_violations += 1;
        }
    }

    let domain = match (&metric, &t) {
        (Metric::Cpa(_), Some(t)) => t.domain(),
        _ => tstar.domain(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Vec<f64>> = (0..samples)
        .map(|_| {
            domain
                .lo()
                .iter()
                .zip(domain.hi())
                .map(|(l, h)| rng.gen_range(*l..=*h))
                .collect()
        })
        .collect();
    let mu_field = CpaScalarField::new(&tstar, cert.mu_table.values.clone())?;
    let v_field = CpaScalarField::new(&tstar, cert.v.clone())?;
    let sampled: Vec<(f64, f64, f64)> = points
        .par_iter()
        .map(|x| {
            let mu = mu_field.eval(x)?;
            let (slack, scale) = lmi(x, mu)?;
            let decay = v_field.orbital_derivative(x, model)? + cert.m_tilde as f64 * mu - cert.q;
            Ok((slack, scale, decay))
        })
        .collect::<Result<_>>()?;
    for (slack, scale, decay) in sampled {
        report.worst_sample_psd = report.worst_sample_psd.max(slack);
        report.worst_sample_decay = report.worst_sample_decay.max(decay);
        if slack > tol * scale {
            report.sample_psd_violations += 1;
        }
        if decay > q_tol {
            report.sample_decay_violations += 1;
        }
    }
    report.bound_mismatch =
        (bound_from_q(cert.q).max(0.0) - cert.bound).abs() > 1e-12 * cert.bound.abs().max(1.0);
    Ok(report)
}
