//! Pipeline orchestration behind the `cpabound` binary: configuration,
//! certification runs, table reproduction, verification and export.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use cpabound::certificate::{ErrBound, MetricField, MetricRecord, SolverInfo, Tolerances};
use cpabound::entropy::{
    analytic_lorenz_bound, empirical_entropy_estimate, orbit_samples, EntropyReport,
    PipelineVariant, ProblemSizes,
};
use cpabound::geometry::check_refinement;
use cpabound::lyapopt::{
    assemble_lp, assemble_op2_full_sdp, estimate_m_tilde, mps, solve_lp, vertex_mu_simplified,
    LpMethod, LpOptions, LpProblem,
};
use cpabound::metricopt::{
    assemble_op1_const, assemble_op1_full, bisect_mu, sdpa, FeasibilityOptions, Op1Options,
    FEASIBILITY_MARGIN,
};
use cpabound::symlin::PdPencil;
use cpabound::sysmodel::lorenz_dissipation_box;
use cpabound::{
    bound_from_q, verify_certificate, AxisBox, EntropyCertificate, GridSpec, LorenzParams,
    ModelSpec, Subdivision, SymMatrix, SystemModel, Triangulation, VerificationReport,
};
use serde::{Deserialize, Serialize};

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_SOLVER_CAP: i32 = 4;
pub const EXIT_VERIFICATION: i32 = 5;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] cpabound::Error),
    #[error("verification failed with {count} violations")]
    Verification {
        count: usize,
        report: Box<VerificationReport>,
    },
    #[error("LP solution required: solver mode is export, MPS written to {0}")]
    NeedsExternalSolution(PathBuf),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use cpabound::Error as E;
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Verification { .. } => EXIT_VERIFICATION,
            CliError::Core(e) => match e {
                E::Infeasible { .. } | E::LpInfeasible | E::LpUnbounded => EXIT_INFEASIBLE,
                E::Inconclusive { .. } | E::LpIterationCap(_) | E::NoConvergence => EXIT_SOLVER_CAP,
                E::InvalidBox(_)
                | E::InvalidGrid(_)
                | E::InvalidParameter(_)
                | E::NotRefining(_)
                | E::DimensionMismatch { .. } => EXIT_CONFIG,
                _ => EXIT_OTHER,
            },
            _ => EXIT_OTHER,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum ErrBoundConfig {
    #[default]
    Conservative,
    /// JSON array with one value per simplex of `T*`.
    File { path: PathBuf },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMode {
    #[default]
    InProcess,
    /// Write the LP as MPS and read `V` from `lp_solution`.
    Export,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExportKind {
    /// Constant-metric SDP in SDPA format.
    Sdp,
    /// CPA-metric SDP in SDPA format.
    SdpFull,
    /// Lyapunov LP in MPS format.
    Lp,
    /// Monolithic second problem in SDPA format.
    SdpLyapunov,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    /// Domain box; defaults to the dissipation box for Lorenz and `[-1, 1]ⁿ` otherwise.
    pub domain: Option<AxisBox>,
    pub subdivision: Subdivision,
    /// Cells per axis on the positive side for `T`.
    pub grid: Vec<usize>,
    /// Cells per axis on the positive side for `T*`.
    pub grid_star: Vec<usize>,
    /// Index offsets for `T*`; defaults to covering the box, plus one layer
    /// below `z = 0` for Lorenz.
    pub grid_star_offsets: Option<Vec<i64>>,
    pub eps0: f64,
    pub mu_max: f64,
    pub mu_tol: f64,
    /// Skip the metric search and use this matrix.
    pub metric: Option<SymMatrix>,
    /// `None` estimates `m̃` from eigenvalue counts.
    pub m_tilde: Option<usize>,
    pub err_bound: ErrBoundConfig,
    pub solver: SolverMode,
    pub lp_method: LpMethod,
    /// External LP solution (`name value` pairs) used in export mode.
    pub lp_solution: Option<PathBuf>,
    pub samples: usize,
    pub verify_tol: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub export_dir: Option<PathBuf>,
    /// `μ` used when exporting the metric problem.
    pub export_mu: f64,
    /// Grids of `T*` for the table command; empty means `grid_star` only.
    pub table_grids: Vec<Vec<usize>>,
    pub empirical_starts: usize,
    pub empirical_time: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelSpec::Lorenz(LorenzParams::default()),
            domain: None,
            subdivision: Subdivision::Kuhn,
            grid: vec![12, 6, 10],
            grid_star: vec![12, 6, 10],
            grid_star_offsets: None,
            eps0: 0.1,
            mu_max: 40.0,
            mu_tol: 0.25,
            metric: None,
            m_tilde: None,
            err_bound: ErrBoundConfig::Conservative,
            solver: SolverMode::InProcess,
            lp_method: LpMethod::Auto,
            lp_solution: None,
            samples: 10_000,
            verify_tol: 1e-6,
            seed: 1,
            out: None,
            export_dir: None,
            export_mu: 27.0,
            table_grids: Vec::new(),
            empirical_starts: 50,
            empirical_time: 20.0,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> CliResult<()> {
        let n = self.model.dim();
        let bad = |m: String| Err(CliError::Config(m));
        if !(self.eps0 > 0.0) {
            return bad(format!("eps0 must be positive, got {}", self.eps0));
        }
        if !(self.mu_tol > 0.0) {
            return bad(format!("mu_tol must be positive, got {}", self.mu_tol));
        }
        if !self.mu_max.is_finite() {
            return bad("mu_max must be finite".into());
        }
        for (name, g) in [("grid", &self.grid), ("grid_star", &self.grid_star)] {
            if g.len() != n || g.contains(&0) {
                return bad(format!("{name} needs {n} positive counts, got {g:?}"));
            }
        }
        if let Some(o) = &self.grid_star_offsets {
            if o.len() != n {
                return bad(format!("grid_star_offsets needs {n} entries"));
            }
        }
        if let Some(d) = &self.domain {
            if d.dim() != n {
                return bad(format!(
                    "domain has dimension {} but the model has {n}",
                    d.dim()
                ));
            }
        }
        if let Some(p) = &self.metric {
            if p.dim() != n {
                return bad(format!(
                    "metric has dimension {} but the model has {n}",
                    p.dim()
                ));
            }
        }
        if self.m_tilde == Some(0) {
            return bad("m_tilde must be at least 1".into());
        }
        if !(self.verify_tol > 0.0) {
            return bad("verify_tol must be positive".into());
        }
        for g in &self.table_grids {
            if g.len() != n || g.contains(&0) {
                return bad(format!("table grid {g:?} needs {n} positive counts"));
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> CliResult<AxisBox> {
        if let Some(d) = &self.domain {
            return Ok(d.clone());
        }
        match &self.model {
            ModelSpec::Lorenz(p) => Ok(lorenz_dissipation_box(p)?),
            m => {
                let n = m.dim();
                Ok(AxisBox::new(vec![-1.0; n], vec![1.0; n])?)
            }
        }
    }

    pub fn grid_t(&self) -> CliResult<GridSpec> {
        Ok(GridSpec::covering(&self.domain()?, self.grid.clone())?)
    }

    pub fn grid_t_star(&self, counts: &[usize]) -> CliResult<GridSpec> {
        if let Some(o) = &self.grid_star_offsets {
            return Ok(GridSpec::new(counts.to_vec(), o.clone())?);
        }
        let mut g = GridSpec::covering(&self.domain()?, counts.to_vec())?;
        if matches!(self.model, ModelSpec::Lorenz(_)) {
            g.offsets[2] -= 1;
            g = GridSpec::new(g.counts, g.offsets)?;
        }
        Ok(g)
    }
}

/// One row of the results table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub n_x: usize,
    pub n_y: usize,
    pub n_z: usize,
    pub time_s: f64,
    pub improved: bool,
    pub q: f64,
    pub upper_bound: f64,
}

pub const CSV_HEADER: &str = "N_x,N_y,N_z,time_s,improved,Q,upper_bound";

impl ResultRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{:.3},{},{:.6},{:.6}",
            self.n_x,
            self.n_y,
            self.n_z,
            self.time_s,
            if self.improved { "Yes" } else { "No" },
            self.q,
            self.upper_bound
        )
    }
}

pub fn to_csv(rows: &[ResultRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv_line());
        s.push('\n');
    }
    s
}

#[derive(Clone, Debug)]
pub struct MetricStage {
    pub p: SymMatrix,
    pub c: f64,
    pub mu: f64,
    pub iterations: usize,
    pub probes: usize,
}

/// Runs the constant-metric bisection on `T`, or adopts the configured matrix.
pub fn metric_stage(
    cfg: &RunConfig,
    t: &Triangulation,
    model: &dyn SystemModel,
) -> CliResult<MetricStage> {
    if let Some(p) = &cfg.metric {
        let pencil = PdPencil::new(p)?;
        let table = vertex_mu_simplified(t, model, p, pencil.max_eig())?;
        return Ok(MetricStage {
            p: p.clone(),
            c: pencil.max_eig(),
            mu: table.max(),
            iterations: 0,
            probes: 0,
        });
    }
    let res = bisect_mu(
        t,
        model,
        cfg.eps0,
        cfg.mu_max,
        cfg.mu_tol,
        FeasibilityOptions::for_eps0(cfg.eps0),
    )?;
    Ok(MetricStage {
        p: res.metric.p,
        c: res.metric.c,
        mu: res.mu_star,
        iterations: res.metric.iterations,
        probes: res.probes.len(),
    })
}

fn err_values(cfg: &RunConfig, tstar: &Triangulation) -> CliResult<Option<Vec<f64>>> {
    match &cfg.err_bound {
        ErrBoundConfig::Conservative => Ok(None),
        ErrBoundConfig::File { path } => {
            let v: Vec<f64> = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            if v.len() != tstar.simplex_count() {
                return Err(CliError::Config(format!(
                    "error bound file has {} values for {} simplices",
                    v.len(),
                    tstar.simplex_count()
                )));
            }
            Ok(Some(v))
        }
    }
}

#[derive(Clone, Debug)]
pub struct CertifyOutcome {
    pub certificate: EntropyCertificate,
    pub row: ResultRow,
    pub report: EntropyReport,
    pub verification: VerificationReport,
}

/// Constant-metric search on `T`, vertex table on `T*`, LP, and verification.
pub fn cmd_certify(cfg: &RunConfig) -> CliResult<CertifyOutcome> {
    certify_grid(cfg, &cfg.grid_star)
}

fn certify_grid(cfg: &RunConfig, star_counts: &[usize]) -> CliResult<CertifyOutcome> {
    cfg.validate()?;
    let start = Instant::now();
    let mut timings = Vec::new();
    let model = cfg.model.build()?;
    let domain = cfg.domain()?;
    let grid = cfg.grid_t()?;
    let t = Triangulation::build(&domain, &grid, cfg.subdivision)?;
    let metric = metric_stage(cfg, &t, model.as_ref())?;
    timings.push(("metric".to_string(), start.elapsed().as_secs_f64()));

    let lap = Instant::now();
    let grid_star = cfg.grid_t_star(star_counts)?;
    let tstar = Triangulation::build(&domain, &grid_star, cfg.subdivision)?;
    let m_tilde = match cfg.m_tilde {
        Some(m) => m,
        None => estimate_m_tilde(
            &tstar,
            model.as_ref(),
            &metric.p,
            1e-9,
            cfg.samples,
            cfg.seed,
        )?
        .m_tilde
        .max(1),
    };
    let table = vertex_mu_simplified(&tstar, model.as_ref(), &metric.p, metric.c)?;
    let err = err_values(cfg, &tstar)?;
    let lp = assemble_lp(&tstar, model.as_ref(), &table, m_tilde, err.as_deref())?;
    timings.push(("table".to_string(), lap.elapsed().as_secs_f64()));

    let lap = Instant::now();
    let (v, method, iterations, lower_bound) = match cfg.solver {
        SolverMode::InProcess => {
            let sol = solve_lp(
                &lp,
                &LpOptions {
                    method: cfg.lp_method,
                    ..Default::default()
                },
            )?;
            (sol.v, sol.method, sol.iterations, sol.lower_bound)
        }
        SolverMode::Export => match &cfg.lp_solution {
            Some(path) => (mps::read_solution(&lp, path)?, cfg.lp_method, 0, None),
            None => {
                let dir = cfg.export_dir.clone().unwrap_or_else(|| PathBuf::from("."));
                std::fs::create_dir_all(&dir)?;
                let path = dir.join(lp_file_name(star_counts));
                mps::export_mps(&lp, "CPALYAP", &path)?;
                return Err(CliError::NeedsExternalSolution(path));
            }
        },
    };
    let q = lp.q_for(&v);
    timings.push(("lp".to_string(), lap.elapsed().as_secs_f64()));

    let certificate = EntropyCertificate {
        model: cfg.model.clone(),
        domain,
        subdivision: cfg.subdivision,
        grid: Some(grid),
        grid_star,
        metric: MetricRecord {
            field: MetricField::Constant {
                p: metric.p.clone(),
            },
            c: metric.c,
            mu: metric.mu,
            eps0: cfg.eps0,
        },
        mu_table: table,
        v,
        m_tilde,
        q,
        bound: bound_from_q(q).max(0.0),
        err_bound: match err {
            None => ErrBound::Conservative,
            Some(values) => ErrBound::Custom { values },
        },
        tolerances: Tolerances {
            feasibility: FEASIBILITY_MARGIN,
            verification: cfg.verify_tol,
        },
        solver: SolverInfo {
            metric_iterations: metric.iterations,
            bisection_probes: metric.probes,
            lp_method: method,
            lp_iterations: iterations,
            lp_lower_bound: lower_bound,
        },
    };

    let lap = Instant::now();
    let verification = verify_certificate(
        &certificate,
        model.as_ref(),
        cfg.samples,
        cfg.verify_tol,
        cfg.seed,
    )?;
    timings.push(("verify".to_string(), lap.elapsed().as_secs_f64()));
    if !verification.is_clean() {
        return Err(CliError::Verification {
            count: verification.violation_count(),
            report: Box::new(verification),
        });
    }
    if let Some(out) = &cfg.out {
        certificate.save(out)?;
    }
    let mut report = EntropyReport::new(q, m_tilde, PipelineVariant::LyapunovLp);
    report.timings = timings;
    report.sizes = ProblemSizes {
        vertices: tstar.vertex_count(),
        simplices: tstar.simplex_count(),
        variables: lp.variable_count(),
        constraints: lp.row_count(),
    };
    let dims = |i: usize| star_counts.get(i).copied().unwrap_or(0);
    let row = ResultRow {
        n_x: dims(0),
        n_y: dims(1),
        n_z: dims(2),
        time_s: start.elapsed().as_secs_f64(),
        improved: matches!(cfg.err_bound, ErrBoundConfig::File { .. }),
        q,
        upper_bound: certificate.bound,
    };
    Ok(CertifyOutcome {
        certificate,
        row,
        report,
        verification,
    })
}

fn lp_file_name(counts: &[usize]) -> String {
    let dims: Vec<String> = counts.iter().map(|c| c.to_string()).collect();
    format!("lyapunov_{}.mps", dims.join("x"))
}

/// Certifies every configured `T*` grid; rows are sorted by grid size.
pub fn cmd_table1(cfg: &RunConfig) -> CliResult<Vec<ResultRow>> {
    cfg.validate()?;
    let mut grids = if cfg.table_grids.is_empty() {
        vec![cfg.grid_star.clone()]
    } else {
        cfg.table_grids.clone()
    };
    grids.sort_by_key(|g| (g.iter().product::<usize>(), g.clone()));
    grids
        .iter()
        .map(|g| certify_grid(cfg, g).map(|o| o.row))
        .collect()
}

pub fn cmd_verify(
    path: &Path,
    samples: usize,
    tol: f64,
    seed: u64,
) -> CliResult<VerificationReport> {
    let cert = EntropyCertificate::load(path)?;
    let model = cert.model.build()?;
    let report = verify_certificate(&cert, model.as_ref(), samples, tol, seed)?;
    if report.is_clean() {
        Ok(report)
    } else {
        Err(CliError::Verification {
            count: report.violation_count(),
            report: Box::new(report),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExportManifest {
    pub kind: ExportKind,
    pub file: String,
    pub model: ModelSpec,
    pub domain: AxisBox,
    pub grid: GridSpec,
    pub grid_star: Option<GridSpec>,
    pub mu: Option<f64>,
    pub eps0: f64,
    pub m_tilde: Option<usize>,
    pub variable_count: usize,
    pub constraint_count: usize,
    pub variables: Vec<String>,
}

/// Writes the requested problem and a JSON manifest into `dir`.
pub fn cmd_export(cfg: &RunConfig, kind: ExportKind, dir: &Path) -> CliResult<ExportManifest> {
    cfg.validate()?;
    std::fs::create_dir_all(dir)?;
    let model = cfg.model.build()?;
    let domain = cfg.domain()?;
    let grid = cfg.grid_t()?;
    let t = Triangulation::build(&domain, &grid, cfg.subdivision)?;
    let (file, manifest) = match kind {
        ExportKind::Sdp | ExportKind::SdpFull => {
            let prob = match kind {
                ExportKind::Sdp => assemble_op1_const(&t, model.as_ref(), cfg.export_mu, cfg.eps0)?,
                _ => assemble_op1_full(
                    &t,
                    model.as_ref(),
                    cfg.export_mu,
                    cfg.eps0,
                    Op1Options::default(),
                )?,
            };
            let file = if kind == ExportKind::Sdp {
                "metric_const.dat-s"
            } else {
                "metric_full.dat-s"
            };
            sdpa::export_sdpa(&prob, &dir.join(file))?;
            let manifest = ExportManifest {
                kind,
                file: file.to_string(),
                model: cfg.model.clone(),
                domain,
                grid,
                grid_star: None,
                mu: Some(cfg.export_mu),
                eps0: cfg.eps0,
                m_tilde: None,
                variable_count: prob.variable_count(),
                constraint_count: prob.block_count(),
                variables: prob.variables.iter().map(|v| v.name.clone()).collect(),
            };
            (file.to_string(), manifest)
        }
        ExportKind::Lp => {
            let metric = metric_stage(cfg, &t, model.as_ref())?;
            let grid_star = cfg.grid_t_star(&cfg.grid_star)?;
            let tstar = Triangulation::build(&domain, &grid_star, cfg.subdivision)?;
            let m_tilde = resolve_m_tilde(cfg, &tstar, model.as_ref(), &metric.p)?;
            let table = vertex_mu_simplified(&tstar, model.as_ref(), &metric.p, metric.c)?;
            let err = err_values(cfg, &tstar)?;
            let lp = assemble_lp(&tstar, model.as_ref(), &table, m_tilde, err.as_deref())?;
            let file = lp_file_name(&cfg.grid_star);
            mps::export_mps(&lp, "CPALYAP", &dir.join(&file))?;
            let manifest =
                lp_manifest(cfg, &lp, &file, domain, grid, grid_star, metric.mu, m_tilde);
            (file, manifest)
        }
        ExportKind::SdpLyapunov => {
            let metric = metric_stage(cfg, &t, model.as_ref())?;
            let grid_star = cfg.grid_t_star(&cfg.grid_star)?;
            let tstar = Triangulation::build(&domain, &grid_star, cfg.subdivision)?;
            check_refinement(&t, &tstar)?;
            let m_tilde = resolve_m_tilde(cfg, &tstar, model.as_ref(), &metric.p)?;
            let field = cpabound::cpa::CpaMatrixField::constant(&t, &metric.p)?;
            let prob = assemble_op2_full_sdp(&t, &tstar, model.as_ref(), &field, m_tilde)?;
            let file = "lyapunov_full.dat-s".to_string();
            prob.export_sdpa(&dir.join(&file))?;
            let manifest = ExportManifest {
                kind,
                file: file.clone(),
                model: cfg.model.clone(),
                domain,
                grid,
                grid_star: Some(grid_star),
                mu: Some(metric.mu),
                eps0: cfg.eps0,
                m_tilde: Some(m_tilde),
                variable_count: prob.variable_count(),
                constraint_count: prob.blocks.len(),
                variables: prob.variables.iter().map(|v| v.name()).collect(),
            };
            (file, manifest)
        }
    };
    let _ = file;
    std::fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(manifest)
}

fn resolve_m_tilde(
    cfg: &RunConfig,
    tstar: &Triangulation,
    model: &dyn SystemModel,
    p: &SymMatrix,
) -> CliResult<usize> {
    Ok(match cfg.m_tilde {
        Some(m) => m,
        None => estimate_m_tilde(tstar, model, p, 1e-9, cfg.samples, cfg.seed)?
            .m_tilde
            .max(1),
    })
}

#[allow(clippy::too_many_arguments)]
fn lp_manifest(
    cfg: &RunConfig,
    lp: &LpProblem,
    file: &str,
    domain: AxisBox,
    grid: GridSpec,
    grid_star: GridSpec,
    mu: f64,
    m_tilde: usize,
) -> ExportManifest {
    ExportManifest {
        kind: ExportKind::Lp,
        file: file.to_string(),
        model: cfg.model.clone(),
        domain,
        grid,
        grid_star: Some(grid_star),
        mu: Some(mu),
        eps0: cfg.eps0,
        m_tilde: Some(m_tilde),
        variable_count: lp.variable_count(),
        constraint_count: lp.row_count(),
        variables: (0..lp.variable_count())
            .map(|j| lp.variable_name(j))
            .collect(),
    }
}

pub fn cmd_analytic_bound(cfg: &RunConfig) -> CliResult<f64> {
    match &cfg.model {
        ModelSpec::Lorenz(p) => Ok(analytic_lorenz_bound(p.sigma, p.r)?),
        _ => Err(CliError::Config(
            "the analytic bound is defined for the Lorenz model only".into(),
        )),
    }
}

/// Largest empirical expansion rate over `empirical_starts` points of one orbit.
pub fn cmd_empirical(cfg: &RunConfig) -> CliResult<f64> {
    cfg.validate()?;
    let model = cfg.model.build()?;
    let domain = cfg.domain()?;
    let x0: Vec<f64> = match &cfg.model {
        ModelSpec::Lorenz(p) => (0..3).map(|a| 1.0 / p.scale[a]).collect(),
        _ => domain
            .lo()
            .iter()
            .zip(domain.hi())
            .map(|(l, h)| 0.5 * (l + h) + 0.1 * (h - l))
            .collect(),
    };
    let dt = 1e-3;
    let starts = orbit_samples(model.as_ref(), &x0, 20.0, cfg.empirical_starts, 1.0, dt)?;
    let steps = (cfg.empirical_time / dt).ceil() as usize;
    Ok(empirical_entropy_estimate(
        model.as_ref(),
        &starts,
        cfg.empirical_time,
        steps,
    )?)
}

/// Human-readable summary of a verification report.
pub fn describe_verification(r: &VerificationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "vertex rows: {} checked, {} violations, worst {:e}",
        r.vertex_rows_checked, r.vertex_row_violations, r.worst_vertex_row
    );
    let _ = writeln!(
        s,
        "vertex LMIs: {} violations, worst {:e}",
        r.vertex_lmi_violations, r.worst_vertex_lmi
    );
    let _ = writeln!(
        s,
        "samples: {}, PSD violations {} (worst {:e}), decay violations {} (worst {:e})",
        r.samples,
        r.sample_psd_violations,
        r.worst_sample_psd,
        r.sample_decay_violations,
        r.worst_sample_decay
    );
    if r.bound_mismatch {
        let _ = writeln!(s, "stored bound does not match Q");
    }
    s
}
