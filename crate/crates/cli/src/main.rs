use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cpabound_cli::{
    cmd_analytic_bound, cmd_certify, cmd_empirical, cmd_export, cmd_table1, cmd_verify,
    describe_verification, to_csv, CliError, CliResult, ExportKind, RunConfig, EXIT_OK,
};

#[derive(Parser)]
#[command(
    name = "cpabound",
    version,
    about = "Rigorous entropy upper bounds for smooth flows"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Overrides {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Cells per axis of T, comma separated.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<usize>>,
    /// Cells per axis of T*, comma separated.
    #[arg(long, value_delimiter = ',')]
    grid_star: Option<Vec<usize>>,
    /// Upper end of the bisection interval for mu.
    #[arg(long)]
    mu_max: Option<f64>,
    /// Bisection tolerance on mu.
    #[arg(long)]
    mu_tol: Option<f64>,
    /// Lower eigenvalue bound of the metric.
    #[arg(long)]
    eps0: Option<f64>,
    /// Random sample points used in verification.
    #[arg(long)]
    samples: Option<usize>,
    /// Seed of the verification sampler.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for exported problems.
    #[arg(long)]
    export_dir: Option<PathBuf>,
    /// Output file for the certificate or table.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Overrides {
    fn config(&self) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(g) = &self.grid {
            cfg.grid = g.clone();
        }
        if let Some(g) = &self.grid_star {
            cfg.grid_star = g.clone();
        }
        if let Some(v) = self.mu_max {
            cfg.mu_max = v;
        }
        if let Some(v) = self.mu_tol {
            cfg.mu_tol = v;
        }
        if let Some(v) = self.eps0 {
            cfg.eps0 = v;
        }
        if let Some(v) = self.samples {
            cfg.samples = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.export_dir {
            cfg.export_dir = Some(v.clone());
        }
        if let Some(v) = &self.out {
            cfg.out = Some(v.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Sdp,
    SdpFull,
    Lp,
    SdpLyapunov,
}

impl From<Kind> for ExportKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Sdp => ExportKind::Sdp,
            Kind::SdpFull => ExportKind::SdpFull,
            Kind::Lp => ExportKind::Lp,
            Kind::SdpLyapunov => ExportKind::SdpLyapunov,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute, verify and optionally save an entropy certificate.
    Certify(Overrides),
    /// Certify each configured T* grid and print a CSV table.
    Table1(Overrides),
    /// Re-verify a saved certificate.
    Verify {
        certificate: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Write an optimization problem for an external solver.
    Export {
        #[arg(long, value_enum)]
        kind: Kind,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Print the closed-form Lorenz bound.
    AnalyticBound(Overrides),
    /// Print the empirical expansion-rate estimate along an orbit.
    Empirical(Overrides),
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Certify(o) => {
            let cfg = o.config()?;
            let out = cmd_certify(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&out.report)?);
            print!("{}", describe_verification(&out.verification));
        }
        Command::Table1(o) => {
            let cfg = o.config()?;
            let csv = to_csv(&cmd_table1(&cfg)?);
            match &cfg.out {
                Some(p) => std::fs::write(p, &csv)?,
                None => print!("{csv}"),
            }
        }
        Command::Verify {
            certificate,
            samples,
            tol,
            seed,
        } => {
            let report = cmd_verify(&certificate, samples, tol, seed)?;
            print!("{}", describe_verification(&report));
        }
        Command::Export { kind, overrides } => {
            let cfg = overrides.config()?;
            let dir = cfg.export_dir.clone().unwrap_or_else(|| PathBuf::from("."));
            let m = cmd_export(&cfg, kind.into(), &dir)?;
            println!(
                "{}: {} variables, {} constraints",
                dir.join(&m.file).display(),
                m.variable_count,
                m.constraint_count
            );
        }
        Command::AnalyticBound(o) => println!("{:.6}", cmd_analytic_bound(&o.config()?)?),
        Command::Empirical(o) => println!("{:.6}", cmd_empirical(&o.config()?)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::from(EXIT_OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Verification { report, .. } = &e {
                eprint!("{}", describe_verification(report));
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
