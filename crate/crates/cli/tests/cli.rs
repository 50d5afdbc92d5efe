use std::path::Path;
use std::process::Command;

use cpabound::lyapopt::mps::parse_mps;
use cpabound::metricopt::sdpa::read_sdpa;
use cpabound::{EntropyCertificate, ModelSpec};
use cpabound_cli::{
    cmd_analytic_bound, cmd_certify, cmd_export, cmd_table1, cmd_verify, to_csv, CliError,
    ExportKind, RunConfig, CSV_HEADER, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_OK, EXIT_VERIFICATION,
};

fn toy() -> RunConfig {
    RunConfig {
        model: ModelSpec::Linear {
            matrix: vec![vec![0.3, 1.0], vec![-1.0, -0.5]],
        },
        grid: vec![2, 2],
        grid_star: vec![2, 2],
        mu_max: 5.0,
        mu_tol: 0.05,
        samples: 2_000,
        ..RunConfig::default()
    }
}

fn write_config(dir: &Path, cfg: &RunConfig) -> std::path::PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cpabound"))
}

#[test]
fn default_config_round_trips_and_validates() {
    let cfg = RunConfig::default();
    cfg.validate().unwrap();
    let text = serde_json::to_string(&cfg).unwrap();
    assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), cfg);
    let partial: RunConfig = serde_json::from_str(r#"{"eps0": 0.2}"#).unwrap();
    assert_eq!(partial.eps0, 0.2);
    assert_eq!(partial.grid, vec![12, 6, 10]);
    assert!(serde_json::from_str::<RunConfig>(r#"{"unknown": 1}"#).is_err());
}

#[test]
fn lorenz_defaults_cover_the_box_with_a_layer_below() {
    let cfg = RunConfig::default();
    let t = cfg.grid_t().unwrap();
    assert_eq!(t.offsets, vec![-12, -6, 0]);
    let ts = cfg.grid_t_star(&[30, 14, 28]).unwrap();
    assert_eq!(ts.offsets, vec![-30, -14, -1]);
}

#[test]
fn invalid_configs_map_to_config_exit_code() {
    for cfg in [
        RunConfig { eps0: 0.0, ..toy() },
        RunConfig {
            grid: vec![2],
            ..toy()
        },
        RunConfig {
            grid_star: vec![0, 2],
            ..toy()
        },
        RunConfig {
            m_tilde: Some(0),
            ..toy()
        },
    ] {
        let err = cmd_certify(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_CONFIG, "{err}");
    }
}

#[test]
fn certify_verify_and_tamper() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cert.json");
    let cfg = RunConfig {
        out: Some(out.clone()),
        ..toy()
    };
    let result = cmd_certify(&cfg).unwrap();
    assert!(result.verification.is_clean());
    assert!(result.certificate.q <= result.certificate.mu_table.max() + 1e-9);
    assert_eq!(result.row.upper_bound, result.certificate.bound);

    let saved = EntropyCertificate::load(&out).unwrap();
    assert_eq!(saved, result.certificate);
    assert!(cmd_verify(&out, 2_000, 1e-6, 3).unwrap().is_clean());

    let mut tampered = saved.clone();
    tampered.q -= 1.0;
    tampered.bound = cpabound::bound_from_q(tampered.q).max(0.0);
    let bad = dir.path().join("bad.json");
    tampered.save(&bad).unwrap();
    let err = cmd_verify(&bad, 2_000, 1e-6, 3).unwrap_err();
    assert!(matches!(err, CliError::Verification { .. }));
    assert_eq!(err.exit_code(), EXIT_VERIFICATION);

    let missing = cmd_verify(&dir.path().join("missing.json"), 10, 1e-6, 3).unwrap_err();
    assert_ne!(missing.exit_code(), EXIT_OK);
}

#[test]
fn certificates_are_deterministic() {
    let a = cmd_certify(&toy()).unwrap().certificate.to_json().unwrap();
    let b = cmd_certify(&toy()).unwrap().certificate.to_json().unwrap();
    assert_eq!(a, b);
}

#[test]
fn infeasible_bisection_maps_to_infeasible_exit_code() {
    let cfg = RunConfig {
        mu_max: -10.0,
        ..toy()
    };
    let err = cmd_certify(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_INFEASIBLE, "{err}");
}

#[test]
fn table_rows_are_sorted_by_grid_size() {
    let cfg = RunConfig {
        table_grids: vec![vec![4, 4], vec![2, 2]],
        ..toy()
    };
    let rows = cmd_table1(&cfg).unwrap();
    assert_eq!((rows[0].n_x, rows[1].n_x), (2, 4));
    let csv = to_csv(&rows);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    assert_eq!(lines.count(), 2);
    assert!(rows.iter().all(|r| !r.improved && r.upper_bound >= 0.0));
}

#[test]
fn exports_write_parseable_files_with_manifests() {
    let dir = tempfile::tempdir().unwrap();
    for kind in [
        ExportKind::Sdp,
        ExportKind::SdpFull,
        ExportKind::Lp,
        ExportKind::SdpLyapunov,
    ] {
        let sub = dir.path().join(format!("{kind:?}"));
        let cfg = RunConfig {
            grid_star: vec![4, 4],
            m_tilde: Some(1),
            ..toy()
        };
        let m = cmd_export(&cfg, kind, &sub).unwrap();
        assert_eq!(m.variables.len(), m.variable_count);
        let file = sub.join(&m.file);
        let first = std::fs::read(&file).unwrap();
        match kind {
            ExportKind::Lp => {
                let lp = parse_mps(std::str::from_utf8(&first).unwrap()).unwrap();
                assert_eq!(lp.columns.len(), m.variable_count);
                assert_eq!(lp.rows.len(), m.constraint_count);
                assert_eq!(lp.columns, m.variables);
            }
            _ => {
                let sdp = read_sdpa(&file).unwrap();
                assert_eq!(sdp.variable_count(), m.variable_count);
                assert_eq!(sdp.blocks.len(), m.constraint_count);
            }
        }
        let manifest: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(sub.join("manifest.json")).unwrap())
                .unwrap();
        assert_eq!(manifest["variable_count"], m.variable_count);
        cmd_export(&cfg, kind, &sub).unwrap();
        assert_eq!(std::fs::read(&file).unwrap(), first);
    }
}

#[test]
fn lyapunov_sdp_export_requires_refinement() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        grid_star: vec![3, 3],
        m_tilde: Some(1),
        ..toy()
    };
    let err = cmd_export(&cfg, ExportKind::SdpLyapunov, dir.path()).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_CONFIG);
}

#[test]
fn export_mode_round_trips_through_a_solution_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        solver: cpabound_cli::SolverMode::Export,
        export_dir: Some(dir.path().to_path_buf()),
        m_tilde: Some(1),
        ..toy()
    };
    let err = cmd_certify(&cfg).unwrap_err();
    let CliError::NeedsExternalSolution(path) = err else {
        panic!("expected an export request, got {err}");
    };
    assert!(path.exists());

    let inproc = cmd_certify(&RunConfig {
        m_tilde: Some(1),
        ..toy()
    })
    .unwrap();
    let mut text = String::new();
    for (k, v) in inproc.certificate.v.iter().enumerate() {
        text.push_str(&format!("V{k} {v:e}\n"));
    }
    let sol = dir.path().join("solution.txt");
    std::fs::write(&sol, text).unwrap();
    let external = cmd_certify(&RunConfig {
        lp_solution: Some(sol),
        ..cfg
    })
    .unwrap();
    assert_eq!(external.certificate.v, inproc.certificate.v);
    assert_eq!(external.certificate.q, inproc.certificate.q);
}

#[test]
fn analytic_bound_command() {
    assert!((cmd_analytic_bound(&RunConfig::default()).unwrap() - 17.0638).abs() < 5e-4);
    assert_eq!(
        cmd_analytic_bound(&toy()).unwrap_err().exit_code(),
        EXIT_CONFIG
    );
}

#[test]
fn binary_reports_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &toy());
    let cert = dir.path().join("cert.json");
    let status = bin()
        .args(["certify", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&cert)
        .output()
        .unwrap();
    assert_eq!(
        status.status.code(),
        Some(EXIT_OK),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    let verify = bin().arg("verify").arg(&cert).output().unwrap();
    assert_eq!(verify.status.code(), Some(EXIT_OK));

    let bad = bin()
        .args(["certify", "--eps0", "-1", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_CONFIG));

    let analytic = bin().arg("analytic-bound").output().unwrap();
    assert_eq!(
        String::from_utf8_lossy(&analytic.stdout).trim(),
        "17.063798"
    );

    let table = bin()
        .args(["table1", "--grid-star", "3,3", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&table.stdout);
    assert!(stdout.starts_with(CSV_HEADER));
    assert!(stdout.lines().nth(1).unwrap().starts_with("3,3,0,"));
}
