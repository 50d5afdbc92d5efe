use cpabound::certificate::{ErrBound, MetricField, MetricRecord, SolverInfo, Tolerances};
use cpabound::lyapopt::{
    assemble_lp, lyapunov_operator, solve_lp, vertex_mu_simplified, LpOptions,
};
use cpabound::metricopt::{bisect_mu, FeasibilityOptions, FEASIBILITY_MARGIN};
use cpabound::symlin::lambda_max_gen;
use cpabound::sysmodel::{lorenz_dissipation_box, lorenz_scaled};
use cpabound::{
    bound_from_q, verify_certificate, AxisBox, EntropyCertificate, GridSpec, LorenzParams,
    ModelSpec, Subdivision, SystemModel, Triangulation,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn toy_spec() -> ModelSpec {
    ModelSpec::Linear {
        matrix: vec![vec![0.3, 1.0], vec![-1.0, -0.5]],
    }
}

fn toy_certificate() -> EntropyCertificate {
    let spec = toy_spec();
    let model = spec.build().unwrap();
    let domain = AxisBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
    let grid = GridSpec::covering(&domain, vec![2, 2]).unwrap();
    let t = Triangulation::build(&domain, &grid, Subdivision::Kuhn).unwrap();
    let res = bisect_mu(
        &t,
        model.as_ref(),
        0.1,
        5.0,
        0.05,
        FeasibilityOptions::for_eps0(0.1),
    )
    .unwrap();
    let grid_star = GridSpec::covering(&domain, vec![3, 3]).unwrap();
    let tstar = Triangulation::build(&domain, &grid_star, Subdivision::Kuhn).unwrap();
    let table = vertex_mu_simplified(&tstar, model.as_ref(), &res.metric.p, res.metric.c).unwrap();
    let lp = assemble_lp(&tstar, model.as_ref(), &table, 1, None).unwrap();
    let sol = solve_lp(&lp, &LpOptions::default()).unwrap();
    EntropyCertificate {
        model: spec,
        domain,
        subdivision: Subdivision::Kuhn,
        grid: Some(grid),
        grid_star,
        metric: MetricRecord {
            field: MetricField::Constant {
                p: res.metric.p.clone(),
            },
            c: res.metric.c,
            mu: res.mu_star,
            eps0: 0.1,
        },
        mu_table: table,
        v: sol.v.clone(),
        m_tilde: 1,
        q: sol.q,
        bound: bound_from_q(sol.q).max(0.0),
        err_bound: ErrBound::Conservative,
        tolerances: Tolerances {
            feasibility: FEASIBILITY_MARGIN,
            verification: 1e-6,
        },
        solver: SolverInfo {
            metric_iterations: res.metric.iterations,
            bisection_probes: res.probes.len(),
            lp_method: sol.method,
            lp_iterations: sol.iterations,
            lp_lower_bound: sol.lower_bound,
        },
    }
}

#[test]
fn clean_certificate_verifies_and_round_trips() {
    let cert = toy_certificate();
    let model = cert.model.build().unwrap();
    let report = verify_certificate(&cert, model.as_ref(), 10_000, 1e-6, 5).unwrap();
    assert!(report.is_clean(), "{report:?}");
    assert_eq!(
        report.vertex_rows_checked,
        cert.tstar().unwrap().simplex_count() * 3
    );

    let text = cert.to_json().unwrap();
    let back = EntropyCertificate::from_json(&text).unwrap();
    assert_eq!(back, cert);
    assert_eq!(back.to_json().unwrap(), text);
    assert_eq!(toy_certificate().to_json().unwrap(), text);
}

#[test]
fn tampered_q_is_rejected() {
    let mut cert = toy_certificate();
    let model = cert.model.build().unwrap();
    cert.q -= 1.0;
    cert.bound = bound_from_q(cert.q).max(0.0);
    let report = verify_certificate(&cert, model.as_ref(), 1_000, 1e-6, 5).unwrap();
    assert!(report.vertex_row_violations > 0);
    assert!(report.sample_decay_violations > 0);
}

#[test]
fn tampered_bound_is_rejected() {
    let mut cert = toy_certificate();
    let model = cert.model.build().unwrap();
    cert.bound *= 0.5;
    let report = verify_certificate(&cert, model.as_ref(), 100, 1e-6, 5).unwrap();
    assert!(report.bound_mismatch);
    assert!(!report.is_clean());
}

#[test]
fn mu_below_lambda_max_is_rejected() {
    let mut cert = toy_certificate();
    let model = cert.model.build().unwrap();
    let k = (0..cert.mu_table.values.len())
        .max_by(|&a, &b| cert.mu_table.lambda_max[a].total_cmp(&cert.mu_table.lambda_max[b]))
        .unwrap();
    cert.mu_table.values[k] = cert.mu_table.lambda_max[k] - 0.5;
    let report = verify_certificate(&cert, model.as_ref(), 100, 1e-6, 5).unwrap();
    assert!(report.vertex_lmi_violations >= 1);
}

#[test]
fn mismatched_vectors_are_an_error() {
    let mut cert = toy_certificate();
    let model = cert.model.build().unwrap();
    cert.v.pop();
    assert!(verify_certificate(&cert, model.as_ref(), 10, 1e-6, 5).is_err());
}

#[test]
fn sampled_eigenvalue_bound_holds_for_lorenz_metric() {
    let params = LorenzParams::default();
    let bx = lorenz_dissipation_box(&params).unwrap();
    let model = lorenz_scaled(&params).unwrap();
    let t = Triangulation::build(
        &bx,
        &GridSpec::covering(&bx, vec![12, 6, 10]).unwrap(),
        Subdivision::Kuhn,
    )
    .unwrap();
    let res = bisect_mu(
        &t,
        &model,
        0.1,
        40.0,
        0.25,
        FeasibilityOptions::for_eps0(0.1),
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..10_000 {
        let x: Vec<f64> = bx
            .lo()
            .iter()
            .zip(bx.hi())
            .map(|(l, h)| rng.gen_range(*l..=*h))
            .collect();
        let a = lyapunov_operator(&model, &res.metric.p, &x);
        worst = worst.max(lambda_max_gen(&a, &res.metric.p).unwrap());
    }
    assert!(worst <= res.mu_star + 1e-6, "{worst} > {}", res.mu_star);
    assert!(model.dim() == 3 && res.mu_star <= 27.5);
}
