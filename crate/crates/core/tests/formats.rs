use cpabound::cpa::CpaMatrixField;
use cpabound::lyapopt::mps::{parse_mps, parse_solution, write_mps};
use cpabound::lyapopt::{assemble_lp, assemble_op2_full_sdp, vertex_mu_simplified};
use cpabound::metricopt::sdpa::{export_sdpa, parse_sdpa, read_sdpa, to_sdpa_string, SdpaData};
use cpabound::metricopt::{assemble_op1_const, assemble_op1_full, Op1Options};
use cpabound::sysmodel::{linear_model, lorenz_dissipation_box, lorenz_scaled};
use cpabound::{AxisBox, GridSpec, LorenzParams, Mat, Subdivision, SymMatrix, Triangulation};

fn square(counts: Vec<usize>) -> Triangulation {
    let bx = AxisBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
    Triangulation::build(
        &bx,
        &GridSpec::covering(&bx, counts).unwrap(),
        Subdivision::Kuhn,
    )
    .unwrap()
}

#[test]
fn mps_round_trip_reproduces_rows() {
    let t = square(vec![2, 2]);
    let model = linear_model(Mat::from_rows(&[vec![0.3, 1.0], vec![-1.0, -0.5]]).unwrap());
    let table = vertex_mu_simplified(&t, &model, &SymMatrix::identity(2), 1.0).unwrap();
    let lp = assemble_lp(&t, &model, &table, 1, None).unwrap();
    let mut buf = Vec::new();
    write_mps(&lp, "TOY", &mut buf).unwrap();
    let model_back = parse_mps(std::str::from_utf8(&buf).unwrap()).unwrap();

    let rows = lp.rows();
    assert_eq!(model_back.rows.len(), rows.len());
    assert_eq!(model_back.columns.len(), lp.variable_count());
    let q = lp.q_index();
    for (j, name) in model_back.columns.iter().enumerate() {
        assert_eq!(name, &lp.variable_name(j));
        assert_eq!(model_back.objective[j], if j == q { 1.0 } else { 0.0 });
        assert_eq!(model_back.free[j], j < lp.vertex_count || j == q);
    }
    let mut dense = vec![vec![0.0; lp.variable_count()]; rows.len()];
    for (r, row) in rows.iter().enumerate() {
        for &(j, v) in &row.coeffs {
            dense[r][j] += v;
        }
    }
    let mut back = vec![vec![0.0; lp.variable_count()]; rows.len()];
    for &(r, j, v) in &model_back.entries {
        back[r][j] += v;
    }
    for r in 0..rows.len() {
        for j in 0..lp.variable_count() {
            assert!((dense[r][j] - back[r][j]).abs() <= 5e-8 * dense[r][j].abs().max(1e-300));
        }
        assert!((rows[r].rhs - model_back.rhs[r]).abs() <= 5e-8 * rows[r].rhs.abs());
    }

    let mut again = Vec::new();
    write_mps(&lp, "TOY", &mut again).unwrap();
    assert_eq!(buf, again);
}

#[test]
fn solution_file_is_parsed_by_name() {
    let t = square(vec![1, 1]);
    let model = linear_model(Mat::diag(&[1.0, -2.0]));
    let table = vertex_mu_simplified(&t, &model, &SymMatrix::identity(2), 1.0).unwrap();
    let lp = assemble_lp(&t, &model, &table, 1, None).unwrap();
    let mut text = String::from("# values\nQ 2.0\n");
    for k in (0..lp.vertex_count).rev() {
        text.push_str(&format!("V{k} {}\n", k as f64 * 0.5));
    }
    let v = parse_solution(&lp, &text).unwrap();
    assert_eq!(v[3], 1.5);
    assert!(parse_solution(&lp, "V0 1.0\n").is_err());
}

#[test]
fn sdpa_round_trip_on_lorenz_coarse_problem() {
    let params = LorenzParams::default();
    let bx = lorenz_dissipation_box(&params).unwrap();
    let model = lorenz_scaled(&params).unwrap();
    let t = Triangulation::build(
        &bx,
        &GridSpec::covering(&bx, vec![12, 6, 10]).unwrap(),
        Subdivision::Kuhn,
    )
    .unwrap();
    let prob = assemble_op1_const(&t, &model, 27.0, 0.1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.dat-s");
    export_sdpa(&prob, &path).unwrap();
    let back = read_sdpa(&path).unwrap();
    assert!(back.same_problem(&SdpaData::from_problem(&prob)));
    assert_eq!(back.blocks.len(), prob.block_count());
    assert_eq!(back.variable_count(), 7);
    assert_eq!(
        to_sdpa_string(&prob),
        std::fs::read_to_string(&path).unwrap()
    );
}

#[test]
fn full_metric_problem_round_trips() {
    let t = square(vec![2, 2]);
    let model = linear_model(Mat::from_rows(&[vec![0.3, 1.0], vec![-1.0, -0.5]]).unwrap());
    let prob = assemble_op1_full(&t, &model, 3.0, 0.1, Op1Options::default()).unwrap();
    let back = parse_sdpa(&to_sdpa_string(&prob)).unwrap();
    assert!(back.same_problem(&SdpaData::from_problem(&prob)));
    assert_eq!(back.variable_count(), prob.variable_count());
}

#[test]
fn lyapunov_sdp_round_trips() {
    let coarse = square(vec![1, 1]);
    let fine = square(vec![2, 2]);
    let model = linear_model(Mat::from_rows(&[vec![0.3, 1.0], vec![-1.0, -0.5]]).unwrap());
    let field = CpaMatrixField::constant(&coarse, &SymMatrix::identity(2)).unwrap();
    let prob = assemble_op2_full_sdp(&coarse, &fine, &model, &field, 1).unwrap();
    let back = parse_sdpa(&prob.to_sdpa_string()).unwrap();
    assert!(back.same_problem(&SdpaData::from_blocks(&prob.objective, &prob.blocks)));
    assert_eq!(back.variable_count(), prob.variable_count());
}
