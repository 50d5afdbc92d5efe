use cpabound::lyapopt::{assemble_lp, solve_lp, LpMethod, LpOptions, MuSource, VertexMuTable};
use cpabound::sysmodel::linear_model;
use cpabound::{AxisBox, GridSpec, Mat, Subdivision, Triangulation};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn table(values: Vec<f64>) -> VertexMuTable {
    let n = values.len();
    VertexMuTable {
        values,
        source: MuSource::DirectFormula,
        lambda_max: vec![0.0; n],
        correction: vec![0.0; n],
    }
}

fn random_grid(rng: &mut ChaCha8Rng, dim: usize) -> Triangulation {
    let counts: Vec<usize> = (0..dim).map(|_| rng.gen_range(1..=3)).collect();
    let offsets: Vec<i64> = counts
        .iter()
        .map(|&c| -(rng.gen_range(0..=c) as i64))
        .collect();
    let hi = vec![1.0; dim];
    let lo: Vec<f64> = counts
        .iter()
        .zip(&offsets)
        .map(|(&c, &o)| o as f64 / c as f64)
        .collect();
    let bx = AxisBox::new(lo, hi).unwrap();
    Triangulation::build(
        &bx,
        &GridSpec::new(counts, offsets).unwrap(),
        Subdivision::Kuhn,
    )
    .unwrap()
}

fn random_matrix(rng: &mut ChaCha8Rng, dim: usize) -> Mat {
    Mat::from_row_major(
        dim,
        (0..dim * dim).map(|_| rng.gen_range(-2.0..2.0)).collect(),
    )
    .unwrap()
}

#[test]
fn row_and_variable_counts_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in 0..10 {
        let dim = 2 + case % 2;
        let t = random_grid(&mut rng, dim);
        let model = linear_model(random_matrix(&mut rng, dim));
        let mu = table(vec![1.0; t.vertex_count()]);
        let lp = assemble_lp(&t, &model, &mu, 1, None).unwrap();
        let rows = lp.rows();
        assert_eq!(rows.len(), t.simplex_count() * (3 * dim + 1));
        assert_eq!(lp.row_count(), rows.len());
        assert_eq!(
            lp.variable_count(),
            t.vertex_count() + dim * t.simplex_count() + 1
        );
        let max_col = rows
            .iter()
            .flat_map(|r| r.coeffs.iter().map(|c| c.0))
            .max()
            .unwrap();
        assert_eq!(max_col + 1, lp.variable_count());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn shift_covariance_and_zero_v_bound(seed in any::<u64>(), shift in -2.0f64..2.0, m_tilde in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bx = AxisBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let t = Triangulation::build(&bx, &GridSpec::covering(&bx, vec![2, 2]).unwrap(), Subdivision::Kuhn).unwrap();
        let model = linear_model(random_matrix(&mut rng, 2));
        let mu: Vec<f64> = (0..t.vertex_count()).map(|_| rng.gen_range(0.0..3.0)).collect();
        let lp = assemble_lp(&t, &model, &table(mu.clone()), m_tilde, None).unwrap();
        let base = solve_lp(&lp, &LpOptions::default()).unwrap();
        let mu_max = mu.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(base.q <= m_tilde as f64 * mu_max + 1e-9);
        prop_assert!(lp.max_violation(&lp.repaired_point(&base.v)) <= 1e-9);
        let shifted_mu: Vec<f64> = mu.iter().map(|v| v + shift).collect();
        let shifted = assemble_lp(&t, &model, &table(shifted_mu), m_tilde, None).unwrap();
        let moved = solve_lp(&shifted, &LpOptions::default()).unwrap();
        prop_assert!((moved.q - base.q - m_tilde as f64 * shift).abs() <= 1e-6 * (1.0 + base.q.abs()));
    }

    #[test]
    fn simplex_and_interior_point_agree(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bx = AxisBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let t = Triangulation::build(&bx, &GridSpec::covering(&bx, vec![2, 2]).unwrap(), Subdivision::Kuhn).unwrap();
        let model = linear_model(random_matrix(&mut rng, 2));
        let mu: Vec<f64> = (0..t.vertex_count()).map(|_| rng.gen_range(0.0..3.0)).collect();
        let lp = assemble_lp(&t, &model, &table(mu), 1, None).unwrap();
        let s = solve_lp(&lp, &LpOptions { method: LpMethod::Simplex, ..Default::default() }).unwrap();
        let i = solve_lp(&lp, &LpOptions { method: LpMethod::InteriorPoint, ..Default::default() }).unwrap();
        prop_assert!((s.q - i.q).abs() <= 1e-6 * (1.0 + s.q.abs()), "{} vs {}", s.q, i.q);
    }

    #[test]
    fn gradient_bounds_hold_for_returned_v(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bx = AxisBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let t = Triangulation::build(&bx, &GridSpec::covering(&bx, vec![2, 2]).unwrap(), Subdivision::Kuhn).unwrap();
        let model = linear_model(random_matrix(&mut rng, 2));
        let mu: Vec<f64> = (0..t.vertex_count()).map(|_| rng.gen_range(0.0..3.0)).collect();
        let lp = assemble_lp(&t, &model, &table(mu), 1, None).unwrap();
        let sol = solve_lp(&lp, &LpOptions::default()).unwrap();
        for s in 0..lp.elements.len() {
            let g = lp.gradient(s, &sol.v);
            let bound: f64 = sol.aux[s * 2..s * 2 + 2].iter().sum();
            prop_assert!(g.iter().map(|v| v.abs()).sum::<f64>() <= bound + 1e-9);
        }
    }
}
