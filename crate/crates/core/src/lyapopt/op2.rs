//! Monolithic semidefinite form of the second problem with `μ(x_k)`, `V(x_k)`,
//! their gradient bounds and `Q` all as decision variables. Export only.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cpa::CpaMatrixField;
use crate::error::{Error, Result};
use crate::geometry::{check_refinement, Triangulation};
use crate::metricopt::sdpa::render_blocks;
use crate::metricopt::{e_nu, BlockKind, BlockLabel, LmiBlock};
use crate::symlin::{Mat, SymMatrix};
use crate::sysmodel::SystemModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Op2Var {
    Mu { vertex: usize },
    MuAux { simplex: usize, axis: usize },
    V { vertex: usize },
    VAux { simplex: usize, axis: usize },
    Q,
}

impl Op2Var {
    pub fn name(&self) -> String {
        match self {
            Op2Var::Mu { vertex } => format!("mu{vertex}"),
            Op2Var::MuAux { simplex, axis } => format!("dmu{simplex}_{axis}"),
            Op2Var::V { vertex } => format!("V{vertex}"),
            Op2Var::VAux { simplex, axis } => format!("dV{simplex}_{axis}"),
            Op2Var::Q => "Q".to_string(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Op2Problem {
    pub n: usize,
    pub m_tilde: usize,
    pub refinement_factor: u64,
    /// Vertex ids of the fine triangulation kept, in variable order.
    pub vertices: Vec<usize>,
    /// Simplex ids of the fine triangulation kept, with their coarse parent.
    pub simplices: Vec<(usize, usize)>,
    pub variables: Vec<Op2Var>,
    pub blocks: Vec<LmiBlock>,
    pub objective: Vec<f64>,
}

impl Op2Problem {
    pub fn variable_count(&self) -> usize {
        self.variables.len()
    }

    pub fn to_sdpa_string(&self) -> String {
        let header = vec![
            "* cpabound monolithic Lyapunov problem".to_string(),
            format!("* refinement factor {}", self.refinement_factor),
            format!("* m_tilde {}", self.m_tilde),
            format!(
                "* vertices {} simplices {} variables {} blocks {}",
                self.vertices.len(),
                self.simplices.len(),
                self.variables.len(),
                self.blocks.len()
            ),
        ];
        render_blocks(&header, &self.objective, &self.blocks)
    }

    pub fn export_sdpa(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_sdpa_string())?;
        Ok(())
    }
}

fn scalar(v: f64) -> SymMatrix {
    SymMatrix::new(Mat::from_row_major(1, vec![v]).expect("1x1"))
}

/// Fine simplices whose centroid lies outside the coarse domain are dropped,
/// and vertices no longer used are removed.
pub fn assemble_op2_full_sdp(
    t: &Triangulation,
    tstar: &Triangulation,
    model: &dyn SystemModel,
    p_field: &CpaMatrixField<'_>,
    m_tilde: usize,
) -> Result<Op2Problem> {
    let n = t.dim();
    if model.dim() != n || tstar.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if model.dim() != n {
                model.dim()
            } else {
                tstar.dim()
            },
        });
    }
    if p_field.values().len() != t.vertex_count() {
        return Err(Error::Mismatch(
            "metric field is not defined on the coarse triangulation".into(),
        ));
    }
    let factor = check_refinement(t, tstar)?;
    let nf = n as f64;

    let mut kept = Vec::new();
    let mut vmap = vec![usize::MAX; tstar.vertex_count()];
    let mut vertices = Vec::new();
    for (s, simplex) in tstar.simplices().iter().enumerate() {
        let centroid: Vec<f64> = (0..n)
            .map(|a| {
                simplex
                    .vertex_ids
                    .iter()
                    .map(|&v| tstar.vertex(v)[a])
                    .sum::<f64>()
                    / (n + 1) as f64
            })
            .collect();
        let Ok((parent, _)) = t.locate(&centroid) else {
            continue;
        };
        kept.push((s, parent));
        for &v in &simplex.vertex_ids {
            if vmap[v] == usize::MAX {
                vmap[v] = vertices.len();
                vertices.push(v);
            }
        }
    }
    let nv = vertices.len();
    let ns = kept.len();
    let mut variables = Vec::with_capacity(2 * nv + 2 * n * ns + 1);
    variables.extend((0..nv).map(|vertex| Op2Var::Mu { vertex }));
    for simplex in 0..ns {
        variables.extend((0..n).map(|axis| Op2Var::MuAux { simplex, axis }));
    }
    variables.extend((0..nv).map(|vertex| Op2Var::V { vertex }));
    for simplex in 0..ns {
        variables.extend((0..n).map(|axis| Op2Var::VAux { simplex, axis }));
    }
    variables.push(Op2Var::Q);
    let mu_idx = |k: usize| k;
    let mu_aux = |s: usize, a: usize| nv + s * n + a;
    let v_idx = |k: usize| nv + n * ns + k;
    let v_aux = |s: usize, a: usize| 2 * nv + n * ns + s * n + a;
    let q_idx = variables.len() - 1;

    let fields: Vec<Vec<f64>> = vertices
        .iter()
        .map(|&v| model.field(tstar.vertex(v)))
        .collect();
    let identity = SymMatrix::identity(n);
    let mut blocks = Vec::new();
    for (ls, &(s, parent)) in kept.iter().enumerate() {
        let simplex = tstar.simplex(s);
        let coarse = t.simplex(parent);
        let h2 = simplex.diameter * simplex.diameter;
        let d_nu = p_field.d_bound(parent);
        let e = e_nu(
            n,
            model.hessian_bound(coarse),
            d_nu,
            model.third_bound(coarse),
            p_field.c_bound(parent),
        );
        let err_v = h2 * nf * model.hessian_bound(simplex);
        let local: Vec<usize> = simplex.vertex_ids.iter().map(|&v| vmap[v]).collect();
        let xinv = &simplex.shape_inverse;
        // gradient rows for μ and V
        for a in 0..n {
            let w: Vec<f64> = (0..n).map(|m| xinv[(a, m)]).collect();
            for negative in [false, true] {
                let sign = if negative { -1.0 } else { 1.0 };
                for (kind, var, aux) in [
                    (
                        BlockKind::MuGradient { axis: a, negative },
                        0usize,
                        mu_aux(ls, a),
                    ),
                    (
                        BlockKind::VGradient { axis: a, negative },
                        1usize,
                        v_aux(ls, a),
                    ),
                ] {
                    let idx = |k: usize| {
                        if var == 0 {
                            mu_idx(local[k])
                        } else {
                            v_idx(local[k])
                        }
                    };
                    let mut terms = vec![
                        (aux, scalar(1.0)),
                        (idx(0), scalar(sign * w.iter().sum::<f64>())),
                    ];
                    for m in 0..n {
                        terms.push((idx(m + 1), scalar(-sign * w[m])));
                    }
                    blocks.push(LmiBlock {
                        label: BlockLabel {
                            kind,
                            simplex: Some(s),
                            vertex: None,
                        },
                        constant: scalar(0.0),
                        terms,
                    });
                }
            }
        }
        for (k, &v) in simplex.vertex_ids.iter().enumerate() {
            let x = tstar.vertex(v);
            let fx = &fields[local[k]];
            let px = p_field.eval(x)?;
            let a_x = px
                .lyapunov_sum(&model.jacobian(x))
                .add(&p_field.directional_in(parent, fx));
            let mut terms = vec![(mu_idx(local[k]), px)];
            let coef = -h2 * 2.0 * nf * nf.sqrt() * d_nu;
            if coef != 0.0 {
                for a in 0..n {
                    terms.push((mu_aux(ls, a), identity.scaled(coef)));
                }
            }
            blocks.push(LmiBlock {
                label: BlockLabel {
                    kind: BlockKind::Vertex,
                    simplex: Some(s),
                    vertex: Some(v),
                },
                constant: a_x.scaled(-1.0).add(&identity.scaled(-h2 * e)),
                terms,
            });
            let g = xinv.tr_mul_vec(fx);
            let mut terms = vec![
                (q_idx, scalar(1.0)),
                (mu_idx(local[k]), scalar(-(m_tilde as f64))),
                (v_idx(local[0]), scalar(g.iter().sum::<f64>())),
            ];
            for m in 0..n {
                terms.push((v_idx(local[m + 1]), scalar(-g[m])));
            }
            if err_v != 0.0 {
                for a in 0..n {
                    terms.push((v_aux(ls, a), scalar(-err_v)));
                }
            }
            blocks.push(LmiBlock {
                label: BlockLabel {
                    kind: BlockKind::Decay,
                    simplex: Some(s),
                    vertex: Some(v),
                },
                constant: scalar(0.0),
                terms,
            });
        }
    }
    let mut objective = vec![0.0; variables.len()];
    objective[q_idx] = 1.0;
    Ok(Op2Problem {
        n,
        m_tilde,
        refinement_factor: factor,
        vertices,
        simplices: kept,
        variables,
        blocks,
        objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_box_triangulation, AxisBox, GridSpec};
    use crate::sysmodel::linear_model;

    #[test]
    fn refinement_required_and_counts() {
        let bx = AxisBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let t =
            build_box_triangulation(&bx, &GridSpec::covering(&bx, vec![2, 2]).unwrap()).unwrap();
        let fine =
            build_box_triangulation(&bx, &GridSpec::covering(&bx, vec![4, 4]).unwrap()).unwrap();
        let odd =
            build_box_triangulation(&bx, &GridSpec::covering(&bx, vec![3, 3]).unwrap()).unwrap();
        let m = linear_model(Mat::diag(&[1.0, -2.0]));
        let p = CpaMatrixField::constant(&t, &SymMatrix::identity(2)).unwrap();
        assert!(matches!(
            assemble_op2_full_sdp(&t, &odd, &m, &p, 1),
            Err(Error::NotRefining(_))
        ));
        let prob = assemble_op2_full_sdp(&t, &fine, &m, &p, 1).unwrap();
        let (nv, ns) = (fine.vertex_count(), fine.simplex_count());
        assert_eq!(prob.variable_count(), 2 * nv + 2 * 2 * ns + 1);
        // 8 gradient rows, 3 LMI and 3 decay rows per simplex
        assert_eq!(prob.blocks.len(), ns * (8 + 3 + 3));
        // μ ≡ 2, V ≡ 0, aux ≡ 0, Q = 2 is feasible for this linear system
        let mut y = vec![0.0; prob.variable_count()];
        for (i, v) in prob.variables.iter().enumerate() {
            match v {
                Op2Var::Mu { .. } => y[i] = 2.0,
                Op2Var::Q => y[i] = 2.0,
                _ => {}
            }
        }
        for b in &prob.blocks {
            assert!(b.min_eig(&y) >= -1e-12, "{:?}", b.label);
        }
        assert!(prob
            .to_sdpa_string()
            .lines()
            .any(|l| l.starts_with("* refinement factor 2")));
    }
}
