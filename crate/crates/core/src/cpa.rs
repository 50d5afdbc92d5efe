//! Continuous piecewise affine scalar and matrix fields on a triangulation.

use crate::error::{Error, Result};
use crate::geometry::{Simplex, Triangulation};
use crate::symlin::{sym_eigvals, Mat, SymMatrix};
use crate::sysmodel::SystemModel;

/// Gradient of the affine interpolant of `values` on `simplex`: `X⁻¹ (v_k − v_0)`.
pub fn gradient_from_vertex_values(simplex: &Simplex, values: &[f64]) -> Result<Vec<f64>> {
    let n = simplex.dim();
    if values.len() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            got: values.len(),
        });
    }
    let diff: Vec<f64> = values[1..].iter().map(|v| v - values[0]).collect();
    Ok(simplex.shape_inverse.mul_vec(&diff))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Clone, Debug)]
pub struct CpaScalarField<'t> {
    tri: &'t Triangulation,
    values: Vec<f64>,
    gradients: Vec<Vec<f64>>,
}

impl<'t> CpaScalarField<'t> {
    pub fn new(tri: &'t Triangulation, values: Vec<f64>) -> Result<Self> {
        if values.len() != tri.vertex_count() {
            return Err(Error::DimensionMismatch {
                expected: tri.vertex_count(),
                got: values.len(),
            });
        }
        let gradients = tri
            .simplices()
            .iter()
            .map(|s| {
                let v: Vec<f64> = s.vertex_ids.iter().map(|&k| values[k]).collect();
                gradient_from_vertex_values(s, &v)
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            tri,
            values,
            gradients,
        })
    }

    /// Interpolant of `g` at the vertices.
    pub fn from_fn(tri: &'t Triangulation, g: impl Fn(&[f64]) -> f64) -> Result<Self> {
        Self::new(tri, tri.vertices().iter().map(|x| g(x)).collect())
    }

    pub fn triangulation(&self) -> &'t Triangulation {
        self.tri
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn gradient(&self, simplex: usize) -> &[f64] {
        &self.gradients[simplex]
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let (s, lam) = self.tri.locate(x)?;
        Ok(self.eval_in(s, &lam))
    }

    /// Value from barycentric coordinates in a known simplex.
    pub fn eval_in(&self, simplex: usize, lam: &[f64]) -> f64 {
        self.tri
            .simplex(simplex)
            .vertex_ids
            .iter()
            .zip(lam)
            .map(|(&k, l)| l * self.values[k])
            .sum()
    }

    pub fn orbital_derivative(&self, x: &[f64], model: &dyn SystemModel) -> Result<f64> {
        let fx = model.field(x);
        let s = self.tri.locate_for_orbit(x, &fx)?;
        Ok(dot(&self.gradients[s], &fx))
    }
}

#[derive(Clone, Debug)]
pub struct CpaMatrixField<'t> {
    tri: &'t Triangulation,
    values: Vec<SymMatrix>,
    /// Per simplex, the gradient of each upper-triangle entry (row by row).
    gradients: Vec<Vec<Vec<f64>>>,
    c_bounds: Vec<f64>,
    d_bounds: Vec<f64>,
}

impl<'t> CpaMatrixField<'t> {
    pub fn new(tri: &'t Triangulation, values: Vec<SymMatrix>) -> Result<Self> {
        let n = tri.dim();
        if values.len() != tri.vertex_count() {
            return Err(Error::DimensionMismatch {
                expected: tri.vertex_count(),
                got: values.len(),
            });
        }
        if let Some(bad) = values.iter().find(|m| m.dim() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: bad.dim(),
            });
        }
        let vertex_max_eig: Vec<f64> = values
            .iter()
            .map(|m| sym_eigvals(m).map(|e| e[0]))
            .collect::<Result<_>>()?;
        let mut gradients = Vec::with_capacity(tri.simplex_count());
        let mut c_bounds = Vec::with_capacity(tri.simplex_count());
        let mut d_bounds = Vec::with_capacity(tri.simplex_count());
        for s in tri.simplices() {
            let mut per_entry = Vec::with_capacity(n * (n + 1) / 2);
            let mut d: f64 = 0.0;
            for i in 0..n {
                for j in i..n {
                    let v: Vec<f64> = s.vertex_ids.iter().map(|&k| values[k][(i, j)]).collect();
                    let w = gradient_from_vertex_values(s, &v)?;
                    d = d.max(w.iter().map(|c| c.abs()).sum());
                    per_entry.push(w);
                }
            }
            gradients.push(per_entry);
            d_bounds.push(d);
            c_bounds.push(
                s.vertex_ids
                    .iter()
                    .map(|&k| vertex_max_eig[k])
                    .fold(f64::NEG_INFINITY, f64::max),
            );
        }
        Ok(Self {
            tri,
            values,
            gradients,
            c_bounds,
            d_bounds,
        })
    }

    pub fn constant(tri: &'t Triangulation, p: &SymMatrix) -> Result<Self> {
        Self::new(tri, vec![p.clone(); tri.vertex_count()])
    }

    pub fn triangulation(&self) -> &'t Triangulation {
        self.tri
    }

    pub fn values(&self) -> &[SymMatrix] {
        &self.values
    }

    /// Smallest `C_ν` with `P(x_k) ⪯ C_ν I` at the vertices of simplex `s`.
    pub fn c_bound(&self, s: usize) -> f64 {
        self.c_bounds[s]
    }

    /// Largest `‖w_ij‖₁` over the entries on simplex `s`.
    pub fn d_bound(&self, s: usize) -> f64 {
        self.d_bounds[s]
    }

    /// Gradient of entry `(i, j)` on simplex `s`.
    pub fn entry_gradient(&self, s: usize, i: usize, j: usize) -> &[f64] {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let n = self.tri.dim();
        let idx = i * n - i * (i + 1) / 2 + j;
        &self.gradients[s][idx]
    }

    pub fn eval(&self, x: &[f64]) -> Result<SymMatrix> {
        let (s, lam) = self.tri.locate(x)?;
        Ok(self.eval_in(s, &lam))
    }

    pub fn eval_in(&self, simplex: usize, lam: &[f64]) -> SymMatrix {
        let n = self.tri.dim();
        let mut acc = SymMatrix::zeros(n);
        for (&k, &l) in self.tri.simplex(simplex).vertex_ids.iter().zip(lam) {
            acc.axpy(l, &self.values[k]);
        }
        acc
    }

    /// Matrix `(w_ij · v)` of directional derivatives on simplex `s`.
    pub fn directional_in(&self, s: usize, v: &[f64]) -> SymMatrix {
        let n = self.tri.dim();
        let mut m = Mat::zeros(n);
        for i in 0..n {
            for j in i..n {
                let d = dot(self.entry_gradient(s, i, j), v);
                m[(i, j)] = d;
                m[(j, i)] = d;
            }
        }
        SymMatrix::new(m)
    }

    pub fn orbital_derivative(&self, x: &[f64], model: &dyn SystemModel) -> Result<SymMatrix> {
        let fx = model.field(x);
        let s = self.tri.locate_for_orbit(x, &fx)?;
        Ok(self.directional_in(s, &fx))
    }
}
