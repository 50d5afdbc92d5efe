//! Vector fields with Jacobians and analytic derivative bounds, plus a fixed-step
//! RK4 integrator for the variational equation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{AxisBox, Simplex};
use crate::symlin::Mat;

/// State norm above which integration is aborted.
pub const BLOW_UP_NORM: f64 = 1e8;

pub trait SystemModel: Send + Sync {
    fn dim(&self) -> usize;

    fn field(&self, x: &[f64]) -> Vec<f64>;

    fn jacobian(&self, x: &[f64]) -> Mat;

    /// Bound `B_ν` on every second-order partial derivative of every component on `simplex`.
    fn hessian_bound(&self, simplex: &Simplex) -> f64;

    /// Bound `B_{3,ν}` on the third-order partial derivatives on `simplex`.
    fn third_bound(&self, simplex: &Simplex) -> f64;

    /// Serializable description, if the model has one.
    fn spec(&self) -> Option<ModelSpec> {
        None
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorenzParams {
    pub sigma: f64,
    pub r: f64,
    pub b: f64,
    pub scale: [f64; 3],
}

impl Default for LorenzParams {
    fn default() -> Self {
        Self {
            sigma: 10.0,
            r: 28.0,
            b: 8.0 / 3.0,
            scale: [24.5, 100.0, 100.0],
        }
    }
}

impl LorenzParams {
    fn check_scale(&self) -> Result<()> {
        if self.scale.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "scale must be positive, got {:?}",
                self.scale
            )));
        }
        Ok(())
    }
}

/// Lorenz system in scaled coordinates `f(x) = S⁻¹ g(S x)`.
#[derive(Clone, Debug)]
pub struct ScaledLorenz {
    params: LorenzParams,
    // f₁ = −σx + a·y, f₂ = c·x − y − d·xz, f₃ = −bz + e·xy
    a: f64,
    c: f64,
    d: f64,
    e: f64,
    second: f64,
}

pub fn lorenz_scaled(p: &LorenzParams) -> Result<ScaledLorenz> {
    p.check_scale()?;
    let [sx, sy, sz] = p.scale;
    Ok(ScaledLorenz {
        a: p.sigma * sy / sx,
        c: p.r * sx / sy,
        d: sx * sz / sy,
        e: sx * sy / sz,
        second: sx * (sy / sz).max(sz / sy),
        params: p.clone(),
    })
}

impl ScaledLorenz {
    pub fn params(&self) -> &LorenzParams {
        &self.params
    }
}

impl SystemModel for ScaledLorenz {
    fn dim(&self) -> usize {
        3
    }

    fn field(&self, x: &[f64]) -> Vec<f64> {
        let (u, v, w) = (x[0], x[1], x[2]);
        let p = &self.params;
        vec![
            -p.sigma * u + self.a * v,
            self.c * u - v - self.d * u * w,
            -p.b * w + self.e * u * v,
        ]
    }

    fn jacobian(&self, x: &[f64]) -> Mat {
        let (u, v, w) = (x[0], x[1], x[2]);
        let p = &self.params;
        Mat::from_row_major(
            3,
            vec![
                -p.sigma,
                self.a,
                0.0,
                self.c - self.d * w,
                -1.0,
                -self.d * u,
                self.e * v,
                self.e * u,
                -p.b,
            ],
        )
        .expect("3x3")
    }

    fn hessian_bound(&self, _simplex: &Simplex) -> f64 {
        self.second
    }

    fn third_bound(&self, _simplex: &Simplex) -> f64 {
        0.0
    }

    fn spec(&self) -> Option<ModelSpec> {
        Some(ModelSpec::Lorenz(self.params.clone()))
    }
}

fn round_up_2(v: f64) -> f64 {
    (v * 100.0 - 1e-9).ceil() / 100.0
}

/// Forward-invariant box containing the Lorenz attractor, in scaled coordinates,
/// with each bound rounded up to two decimals.
pub fn lorenz_dissipation_box(p: &LorenzParams) -> Result<AxisBox> {
    p.check_scale()?;
    if !(p.sigma >= 1.0) || !(p.b >= 2.0) {
        return Err(Error::InvalidParameter(format!(
            "dissipation bounds need sigma >= 1 and b >= 2, got sigma={} b={}",
            p.sigma, p.b
        )));
    }
    let [sx, sy, sz] = p.scale;
    let k = p.b / (2.0 * (p.b - 1.0).sqrt());
    let y_raw = k * p.r;
    let z_raw = (1.0 + k) * p.r;
    let widen = 1.0 + (p.b - 2.0).powi(2) / (4.0 * (p.b - 1.0));
    let disc = widen * (p.sigma + p.r).powi(2) - (y_raw - p.sigma).powi(2);
    if disc < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "negative discriminant {disc} in the x bound"
        )));
    }
    let x_raw = (0.5 * disc).sqrt();
    let x = round_up_2(x_raw / sx);
    let y = round_up_2(y_raw / sy);
    let z = round_up_2(z_raw / sz);
    AxisBox::new(vec![-x, -y, 0.0], vec![x, y, z])
}

/// `f(x) = A x`.
#[derive(Clone, Debug)]
pub struct LinearModel {
    a: Mat,
}

pub fn linear_model(a: Mat) -> LinearModel {
    LinearModel { a }
}

impl LinearModel {
    pub fn matrix(&self) -> &Mat {
        &self.a
    }
}

impl SystemModel for LinearModel {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn field(&self, x: &[f64]) -> Vec<f64> {
        self.a.mul_vec(x)
    }

    fn jacobian(&self, _x: &[f64]) -> Mat {
        self.a.clone()
    }

    fn hessian_bound(&self, _simplex: &Simplex) -> f64 {
        0.0
    }

    fn third_bound(&self, _simplex: &Simplex) -> f64 {
        0.0
    }

    fn spec(&self) -> Option<ModelSpec> {
        Some(ModelSpec::Linear {
            matrix: self.a.rows(),
        })
    }
}

/// Serializable model selector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    Lorenz(LorenzParams),
    Linear { matrix: Vec<Vec<f64>> },
}

impl ModelSpec {
    pub fn build(&self) -> Result<Box<dyn SystemModel>> {
        Ok(match self {
            ModelSpec::Lorenz(p) => Box::new(lorenz_scaled(p)?),
            ModelSpec::Linear { matrix } => Box::new(linear_model(Mat::from_rows(matrix)?)),
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            ModelSpec::Lorenz(_) => 3,
            ModelSpec::Linear { matrix } => matrix.len(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct VariationalSolution {
    pub states: Vec<Vec<f64>>,
    pub fundamental: Mat,
}

/// RK4 on the coupled system `ẋ = f(x)`, `Ẏ = Df(x) Y`, `Y(0) = I`.
pub fn integrate_with_variational(
    model: &dyn SystemModel,
    x0: &[f64],
    t: f64,
    steps: usize,
) -> Result<VariationalSolution> {
    let n = model.dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x0.len(),
        });
    }
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be at least 1".into()));
    }
    let dt = t / steps as f64;
    let mut x = x0.to_vec();
    let mut y = Mat::identity(n);
    let mut states = Vec::with_capacity(steps + 1);
    states.push(x.clone());

    let deriv =
        |x: &[f64], y: &Mat| -> (Vec<f64>, Mat) { (model.field(x), model.jacobian(x).matmul(y)) };
    let shift = |x: &[f64], y: &Mat, dx: &[f64], dy: &Mat, h: f64| -> (Vec<f64>, Mat) {
        let xs = x.iter().zip(dx).map(|(a, b)| a + h * b).collect();
        let mut ys = y.clone();
        ys.axpy(h, dy);
        (xs, ys)
    };

    for step in 0..steps {
        let (k1x, k1y) = deriv(&x, &y);
        let (x2, y2) = shift(&x, &y, &k1x, &k1y, 0.5 * dt);
        let (k2x, k2y) = deriv(&x2, &y2);
        let (x3, y3) = shift(&x, &y, &k2x, &k2y, 0.5 * dt);
        let (k3x, k3y) = deriv(&x3, &y3);
        let (x4, y4) = shift(&x, &y, &k3x, &k3y, dt);
        let (k4x, k4y) = deriv(&x4, &y4);
        for i in 0..n {
            x[i] += dt / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
        }
        y.axpy(dt / 6.0, &k1y);
        y.axpy(dt / 3.0, &k2y);
        y.axpy(dt / 3.0, &k3y);
        y.axpy(dt / 6.0, &k4y);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || norm > BLOW_UP_NORM {
            return Err(Error::BlowUp {
                t: (step + 1) as f64 * dt,
            });
        }
        states.push(x.clone());
    }
    Ok(VariationalSolution {
        states,
        fundamental: y,
    })
}

/// State after integrating `ẋ = f(x)` for time `t` with RK4.
pub fn integrate(model: &dyn SystemModel, x0: &[f64], t: f64, steps: usize) -> Result<Vec<f64>> {
    let n = model.dim();
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be at least 1".into()));
    }
    let dt = t / steps as f64;
    let mut x = x0.to_vec();
    let axpy = |x: &[f64], d: &[f64], h: f64| -> Vec<f64> {
        x.iter().zip(d).map(|(a, b)| a + h * b).collect()
    };
    for step in 0..steps {
        let k1 = model.field(&x);
        let k2 = model.field(&axpy(&x, &k1, 0.5 * dt));
        let k3 = model.field(&axpy(&x, &k2, 0.5 * dt));
        let k4 = model.field(&axpy(&x, &k3, dt));
        for i in 0..n {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || norm > BLOW_UP_NORM {
            return Err(Error::BlowUp {
                t: (step + 1) as f64 * dt,
            });
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_box_triangulation, GridSpec};

    fn any_simplex() -> Simplex {
        let bx = AxisBox::new(vec![0.0; 3], vec![1.0; 3]).unwrap();
        let t =
            build_box_triangulation(&bx, &GridSpec::covering(&bx, vec![1, 1, 1]).unwrap()).unwrap();
        t.simplex(0).clone()
    }

    #[test]
    fn paper_box() {
        let bx = lorenz_dissipation_box(&LorenzParams::default()).unwrap();
        assert_eq!(bx.lo(), &[-1.0, -0.29, 0.0]);
        assert_eq!(bx.hi(), &[1.0, 0.29, 0.57]);
    }

    #[test]
    fn raw_bounds_below_paper_integers() {
        let r = 28.0;
        let k: f64 = 4.0 / 15f64.sqrt();
        assert!(k * r <= 29.0);
        assert!((1.0 + k) * r <= 57.0);
    }

    #[test]
    fn box_preconditions() {
        let p = LorenzParams {
            b: 1.5,
            ..Default::default()
        };
        assert!(lorenz_dissipation_box(&p).is_err());
        let p = LorenzParams {
            scale: [0.0, 1.0, 1.0],
            ..Default::default()
        };
        assert!(lorenz_scaled(&p).is_err());
    }

    #[test]
    fn hessian_bound_values() {
        let s = any_simplex();
        let m = lorenz_scaled(&LorenzParams::default()).unwrap();
        assert_eq!(m.hessian_bound(&s), 24.5);
        assert_eq!(m.third_bound(&s), 0.0);
        let unit = lorenz_scaled(&LorenzParams {
            scale: [1.0; 3],
            ..Default::default()
        })
        .unwrap();
        assert_eq!(unit.hessian_bound(&s), 1.0);
    }

    #[test]
    fn origin_is_equilibrium() {
        let m = lorenz_scaled(&LorenzParams::default()).unwrap();
        assert_eq!(m.field(&[0.0; 3]), vec![0.0; 3]);
    }

    #[test]
    fn unscaled_matches_textbook_lorenz() {
        let p = LorenzParams {
            scale: [1.0; 3],
            ..Default::default()
        };
        let m = lorenz_scaled(&p).unwrap();
        let (x, y, z) = (1.5, -2.0, 3.0);
        let f = m.field(&[x, y, z]);
        assert_eq!(f, vec![10.0 * (y - x), x * (28.0 - z) - y, x * y - p.b * z]);
    }

    #[test]
    fn linear_model_basics() {
        let m = linear_model(Mat::diag(&[2.0, -3.0]));
        assert_eq!(m.field(&[1.0, 0.0]), vec![2.0, 0.0]);
        assert_eq!(m.jacobian(&[5.0, 7.0]), Mat::diag(&[2.0, -3.0]));
        assert_eq!(m.hessian_bound(&any_simplex()), 0.0);
    }

    #[test]
    fn zero_time_gives_identity() {
        let m = lorenz_scaled(&LorenzParams::default()).unwrap();
        let sol = integrate_with_variational(&m, &[0.1, 0.1, 0.2], 0.0, 1).unwrap();
        assert_eq!(sol.fundamental, Mat::identity(3));
    }

    #[test]
    fn blow_up_detected() {
        let m = linear_model(Mat::diag(&[50.0]));
        assert!(matches!(
            integrate_with_variational(&m, &[1.0], 10.0, 1000),
            Err(Error::BlowUp { .. })
        ));
    }

    #[test]
    fn spec_roundtrip() {
        let s = ModelSpec::Lorenz(LorenzParams::default());
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<ModelSpec>(&j).unwrap(), s);
        assert_eq!(s.build().unwrap().dim(), 3);
    }
}
