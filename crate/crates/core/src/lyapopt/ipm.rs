//! Mehrotra predictor-corrector interior point method specialized to the
//! Lyapunov LP.
//!
//! Primal `min cᵀx` with `Ax + s = b`, `s ≥ 0`, `x` free; dual `Aᵀz + c = 0`,
//! `z ≥ 0`. The normal matrix `AᵀDA` is assembled element by element. The
//! per-simplex gradient-bound variables are condensed out locally, `V` is
//! solved by a banded Cholesky factorization with `V_0` pinned, and `Q` by a
//! scalar Schur complement.

use super::LpProblem;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct IpmOptions {
    pub max_iterations: usize,
    /// Relative tolerance on primal, dual residuals and the duality gap.
    pub tol: f64,
}

impl Default for IpmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug)]
pub struct IpmSolution {
    pub v: Vec<f64>,
    pub aux: Vec<f64>,
    pub q: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub iterations: usize,
}

/// Lower-banded symmetric positive definite matrix with Cholesky factorization in place.
struct Banded {
    n: usize,
    w: usize,
    data: Vec<f64>,
}

impl Banded {
    fn new(n: usize, w: usize) -> Self {
        Self {
            n,
            w,
            data: vec![0.0; n * (w + 1)],
        }
    }

    fn clear(&mut self) {
        self.data.iter_mut().for_each(|v| *v = 0.0);
    }

    #[inline]
    fn at(&mut self, i: usize, j: usize) -> &mut f64 {
        debug_assert!(j <= i && i - j <= self.w);
        &mut self.data[i * (self.w + 1) + (j + self.w - i)]
    }

    fn factor(&mut self) {
        let (n, w) = (self.n, self.w);
        let stride = w + 1;
        let max_diag = (0..n)
            .map(|i| self.data[i * stride + w])
            .fold(0.0f64, f64::max)
            .max(1e-300);
        for i in 0..n {
            let j0 = i.saturating_sub(w);
            for j in j0..=i {
                let k0 = j0.max(j.saturating_sub(w));
                let ri = i * stride + w - i;
                let rj = j * stride + w - j;
                let mut sum = self.data[ri + j];
                let (a, b) = (&self.data[ri + k0..ri + j], &self.data[rj + k0..rj + j]);
                sum -= a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
                if j == i {
                    let piv = if sum > 1e-15 * max_diag {
                        sum.sqrt()
                    } else {
                        1e64
                    };
                    self.data[ri + i] = piv;
                } else {
                    self.data[ri + j] = sum / self.data[rj + j];
                }
            }
        }
    }

    fn solve(&self, rhs: &mut [f64]) {
        let (n, w) = (self.n, self.w);
        let stride = w + 1;
        for i in 0..n {
            let j0 = i.saturating_sub(w);
            let ri = i * stride + w - i;
            let s: f64 = self.data[ri + j0..ri + i]
                .iter()
                .zip(&rhs[j0..i])
                .map(|(a, b)| a * b)
                .sum();
            rhs[i] = (rhs[i] - s) / self.data[ri + i];
        }
        for i in (0..n).rev() {
            let ri = i * stride + w - i;
            let xi = rhs[i] / self.data[ri + i];
            rhs[i] = xi;
            let j0 = i.saturating_sub(w);
            for j in j0..i {
                rhs[j] -= self.data[ri + j] * xi;
            }
        }
    }
}

/// Dense local constraint blocks, one per simplex.
struct Elements {
    n: usize,
    rows: usize,
    cols: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    ids: Vec<usize>,
}

impl Elements {
    fn build(prob: &LpProblem) -> Self {
        let n = prob.n;
        let rows = 3 * n + 1;
        let cols = 2 * n + 2;
        let ne = prob.elements.len();
        let mut a = vec![0.0; ne * rows * cols];
        let mut b = vec![0.0; ne * rows];
        let mut ids = Vec::with_capacity(ne * (n + 1));
        for (e, el) in prob.elements.iter().enumerate() {
            ids.extend_from_slice(&el.vertex_ids);
            let blk = &mut a[e * rows * cols..(e + 1) * rows * cols];
            let put_v = |r: usize, w: &[f64], sign: f64, blk: &mut [f64]| {
                blk[r * cols] = -sign * w.iter().sum::<f64>();
                for m in 0..n {
                    blk[r * cols + 1 + m] = sign * w[m];
                }
            };
            for ax in 0..n {
                for (k, sign) in [1.0, -1.0].into_iter().enumerate() {
                    let r = 2 * ax + k;
                    put_v(r, &el.grad[ax], sign, blk);
                    blk[r * cols + n + 1 + ax] = -1.0;
                }
            }
            for k in 0..=n {
                let r = 2 * n + k;
                put_v(r, &el.flow[k], 1.0, blk);
                for ax in 0..n {
                    blk[r * cols + n + 1 + ax] = el.err;
                }
                blk[r * cols + 2 * n + 1] = -1.0;
                b[e * rows + r] = -(prob.m_tilde as f64) * prob.mu[el.vertex_ids[k]];
            }
        }
        Self {
            n,
            rows,
            cols,
            a,
            b,
            ids,
        }
    }

    fn count(&self) -> usize {
        self.ids.len() / (self.n + 1)
    }

    fn block(&self, e: usize) -> &[f64] {
        &self.a[e * self.rows * self.cols..(e + 1) * self.rows * self.cols]
    }

    fn local_x(&self, e: usize, v: &[f64], aux: &[f64], q: f64, out: &mut [f64]) {
        let n = self.n;
        for m in 0..=n {
            out[m] = v[self.ids[e * (n + 1) + m]];
        }
        out[n + 1..2 * n + 1].copy_from_slice(&aux[e * n..(e + 1) * n]);
        out[2 * n + 1] = q;
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_step(v: &[f64], dv: &[f64]) -> f64 {
    let mut a = 1.0f64;
    for (x, d) in v.iter().zip(dv) {
        if *d < 0.0 {
            a = a.min(-x / d);
        }
    }
    a
}

/// Inverts a small symmetric positive definite matrix in place (Gauss-Jordan).
fn small_inverse(m: &mut [f64], k: usize) -> bool {
    let mut inv = vec![0.0; k * k];
    for i in 0..k {
        inv[i * k + i] = 1.0;
    }
    for c in 0..k {
        let p = m[c * k + c];
        if !(p > 0.0) {
            return false;
        }
        for j in 0..k {
            m[c * k + j] /= p;
            inv[c * k + j] /= p;
        }
        for r in 0..k {
            if r != c {
                let f = m[r * k + c];
                if f != 0.0 {
                    for j in 0..k {
                        m[r * k + j] -= f * m[c * k + j];
                        inv[r * k + j] -= f * inv[c * k + j];
                    }
                }
            }
        }
    }
    m.copy_from_slice(&inv);
    true
}

struct Direction {
    dv: Vec<f64>,
    daux: Vec<f64>,
    dq: f64,
    ds: Vec<f64>,
    dz: Vec<f64>,
}

struct NormalSystem {
    band: Banded,
    /// `K_aa⁻¹` per element.
    kaa_inv: Vec<f64>,
    /// `K_ar` per element, rows aux, columns `(V_0..V_n, Q)`.
    kar: Vec<f64>,
    /// `V`-`Q` coupling and the `Q`-`Q` entry of the condensed matrix.
    u: Vec<f64>,
    gamma: f64,
    /// `B⁻¹u`.
    bu: Vec<f64>,
}

pub fn solve(prob: &LpProblem, opts: &IpmOptions) -> Result<IpmSolution> {
    let el = Elements::build(prob);
    let n = el.n;
    let ne = el.count();
    let nv = prob.vertex_count;
    let rows = el.rows;
    let cols = el.cols;
    let m = ne * rows;
    if ne == 0 || nv < 2 {
        return Err(Error::InvalidParameter("LP has no simplices".into()));
    }
    let mut w = 0usize;
    for e in 0..ne {
        let ids = &el.ids[e * (n + 1)..(e + 1) * (n + 1)];
        let lo = *ids.iter().min().unwrap();
        let hi = *ids.iter().max().unwrap();
        w = w.max(hi - lo);
    }
    let nb = nv - 1;

    // strictly feasible primal start with aux = 1, V = 0
    let mut v = vec![0.0; nv];
    let mut aux = vec![1.0; ne * n];
    let mut q = 0.0f64;
    for e in 0..ne {
        let b = &el.b[e * rows..(e + 1) * rows];
        let err = el.block(e)[(2 * n) * cols + n + 1];
        for k in 0..=n {
            q = q.max(-b[2 * n + k] + err * n as f64 + 1.0);
        }
    }
    let mut s = vec![0.0; m];
    let mut lx = vec![0.0; cols];
    let residual_rows =
        |v: &[f64], aux: &[f64], q: f64, s: &[f64], out: &mut [f64], lx: &mut [f64]| {
            for e in 0..ne {
                el.local_x(e, v, aux, q, lx);
                let a = el.block(e);
                for r in 0..rows {
                    let i = e * rows + r;
                    out[i] = el.b[i] - dot(&a[r * cols..(r + 1) * cols], lx) - s[i];
                }
            }
        };
    {
        let zero = vec![0.0; m];
        residual_rows(&v, &aux, q, &zero, &mut s, &mut lx);
    }
    let vertex_rows = (n + 1) * ne;
    let mut z = vec![1.0 / vertex_rows as f64; m];
    let mu0 = dot(&s, &z) / m as f64;
    for zi in z.iter_mut() {
        *zi = zi.max(mu0 * 1e-2);
    }

    let mut sys = NormalSystem {
        band: Banded::new(nb, w),
        kaa_inv: vec![0.0; ne * n * n],
        kar: vec![0.0; ne * n * (n + 2)],
        u: vec![0.0; nb],
        gamma: 0.0,
        bu: vec![0.0; nb],
    };

    let mut rp = vec![0.0; m];
    let mut rd_v = vec![0.0; nv];
    let mut rd_aux = vec![0.0; ne * n];
    let b_norm = el.b.iter().map(|x| x * x).sum::<f64>().sqrt();

    for it in 0..opts.max_iterations {
        residual_rows(&v, &aux, q, &s, &mut rp, &mut lx);
        // r_d = −c − Aᵀz
        rd_v.iter_mut().for_each(|x| *x = 0.0);
        let mut rd_q = -1.0;
        for e in 0..ne {
            let a = el.block(e);
            let ze = &z[e * rows..(e + 1) * rows];
            for c in 0..cols {
                let g: f64 = (0..rows).map(|r| a[r * cols + c] * ze[r]).sum();
                if c <= n {
                    rd_v[el.ids[e * (n + 1) + c]] -= g;
                } else if c <= 2 * n {
                    rd_aux[e * n + c - n - 1] = -g;
                } else {
                    rd_q -= g;
                }
            }
        }
        let pobj = q;
        let dobj = -dot(&el.b, &z);
        let rp_norm = rp.iter().map(|x| x * x).sum::<f64>().sqrt() / (1.0 + b_norm);
        let rd_norm = (rd_v.iter().chain(&rd_aux).map(|x| x * x).sum::<f64>() + rd_q * rd_q).sqrt();
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs());
        if rp_norm <= opts.tol && rd_norm <= opts.tol && gap <= opts.tol {
            return Ok(IpmSolution {
                v,
                aux,
                q,
                primal_objective: pobj,
                dual_objective: dobj,
                iterations: it,
            });
        }
        if !(pobj.is_finite() && dobj.is_finite()) {
            return Err(Error::LpNumerical(format!(
                "non-finite objective at iteration {it}"
            )));
        }

        let d: Vec<f64> = z.iter().zip(&s).map(|(zi, si)| zi / si).collect();
        assemble(&el, &d, &mut sys);
        sys.band.factor();
        sys.bu.copy_from_slice(&sys.u);
        sys.band.solve(&mut sys.bu);
        let schur = sys.gamma - dot(&sys.u, &sys.bu);
        if !(schur > 0.0) {
            return Err(Error::LpNumerical(format!(
                "Schur complement {schur} at iteration {it}"
            )));
        }

        let mu = dot(&s, &z) / m as f64;
        let rc_aff: Vec<f64> = s.iter().zip(&z).map(|(a, b)| -a * b).collect();
        let aff = direction(
            &el, &sys, schur, &d, &s, &z, &rp, &rd_v, &rd_aux, rd_q, &rc_aff,
        );
        let ap = max_step(&s, &aff.ds);
        let ad = max_step(&z, &aff.dz);
        let mu_aff = s
            .iter()
            .zip(&aff.ds)
            .zip(z.iter().zip(&aff.dz))
            .map(|((si, dsi), (zi, dzi))| (si + ap * dsi) * (zi + ad * dzi))
            .sum::<f64>()
            / m as f64;
        let sigma = (mu_aff / mu).powi(3).clamp(0.0, 1.0);
        let rc: Vec<f64> = (0..m)
            .map(|i| sigma * mu - s[i] * z[i] - aff.ds[i] * aff.dz[i])
            .collect();
        let dir = direction(&el, &sys, schur, &d, &s, &z, &rp, &rd_v, &rd_aux, rd_q, &rc);
        let ap = (0.99 * max_step(&s, &dir.ds)).min(1.0);
        let ad = (0.99 * max_step(&z, &dir.dz)).min(1.0);
        for (x, dx) in v.iter_mut().zip(&dir.dv) {
            *x += ap * dx;
        }
        for (x, dx) in aux.iter_mut().zip(&dir.daux) {
            *x += ap * dx;
        }
        q += ap * dir.dq;
        for (x, dx) in s.iter_mut().zip(&dir.ds) {
            *x += ap * dx;
        }
        for (x, dx) in z.iter_mut().zip(&dir.dz) {
            *x += ad * dx;
        }
    }
    Err(Error::LpIterationCap(opts.max_iterations))
}

fn assemble(el: &Elements, d: &[f64], sys: &mut NormalSystem) {
    let n = el.n;
    let (rows, cols) = (el.rows, el.cols);
    let nr = n + 2;
    sys.band.clear();
    sys.u.iter_mut().for_each(|x| *x = 0.0);
    sys.gamma = 0.0;
    let mut k = vec![0.0; cols * cols];
    let mut kaa = vec![0.0; n * n];
    // local index of the reduced set: V_0..V_n then Q
    let rmap: Vec<usize> = (0..=n).chain(std::iter::once(2 * n + 1)).collect();
    for e in 0..el.count() {
        let a = el.block(e);
        let de = &d[e * rows..(e + 1) * rows];
        k.iter_mut().for_each(|x| *x = 0.0);
        for r in 0..rows {
            let row = &a[r * cols..(r + 1) * cols];
            let dr = de[r];
            for i in 0..cols {
                if row[i] == 0.0 {
                    continue;
                }
                let f = dr * row[i];
                for j in 0..cols {
                    k[i * cols + j] += f * row[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                kaa[i * n + j] = k[(n + 1 + i) * cols + n + 1 + j];
            }
        }
        small_inverse(&mut kaa, n);
        sys.kaa_inv[e * n * n..(e + 1) * n * n].copy_from_slice(&kaa);
        let kar = &mut sys.kar[e * n * nr..(e + 1) * n * nr];
        for i in 0..n {
            for (jj, &j) in rmap.iter().enumerate() {
                kar[i * nr + jj] = k[(n + 1 + i) * cols + j];
            }
        }
        // S = K_rr − K_ra K_aa⁻¹ K_ar
        let mut t = vec![0.0; n * nr];
        for i in 0..n {
            for jj in 0..nr {
                t[i * nr + jj] = (0..n).map(|l| kaa[i * n + l] * kar[l * nr + jj]).sum();
            }
        }
        let ids = &el.ids[e * (n + 1)..(e + 1) * (n + 1)];
        for (ii, &i) in rmap.iter().enumerate() {
            for (jj, &j) in rmap.iter().enumerate() {
                let sij = k[i * cols + j]
                    - (0..n)
                        .map(|l| kar[l * nr + ii] * t[l * nr + jj])
                        .sum::<f64>();
                let gi = if ii <= n { Some(ids[ii]) } else { None };
                let gj = if jj <= n { Some(ids[jj]) } else { None };
                match (gi, gj) {
                    (Some(a), Some(b)) => {
                        if a >= b && a > 0 && b > 0 {
                            *sys.band.at(a - 1, b - 1) += sij;
                        }
                    }
                    (Some(a), None) => {
                        if a > 0 {
                            sys.u[a - 1] += sij;
                        }
                    }
                    (None, None) => sys.gamma += sij,
                    (None, Some(_)) => {}
                }
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn direction(
    el: &Elements,
    sys: &NormalSystem,
    schur: f64,
    d: &[f64],
    s: &[f64],
    z: &[f64],
    rp: &[f64],
    rd_v: &[f64],
    rd_aux: &[f64],
    rd_q: f64,
    rc: &[f64],
) -> Direction {
    let n = el.n;
    let (rows, cols) = (el.rows, el.cols);
    let ne = el.count();
    let nr = n + 2;
    let nv = rd_v.len();
    let m = rp.len();
    // rhs = r_d + Aᵀ(D r_p − S⁻¹ r_c)
    let wv: Vec<f64> = (0..m).map(|i| d[i] * rp[i] - rc[i] / s[i]).collect();
    let mut rhs_v = rd_v.to_vec();
    let mut rhs_aux = rd_aux.to_vec();
    let mut rhs_q = rd_q;
    for e in 0..ne {
        let a = el.block(e);
        let we = &wv[e * rows..(e + 1) * rows];
        for c in 0..cols {
            let g: f64 = (0..rows).map(|r| a[r * cols + c] * we[r]).sum();
            if c <= n {
                rhs_v[el.ids[e * (n + 1) + c]] += g;
            } else if c <= 2 * n {
                rhs_aux[e * n + c - n - 1] += g;
            } else {
                rhs_q += g;
            }
        }
    }
    // condense aux
    let mut ya = vec![0.0; ne * n];
    for e in 0..ne {
        let kinv = &sys.kaa_inv[e * n * n..(e + 1) * n * n];
        let kar = &sys.kar[e * n * nr..(e + 1) * n * nr];
        let ra = &rhs_aux[e * n..(e + 1) * n];
        let y: Vec<f64> = (0..n).map(|i| dot(&kinv[i * n..(i + 1) * n], ra)).collect();
        for jj in 0..nr {
            let c: f64 = (0..n).map(|l| kar[l * nr + jj] * y[l]).sum();
            if jj <= n {
                rhs_v[el.ids[e * (n + 1) + jj]] -= c;
            } else {
                rhs_q -= c;
            }
        }
        ya[e * n..(e + 1) * n].copy_from_slice(&y);
    }
    let mut y1 = rhs_v[1..].to_vec();
    sys.band.solve(&mut y1);
    let dq = (rhs_q - dot(&sys.u, &y1)) / schur;
    let mut dv = vec![0.0; nv];
    for i in 0..nv - 1 {
        dv[i + 1] = y1[i] - sys.bu[i] * dq;
    }
    // back-substitute aux: da = K_aa⁻¹(rhs_a − K_ar dr)
    let mut daux = vec![0.0; ne * n];
    for e in 0..ne {
        let kinv = &sys.kaa_inv[e * n * n..(e + 1) * n * n];
        let kar = &sys.kar[e * n * nr..(e + 1) * n * nr];
        let ids = &el.ids[e * (n + 1)..(e + 1) * (n + 1)];
        let dr: Vec<f64> = ids
            .iter()
            .map(|&i| dv[i])
            .chain(std::iter::once(dq))
            .collect();
        let t: Vec<f64> = (0..n)
            .map(|l| dot(&kar[l * nr..(l + 1) * nr], &dr))
            .collect();
        for i in 0..n {
            daux[e * n + i] = ya[e * n + i] - dot(&kinv[i * n..(i + 1) * n], &t);
        }
    }
    // ds = r_p − A dx, dz = (r_c − Z ds)/S
    let mut ds = vec![0.0; m];
    let mut dz = vec![0.0; m];
    let mut lx = vec![0.0; cols];
    for e in 0..ne {
        el.local_x(e, &dv, &daux, dq, &mut lx);
        let a = el.block(e);
        for r in 0..rows {
            let i = e * rows + r;
            ds[i] = rp[i] - dot(&a[r * cols..(r + 1) * cols], &lx);
            dz[i] = (rc[i] - z[i] * ds[i]) / s[i];
        }
    }
    Direction {
        dv,
        daux,
        dq,
        ds,
        dz,
    }
}
