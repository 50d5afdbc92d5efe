//! Axis-aligned boxes and their standard simplicial triangulations.
//!
//! A grid is anchored at the origin: along axis `a` the vertex with integer index
//! `i` sits at `i * spacing[a]`, where `spacing[a] = hi[a] / counts[a]` and `i`
//! runs over `offsets[a]..=counts[a]`. Every grid cell is cut into `n!` simplices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symlin::Mat;

/// Barycentric containment tolerance.
pub const CONTAINMENT_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if lo.is_empty() {
            return Err(Error::InvalidBox("zero-dimensional box".into()));
        }
        for (a, (l, h)) in lo.iter().zip(&hi).enumerate() {
            if !(l < h) || !l.is_finite() || !h.is_finite() {
                return Err(Error::InvalidBox(format!("axis {a}: [{l}, {h}]")));
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (l, h))| *v >= l - tol && *v <= h + tol)
    }
}

/// Grid resolution and per-axis index range start.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    pub counts: Vec<usize>,
    pub offsets: Vec<i64>,
}

impl GridSpec {
    pub fn new(counts: Vec<usize>, offsets: Vec<i64>) -> Result<Self> {
        let g = Self { counts, offsets };
        g.validate()?;
        Ok(g)
    }

    /// Offsets chosen so the grid exactly covers `bx` (requires grid planes on `lo`).
    pub fn covering(bx: &AxisBox, counts: Vec<usize>) -> Result<Self> {
        if counts.len() != bx.dim() {
            return Err(Error::DimensionMismatch {
                expected: bx.dim(),
                got: counts.len(),
            });
        }
        let mut offsets = Vec::with_capacity(counts.len());
        for (a, &c) in counts.iter().enumerate() {
            if c == 0 {
                return Err(Error::InvalidGrid(format!("axis {a}: zero count")));
            }
            if bx.hi[a] <= 0.0 {
                return Err(Error::InvalidGrid(format!(
                    "axis {a}: upper bound must be positive for an origin-anchored grid"
                )));
            }
            let rho = bx.hi[a] / c as f64;
            let t = bx.lo[a] / rho;
            let r = t.round();
            let o = if (t - r).abs() < 1e-9 { r } else { t.floor() };
            offsets.push(o as i64);
        }
        Self::new(counts, offsets)
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    fn validate(&self) -> Result<()> {
        if self.counts.len() != self.offsets.len() {
            return Err(Error::DimensionMismatch {
                expected: self.counts.len(),
                got: self.offsets.len(),
            });
        }
        for (a, (&c, &o)) in self.counts.iter().zip(&self.offsets).enumerate() {
            if c == 0 {
                return Err(Error::InvalidGrid(format!("axis {a}: zero count")));
            }
            if o >= c as i64 {
                return Err(Error::InvalidGrid(format!(
                    "axis {a}: offset {o} leaves no cells below {c}"
                )));
            }
        }
        Ok(())
    }

    /// Number of vertices along each axis.
    pub fn axis_vertices(&self) -> Vec<usize> {
        self.counts
            .iter()
            .zip(&self.offsets)
            .map(|(&c, &o)| (c as i64 - o + 1) as usize)
            .collect()
    }

    /// Number of cells along each axis.
    pub fn axis_cells(&self) -> Vec<usize> {
        self.axis_vertices().iter().map(|v| v - 1).collect()
    }

    pub fn vertex_count(&self) -> usize {
        self.axis_vertices().iter().product()
    }

    pub fn simplex_count(&self) -> usize {
        factorial(self.dim()) * self.axis_cells().iter().product::<usize>()
    }
}

/// How a grid cell is cut into simplices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subdivision {
    /// Every cell uses the same Kuhn pattern along increasing coordinates.
    #[default]
    Kuhn,
    /// Kuhn pattern mirrored through the coordinate planes, so cells with a
    /// negative index along an axis walk that axis toward the origin.
    Reflected,
}

#[derive(Clone, Debug)]
pub struct Simplex {
    pub vertex_ids: Vec<usize>,
    /// Rows are `x_k - x_0` for `k = 1..=n`.
    pub shape_matrix: Mat,
    pub shape_inverse: Mat,
    pub diameter: f64,
    /// Lower-corner grid index of the cell this simplex belongs to.
    pub cell: Vec<i64>,
}

impl Simplex {
    pub fn dim(&self) -> usize {
        self.vertex_ids.len() - 1
    }
}

#[derive(Clone, Debug)]
pub struct Triangulation {
    n: usize,
    grid: GridSpec,
    spacing: Vec<f64>,
    subdivision: Subdivision,
    vertices: Vec<Vec<f64>>,
    vertex_index: Vec<Vec<i64>>,
    simplices: Vec<Simplex>,
    incident: Vec<Vec<usize>>,
}

/// Standard triangulation of the grid over `bx` with the default Kuhn pattern.
pub fn build_box_triangulation(bx: &AxisBox, grid: &GridSpec) -> Result<Triangulation> {
    Triangulation::build(bx, grid, Subdivision::Kuhn)
}

impl Triangulation {
    pub fn build(bx: &AxisBox, grid: &GridSpec, subdivision: Subdivision) -> Result<Self> {
        grid.validate()?;
        let n = bx.dim();
        if grid.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: grid.dim(),
            });
        }
        let mut spacing = Vec::with_capacity(n);
        for a in 0..n {
            if bx.hi[a] <= 0.0 {
                return Err(Error::InvalidGrid(format!(
                    "axis {a}: upper bound must be positive for an origin-anchored grid"
                )));
            }
            let rho = bx.hi[a] / grid.counts[a] as f64;
            if grid.offsets[a] as f64 * rho > bx.lo[a] + 1e-9 * rho {
                return Err(Error::InvalidGrid(format!(
                    "axis {a}: grid starts at {} above box bound {}",
                    grid.offsets[a] as f64 * rho,
                    bx.lo[a]
                )));
            }
            spacing.push(rho);
        }

        let axis_vertices = grid.axis_vertices();
        let nv = grid.vertex_count();
        let mut vertices = Vec::with_capacity(nv);
        let mut vertex_index = Vec::with_capacity(nv);
        for lin in 0..nv {
            let idx = unravel(lin, &axis_vertices, &grid.offsets);
            vertices.push(
                idx.iter()
                    .zip(&spacing)
                    .map(|(&i, &h)| i as f64 * h)
                    .collect(),
            );
            vertex_index.push(idx);
        }

        let perms = permutations(n);
        let axis_cells = grid.axis_cells();
        let ncells: usize = axis_cells.iter().product();
        let mut simplices = Vec::with_capacity(ncells * perms.len());
        let mut incident = vec![Vec::new(); nv];
        for cl in 0..ncells {
            let cell = unravel(cl, &axis_cells, &grid.offsets);
            let mut start = cell.clone();
            let mut step = vec![1i64; n];
            if subdivision == Subdivision::Reflected {
                for a in 0..n {
                    if cell[a] < 0 {
                        start[a] = cell[a] + 1;
                        step[a] = -1;
                    }
                }
            }
            for perm in &perms {
                let mut cur = start.clone();
                let mut ids = Vec::with_capacity(n + 1);
                ids.push(ravel(&cur, &axis_vertices, &grid.offsets));
                for &a in perm {
                    cur[a] += step[a];
                    ids.push(ravel(&cur, &axis_vertices, &grid.offsets));
                }
                let sid = simplices.len();
                for &v in &ids {
                    incident[v].push(sid);
                }
                simplices.push(make_simplex(ids, &vertices, cell.clone())?);
            }
        }

        Ok(Self {
            n,
            grid: grid.clone(),
            spacing,
            subdivision,
            vertices,
            vertex_index,
            simplices,
            incident,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn subdivision(&self) -> Subdivision {
        self.subdivision
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn vertex(&self, k: usize) -> &[f64] {
        &self.vertices[k]
    }

    /// Integer grid index of vertex `k`.
    pub fn vertex_grid_index(&self, k: usize) -> &[i64] {
        &self.vertex_index[k]
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn simplex(&self, s: usize) -> &Simplex {
        &self.simplices[s]
    }

    pub fn incident_simplices(&self, k: usize) -> &[usize] {
        &self.incident[k]
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn simplex_count(&self) -> usize {
        self.simplices.len()
    }

    /// Bounding box of the triangulated region.
    pub fn domain(&self) -> AxisBox {
        let lo = (0..self.n)
            .map(|a| self.grid.offsets[a] as f64 * self.spacing[a])
            .collect();
        let hi = (0..self.n)
            .map(|a| self.grid.counts[a] as f64 * self.spacing[a])
            .collect();
        AxisBox { lo, hi }
    }

    pub fn max_diameter(&self) -> f64 {
        self.simplices.iter().fold(0.0, |m, s| m.max(s.diameter))
    }

    /// Length of a grid cell's main diagonal.
    pub fn cell_diagonal(&self) -> f64 {
        self.spacing.iter().map(|h| h * h).sum::<f64>().sqrt()
    }

    pub fn vertex_of_grid_index(&self, idx: &[i64]) -> Option<usize> {
        let axis_vertices = self.grid.axis_vertices();
        for a in 0..self.n {
            if idx[a] < self.grid.offsets[a] || idx[a] > self.grid.counts[a] as i64 {
                return None;
            }
        }
        Some(ravel(idx, &axis_vertices, &self.grid.offsets))
    }

    pub fn barycentric(&self, s: usize, x: &[f64]) -> Result<Vec<f64>> {
        barycentric(&self.simplices[s], &self.vertices, x)
    }

    /// Simplices (ascending index) whose closed hull contains `x` within tolerance.
    pub fn containing_simplices(&self, x: &[f64]) -> Result<Vec<(usize, Vec<f64>)>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let axis_cells = self.grid.axis_cells();
        let mut ranges = Vec::with_capacity(self.n);
        for a in 0..self.n {
            let t = x[a] / self.spacing[a];
            let lo_c = self.grid.offsets[a];
            let hi_c = self.grid.counts[a] as i64 - 1;
            let tol = 1e-9;
            if t < lo_c as f64 - tol || t > (hi_c + 1) as f64 + tol {
                return Err(Error::OutsideDomain(x.to_vec()));
            }
            let a0 = ((t - tol).floor() as i64).clamp(lo_c, hi_c);
            let a1 = ((t + tol).floor() as i64).clamp(lo_c, hi_c);
            ranges.push(a0..=a1);
        }
        let mut cells: Vec<usize> = Vec::new();
        let mut idx: Vec<i64> = ranges.iter().map(|r| *r.start()).collect();
        'odometer: loop {
            cells.push(ravel(&idx, &axis_cells, &self.grid.offsets));
            for a in (0..self.n).rev() {
                if idx[a] < *ranges[a].end() {
                    idx[a] += 1;
                    continue 'odometer;
                }
                idx[a] = *ranges[a].start();
            }
            break;
        }
        cells.sort_unstable();
        let per_cell = factorial(self.n);
        let mut out = Vec::new();
        for c in cells {
            for s in (c * per_cell)..((c + 1) * per_cell) {
                let lam = barycentric_raw(&self.simplices[s], &self.vertices, x);
                if lam.iter().all(|&l| l >= -CONTAINMENT_TOL) {
                    out.push((s, lam));
                }
            }
        }
        if out.is_empty() {
            return Err(Error::OutsideDomain(x.to_vec()));
        }
        Ok(out)
    }

    /// Lowest-index simplex containing `x`, with its barycentric coordinates.
    pub fn locate(&self, x: &[f64]) -> Result<(usize, Vec<f64>)> {
        Ok(self.containing_simplices(x)?.swap_remove(0))
    }

    /// Lowest-index simplex containing `x` that `x + θ·direction` stays in for
    /// all small `θ ≥ 0`.
    pub fn locate_for_orbit(&self, x: &[f64], direction: &[f64]) -> Result<usize> {
        if direction.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: direction.len(),
            });
        }
        for (s, lam) in self.containing_simplices(x)? {
            let d = barycentric_direction(&self.simplices[s], direction);
            let scale = d.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let admissible = lam
                .iter()
                .zip(&d)
                .all(|(&l, &dl)| l > CONTAINMENT_TOL || dl >= -1e-10 * scale);
            if admissible {
                return Ok(s);
            }
        }
        Err(Error::OrbitLeavesDomain(x.to_vec()))
    }
}

/// Barycentric coordinates of `x` in `simplex`; fails when `x` lies outside.
pub fn barycentric(simplex: &Simplex, vertices: &[Vec<f64>], x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != simplex.dim() {
        return Err(Error::DimensionMismatch {
            expected: simplex.dim(),
            got: x.len(),
        });
    }
    let lam = barycentric_raw(simplex, vertices, x);
    if lam
        .iter()
        .any(|&l| !(-CONTAINMENT_TOL..=1.0 + CONTAINMENT_TOL).contains(&l))
    {
        return Err(Error::OutsideDomain(x.to_vec()));
    }
    Ok(lam)
}

/// Barycentric coordinates without a containment check.
pub fn barycentric_raw(simplex: &Simplex, vertices: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    let x0 = &vertices[simplex.vertex_ids[0]];
    let diff: Vec<f64> = x.iter().zip(x0).map(|(a, b)| a - b).collect();
    // x - x0 = Xᵀ λ, so λ = X⁻ᵀ (x - x0)
    let tail = simplex.shape_inverse.tr_mul_vec(&diff);
    let mut lam = Vec::with_capacity(tail.len() + 1);
    lam.push(1.0 - tail.iter().sum::<f64>());
    lam.extend(tail);
    lam
}

/// Rate of change of barycentric coordinates when moving along `direction`.
fn barycentric_direction(simplex: &Simplex, direction: &[f64]) -> Vec<f64> {
    let tail = simplex.shape_inverse.tr_mul_vec(direction);
    let mut d = Vec::with_capacity(tail.len() + 1);
    d.push(-tail.iter().sum::<f64>());
    d.extend(tail);
    d
}

fn make_simplex(ids: Vec<usize>, vertices: &[Vec<f64>], cell: Vec<i64>) -> Result<Simplex> {
    let n = ids.len() - 1;
    let x0 = &vertices[ids[0]];
    let rows: Vec<Vec<f64>> = ids[1..]
        .iter()
        .map(|&k| vertices[k].iter().zip(x0).map(|(a, b)| a - b).collect())
        .collect();
    let shape_matrix = Mat::from_rows(&rows)?;
    let shape_inverse = shape_matrix
        .inverse()
        .ok_or_else(|| Error::InvalidGrid("degenerate simplex".into()))?;
    let mut diameter: f64 = 0.0;
    for i in 0..=n {
        for j in (i + 1)..=n {
            let d: f64 = vertices[ids[i]]
                .iter()
                .zip(&vertices[ids[j]])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            diameter = diameter.max(d.sqrt());
        }
    }
    Ok(Simplex {
        vertex_ids: ids,
        shape_matrix,
        shape_inverse,
        diameter,
        cell,
    })
}

fn unravel(mut lin: usize, extents: &[usize], offsets: &[i64]) -> Vec<i64> {
    let mut idx = vec![0i64; extents.len()];
    for a in (0..extents.len()).rev() {
        idx[a] = (lin % extents[a]) as i64 + offsets[a];
        lin /= extents[a];
    }
    idx
}

fn ravel(idx: &[i64], extents: &[usize], offsets: &[i64]) -> usize {
    let mut lin = 0usize;
    for a in 0..extents.len() {
        lin = lin * extents[a] + (idx[a] - offsets[a]) as usize;
    }
    lin
}

pub(crate) fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// All permutations of `0..n` in lexicographic order.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..n.saturating_sub(1))
            .rev()
            .find(|&i| cur[i] < cur[i + 1])
        else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    out
}

/// Checks that every simplex of `coarse` is a union of simplices of `fine`.
///
/// Both grids are origin-anchored, so this holds exactly when they share the
/// subdivision pattern, the spacing ratio is the same integer on every axis, and
/// the fine grid covers the coarse domain.
pub fn check_refinement(coarse: &Triangulation, fine: &Triangulation) -> Result<u64> {
    if coarse.dim() != fine.dim() {
        return Err(Error::NotRefining("dimension differs".into()));
    }
    if coarse.subdivision() != fine.subdivision() {
        return Err(Error::NotRefining("subdivision patterns differ".into()));
    }
    let mut factor: Option<u64> = None;
    for a in 0..coarse.dim() {
        let ratio = coarse.spacing[a] / fine.spacing[a];
        let k = ratio.round();
        if k < 1.0 || (ratio - k).abs() > 1e-9 * ratio {
            return Err(Error::NotRefining(format!(
                "axis {a}: spacing ratio {ratio} is not an integer"
            )));
        }
        match factor {
            None => factor = Some(k as u64),
            Some(f) if f != k as u64 => {
                return Err(Error::NotRefining(format!(
                    "axis {a}: ratio {k} differs from {f} on earlier axes"
                )))
            }
            _ => {}
        }
    }
    let cd = coarse.domain();
    let fd = fine.domain();
    for a in 0..coarse.dim() {
        let tol = 1e-9 * fine.spacing[a];
        if fd.lo[a] > cd.lo[a] + tol || fd.hi[a] < cd.hi[a] - tol {
            return Err(Error::NotRefining(format!(
                "axis {a}: fine grid does not cover coarse domain"
            )));
        }
    }
    Ok(factor.unwrap_or(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lorenz_box() -> AxisBox {
        AxisBox::new(vec![-1.0, -0.29, 0.0], vec![1.0, 0.29, 0.57]).unwrap()
    }

    #[test]
    fn lorenz_coarse_counts() {
        let bx = lorenz_box();
        let g = GridSpec::covering(&bx, vec![12, 6, 10]).unwrap();
        assert_eq!(g.offsets, vec![-12, -6, 0]);
        let t = build_box_triangulation(&bx, &g).unwrap();
        assert_eq!(t.vertex_count(), 3575);
        assert_eq!(t.simplex_count(), 17_280);
    }

    #[test]
    fn lorenz_star_grid_has_layer_below_zero() {
        let g = GridSpec::new(vec![12, 6, 10], vec![-12, -6, -1]).unwrap();
        let t = build_box_triangulation(&lorenz_box(), &g).unwrap();
        assert_eq!(t.vertex_count(), 25 * 13 * 12);
        assert!((t.domain().lo()[2] + 0.057).abs() < 1e-15);
    }

    #[test]
    fn trivial_interval_and_square() {
        let bx = AxisBox::new(vec![0.0], vec![1.0]).unwrap();
        let t = build_box_triangulation(&bx, &GridSpec::covering(&bx, vec![1]).unwrap()).unwrap();
        assert_eq!((t.vertex_count(), t.simplex_count()), (2, 1));
        assert_eq!(t.simplex(0).diameter, 1.0);

        let bx = AxisBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let t =
            build_box_triangulation(&bx, &GridSpec::covering(&bx, vec![1, 1]).unwrap()).unwrap();
        assert_eq!((t.vertex_count(), t.simplex_count()), (4, 2));
        for s in t.simplices() {
            assert!((s.diameter - 2f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let bx = lorenz_box();
        let g = GridSpec::new(vec![1, 1], vec![0, 0]).unwrap();
        assert!(matches!(
            build_box_triangulation(&bx, &g),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(AxisBox::new(vec![1.0], vec![0.0]).is_err());
    }

    #[test]
    fn vertex_and_centroid_barycentric() {
        let bx = lorenz_box();
        let t =
            build_box_triangulation(&bx, &GridSpec::covering(&bx, vec![2, 2, 2]).unwrap()).unwrap();
        let s = t.simplex(5);
        for (j, &v) in s.vertex_ids.iter().enumerate() {
            let lam = t.barycentric(5, t.vertex(v)).unwrap();
            for (k, l) in lam.iter().enumerate() {
                let e = if k == j { 1.0 } else { 0.0 };
                assert!((l - e).abs() < 1e-12);
            }
        }
        let c: Vec<f64> = (0..3)
            .map(|a| s.vertex_ids.iter().map(|&v| t.vertex(v)[a]).sum::<f64>() / 4.0)
            .collect();
        for l in t.barycentric(5, &c).unwrap() {
            assert!((l - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn locate_on_shared_facet_follows_direction() {
        let bx = AxisBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let t =
            build_box_triangulation(&bx, &GridSpec::covering(&bx, vec![1, 1]).unwrap()).unwrap();
        let x = [0.5, 0.5];
        let a = t.locate_for_orbit(&x, &[1.0, -1.0]).unwrap();
        let b = t.locate_for_orbit(&x, &[-1.0, 1.0]).unwrap();
        assert_ne!(a, b);
        for (s, d) in [(a, [1.0, -1.0]), (b, [-1.0, 1.0])] {
            let p = [x[0] + 1e-9 * d[0], x[1] + 1e-9 * d[1]];
            assert!(t.barycentric(s, &p).is_ok());
        }
        assert_eq!(t.locate_for_orbit(&x, &[0.0, 0.0]).unwrap(), 0);
    }

    #[test]
    fn outward_direction_on_boundary_is_reported() {
        let bx = AxisBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let t =
            build_box_triangulation(&bx, &GridSpec::covering(&bx, vec![2, 2]).unwrap()).unwrap();
        assert!(matches!(
            t.locate_for_orbit(&[1.0, 0.3], &[1.0, 0.0]),
            Err(Error::OrbitLeavesDomain(_))
        ));
        assert!(matches!(
            t.locate(&[1.5, 0.3]),
            Err(Error::OutsideDomain(_))
        ));
    }

    #[test]
    fn permutations_are_complete() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(1), vec![vec![0]]);
    }

    #[test]
    fn reflected_pattern_is_symmetric() {
        let bx = AxisBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let g = GridSpec::covering(&bx, vec![1, 1]).unwrap();
        let t = Triangulation::build(&bx, &g, Subdivision::Reflected).unwrap();
        // every diagonal passes through the origin
        for s in t.simplices() {
            assert!(s.vertex_ids.iter().any(|&v| t.vertex(v) == [0.0, 0.0]));
        }
    }

    #[test]
    fn refinement_check() {
        let bx = lorenz_box();
        let coarse =
            build_box_triangulation(&bx, &GridSpec::covering(&bx, vec![12, 6, 10]).unwrap())
                .unwrap();
        let fine = build_box_triangulation(
            &bx,
            &GridSpec::new(vec![24, 12, 20], vec![-24, -12, -2]).unwrap(),
        )
        .unwrap();
        assert_eq!(check_refinement(&coarse, &fine).unwrap(), 2);
        let paper = build_box_triangulation(
            &bx,
            &GridSpec::new(vec![30, 14, 28], vec![-30, -14, -1]).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            check_refinement(&coarse, &paper),
            Err(Error::NotRefining(_))
        ));
    }
}
