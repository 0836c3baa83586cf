//! Continuum reference on a rectangle: the harmonic function h with boundary
//! values 0 on the arc ab and 1 on the arc ba, Phi' = 2 (h_y + i h_x) and
//! f = sqrt(Phi'), and the comparison of discrete data against them.

use crate::analysis::harmonic::{dirichlet_solve, BoxPoisson, HarmonicGrid, Site, SolveError};
use crate::fermion::FermionField;
use crate::lattice::{ContinuumFrame, EdgeKind, FaceId, MedialDomain};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ContinuumError {
    #[error("domain has no continuum frame")]
    NoFrame,
    #[error("rectangle {0} x {1} does not fit a square grid at this resolution")]
    Aspect(f64, f64),
    #[error("point ({0}, {1}) lies outside the rectangle")]
    Outside(f64, f64),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Rectangle [0, width] x [0, height] with two marked boundary points.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RectGeometry {
    pub width: f64,
    pub height: f64,
    pub a: (f64, f64),
    pub b: (f64, f64),
}

impl RectGeometry {
    pub fn from_frame(f: &ContinuumFrame) -> RectGeometry {
        RectGeometry { width: f.width, height: f.height, a: f.a, b: f.b }
    }

    pub fn perimeter(&self) -> f64 {
        2.0 * (self.width + self.height)
    }

    /// Counterclockwise arclength from the origin corner of the nearest boundary point.
    pub fn arclength(&self, p: (f64, f64)) -> f64 {
        let (w, h) = (self.width, self.height);
        let d = [p.1, w - p.0, h - p.1, p.0];
        let side = (0..4).min_by(|&i, &j| d[i].total_cmp(&d[j])).unwrap();
        match side {
            0 => p.0.clamp(0.0, w),
            1 => w + p.1.clamp(0.0, h),
            2 => w + h + (w - p.0).clamp(0.0, w),
            _ => 2.0 * w + h + (h - p.1).clamp(0.0, h),
        }
    }

    /// Boundary data: 0 on the arc from a to b, 1 on the arc from b to a, 1/2 at a and b.
    pub fn boundary_value(&self, p: (f64, f64), tol: f64) -> f64 {
        let per = self.perimeter();
        let s = self.arclength(p);
        let (sa, sb) = (self.arclength(self.a), self.arclength(self.b));
        if (s - sa).abs() < tol || (s - sb).abs() < tol {
            return 0.5;
        }
        let from_a = (s - sa).rem_euclid(per);
        let ab = (sb - sa).rem_euclid(per);
        if from_a < ab {
            0.0
        } else {
            1.0
        }
    }

    pub fn boundary_distance(&self, p: (f64, f64)) -> f64 {
        p.0.min(self.width - p.0).min(p.1).min(self.height - p.1)
    }
}

/// Harmonic extension on a square grid of spacing `s` covering the rectangle.
struct GridSolution {
    nx: usize,
    ny: usize,
    s: f64,
    h: Vec<f64>,
}

fn solve_grid(g: &RectGeometry, nx: usize, ny: usize) -> GridSolution {
    let s = g.width / nx as f64;
    let solver = BoxPoisson::new(nx - 1, ny - 1);
    let h = solver.dirichlet(|i, j| g.boundary_value((i as f64 * s, j as f64 * s), 1e-9 * s));
    GridSolution { nx, ny, s, h }
}

impl GridSolution {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.h[j * (self.nx + 1) + i]
    }

    /// Central differences at an interior node, one-sided on the ring.
    fn grad(&self, i: usize, j: usize) -> (f64, f64) {
        let (il, ir) = (i.saturating_sub(1), (i + 1).min(self.nx));
        let (jl, jr) = (j.saturating_sub(1), (j + 1).min(self.ny));
        let gx = (self.at(ir, j) - self.at(il, j)) / ((ir - il) as f64 * self.s);
        let gy = (self.at(i, jr) - self.at(i, jl)) / ((jr - jl) as f64 * self.s);
        (gx, gy)
    }
}

/// Richardson-extrapolated h and its gradient on a grid of spacing 1/`resolution`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContinuumReference {
    pub geometry: RectGeometry,
    pub nx: usize,
    pub ny: usize,
    pub spacing: f64,
    pub h: Vec<f64>,
    pub hx: Vec<f64>,
    pub hy: Vec<f64>,
    /// sqrt(Phi') with a branch continuous over the interior nodes.
    pub f: Vec<Complex64>,
    /// Largest |fine - extrapolated| over nodes at distance >= 0.1 * min side from the boundary.
    pub error_estimate: f64,
}

pub fn reference_h(g: &RectGeometry, resolution: usize) -> Result<ContinuumReference, ContinuumError> {
    let nx = ((g.width * resolution as f64).round() as usize).max(2);
    let s = g.width / nx as f64;
    let nyf = g.height / s;
    let ny = nyf.round() as usize;
    if (nyf - ny as f64).abs() > 1e-6 || ny < 2 {
        return Err(ContinuumError::Aspect(g.width, g.height));
    }
    let coarse = solve_grid(g, nx, ny);
    let fine = solve_grid(g, 2 * nx, 2 * ny);
    let w = nx + 1;
    let n = w * (ny + 1);
    let (mut h, mut hx, mut hy) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut err = 0.0f64;
    let margin = 0.1 * g.width.min(g.height);
    for j in 0..=ny {
        for i in 0..=nx {
            let k = j * w + i;
            let hc = coarse.at(i, j);
            let hf = fine.at(2 * i, 2 * j);
            h[k] = (4.0 * hf - hc) / 3.0;
            let (cx, cy) = coarse.grad(i, j);
            let (fx, fy) = fine.grad(2 * i, 2 * j);
            hx[k] = (4.0 * fx - cx) / 3.0;
            hy[k] = (4.0 * fy - cy) / 3.0;
            if g.boundary_distance((i as f64 * s, j as f64 * s)) >= margin {
                err = err.max((hf - h[k]).abs());
            }
        }
    }
    let f = continuous_sqrt(nx, ny, &hx, &hy);
    Ok(ContinuumReference { geometry: *g, nx, ny, spacing: s, h, hx, hy, f, error_estimate: err })
}

/// sqrt(2 (h_y + i h_x)) on interior nodes, choosing signs by breadth-first
/// continuation from the center; ring nodes copy their interior neighbour's branch.
fn continuous_sqrt(nx: usize, ny: usize, hx: &[f64], hy: &[f64]) -> Vec<Complex64> {
    let w = nx + 1;
    let phi = |k: usize| Complex64::new(2.0 * hy[k], 2.0 * hx[k]);
    let mut f = vec![Complex64::new(f64::NAN, f64::NAN); w * (ny + 1)];
    let start = (ny / 2) * w + nx / 2;
    f[start] = phi(start).sqrt();
    let mut queue = VecDeque::from([start]);
    while let Some(k) = queue.pop_front() {
        let (i, j) = (k % w, k / w);
        let mut nbs = Vec::with_capacity(4);
        if i > 0 {
            nbs.push(k - 1);
        }
        if i < nx {
            nbs.push(k + 1);
        }
        if j > 0 {
            nbs.push(k - w);
        }
        if j < ny {
            nbs.push(k + w);
        }
        for nb in nbs {
            if !f[nb].re.is_nan() {
                continue;
            }
            let r = phi(nb).sqrt();
            f[nb] = if (r - f[k]).norm() <= (-r - f[k]).norm() { r } else { -r };
            let (ni, nj) = (nb % w, nb / w);
            if ni > 0 && ni < nx && nj > 0 && nj < ny {
                queue.push_back(nb);
            }
        }
    }
    f
}

impl ContinuumReference {
    fn locate(&self, p: (f64, f64)) -> Result<(usize, usize, f64, f64), ContinuumError> {
        let g = &self.geometry;
        let eps = 1e-12;
        if p.0 < -eps || p.1 < -eps || p.0 > g.width + eps || p.1 > g.height + eps {
            return Err(ContinuumError::Outside(p.0, p.1));
        }
        let u = (p.0 / self.spacing).clamp(0.0, self.nx as f64);
        let v = (p.1 / self.spacing).clamp(0.0, self.ny as f64);
        let i = (u.floor() as usize).min(self.nx - 1);
        let j = (v.floor() as usize).min(self.ny - 1);
        Ok((i, j, u - i as f64, v - j as f64))
    }

    fn bilinear<T>(&self, data: &[T], p: (f64, f64)) -> Result<T, ContinuumError>
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
    {
        let (i, j, tx, ty) = self.locate(p)?;
        let w = self.nx + 1;
        let k = j * w + i;
        Ok(data[k] * ((1.0 - tx) * (1.0 - ty)) + data[k + 1] * (tx * (1.0 - ty)) + data[k + w] * ((1.0 - tx) * ty)
            + data[k + w + 1] * (tx * ty))
    }

    pub fn h_at(&self, p: (f64, f64)) -> Result<f64, ContinuumError> {
        self.bilinear(&self.h, p)
    }

    pub fn gradient_at(&self, p: (f64, f64)) -> Result<(f64, f64), ContinuumError> {
        Ok((self.bilinear(&self.hx, p)?, self.bilinear(&self.hy, p)?))
    }

    /// Phi' = 2 (h_y + i h_x) in rectangle coordinates.
    pub fn phi_prime(&self, p: (f64, f64)) -> Result<Complex64, ContinuumError> {
        let (gx, gy) = self.gradient_at(p)?;
        Ok(Complex64::new(2.0 * gy, 2.0 * gx))
    }

    /// sqrt(Phi') on the continuous branch, in rectangle coordinates.
    pub fn sqrt_phi_prime(&self, p: (f64, f64)) -> Result<Complex64, ContinuumError> {
        self.bilinear(&self.f, p)
    }

    /// sqrt(Phi') for the domain's own physical coordinates (medial axes scaled
    /// by the mesh), which differ from rectangle axes by the frame rotation.
    pub fn f_in_frame(&self, frame: &ContinuumFrame, p: (f64, f64)) -> Result<Complex64, ContinuumError> {
        let half = Complex64::from_polar(1.0, -frame.rot.arg() / 2.0);
        Ok(self.sqrt_phi_prime(p)? * half)
    }
}

/// H from squared edge values by least squares with the arc values held fixed
/// (0 beyond ab, 1 beyond ba). Reduces to the exact primitive when the
/// increments are consistent.
pub fn integrate_h(dom: &MedialDomain, edge_sq: &[f64]) -> Result<Vec<Option<f64>>, ContinuumError> {
    let nf = dom.faces.len();
    let arcs = dom.boundary_arcs();
    let mut fixed: Vec<Option<f64>> = vec![None; nf];
    if let Some(arcs) = arcs {
        for &f in &arcs.outside_ab {
            fixed[f] = Some(0.0);
        }
        for &f in &arcs.outside_ba {
            fixed[f] = Some(1.0);
        }
    }
    let mut adj: Vec<Vec<(FaceId, f64)>> = vec![Vec::new(); nf];
    for (e, ed) in dom.edges.iter().enumerate() {
        if ed.kind != EdgeKind::Full {
            continue;
        }
        // H(black) - H(white) = |F(e)|^2
        adj[ed.black].push((ed.white, edge_sq[e]));
        adj[ed.white].push((ed.black, -edge_sq[e]));
    }
    let unknown: Vec<usize> = (0..nf).filter(|&f| fixed[f].is_none() && !adj[f].is_empty()).collect();
    let mut index = vec![usize::MAX; nf];
    for (k, &f) in unknown.iter().enumerate() {
        index[f] = k;
    }
    let n = unknown.len();
    // normal equations: deg(f) H(f) - sum_{free nb} H(nb) = sum inc + sum_{fixed nb} value
    let mut b = vec![0.0; n];
    for (k, &f) in unknown.iter().enumerate() {
        for &(g, inc) in &adj[f] {
            b[k] += inc;
            if let Some(v) = fixed[g] {
                b[k] += v;
            }
        }
    }
    let apply = |x: &[f64], out: &mut [f64]| {
        for (k, &f) in unknown.iter().enumerate() {
            let mut s = adj[f].len() as f64 * x[k];
            for &(g, _) in &adj[f] {
                if index[g] != usize::MAX {
                    s -= x[index[g]];
                }
            }
            out[k] = s;
        }
    };
    let x = conjugate_gradients(n, &b, apply, 1e-12, 100_000)?;
    let mut out = fixed;
    for (k, &f) in unknown.iter().enumerate() {
        out[f] = Some(x[k]);
    }
    Ok(out)
}

fn conjugate_gradients(
    n: usize,
    b: &[f64],
    apply: impl Fn(&[f64], &mut [f64]),
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>, SolveError> {
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr: f64 = r.iter().map(|v| v * v).sum();
    let mut ap = vec![0.0; n];
    let scale = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for it in 0..max_iter {
        let res = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if res <= tol * scale {
            return Ok(x);
        }
        apply(&p, &mut ap);
        let alpha = rr / p.iter().zip(&ap).map(|(a, b)| a * b).sum::<f64>();
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let rr_new: f64 = r.iter().map(|v| v * v).sum();
        for k in 0..n {
            p[k] = r[k] + rr_new / rr * p[k];
        }
        rr = rr_new;
        if it + 1 == max_iter {
            return Err(SolveError::NoConvergence { iterations: max_iter, residual: res });
        }
    }
    Ok(x)
}

/// One row of the mesh-refinement table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub delta: f64,
    /// sup over faces in the r-interior of |H - h|.
    pub sup_h_err: f64,
    /// sup over vertices in the r-interior of |delta^{-1/2} F - c f| after fitting c.
    pub sup_f_resid: f64,
    pub fitted_c: f64,
    pub h_points: usize,
    pub f_points: usize,
}

/// Compare discrete H (per face) and F (per vertex) against the reference on
/// points at rectangle distance >= `r` from the boundary.
pub fn compare_convergence(
    dom: &MedialDomain,
    h: &[Option<f64>],
    f: &FermionField<Complex64>,
    reference: &ContinuumReference,
    r: f64,
) -> Result<ConvergenceRow, ContinuumError> {
    let frame = dom.frame.ok_or(ContinuumError::NoFrame)?;
    let g = &reference.geometry;
    let mut sup_h = 0.0f64;
    let mut nh = 0;
    for (fid, face) in dom.faces.iter().enumerate() {
        let (Some(hv), true) = (h[fid], face.inside) else { continue };
        let c = dom.face_center(fid);
        let p = frame.to_rect(Complex64::new(c.0, c.1));
        if g.boundary_distance(p) + 1e-12 >= r {
            sup_h = sup_h.max((hv - reference.h_at(p)?).abs());
            nh += 1;
        }
    }
    let scale = dom.delta.powf(-0.5);
    let mut pairs = Vec::new();
    for (v, vert) in dom.vertices.iter().enumerate() {
        let Some(fv) = f.vertex[v] else { continue };
        if !dom.is_interior(v) {
            continue;
        }
        let p = frame.to_rect(Complex64::new(vert.pos.0 as f64, vert.pos.1 as f64));
        if g.boundary_distance(p) + 1e-12 >= r {
            pairs.push((fv * scale, reference.f_in_frame(&frame, p)?));
        }
    }
    let num: f64 = pairs.iter().map(|(d, c)| (c.conj() * d).re).sum();
    let den: f64 = pairs.iter().map(|(_, c)| c.norm_sqr()).sum();
    let fitted = if den > 0.0 { num / den } else { 0.0 };
    let sup_f = pairs.iter().map(|(d, c)| (d - c * fitted).norm()).fold(0.0, f64::max);
    Ok(ConvergenceRow { delta: dom.delta, sup_h_err: sup_h, sup_f_resid: sup_f, fitted_c: fitted, h_points: nh, f_points: pairs.len() })
}

/// Grid harmonic measure of the arc ba on the rectangle with a channel of
/// `fjord_width` cells and length `depth` attached to the top side at a quarter
/// of the width. The channel walls take the boundary value at the attachment.
/// Rectangle node (i, j) is grid index j * (nx + 1) + i.
pub fn fjord_probe(g: &RectGeometry, resolution: usize, fjord_width: usize, depth: f64) -> Result<HarmonicGrid, ContinuumError> {
    let nx = (g.width * resolution as f64).round() as usize;
    let s = g.width / nx as f64;
    let ny = (g.height / s).round() as usize;
    let fd = (depth / s).round() as usize;
    let (w, h) = (nx + 1, ny + fd + 1);
    let mut grid = HarmonicGrid { w, h, kind: vec![Site::Outside; w * h], values: vec![0.0; w * h] };
    let c0 = nx / 4;
    let cols = c0..c0 + fjord_width;
    let wall_value = g.boundary_value((c0 as f64 * s, g.height), 1e-9 * s);
    for j in 0..h {
        for i in 0..w {
            let k = j * w + i;
            let opening = fd > 0 && cols.contains(&i);
            if j <= ny {
                let edge = i == 0 || j == 0 || i == nx || j == ny;
                grid.kind[k] = if edge && !(j == ny && opening) { Site::Boundary } else { Site::Interior };
                grid.values[k] = g.boundary_value((i as f64 * s, j as f64 * s), 1e-9 * s);
            } else if cols.contains(&i) {
                grid.kind[k] = if j == ny + fd { Site::Boundary } else { Site::Interior };
                grid.values[k] = wall_value;
            } else if i + 1 == c0 || i == c0 + fjord_width {
                grid.kind[k] = Site::Boundary;
                grid.values[k] = wall_value;
            }
        }
    }
    dirichlet_solve(&mut grid)?;
    Ok(grid)
}
