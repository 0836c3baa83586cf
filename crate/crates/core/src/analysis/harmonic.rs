//! Discrete harmonic functions on subsets of Z^2 with the sum-of-differences
//! Laplacian: conjugate gradients for general masks, sine transforms for boxes.

use rustfft::num_complex::Complex as FftComplex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("conjugate gradients stalled at residual {residual:e} after {iterations} iterations")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("interior site ({0}, {1}) has a neighbour outside the grid")]
    OpenInterior(usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Site {
    Interior,
    Boundary,
    Outside,
}

/// Sites of a w x h window of Z^2. Boundary sites carry fixed values.
#[derive(Clone, Debug)]
pub struct HarmonicGrid {
    pub w: usize,
    pub h: usize,
    pub kind: Vec<Site>,
    pub values: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
}

pub const SOLVE_TOL: f64 = 1e-10;
pub const MAX_ITER: usize = 100_000;

impl HarmonicGrid {
    /// A box whose outer ring is boundary and the rest interior.
    pub fn rectangle(w: usize, h: usize) -> HarmonicGrid {
        let mut kind = vec![Site::Interior; w * h];
        for j in 0..h {
            for i in 0..w {
                if i == 0 || j == 0 || i + 1 == w || j + 1 == h {
                    kind[j * w + i] = Site::Boundary;
                }
            }
        }
        HarmonicGrid { w, h, kind, values: vec![0.0; w * h] }
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.w + i
    }

    fn neighbours(&self, k: usize) -> [usize; 4] {
        [k + 1, k - 1, k + self.w, k - self.w]
    }

    /// Sum of differences to the four neighbours, at an interior site.
    pub fn laplacian_at(&self, i: usize, j: usize) -> f64 {
        let k = self.idx(i, j);
        self.neighbours(k).iter().map(|&n| self.values[n] - self.values[k]).sum()
    }

    fn check(&self) -> Result<(), SolveError> {
        for j in 0..self.h {
            for i in 0..self.w {
                if self.kind[self.idx(i, j)] != Site::Interior {
                    continue;
                }
                let edge = i == 0 || j == 0 || i + 1 == self.w || j + 1 == self.h;
                if edge || self.neighbours(self.idx(i, j)).iter().any(|&n| self.kind[n] == Site::Outside) {
                    return Err(SolveError::OpenInterior(i, j));
                }
            }
        }
        Ok(())
    }

    /// Largest |laplacian| over interior sites.
    pub fn harmonic_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 1..self.h.saturating_sub(1) {
            for i in 1..self.w.saturating_sub(1) {
                if self.kind[self.idx(i, j)] == Site::Interior {
                    worst = worst.max(self.laplacian_at(i, j).abs());
                }
            }
        }
        worst
    }
}

/// Solve laplacian = 0 on interior sites with the boundary values held fixed,
/// by Jacobi-preconditioned conjugate gradients.
pub fn dirichlet_solve(g: &mut HarmonicGrid) -> Result<SolveStats, SolveError> {
    dirichlet_solve_with(g, SOLVE_TOL, MAX_ITER)
}

pub fn dirichlet_solve_with(g: &mut HarmonicGrid, tol: f64, max_iter: usize) -> Result<SolveStats, SolveError> {
    g.check()?;
    let n = g.values.len();
    let interior: Vec<bool> = g.kind.iter().map(|&k| k == Site::Interior).collect();
    // A = -laplacian restricted to interior; b collects boundary neighbours
    let apply = |x: &[f64], out: &mut [f64]| {
        for k in 0..n {
            if interior[k] {
                let mut s = 4.0 * x[k];
                for nb in [k + 1, k - 1, k + g.w, k - g.w] {
                    if interior[nb] {
                        s -= x[nb];
                    }
                }
                out[k] = s;
            }
        }
    };
    let mut b = vec![0.0; n];
    for k in 0..n {
        if interior[k] {
            for nb in [k + 1, k - 1, k + g.w, k - g.w] {
                if g.kind[nb] == Site::Boundary {
                    b[k] += g.values[nb];
                }
            }
        }
    }
    let mut x: Vec<f64> = (0..n).map(|k| if interior[k] { g.values[k] } else { 0.0 }).collect();
    let mut ax = vec![0.0; n];
    apply(&x, &mut ax);
    let mut r: Vec<f64> = (0..n).map(|k| if interior[k] { b[k] - ax[k] } else { 0.0 }).collect();
    let mut z: Vec<f64> = r.iter().map(|v| v / 4.0).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    let mut it = 0;
    let mut res = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    while res > tol {
        if it >= max_iter {
            return Err(SolveError::NoConvergence { iterations: it, residual: res });
        }
        apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        let alpha = rz / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
            z[k] = r[k] / 4.0;
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
        res = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        it += 1;
    }
    for k in 0..n {
        if interior[k] {
            g.values[k] = x[k];
        }
    }
    Ok(SolveStats { iterations: it, residual: res })
}

/// Type-I discrete sine transform of length n via an FFT of length 2(n + 1).
struct Dst1 {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl Dst1 {
    fn new(planner: &mut FftPlanner<f64>, n: usize) -> Dst1 {
        Dst1 { n, fft: planner.plan_fft_forward(2 * (n + 1)) }
    }

    /// X_k = sum_j x_j sin(pi j k / (n + 1)), j, k = 1..n.
    fn apply(&self, x: &mut [f64], buf: &mut [FftComplex<f64>]) {
        let n = self.n;
        let m = 2 * (n + 1);
        buf[0] = FftComplex::new(0.0, 0.0);
        buf[n + 1] = FftComplex::new(0.0, 0.0);
        for j in 0..n {
            buf[j + 1] = FftComplex::new(x[j], 0.0);
            buf[m - 1 - j] = FftComplex::new(-x[j], 0.0);
        }
        self.fft.process(&mut buf[..m]);
        for k in 0..n {
            x[k] = -buf[k + 1].im / 2.0;
        }
    }
}

/// Fast solver for laplacian u = f on an nx x ny box of interior sites with
/// zero values on the surrounding ring.
pub struct BoxPoisson {
    pub nx: usize,
    pub ny: usize,
    tx: Dst1,
    ty: Dst1,
    eig: Vec<f64>,
}

impl BoxPoisson {
    pub fn new(nx: usize, ny: usize) -> BoxPoisson {
        let mut planner = FftPlanner::new();
        let tx = Dst1::new(&mut planner, nx);
        let ty = Dst1::new(&mut planner, ny);
        let mut eig = vec![0.0; nx * ny];
        for l in 0..ny {
            let cy = 2.0 * (std::f64::consts::PI * (l + 1) as f64 / (ny + 1) as f64).cos();
            for k in 0..nx {
                let cx = 2.0 * (std::f64::consts::PI * (k + 1) as f64 / (nx + 1) as f64).cos();
                eig[l * nx + k] = cx + cy - 4.0;
            }
        }
        BoxPoisson { nx, ny, tx, ty, eig }
    }

    fn transform(&self, u: &mut [f64]) {
        let (nx, ny) = (self.nx, self.ny);
        let mut buf = vec![FftComplex::new(0.0, 0.0); 2 * (nx.max(ny) + 1)];
        for row in u.chunks_mut(nx) {
            self.tx.apply(row, &mut buf);
        }
        let mut col = vec![0.0; ny];
        for i in 0..nx {
            for j in 0..ny {
                col[j] = u[j * nx + i];
            }
            self.ty.apply(&mut col, &mut buf);
            for j in 0..ny {
                u[j * nx + i] = col[j];
            }
        }
    }

    /// Solve in place; `f` is row-major over interior sites.
    pub fn solve(&self, f: &mut [f64]) {
        self.transform(f);
        let norm = 4.0 / ((self.nx + 1) * (self.ny + 1)) as f64;
        for (v, e) in f.iter_mut().zip(&self.eig) {
            *v *= norm / e;
        }
        self.transform(f);
    }

    /// Harmonic extension of boundary data given on the ring of a
    /// (nx + 2) x (ny + 2) grid; returns the full grid, row-major.
    pub fn dirichlet(&self, boundary: impl Fn(usize, usize) -> f64) -> Vec<f64> {
        let (nx, ny) = (self.nx, self.ny);
        let (w, h) = (nx + 2, ny + 2);
        let mut rhs = vec![0.0; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let (gi, gj) = (i + 1, j + 1);
                let mut s = 0.0;
                if gi == 1 {
                    s += boundary(0, gj);
                }
                if gi == nx {
                    s += boundary(w - 1, gj);
                }
                if gj == 1 {
                    s += boundary(gi, 0);
                }
                if gj == ny {
                    s += boundary(gi, h - 1);
                }
                rhs[j * nx + i] = -s;
            }
        }
        self.solve(&mut rhs);
        let mut out = vec![0.0; w * h];
        for j in 0..h {
            for i in 0..w {
                out[j * w + i] = if i == 0 || j == 0 || i == w - 1 || j == h - 1 {
                    boundary(i, j)
                } else {
                    rhs[(j - 1) * nx + (i - 1)]
                };
            }
        }
        out
    }
}
