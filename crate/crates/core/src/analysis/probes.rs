//! Numerical probes of the regularity estimates used in the convergence proof:
//! gradient bounds for harmonic functions, boundary hitting bounds, and the
//! local L^2 norm of the observable.

use super::harmonic::{dirichlet_solve, BoxPoisson, HarmonicGrid, Site, SolveError};
use crate::fermion::FermionField;
use crate::lattice::MedialDomain;
use crate::par::{map_indexed, Execution};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Largest forward-difference gradient norm over the sites of Q.
fn sup_gradient(h: &[f64], side: usize, q: std::ops::RangeInclusive<usize>) -> f64 {
    let mut worst = 0.0f64;
    for j in q.clone() {
        for i in q.clone() {
            let k = j * side + i;
            let dx = h[k + 1] - h[k];
            let dy = h[k + side] - h[k];
            worst = worst.max((dx * dx + dy * dy).sqrt());
        }
    }
    worst
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerblunskyReport {
    pub l: usize,
    pub samples: usize,
    /// max over samples of L * sup_Q |grad h| / sup_{boundary of 9Q} |h|
    pub worst_ratio: f64,
    pub mean_ratio: f64,
}

/// Random boundary data on the ring of 9Q: a trigonometric polynomial of
/// degree `DEGREE` in the angle around the center with uniform coefficients.
const DEGREE: usize = 6;

pub fn check_verblunsky(l: usize, samples: usize, seed: u64, exec: Execution) -> VerblunskyReport {
    let side = 9 * l + 1;
    let solver = BoxPoisson::new(side - 2, side - 2);
    let c = (side - 1) as f64 / 2.0;
    let ratios = map_indexed(exec, samples, |s| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(s as u64);
        let coef: Vec<(f64, f64)> = (0..=DEGREE).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let bd = |i: usize, j: usize| {
            let th = (j as f64 - c).atan2(i as f64 - c);
            coef.iter().enumerate().map(|(k, &(a, b))| a * (k as f64 * th).cos() + b * (k as f64 * th).sin()).sum::<f64>()
        };
        let h = solver.dirichlet(bd);
        let mut sup_b = 0.0f64;
        for j in 0..side {
            for i in 0..side {
                if i == 0 || j == 0 || i == side - 1 || j == side - 1 {
                    sup_b = sup_b.max(h[j * side + i].abs());
                }
            }
        }
        l as f64 * sup_gradient(&h, side, 4 * l..=5 * l - 1) / sup_b
    });
    VerblunskyReport {
        l,
        samples,
        worst_ratio: ratios.iter().cloned().fold(0.0, f64::max),
        mean_ratio: ratios.iter().sum::<f64>() / samples as f64,
    }
}

/// Box of `side` sites with z next to the left edge; boundary data 0 within
/// distance r of z, 1 elsewhere.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BeurlingSetup {
    pub side: usize,
    pub r: f64,
}

impl BeurlingSetup {
    pub fn z(&self) -> (usize, usize) {
        (1, self.side / 2)
    }

    fn boundary_value(&self, i: usize, j: usize) -> f64 {
        let (zx, zy) = self.z();
        let d = ((i as f64 - zx as f64).powi(2) + (j as f64 - zy as f64).powi(2)).sqrt();
        if d <= self.r {
            0.0
        } else {
            1.0
        }
    }

    fn on_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.side - 1 || j == self.side - 1
    }

    /// Solve the Dirichlet problem and return H(z).
    pub fn exact(&self) -> Result<f64, SolveError> {
        let mut g = HarmonicGrid::rectangle(self.side, self.side);
        for j in 0..self.side {
            for i in 0..self.side {
                if g.kind[g.idx(i, j)] == Site::Boundary {
                    let k = g.idx(i, j);
                    g.values[k] = self.boundary_value(i, j);
                }
            }
        }
        dirichlet_solve(&mut g)?;
        let (zx, zy) = self.z();
        Ok(g.values[g.idx(zx, zy)])
    }
}

/// Random-walk estimate of H(z) with its standard error.
pub fn beurling_probe(setup: &BeurlingSetup, walks: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..walks {
        let (mut i, mut j) = setup.z();
        while !setup.on_boundary(i, j) {
            match rng.gen_range(0..4) {
                0 => i += 1,
                1 => i -= 1,
                2 => j += 1,
                _ => j -= 1,
            }
        }
        if setup.boundary_value(i, j) > 0.5 {
            hits += 1;
        }
    }
    let p = hits as f64 / walks as f64;
    (p, (p * (1.0 - p) / walks as f64).sqrt())
}

/// delta * sum of |F(v)|^2 over vertices whose rectangle coordinates lie in
/// the central block [w/4, 3w/4] x [h/4, 3h/4] shrunk by `shrink` (0 keeps the quarter).
pub fn l2_central(dom: &MedialDomain, f: &FermionField<Complex64>, shrink: f64) -> Option<f64> {
    let fr = dom.frame?;
    let (x0, x1) = (fr.width * (0.25 + shrink), fr.width * (0.75 - shrink));
    let (y0, y1) = (fr.height * (0.25 + shrink), fr.height * (0.75 - shrink));
    let mut s = 0.0;
    for (v, vert) in dom.vertices.iter().enumerate() {
        let p = fr.to_rect(Complex64::new(vert.pos.0 as f64, vert.pos.1 as f64));
        if p.0 >= x0 && p.0 <= x1 && p.1 >= y0 && p.1 <= y1 {
            if let Some(z) = f.vertex[v] {
                s += z.norm_sqr();
            }
        }
    }
    Some(dom.delta * s)
}

/// Least-squares slope of log y against log x.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let xs = [0.125, 0.0625, 0.03125];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(0.125)).collect();
        assert!((loglog_slope(&xs, &ys) - 0.125).abs() < 1e-12);
    }

    #[test]
    fn constant_boundary_has_zero_gradient() {
        let s = BoxPoisson::new(16, 16);
        let h = s.dirichlet(|_, _| 3.0);
        assert!(sup_gradient(&h, 18, 4..=12) < 1e-12);
    }

    #[test]
    fn walk_estimate_agrees_with_solver() {
        let b = BeurlingSetup { side: 33, r: 6.0 };
        let exact = b.exact().unwrap();
        let (m, se) = beurling_probe(&b, 20_000, 1);
        assert!((m - exact).abs() < 3.0 * se + 1e-3, "{m} {se} {exact}");
    }
}
