//! Green's functions of the sum-of-differences Laplacian: the box 9Q around a
//! square Q of side L, and the whole plane.

use super::harmonic::BoxPoisson;
use crate::par::{map_indexed, Execution};
use serde::{Deserialize, Serialize};

/// Green's function of the (9L + 1)-site box with pole at `y`, as a full grid
/// including the zero boundary ring. Laplacian in x equals the indicator of y.
pub fn green_column(solver: &BoxPoisson, y: (usize, usize)) -> Vec<f64> {
    let (nx, ny) = (solver.nx, solver.ny);
    let mut f = vec![0.0; nx * ny];
    f[(y.1 - 1) * nx + (y.0 - 1)] = 1.0;
    solver.solve(&mut f);
    let w = nx + 2;
    let mut out = vec![0.0; w * (ny + 2)];
    for j in 0..ny {
        out[(j + 1) * w + 1..(j + 1) * w + 1 + nx].copy_from_slice(&f[j * nx..(j + 1) * nx]);
    }
    out
}

/// Ratio L * sum_Q |grad G(., y)| / sum_Q |G(., y)| for every interior pole y of 9Q.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GreenLemma {
    pub l: usize,
    /// Sites per side of 9Q, boundary included.
    pub side: usize,
    /// Row-major over all sites of 9Q; NaN on the boundary ring.
    pub ratio: Vec<f64>,
    pub max_ratio: f64,
    pub argmax: (usize, usize),
    /// Largest value of G over interior pairs; negative when G < 0 inside.
    pub max_interior_g: f64,
}

impl GreenLemma {
    pub fn ratio_at(&self, y: (usize, usize)) -> f64 {
        self.ratio[y.1 * self.side + y.0]
    }
}

/// Sites of Q inside the 9Q grid: a concentric block of L + 1 sites per side.
pub fn q_range(l: usize) -> std::ops::RangeInclusive<usize> {
    4 * l..=5 * l
}

/// Evaluate the Green lemma ratio for every pole, using symmetry G(x, y) = G(y, x):
/// one solve per x in Q (plus one layer for forward differences).
pub fn check_green_lemma(l: usize, exec: Execution) -> GreenLemma {
    assert!(l >= 1);
    let side = 9 * l + 1;
    let solver = BoxPoisson::new(side - 2, side - 2);
    let q = q_range(l);
    let (lo, hi) = (*q.start(), *q.end());
    let n = side * side;
    let mut sum_abs = vec![0.0; n];
    let mut sum_grad = vec![0.0; n];
    let mut max_g = f64::NEG_INFINITY;
    let row = |j: usize| -> Vec<Vec<f64>> { map_indexed(exec, hi + 2 - lo, |k| green_column(&solver, (lo + k, j))) };
    let mut cur = row(lo);
    for j in lo..=hi {
        let next = row(j + 1);
        for i in 0..=hi - lo {
            let g = &cur[i];
            let gx = &cur[i + 1];
            let gy = &next[i];
            for y in 0..n {
                sum_abs[y] += g[y].abs();
                let dx = gx[y] - g[y];
                let dy = gy[y] - g[y];
                sum_grad[y] += (dx * dx + dy * dy).sqrt();
            }
            for yj in 1..side - 1 {
                for yi in 1..side - 1 {
                    max_g = max_g.max(g[yj * side + yi]);
                }
            }
        }
        cur = next;
    }
    let mut ratio = vec![f64::NAN; n];
    let mut best = (f64::NEG_INFINITY, (0, 0));
    for yj in 1..side - 1 {
        for yi in 1..side - 1 {
            let k = yj * side + yi;
            let r = l as f64 * sum_grad[k] / sum_abs[k];
            ratio[k] = r;
            if r > best.0 {
                best = (r, (yi, yj));
            }
        }
    }
    GreenLemma { l, side, ratio, max_ratio: best.0, argmax: best.1, max_interior_g: max_g }
}

/// Whole-plane Green's function normalised to vanish at the pole, from the
/// one-dimensional integral representation of the lattice potential kernel.
pub fn green_plane(x: (i64, i64)) -> f64 {
    let (x1, x2) = (x.0.unsigned_abs() as f64, x.1.unsigned_abs() as f64);
    if x1 == 0.0 && x2 == 0.0 {
        return 0.0;
    }
    // integrand is even in theta; integrate over (0, pi) with Gauss-Legendre panels
    let panels = 64 + 16 * (x1.max(x2) as usize);
    let h = std::f64::consts::PI / panels as f64;
    let mut s = 0.0;
    for p in 0..panels {
        let a = p as f64 * h;
        for (node, w) in GL8 {
            let th = a + 0.5 * h * (node + 1.0);
            let t = (2.0 - th.cos()).acosh();
            s += w * 0.5 * h * (1.0 - (-x2 * t).exp() * (x1 * th).cos()) / t.sinh();
        }
    }
    // a(x) = (2 / pi) * s, and G = a / 4
    s / (2.0 * std::f64::consts::PI)
}

const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

/// Least-squares fit of G(x, 0) = slope * log x + constant over integer x in a window.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GlogFit {
    pub slope: f64,
    pub constant: f64,
    pub rms: f64,
    pub window: (i64, i64),
}

pub fn fit_glog(window: (i64, i64)) -> GlogFit {
    let pts: Vec<(f64, f64)> = (window.0..=window.1).map(|x| ((x as f64).ln(), green_plane((x, 0)))).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    let constant = my - slope * mx;
    let rms = (pts.iter().map(|p| (p.1 - slope * p.0 - constant).powi(2)).sum::<f64>() / n).sqrt();
    GlogFit { slope, constant, rms, window }
}

/// Green's function of a box of `box_side` sites with the pole at the center,
/// shifted to vanish at the pole; approximates the plane function for |x| much
/// smaller than the box.
pub fn green_box_centered(box_side: usize) -> (usize, Vec<f64>) {
    let solver = BoxPoisson::new(box_side - 2, box_side - 2);
    let c = box_side / 2;
    let mut g = green_column(&solver, (c, c));
    let g0 = g[c * box_side + c];
    for v in g.iter_mut() {
        *v -= g0;
    }
    (c, g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_kernel_known_values() {
        // a(1, 0) = 1 and a(1, 1) = 4 / pi for the simple random walk kernel
        assert!((green_plane((1, 0)) - 0.25).abs() < 1e-10);
        assert!((green_plane((1, 1)) - 1.0 / std::f64::consts::PI).abs() < 1e-10);
    }

    #[test]
    fn column_is_a_green_function() {
        let l = 2;
        let side = 9 * l + 1;
        let s = BoxPoisson::new(side - 2, side - 2);
        let y = (7, 11);
        let g = green_column(&s, y);
        for j in 1..side - 1 {
            for i in 1..side - 1 {
                let k = j * side + i;
                let lap = g[k + 1] + g[k - 1] + g[k + side] + g[k - side] - 4.0 * g[k];
                let want = if (i, j) == y { 1.0 } else { 0.0 };
                assert!((lap - want).abs() < 1e-10);
                assert!(g[k] < 0.0);
            }
        }
    }
}
