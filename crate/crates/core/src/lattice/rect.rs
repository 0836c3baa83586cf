//! Rectangular domains.
//!
//! A rectangle of `m x n` primal sites is laid out in diagonal coordinates
//! P = x + y, Q = y - x of the lower-left corners of lattice squares: sites sit
//! at even (P, Q), dual sites at odd (P, Q). The rectangle has free boundary
//! everywhere; a counterclockwise run of dual squares from gap `b` to gap `a`
//! on the surrounding ring is then added, which makes the arc from b to a wired.

use super::build::{HalfEdgeSpec, Validation};
use super::geom::{face_color, left_face, Color, Dir, DIRS};
use super::{ContinuumFrame, DomainError, MedialDomain};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_1_SQRT_2;

/// Gap position on the ring around a rectangle: gap `g` lies between ring squares
/// `g - 1` and `g`, counted counterclockwise from the bottom corner.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingGap(pub usize);

/// Ring squares in counterclockwise order, as (P, Q).
pub fn ring_squares(m: usize, n: usize) -> Vec<(i32, i32)> {
    let (m, n) = (m as i32, n as i32);
    let mut r = Vec::new();
    for i in 0..=m {
        r.push((2 * i - 1, -1));
    }
    for j in 1..=n {
        r.push((2 * m - 1, 2 * j - 1));
    }
    for i in (0..m).rev() {
        r.push((2 * i - 1, 2 * n - 1));
    }
    for j in (1..n).rev() {
        r.push((-1, 2 * j - 1));
    }
    r
}

/// Position of a gap in (P, Q) coordinates; it lies on the rectangle boundary.
pub fn gap_point(m: usize, n: usize, g: RingGap) -> (f64, f64) {
    let ring = ring_squares(m, n);
    let len = ring.len();
    let p = ring[(g.0 + len - 1) % len];
    let q = ring[g.0 % len];
    ((p.0 + q.0) as f64 / 2.0, (p.1 + q.1) as f64 / 2.0)
}

impl RingGap {
    /// Gap nearest to a target boundary point given in (P, Q) coordinates.
    pub fn nearest(m: usize, n: usize, target: (f64, f64)) -> RingGap {
        let len = 2 * (m + n);
        let mut best = (f64::INFINITY, 0);
        for g in 0..len {
            let p = gap_point(m, n, RingGap(g));
            let d = (p.0 - target.0).hypot(p.1 - target.1);
            if d < best.0 - 1e-12 {
                best = (d, g);
            }
        }
        RingGap(best.1)
    }
}

fn pq_to_xy(p: i32, q: i32) -> (i32, i32) {
    ((p - q) / 2, (p + q) / 2)
}

fn rotate_point(p: (i32, i32), k: usize) -> (i32, i32) {
    let mut p = p;
    for _ in 0..k {
        p = (-p.1, p.0);
    }
    p
}

/// Build the rectangle of `m x n` sites with the wired arc running counterclockwise
/// from gap `b` to gap `a`. The result is rotated so that `b` points east.
pub fn build_rect_domain(m: usize, n: usize, a: RingGap, b: RingGap, delta: f64) -> Result<MedialDomain, DomainError> {
    if m == 0 || n == 0 {
        return Err(DomainError::Param("rectangle needs at least one site per side".into()));
    }
    let ring = ring_squares(m, n);
    let len = ring.len();
    if a.0 >= len || b.0 >= len {
        return Err(DomainError::Param(format!("ring gaps must be below {len}")));
    }
    if a == b {
        return Err(DomainError::Param("gaps a and b coincide".into()));
    }
    let (mi, ni) = (m as i32, n as i32);
    let mut region = BTreeSet::new();
    for i in 0..mi {
        for j in 0..ni {
            region.insert(pq_to_xy(2 * i, 2 * j));
        }
    }
    for p in (1..2 * mi - 2).step_by(2) {
        for q in (1..2 * ni - 2).step_by(2) {
            region.insert(pq_to_xy(p, q));
        }
    }
    let mut g = b.0;
    while g != a.0 {
        let (p, q) = ring[g];
        region.insert(pq_to_xy(p, q));
        g = (g + 1) % len;
    }

    // sides of region squares
    let mut segs = BTreeSet::new();
    for &(x, y) in &region {
        segs.insert(((x, y), (x + 1, y)));
        segs.insert(((x, y + 1), (x + 1, y + 1)));
        segs.insert(((x, y), (x, y + 1)));
        segs.insert(((x + 1, y), (x + 1, y + 1)));
    }
    let mut slots: BTreeMap<(i32, i32), [bool; 4]> = BTreeMap::new();
    for &(p, q) in &segs {
        let d = if q.0 > p.0 { Dir::E } else { Dir::N };
        slots.entry(p).or_default()[d.index()] = true;
        slots.entry(q).or_default()[d.rev().index()] = true;
    }
    let mut src = None;
    let mut snk = None;
    for (&v, s) in &slots {
        if s.iter().filter(|&&x| x).count() != 3 {
            continue;
        }
        let dir = DIRS[s.iter().position(|&x| !x).unwrap()];
        let spec = HalfEdgeSpec { vertex: v, dir };
        if face_color(left_face(v, dir)) == Color::Black {
            if snk.replace(spec).is_some() {
                return Err(DomainError::Param("more than one sink position".into()));
            }
        } else if src.replace(spec).is_some() {
            return Err(DomainError::Param("more than one source position".into()));
        }
    }
    let (Some(src), Some(snk)) = (src, snk) else {
        return Err(DomainError::Param("gaps do not produce two straight boundary vertices".into()));
    };

    // rotate so that b points east; odd rotations swap colors, undone by a unit shift
    let k = (4 - snk.dir.index()) % 4;
    let shift = if k % 2 == 1 { (1, 0) } else { (0, 0) };
    let tf = |p: (i32, i32)| {
        let r = rotate_point(p, k);
        (r.0 + shift.0, r.1 + shift.1)
    };
    let segs: Vec<_> = segs.iter().map(|&(p, q)| (tf(p), tf(q))).collect();
    let a_spec = HalfEdgeSpec { vertex: tf(src.vertex), dir: Dir::from_index(src.dir.index() + k) };
    let b_spec = HalfEdgeSpec { vertex: tf(snk.vertex), dir: Dir::E };
    let mut dom = MedialDomain::from_segments(&segs, a_spec, b_spec, delta, Validation::Strict)?;

    // continuum rectangle: P' = X + Y - 1 in [-1, 2m - 1], Q' = Y - X in [-1, 2n - 1]
    let rk = Complex64::i().powi(k as i32);
    let origin0 = Complex64::new(0.5, -0.5);
    let rot0 = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    let to_rect = |pq: (f64, f64)| ((pq.0 + 1.0) * FRAC_1_SQRT_2 * delta, (pq.1 + 1.0) * FRAC_1_SQRT_2 * delta);
    dom.frame = Some(ContinuumFrame {
        origin: rk * origin0 + Complex64::new(shift.0 as f64, shift.1 as f64),
        rot: rk * rot0,
        scale: 1.0 / delta,
        width: std::f64::consts::SQRT_2 * m as f64 * delta,
        height: std::f64::consts::SQRT_2 * n as f64 * delta,
        a: to_rect(gap_point(m, n, a)),
        b: to_rect(gap_point(m, n, b)),
    });
    Ok(dom)
}

/// Rectangle of `m x n` sites with `a` and `b` near the midpoints of two opposite
/// sides, placed symmetrically under the half-turn about the center.
pub fn opposite_sides_domain(m: usize, n: usize, delta: f64) -> Result<MedialDomain, DomainError> {
    let (mf, nf) = (m as f64, n as f64);
    let b = RingGap::nearest(m, n, (mf - 1.0, -1.0));
    let pb = gap_point(m, n, b);
    let a = RingGap::nearest(m, n, (2.0 * mf - 2.0 - pb.0, 2.0 * nf - 1.0));
    build_rect_domain(m, n, a, b, delta)
}

/// Square of `n x n` sites with `a` and `b` near the midpoints of opposite sides.
pub fn square_domain(n: usize, delta: f64) -> Result<MedialDomain, DomainError> {
    opposite_sides_domain(n, n, delta)
}

/// Mesh size that gives a square domain of unit side.
pub fn unit_square_delta(n: usize) -> f64 {
    FRAC_1_SQRT_2 / n as f64
}
