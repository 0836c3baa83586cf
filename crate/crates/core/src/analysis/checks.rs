//! Discrete complex-analysis identities satisfied by the observable, and the
//! function H built from squared edge values.

use crate::fermion::FermionField;
use crate::lattice::{geom::quadrant_face, Color, FaceId, MedialDomain, PointRef};
use crate::scalar::Scalar;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Maximum residual of each identity; exact fields report 0 only for exact equality.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ResidualReport {
    /// Proj_l(e) F(u) = Proj_l(e) F(w) across every edge with both vertex values.
    pub preholomorphic: f64,
    /// F(NW) - F(SE) = i (F(NE) - F(SW)) around every inside square.
    pub cauchy_riemann: f64,
    /// F(e) = Proj_l(e) F(v) for every edge at an interior vertex.
    pub projection: f64,
    /// F(z) lies on l(z) for edges and corners.
    pub line_membership: f64,
    /// Consistency of H(B) - H(W) = |F(e)|^2 around every edge.
    pub h_closure: f64,
    /// 2 (H(v) - H(u)) = Im(F(z)^2 (v - u)) for diagonal squares across z.
    pub hintf: f64,
    /// H on squares outside the arcs: 0 beyond ab, 1 beyond ba.
    pub h_boundary: f64,
    /// Laplacian of H on black (white) squares equals +(-) |F(NE) - F(SW)|^2 = |F(NW) - F(SE)|^2.
    pub sub_super: f64,
    /// F(NW) + F(SE) = F(NE) + F(SW) = F(W) + F(E) = F(N) + F(S) = F(v) at interior vertices.
    pub projection_sums: f64,
    pub checked_edges: usize,
    pub checked_squares: usize,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        [
            self.preholomorphic,
            self.cauchy_riemann,
            self.projection,
            self.line_membership,
            self.h_closure,
            self.hintf,
            self.h_boundary,
            self.sub_super,
            self.projection_sums,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn check_preholomorphic<S: Scalar>(dom: &MedialDomain, f: &FermionField<S>) -> (f64, usize) {
    let mut worst = 0.0f64;
    let mut n = 0;
    for (e, ed) in dom.edges.iter().enumerate() {
        let (Some(t), Some(h)) = (ed.tail, ed.head) else { continue };
        let (Some(ft), Some(fh)) = (&f.vertex[t], &f.vertex[h]) else { continue };
        let l = dom.line_of(PointRef::Edge(e)).unwrap();
        worst = worst.max(ft.project(l).sub(&fh.project(l)).residual());
        n += 1;
    }
    (worst, n)
}

/// Vertex values at the corners of square `ll`, ordered NE, NW, SW, SE.
fn square_vertices<S: Scalar>(dom: &MedialDomain, f: &FermionField<S>, ll: (i32, i32)) -> Option<[S; 4]> {
    let (x, y) = ll;
    let pts = [(x + 1, y + 1), (x, y + 1), (x, y), (x + 1, y)];
    let mut out: [Option<S>; 4] = Default::default();
    for (k, p) in pts.iter().enumerate() {
        out[k] = f.vertex[dom.vertex_at(*p)?].clone();
    }
    let [a, b, c, d] = out;
    Some([a?, b?, c?, d?])
}

pub fn check_cauchy_riemann<S: Scalar>(dom: &MedialDomain, f: &FermionField<S>) -> (f64, usize) {
    let mut worst = 0.0f64;
    let mut n = 0;
    for face in dom.faces.iter().filter(|fc| fc.inside) {
        let Some([ne, nw, sw, se]) = square_vertices(dom, f, face.ll) else { continue };
        let r = nw.sub(&se).sub(&S::i().mul(&ne.sub(&sw)));
        worst = worst.max(r.residual());
        n += 1;
    }
    (worst, n)
}

pub fn check_projections<S: Scalar>(dom: &MedialDomain, f: &FermionField<S>) -> f64 {
    let mut worst = 0.0f64;
    for v in dom.interior_vertices() {
        let Some(fv) = &f.vertex[v] else { continue };
        for e in dom.vertices[v].slots.iter().flatten() {
            let l = dom.line_of(PointRef::Edge(*e)).unwrap();
            worst = worst.max(fv.project(l).sub(&f.edge[*e]).residual());
        }
    }
    worst
}

pub fn check_lines<S: Scalar>(dom: &MedialDomain, f: &FermionField<S>) -> f64 {
    let mut worst = 0.0f64;
    for (e, val) in f.edge.iter().enumerate() {
        let l = dom.line_of(PointRef::Edge(e)).unwrap();
        worst = worst.max(val.project(l).sub(val).residual());
    }
    for (c, val) in f.corner.iter().enumerate() {
        let l = dom.line_of(PointRef::Corner(c)).unwrap();
        worst = worst.max(val.project(l).sub(val).residual());
    }
    worst
}

/// H on the squares touching the domain, normalised to 0 on the white square next to b.
#[derive(Clone, Debug)]
pub struct HField<S> {
    pub values: Vec<Option<S>>,
    pub closure_residual: f64,
}

impl<S: Scalar> HField<S> {
    pub fn get(&self, f: FaceId) -> Option<&S> {
        self.values.get(f).and_then(|x| x.as_ref())
    }
}

pub fn build_h<S: Scalar>(dom: &MedialDomain, f: &FermionField<S>) -> HField<S> {
    let nf = dom.faces.len();
    let mut adj: Vec<Vec<(FaceId, usize)>> = vec![Vec::new(); nf];
    for (e, ed) in dom.edges.iter().enumerate() {
        adj[ed.black].push((ed.white, e));
        adj[ed.white].push((ed.black, e));
    }
    let inc: Vec<S> = f.edge.iter().map(|x| x.norm_sqr()).collect();
    let mut values: Vec<Option<S>> = vec![None; nf];
    let anchor = dom.edges[dom.b].white;
    values[anchor] = Some(S::zero());
    let mut queue = VecDeque::from([anchor]);
    while let Some(u) = queue.pop_front() {
        let hu = values[u].clone().unwrap();
        for &(w, e) in &adj[u] {
            if values[w].is_some() {
                continue;
            }
            let hw = if dom.faces[u].color == Color::Black { hu.sub(&inc[e]) } else { hu.add(&inc[e]) };
            values[w] = Some(hw);
            queue.push_back(w);
        }
    }
    let mut worst = 0.0f64;
    for (e, ed) in dom.edges.iter().enumerate() {
        if let (Some(hb), Some(hw)) = (&values[ed.black], &values[ed.white]) {
            worst = worst.max(hb.sub(hw).sub(&inc[e]).residual());
        }
    }
    HField { values, closure_residual: worst }
}

fn diagonal_neighbours(ll: (i32, i32)) -> [(i32, i32); 4] {
    let (x, y) = ll;
    [(x + 1, y + 1), (x - 1, y + 1), (x - 1, y - 1), (x + 1, y - 1)]
}

/// Squares of one color whose four corner vertices are interior.
pub fn interior_squares(dom: &MedialDomain, color: Color) -> Vec<FaceId> {
    (0..dom.faces.len())
        .filter(|&fid| {
            let fc = &dom.faces[fid];
            if !fc.inside || fc.color != color {
                return false;
            }
            let (x, y) = fc.ll;
            [(x, y), (x + 1, y), (x + 1, y + 1), (x, y + 1)]
                .iter()
                .all(|p| dom.vertex_at(*p).is_some_and(|v| dom.is_interior(v)))
        })
        .collect()
}

/// Discrete Laplacian over the four same-color squares touching at corners.
pub fn laplacian<S: Scalar>(dom: &MedialDomain, h: &HField<S>, fid: FaceId) -> Option<S> {
    let hc = h.get(fid)?;
    let mut s = S::zero();
    for nb in diagonal_neighbours(dom.faces[fid].ll) {
        let v = h.get(dom.face_at(nb)?)?;
        s = s.add(&v.sub(hc));
    }
    Some(s)
}

pub fn check_hintf<S: Scalar>(dom: &MedialDomain, f: &FermionField<S>, h: &HField<S>) -> f64 {
    let mut worst = 0.0f64;
    let centers = [(1, 1), (-1, 1), (-1, -1), (1, -1)];
    for (v, vert) in dom.vertices.iter().enumerate() {
        let Some(fz) = &f.vertex[v] else { continue };
        let f2 = fz.mul(fz);
        for r in 0..4 {
            // path from quadrant r to r + 2 through r + 1 crosses slots r + 1 and r + 2
            let via_left = vert.slots[(r + 1) % 4].is_some() && vert.slots[(r + 2) % 4].is_some();
            let via_right = vert.slots[(r + 3) % 4].is_some() && vert.slots[r].is_some();
            if !via_left && !via_right {
                continue;
            }
            let (Some(u), Some(w)) = (
                dom.face_at(quadrant_face(vert.pos, r)),
                dom.face_at(quadrant_face(vert.pos, r + 2)),
            ) else {
                continue;
            };
            let (Some(hu), Some(hw)) = (h.get(u), h.get(w)) else { continue };
            let d = (centers[(r + 2) % 4].0 - centers[r].0, centers[(r + 2) % 4].1 - centers[r].1);
            // medial-unit displacement between square centers is d / 2
            let dz = S::from_i64(d.0 as i64 / 2).add(&S::i().mul(&S::from_i64(d.1 as i64 / 2)));
            let lhs = hw.sub(hu).add(&hw.sub(hu));
            let rhs = f2.mul(&dz).im();
            worst = worst.max(lhs.sub(&rhs).residual());
        }
    }
    worst
}

pub fn check_h_boundary<S: Scalar>(dom: &MedialDomain, h: &HField<S>) -> f64 {
    let Some(arcs) = dom.boundary_arcs() else { return 0.0 };
    let mut worst = 0.0f64;
    for &fid in &arcs.outside_ab {
        if let Some(v) = h.get(fid) {
            worst = worst.max(v.residual());
        }
    }
    for &fid in &arcs.outside_ba {
        if let Some(v) = h.get(fid) {
            worst = worst.max(v.sub(&S::from_i64(1)).residual());
        }
    }
    worst
}

pub fn check_sub_super<S: Scalar>(dom: &MedialDomain, f: &FermionField<S>, h: &HField<S>) -> f64 {
    let mut worst = 0.0f64;
    for color in [Color::Black, Color::White] {
        for fid in interior_squares(dom, color) {
            let (Some(lap), Some([ne, nw, sw, se])) = (laplacian(dom, h, fid), square_vertices(dom, f, dom.faces[fid].ll))
            else {
                continue;
            };
            let d1 = ne.sub(&sw).norm_sqr();
            let d2 = nw.sub(&se).norm_sqr();
            let signed = if color == Color::Black { d1.clone() } else { d1.neg() };
            worst = worst.max(lap.sub(&signed).residual()).max(d1.sub(&d2).residual());
        }
    }
    worst
}

pub fn check_projection_sums<S: Scalar>(dom: &MedialDomain, f: &FermionField<S>) -> f64 {
    let mut worst = 0.0f64;
    for v in dom.interior_vertices() {
        let Some(fv) = &f.vertex[v] else { continue };
        let vert = &dom.vertices[v];
        let c = |q: usize| vert.corners[q].map(|c| f.corner[c].clone());
        let e = |d: usize| vert.slots[d].map(|e| f.edge[e].clone());
        let pairs = [(c(1), c(3)), (c(0), c(2)), (e(2), e(0)), (e(1), e(3))];
        for (x, y) in pairs {
            if let (Some(x), Some(y)) = (x, y) {
                worst = worst.max(x.add(&y).sub(fv).residual());
            }
        }
    }
    worst
}

pub fn residual_report<S: Scalar>(dom: &MedialDomain, f: &FermionField<S>) -> (ResidualReport, HField<S>) {
    let (pre, ne) = check_preholomorphic(dom, f);
    let (cr, ns) = check_cauchy_riemann(dom, f);
    let h = build_h(dom, f);
    let rep = ResidualReport {
        preholomorphic: pre,
        cauchy_riemann: cr,
        projection: check_projections(dom, f),
        line_membership: check_lines(dom, f),
        h_closure: h.closure_residual,
        hintf: check_hintf(dom, f, &h),
        h_boundary: check_h_boundary(dom, &h),
        sub_super: check_sub_super(dom, f, &h),
        projection_sums: check_projection_sums(dom, f),
        checked_edges: ne,
        checked_squares: ns,
    };
    (rep, h)
}

/// Floating-point view of H for reporting.
pub fn h_to_f64<S: Scalar>(h: &HField<S>) -> Vec<Option<f64>> {
    h.values.iter().map(|x| x.as_ref().map(|v| v.to_c64().re)).collect()
}

/// Evaluate a complex function at every vertex, as a synthetic observable.
pub fn field_from_fn<F: Fn(Complex64) -> Complex64>(dom: &MedialDomain, f: F) -> FermionField<Complex64> {
    let vertex = dom
        .vertices
        .iter()
        .map(|v| Some(f(Complex64::new(v.pos.0 as f64, v.pos.1 as f64))))
        .collect();
    let edge = dom
        .edges
        .iter()
        .map(|e| f(Complex64::new(e.mid.0, e.mid.1)))
        .collect();
    let corner = (0..dom.corners.len())
        .map(|c| {
            let (x, y) = dom.position(PointRef::Corner(c));
            f(Complex64::new(x, y))
        })
        .collect();
    FermionField { corner, edge, vertex }
}

/// A random vertex field whose projections agree across every full edge,
/// drawn from the null space of the projection constraints; edges and corners
/// carry the projections of their vertex values.
pub fn random_preholomorphic<R: rand::Rng>(dom: &MedialDomain, rng: &mut R) -> FermionField<Complex64> {
    let nv = dom.vertices.len();
    let n = 2 * nv;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (e, ed) in dom.edges.iter().enumerate() {
        let (Some(t), Some(h)) = (ed.tail, ed.head) else { continue };
        let l = dom.line_of(PointRef::Edge(e)).unwrap().unit();
        // Re(conj(l) (X_t - X_h)) = 0
        let mut row = vec![0.0; n];
        row[2 * t] += l.re;
        row[2 * t + 1] += l.im;
        row[2 * h] -= l.re;
        row[2 * h + 1] -= l.im;
        rows.push(row);
    }
    // reduced row echelon form with partial pivoting
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..rows.len()).max_by(|&a, &b| rows[a][c].abs().total_cmp(&rows[b][c].abs())) else { break };
        if rows[p][c].abs() < 1e-12 {
            continue;
        }
        rows.swap(r, p);
        let inv = 1.0 / rows[r][c];
        for v in rows[r].iter_mut() {
            *v *= inv;
        }
        for k in 0..rows.len() {
            if k != r && rows[k][c] != 0.0 {
                let m = rows[k][c];
                for j in 0..n {
                    rows[k][j] -= m * rows[r][j];
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let mut x = vec![0.0; n];
    for c in 0..n {
        if !pivots.contains(&c) {
            x[c] = rng.gen_range(-1.0..1.0);
        }
    }
    for (k, &c) in pivots.iter().enumerate() {
        x[c] = -(0..n).filter(|&j| j != c).map(|j| rows[k][j] * x[j]).sum::<f64>();
    }
    let vals: Vec<Complex64> = (0..nv).map(|v| Complex64::new(x[2 * v], x[2 * v + 1])).collect();
    let scale = vals.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let vals: Vec<Complex64> = vals.into_iter().map(|z| z / scale).collect();
    let edge = dom
        .edges
        .iter()
        .enumerate()
        .map(|(e, ed)| {
            let v = ed.tail.or(ed.head).unwrap();
            vals[v].project(dom.line_of(PointRef::Edge(e)).unwrap())
        })
        .collect();
    let corner = dom
        .corners
        .iter()
        .enumerate()
        .map(|(c, cn)| vals[cn.vertex].project(dom.line_of(PointRef::Corner(c)).unwrap()))
        .collect();
    FermionField { corner, edge, vertex: vals.into_iter().map(Some).collect() }
}
