//! The fermionic observable F(z) = E[chi(z in gamma) W(z)] and its values on
//! corners, edges and vertices.
//!
//! Corner values carry the factor 2 cos(pi/8) that makes them comparable with
//! edge values; a vertex value is half the sum of its four corner values. On a
//! boundary vertex the value is the unique complex number whose projections on
//! the lines of its two edges are the edge values.

pub mod martingale;

use crate::lattice::{EdgeKind, MedialDomain, PointRef};
use crate::scalar::Scalar;
use num_complex::Complex64;

#[derive(Clone, Debug)]
pub struct FermionField<S> {
    pub corner: Vec<S>,
    /// Edge values, half-edges a and b included.
    pub edge: Vec<S>,
    /// Vertex values; None only where a boundary vertex cannot be reconstructed.
    pub vertex: Vec<Option<S>>,
}

impl<S: Scalar> FermionField<S> {
    pub fn assemble(dom: &MedialDomain, corner: Vec<S>, edge: Vec<S>) -> FermionField<S> {
        let vertex = (0..dom.vertices.len())
            .map(|v| {
                let vert = &dom.vertices[v];
                if vert.degree() == 4 {
                    let mut s = S::zero();
                    for c in vert.corners.iter().flatten() {
                        s = s.add(&corner[*c]);
                    }
                    Some(s.half())
                } else {
                    let es: Vec<usize> = vert.slots.iter().flatten().copied().collect();
                    reconstruct(dom, &edge, es[0], es[1])
                }
            })
            .collect();
        FermionField { corner, edge, vertex }
    }

    pub fn at(&self, z: PointRef) -> Option<&S> {
        match z {
            PointRef::Corner(c) => self.corner.get(c),
            PointRef::Edge(e) => self.edge.get(e),
            PointRef::Vertex(v) => self.vertex.get(v).and_then(|x| x.as_ref()),
        }
    }

    pub fn map<T, F: Fn(&S) -> T>(&self, f: F) -> FermionField<T> {
        FermionField {
            corner: self.corner.iter().map(&f).collect(),
            edge: self.edge.iter().map(&f).collect(),
            vertex: self.vertex.iter().map(|x| x.as_ref().map(&f)).collect(),
        }
    }

    pub fn to_c64(&self) -> FermionField<Complex64> {
        self.map(|x| x.to_c64())
    }
}

/// Value whose projections on the lines of edges `e1` and `e2` are their F values.
pub fn reconstruct<S: Scalar>(dom: &MedialDomain, edge: &[S], e1: usize, e2: usize) -> Option<S> {
    let l1 = dom.line_of(PointRef::Edge(e1))?;
    let l2 = dom.line_of(PointRef::Edge(e2))?;
    let (al, be) = (S::line_unit(l1), S::line_unit(l2));
    let r1 = al.conj().mul(&edge[e1]).re();
    let r2 = be.conj().mul(&edge[e2]).re();
    let den = al.conj().mul(&be).im().inv()?;
    Some(S::i().mul(&r2.mul(&al).sub(&r1.mul(&be))).mul(&den))
}

/// Ids of the half-edges and full edges, for iteration in reports.
pub fn edge_kinds(dom: &MedialDomain) -> impl Iterator<Item = (usize, EdgeKind)> + '_ {
    dom.edges.iter().enumerate().map(|(i, e)| (i, e.kind))
}
