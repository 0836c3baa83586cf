//! Discrete domains on the medial lattice.
//!
//! The medial lattice is Z^2 with unit edges. Squares are chessboard colored,
//! black squares being sites of the primal lattice. Each edge is oriented so
//! that black lies on its left; this is the direction in which the interface
//! from `a` to `b` travels. Interior vertices have four edges (half-edges
//! included), boundary vertices two perpendicular ones.

mod build;
pub mod geom;
mod json;
pub mod rect;

pub use build::{HalfEdgeSpec, Validation};
pub use geom::{face_color, lambda, lambda_pow, Color, Dir, Line, DIRS};
pub use json::DomainFile;
pub use rect::{build_rect_domain, opposite_sides_domain, square_domain, unit_square_delta, RingGap};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

pub type VertexId = usize;
pub type EdgeId = usize;
pub type CornerId = usize;
pub type FaceId = usize;

pub(crate) const NIL: u32 = u32::MAX;

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("invalid segment list: {0}")]
    Segment(String),
    #[error("vertex ({0}, {1}) has degree {2}; expected 2 or 4")]
    Degree(i32, i32, usize),
    #[error("degree-2 vertex ({0}, {1}) has collinear edges")]
    Collinear(i32, i32),
    #[error("half-edge {0}: {1}")]
    HalfEdge(&'static str, String),
    #[error("domain is not connected")]
    Disconnected,
    #[error("domain is not simply connected")]
    NotSimplyConnected,
    #[error("boundary pinches at vertex ({0}, {1})")]
    Pinch(i32, i32),
    #[error("boundary arc {0} is not monochrome")]
    ArcColor(&'static str),
    #[error("invalid parameters: {0}")]
    Param(String),
    #[error("cannot read domain: {0}")]
    Io(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeKind {
    Full,
    /// The half-edge `a` where the interface enters.
    Source,
    /// The half-edge `b` where the interface leaves.
    Sink,
}

#[derive(Clone, Debug)]
pub struct Vertex {
    pub pos: (i32, i32),
    /// Edge occupying each direction slot E, N, W, S.
    pub slots: [Option<EdgeId>; 4],
    /// Corner in each quadrant NE, NW, SW, SE.
    pub corners: [Option<CornerId>; 4],
    /// Index of the primal edge through this vertex when it is free to flip.
    pub flip: Option<usize>,
}

impl Vertex {
    pub fn degree(&self) -> usize {
        self.slots.iter().filter(|s| s.is_some()).count()
    }
}

#[derive(Clone, Debug)]
pub struct Edge {
    pub kind: EdgeKind,
    pub tail: Option<VertexId>,
    pub head: Option<VertexId>,
    /// Travel direction (black on the left).
    pub dir: Dir,
    /// Midpoint in medial units. Half-edges sit a quarter step from their vertex.
    pub mid: (f64, f64),
    pub black: FaceId,
    pub white: FaceId,
}

#[derive(Clone, Debug)]
pub struct Corner {
    pub vertex: VertexId,
    pub quadrant: usize,
    pub in_edge: EdgeId,
    pub out_edge: EdgeId,
    /// Turn made when passing the corner from in to out, in eighth turns (+2 left, -2 right).
    pub turn: i32,
    /// Tangent angle at the corner center, eighth turns mod 8 (always odd).
    pub tangent: i32,
    pub face: FaceId,
}

#[derive(Clone, Debug)]
pub struct Face {
    pub ll: (i32, i32),
    pub color: Color,
    pub inside: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PointRef {
    Vertex(VertexId),
    Edge(EdgeId),
    Corner(CornerId),
}

/// Boundary arcs traversed counterclockwise: `ab` from a to b (white outside),
/// `ba` from b back to a (black outside, wired).
#[derive(Clone, Debug, Default)]
pub struct Arcs {
    pub ab: Vec<EdgeId>,
    pub ba: Vec<EdgeId>,
    pub outside_ab: Vec<FaceId>,
    pub outside_ba: Vec<FaceId>,
}

/// Affine frame placing the domain over a continuum rectangle.
/// A medial point z maps to (z - origin) / (scale * rot) in rectangle coordinates.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ContinuumFrame {
    pub origin: Complex64,
    pub rot: Complex64,
    pub scale: f64,
    pub width: f64,
    pub height: f64,
    /// Rectangle boundary points of a and b, as (x, y) in rectangle coordinates.
    pub a: (f64, f64),
    pub b: (f64, f64),
}

impl ContinuumFrame {
    pub fn to_rect(&self, z_medial: Complex64) -> (f64, f64) {
        let w = (z_medial - self.origin) / (self.rot * self.scale);
        (w.re, w.im)
    }

    pub fn from_rect(&self, p: (f64, f64)) -> Complex64 {
        self.origin + self.rot * self.scale * Complex64::new(p.0, p.1)
    }

    /// Distance from a rectangle point to the rectangle boundary.
    pub fn boundary_distance(&self, p: (f64, f64)) -> f64 {
        p.0.min(self.width - p.0).min(p.1).min(self.height - p.1)
    }
}

#[derive(Clone, Debug)]
pub struct MedialDomain {
    pub delta: f64,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    pub corners: Vec<Corner>,
    pub faces: Vec<Face>,
    pub a: EdgeId,
    pub b: EdgeId,
    /// Vertices carrying a free primal edge, in bit order.
    pub flippable: Vec<VertexId>,
    pub arcs: Option<Arcs>,
    pub frame: Option<ContinuumFrame>,
    pub(crate) vertex_at: HashMap<(i32, i32), VertexId>,
    pub(crate) face_at: HashMap<(i32, i32), FaceId>,
    /// Outgoing edge after each edge, for bit value 0 and 1 at its head.
    pub(crate) succ: Vec<[u32; 2]>,
    pub(crate) succ_corner: Vec<[u32; 2]>,
    /// Bit index governing the head of each edge, or NIL when forced.
    pub(crate) head_bit: Vec<u32>,
}

impl MedialDomain {
    pub fn num_flippable(&self) -> usize {
        self.flippable.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_at(&self, p: (i32, i32)) -> Option<VertexId> {
        self.vertex_at.get(&p).copied()
    }

    pub fn face_at(&self, ll: (i32, i32)) -> Option<FaceId> {
        self.face_at.get(&ll).copied()
    }

    /// Full edge between two adjacent vertices, whichever its orientation.
    pub fn edge_between(&self, p: (i32, i32), q: (i32, i32)) -> Option<EdgeId> {
        let v = self.vertex_at(p)?;
        let d = (q.0 - p.0, q.1 - p.1);
        let dir = DIRS.into_iter().find(|d2| d2.step() == d)?;
        let e = self.vertices[v].slots[dir.index()]?;
        (self.edges[e].kind == EdgeKind::Full).then_some(e)
    }

    pub fn corner_at(&self, v: VertexId, quadrant: usize) -> Option<CornerId> {
        self.vertices[v].corners[quadrant % 4]
    }

    pub fn is_interior(&self, v: VertexId) -> bool {
        self.vertices[v].degree() == 4
    }

    pub fn interior_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertices.len()).filter(move |&v| self.is_interior(v))
    }

    pub fn boundary_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertices.len()).filter(move |&v| !self.is_interior(v))
    }

    /// Line of an edge or corner; vertices carry no line.
    pub fn line_of(&self, z: PointRef) -> Option<Line> {
        match z {
            PointRef::Edge(e) => Some(Line::from_tangent(self.edges[e].dir.angle8())),
            PointRef::Corner(c) => Some(Line::from_tangent(self.corners[c].tangent)),
            PointRef::Vertex(_) => None,
        }
    }

    /// Position in medial units.
    pub fn position(&self, z: PointRef) -> (f64, f64) {
        match z {
            PointRef::Vertex(v) => {
                let p = self.vertices[v].pos;
                (p.0 as f64, p.1 as f64)
            }
            PointRef::Edge(e) => self.edges[e].mid,
            PointRef::Corner(c) => {
                let cr = &self.corners[c];
                let p = self.vertices[cr.vertex].pos;
                let (dx, dy) = [(1, 1), (-1, 1), (-1, -1), (1, -1)][cr.quadrant];
                (p.0 as f64 + 0.25 * dx as f64, p.1 as f64 + 0.25 * dy as f64)
            }
        }
    }

    /// Position in physical units (medial units times the mesh size).
    pub fn physical_position(&self, z: PointRef) -> Complex64 {
        let (x, y) = self.position(z);
        Complex64::new(x, y) * self.delta
    }

    pub fn face_center(&self, f: FaceId) -> (f64, f64) {
        let ll = self.faces[f].ll;
        (ll.0 as f64 + 0.5, ll.1 as f64 + 0.5)
    }

    pub fn boundary_arcs(&self) -> Option<&Arcs> {
        self.arcs.as_ref()
    }

    /// Faces at the four quadrants of a vertex, when present.
    pub fn quadrant_faces(&self, v: VertexId) -> [Option<FaceId>; 4] {
        let p = self.vertices[v].pos;
        std::array::from_fn(|q| self.face_at(geom::quadrant_face(p, q)))
    }

    /// The two black squares joined by the primal edge through an interior vertex.
    pub fn primal_endpoints(&self, v: VertexId) -> Option<(FaceId, FaceId)> {
        let qf = self.quadrant_faces(v);
        let blacks: Vec<FaceId> = qf
            .iter()
            .flatten()
            .copied()
            .filter(|&f| self.faces[f].color == Color::Black)
            .collect();
        (blacks.len() == 2).then(|| (blacks[0], blacks[1]))
    }

    /// Next edge along a strand after `e`, given the bit at its head (ignored when forced).
    #[inline]
    pub fn successor(&self, e: EdgeId, bit: bool) -> Option<EdgeId> {
        let s = self.succ[e][bit as usize];
        (s != NIL).then_some(s as usize)
    }

    #[inline]
    pub(crate) fn head_bit(&self, e: EdgeId) -> u32 {
        self.head_bit[e]
    }

    #[inline]
    pub(crate) fn succ_raw(&self, e: EdgeId) -> &[u32; 2] {
        &self.succ[e]
    }

    #[inline]
    pub(crate) fn succ_corner_raw(&self, e: EdgeId) -> &[u32; 2] {
        &self.succ_corner[e]
    }

    /// Corner used at the head of `e` for a given bit.
    pub fn corner_after(&self, e: EdgeId, bit: bool) -> Option<CornerId> {
        let c = self.succ_corner[e][bit as usize];
        (c != NIL).then_some(c as usize)
    }

    /// Full edge whose midpoint is nearest to a rectangle point; ties go to the lower id.
    pub fn nearest_edge(&self, p: (f64, f64)) -> Option<EdgeId> {
        let fr = self.frame?;
        let z = fr.from_rect(p);
        let d = |e: &Edge| (Complex64::new(e.mid.0, e.mid.1) - z).norm_sqr();
        (0..self.edges.len())
            .filter(|&e| self.edges[e].kind == EdgeKind::Full)
            .min_by(|&x, &y| d(&self.edges[x]).total_cmp(&d(&self.edges[y])))
    }

    /// Inside face of the given color nearest to a rectangle point.
    pub fn nearest_face(&self, p: (f64, f64), color: Color) -> Option<FaceId> {
        let fr = self.frame?;
        let z = fr.from_rect(p);
        let d = |f: FaceId| {
            let c = self.face_center(f);
            (Complex64::new(c.0, c.1) - z).norm_sqr()
        };
        (0..self.faces.len())
            .filter(|&f| self.faces[f].inside && self.faces[f].color == color)
            .min_by(|&x, &y| d(x).total_cmp(&d(y)))
    }

    /// Stable content hash of the lattice geometry.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update(self.delta.to_le_bytes());
        for e in &self.edges {
            h.update((e.mid.0 * 4.0).round().to_le_bytes());
            h.update((e.mid.1 * 4.0).round().to_le_bytes());
            h.update([e.dir.index() as u8, e.kind as u8]);
        }
        hex::encode(h.finalize())
    }
}
