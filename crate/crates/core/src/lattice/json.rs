use super::build::{HalfEdgeSpec, Validation};
use super::geom::Dir;
use super::{DomainError, MedialDomain};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HalfEdgeJson {
    pub vertex: [i32; 2],
    /// Direction from the vertex toward the free end: "E", "N", "W" or "S".
    pub dir: String,
}

/// On-disk description of a domain.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DomainFile {
    pub mesh: f64,
    /// Unit segments as [x1, y1, x2, y2].
    pub medial_edges: Vec<[i32; 4]>,
    pub a: HalfEdgeJson,
    pub b: HalfEdgeJson,
}

fn spec(h: &HalfEdgeJson, name: &'static str) -> Result<HalfEdgeSpec, DomainError> {
    let dir = Dir::parse(&h.dir).ok_or_else(|| DomainError::HalfEdge(name, format!("unknown direction {:?}", h.dir)))?;
    Ok(HalfEdgeSpec { vertex: (h.vertex[0], h.vertex[1]), dir })
}

impl DomainFile {
    pub fn to_domain(&self) -> Result<MedialDomain, DomainError> {
        let segs: Vec<_> = self.medial_edges.iter().map(|s| ((s[0], s[1]), (s[2], s[3]))).collect();
        MedialDomain::from_segments(&segs, spec(&self.a, "a")?, spec(&self.b, "b")?, self.mesh, Validation::Strict)
    }

    pub fn from_domain(d: &MedialDomain) -> DomainFile {
        let conv = |s: HalfEdgeSpec| HalfEdgeJson { vertex: [s.vertex.0, s.vertex.1], dir: format!("{:?}", s.dir) };
        DomainFile {
            mesh: d.delta,
            medial_edges: d.segments().into_iter().map(|(p, q)| [p.0, p.1, q.0, q.1]).collect(),
            a: conv(d.half_edge_spec(d.a)),
            b: conv(d.half_edge_spec(d.b)),
        }
    }

    pub fn parse(text: &str) -> Result<DomainFile, DomainError> {
        serde_json::from_str(text).map_err(|e| DomainError::Io(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<MedialDomain, DomainError> {
        let text = std::fs::read_to_string(path).map_err(|e| DomainError::Io(format!("{}: {e}", path.display())))?;
        DomainFile::parse(&text)?.to_domain()
    }
}
