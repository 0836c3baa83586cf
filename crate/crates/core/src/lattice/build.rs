use super::geom::{face_color, left_face, quadrant_face, right_face, Color, Dir};
use super::{Arcs, Corner, DomainError, Edge, EdgeKind, Face, FaceId, MedialDomain, Vertex, NIL};
use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

/// How strictly a segment list is checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Validation {
    /// Connected, simply connected, no pinches, monochrome arcs.
    Strict,
    /// Only local degree and orientation checks. Used for slit domains.
    Relaxed,
}

/// A half-edge at `vertex`, pointing from the vertex in direction `dir`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HalfEdgeSpec {
    pub vertex: (i32, i32),
    pub dir: Dir,
}

fn add(p: (i32, i32), d: Dir) -> (i32, i32) {
    let (dx, dy) = d.step();
    (p.0 + dx, p.1 + dy)
}

/// Normalize a unit segment to (lower-left endpoint, E or N).
pub(crate) fn canonical_segment(p: (i32, i32), q: (i32, i32)) -> Result<((i32, i32), Dir), DomainError> {
    match (q.0 - p.0, q.1 - p.1) {
        (1, 0) => Ok((p, Dir::E)),
        (-1, 0) => Ok((q, Dir::E)),
        (0, 1) => Ok((p, Dir::N)),
        (0, -1) => Ok((q, Dir::N)),
        _ => Err(DomainError::Segment(format!(
            "({}, {})-({}, {}) is not a unit axis segment",
            p.0, p.1, q.0, q.1
        ))),
    }
}

impl MedialDomain {
    /// Build a domain from unit segments and the two half-edges.
    pub fn from_segments(
        segments: &[((i32, i32), (i32, i32))],
        a: HalfEdgeSpec,
        b: HalfEdgeSpec,
        delta: f64,
        validation: Validation,
    ) -> Result<MedialDomain, DomainError> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(DomainError::Param(format!("mesh size must be positive, got {delta}")));
        }
        let mut segs = BTreeSet::new();
        for &(p, q) in segments {
            let s = canonical_segment(p, q)?;
            if !segs.insert(s) {
                return Err(DomainError::Segment(format!(
                    "duplicate segment at ({}, {})",
                    s.0 .0, s.0 .1
                )));
            }
        }
        if a.vertex == b.vertex && a.dir == b.dir {
            return Err(DomainError::HalfEdge("a", "coincides with b".into()));
        }

        // vertices in sorted order for determinism
        let mut points = BTreeSet::new();
        for &(p, d) in &segs {
            points.insert(p);
            points.insert(add(p, d));
        }
        points.insert(a.vertex);
        points.insert(b.vertex);
        let mut vertices: Vec<Vertex> = points
            .iter()
            .map(|&pos| Vertex { pos, slots: [None; 4], corners: [None; 4], flip: None })
            .collect();
        let vertex_at: HashMap<(i32, i32), usize> =
            vertices.iter().enumerate().map(|(i, v)| (v.pos, i)).collect();

        let mut faces: Vec<Face> = Vec::new();
        let mut face_at: HashMap<(i32, i32), FaceId> = HashMap::new();
        let mut face_id = |ll: (i32, i32), faces: &mut Vec<Face>| -> FaceId {
            *face_at.entry(ll).or_insert_with(|| {
                faces.push(Face { ll, color: face_color(ll), inside: false });
                faces.len() - 1
            })
        };

        let mut edges: Vec<Edge> = Vec::new();
        for &(p, d) in &segs {
            let q = add(p, d);
            let (from, dir) = if face_color(left_face(p, d)) == Color::Black { (p, d) } else { (q, d.rev()) };
            let to = add(from, dir);
            let black = face_id(left_face(from, dir), &mut faces);
            let white = face_id(right_face(from, dir), &mut faces);
            let (t, h) = (vertex_at[&from], vertex_at[&to]);
            let id = edges.len();
            edges.push(Edge {
                kind: EdgeKind::Full,
                tail: Some(t),
                head: Some(h),
                dir,
                mid: (p.0 as f64 + 0.5 * d.step().0 as f64, p.1 as f64 + 0.5 * d.step().1 as f64),
                black,
                white,
            });
            vertices[t].slots[dir.index()] = Some(id);
            vertices[h].slots[dir.rev().index()] = Some(id);
        }

        for (name, spec, kind) in [("a", a, EdgeKind::Source), ("b", b, EdgeKind::Sink)] {
            let v = vertex_at[&spec.vertex];
            if vertices[v].slots[spec.dir.index()].is_some() {
                return Err(DomainError::HalfEdge(name, "slot already holds an edge".into()));
            }
            let outward_black = face_color(left_face(spec.vertex, spec.dir)) == Color::Black;
            let (tail, head, dir) = match kind {
                EdgeKind::Source if !outward_black => (None, Some(v), spec.dir.rev()),
                EdgeKind::Sink if outward_black => (Some(v), None, spec.dir),
                _ => {
                    return Err(DomainError::HalfEdge(
                        name,
                        format!(
                            "orientation at ({}, {}) pointing {:?} does not keep black on the left",
                            spec.vertex.0, spec.vertex.1, spec.dir
                        ),
                    ))
                }
            };
            let (from, travel) = match kind {
                EdgeKind::Source => (add(spec.vertex, spec.dir), dir),
                _ => (spec.vertex, dir),
            };
            let black = face_id(left_face(from, travel), &mut faces);
            let white = face_id(right_face(from, travel), &mut faces);
            let (dx, dy) = spec.dir.step();
            let id = edges.len();
            edges.push(Edge {
                kind,
                tail,
                head,
                dir,
                mid: (spec.vertex.0 as f64 + 0.25 * dx as f64, spec.vertex.1 as f64 + 0.25 * dy as f64),
                black,
                white,
            });
            vertices[v].slots[spec.dir.index()] = Some(id);
        }
        let a_id = edges.len() - 2;
        let b_id = edges.len() - 1;

        // local checks and corners
        let mut corners = Vec::new();
        for vi in 0..vertices.len() {
            let pos = vertices[vi].pos;
            let deg = vertices[vi].degree();
            if deg != 2 && deg != 4 {
                return Err(DomainError::Degree(pos.0, pos.1, deg));
            }
            if deg == 2 {
                let s: Vec<usize> = (0..4).filter(|&i| vertices[vi].slots[i].is_some()).collect();
                if (s[1] - s[0]) % 2 == 0 {
                    return Err(DomainError::Collinear(pos.0, pos.1));
                }
            }
            for q in 0..4 {
                let (Some(e1), Some(e2)) = (vertices[vi].slots[q], vertices[vi].slots[(q + 1) % 4]) else {
                    continue;
                };
                let into = |e: usize| edges[e].head == Some(vi);
                let (din, dout, ein, eout) = match (into(e1), into(e2)) {
                    (true, false) => (q, (q + 1) % 4, e1, e2),
                    (false, true) => ((q + 1) % 4, q, e2, e1),
                    _ => {
                        return Err(DomainError::Segment(format!(
                            "edges at ({}, {}) do not alternate in and out",
                            pos.0, pos.1
                        )))
                    }
                };
                let travel_in = Dir::from_index(din).rev().angle8();
                let mut turn = (Dir::from_index(dout).angle8() - travel_in).rem_euclid(8);
                if turn > 4 {
                    turn -= 8;
                }
                let face = face_id(quadrant_face(pos, q), &mut faces);
                vertices[vi].corners[q] = Some(corners.len());
                corners.push(Corner {
                    vertex: vi,
                    quadrant: q,
                    in_edge: ein,
                    out_edge: eout,
                    turn,
                    tangent: (travel_in + turn / 2).rem_euclid(8),
                    face,
                });
            }
        }

        let mut flippable = Vec::new();
        for (vi, v) in vertices.iter_mut().enumerate() {
            if v.degree() == 4 {
                v.flip = Some(flippable.len());
                flippable.push(vi);
            }
        }

        // successor tables
        let n = edges.len();
        let mut succ = vec![[NIL; 2]; n];
        let mut succ_corner = vec![[NIL; 2]; n];
        let mut head_bit = vec![NIL; n];
        for e in 0..n {
            let Some(h) = edges[e].head else { continue };
            let v = &vertices[h];
            let din = edges[e].dir.rev().index();
            let candidates = [(din + 3) % 4, din];
            if v.degree() == 2 {
                let c = candidates.iter().find_map(|&q| v.corners[q]).expect("degree-2 corner");
                succ[e] = [corners[c].out_edge as u32; 2];
                succ_corner[e] = [c as u32; 2];
            } else {
                head_bit[e] = v.flip.unwrap() as u32;
                for &q in &candidates {
                    let c = v.corners[q].expect("degree-4 corner");
                    // open primal edge: strands hug the white squares
                    let bit = (faces[corners[c].face].color == Color::White) as usize;
                    succ[e][bit] = corners[c].out_edge as u32;
                    succ_corner[e][bit] = c as u32;
                }
            }
        }

        let mut dom = MedialDomain {
            delta,
            vertices,
            edges,
            corners,
            faces,
            a: a_id,
            b: b_id,
            flippable,
            arcs: None,
            frame: None,
            vertex_at,
            face_at,
            succ,
            succ_corner,
            head_bit,
        };
        dom.mark_inside(&segs, validation)?;
        if validation == Validation::Strict {
            dom.check_global(&segs)?;
            dom.arcs = Some(dom.trace_arcs()?);
        }
        Ok(dom)
    }

    fn mark_inside(&mut self, segs: &BTreeSet<((i32, i32), Dir)>, validation: Validation) -> Result<(), DomainError> {
        let (mut x0, mut y0, mut x1, mut y1) = (i32::MAX, i32::MAX, i32::MIN, i32::MIN);
        for f in &self.faces {
            x0 = x0.min(f.ll.0);
            y0 = y0.min(f.ll.1);
            x1 = x1.max(f.ll.0);
            y1 = y1.max(f.ll.1);
        }
        x0 -= 1;
        y0 -= 1;
        x1 += 1;
        y1 += 1;
        let w = (x1 - x0 + 1) as usize;
        let h = (y1 - y0 + 1) as usize;
        let idx = |x: i32, y: i32| (y - y0) as usize * w + (x - x0) as usize;
        let mut seen = vec![false; w * h];
        let mut queue = VecDeque::from([(x0, y0)]);
        seen[idx(x0, y0)] = true;
        while let Some((x, y)) = queue.pop_front() {
            // side segments of square (x, y): bottom, top, left, right
            let moves = [
                ((x, y - 1), ((x, y), Dir::E)),
                ((x, y + 1), ((x, y + 1), Dir::E)),
                ((x - 1, y), ((x, y), Dir::N)),
                ((x + 1, y), ((x + 1, y), Dir::N)),
            ];
            for (nb, side) in moves {
                if nb.0 < x0 || nb.0 > x1 || nb.1 < y0 || nb.1 > y1 {
                    continue;
                }
                if segs.contains(&side) || seen[idx(nb.0, nb.1)] {
                    continue;
                }
                seen[idx(nb.0, nb.1)] = true;
                queue.push_back(nb);
            }
        }
        for f in &mut self.faces {
            f.inside = !seen[idx(f.ll.0, f.ll.1)];
            if f.inside && validation == Validation::Strict {
                let (x, y) = f.ll;
                let sides = [((x, y), Dir::E), ((x, y + 1), Dir::E), ((x, y), Dir::N), ((x + 1, y), Dir::N)];
                if !sides.iter().all(|s| segs.contains(s)) {
                    return Err(DomainError::NotSimplyConnected);
                }
            }
        }
        if validation == Validation::Strict {
            // enclosed squares not adjacent to any edge mean a hole
            for y in y0..=y1 {
                for x in x0..=x1 {
                    if !seen[idx(x, y)] && !self.face_at.contains_key(&(x, y)) {
                        return Err(DomainError::NotSimplyConnected);
                    }
                }
            }
        }
        Ok(())
    }

    fn check_global(&self, segs: &BTreeSet<((i32, i32), Dir)>) -> Result<(), DomainError> {
        // connectivity through full edges
        let nv = self.vertices.len();
        let mut seen = vec![false; nv];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for e in self.vertices[v].slots.iter().flatten() {
                let ed = &self.edges[*e];
                for w in [ed.tail, ed.head].into_iter().flatten() {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(DomainError::Disconnected);
        }
        let inside = self.faces.iter().filter(|f| f.inside).count() as i64;
        if nv as i64 - segs.len() as i64 + inside != 1 {
            return Err(DomainError::NotSimplyConnected);
        }
        for v in &self.vertices {
            let q = std::array::from_fn::<bool, 4, _>(|i| {
                self.face_at
                    .get(&quadrant_face(v.pos, i))
                    .map(|&f| self.faces[f].inside)
                    .unwrap_or(false)
            });
            if (q[0] && q[2] && !q[1] && !q[3]) || (q[1] && q[3] && !q[0] && !q[2]) {
                return Err(DomainError::Pinch(v.pos.0, v.pos.1));
            }
        }
        Ok(())
    }

    fn trace_arcs(&self) -> Result<Arcs, DomainError> {
        // boundary full edges oriented with the outside on the right
        let mut next_from: HashMap<usize, Vec<(usize, usize, FaceId)>> = HashMap::new();
        for (id, e) in self.edges.iter().enumerate() {
            if e.kind != EdgeKind::Full {
                continue;
            }
            let (bin, win) = (self.faces[e.black].inside, self.faces[e.white].inside);
            if bin && win {
                continue;
            }
            if !bin && !win {
                return Err(DomainError::Pinch(
                    self.vertices[e.tail.unwrap()].pos.0,
                    self.vertices[e.tail.unwrap()].pos.1,
                ));
            }
            // black is on the left of the travel direction
            let (from, to, outside) = if win {
                (e.head.unwrap(), e.tail.unwrap(), e.black)
            } else {
                (e.tail.unwrap(), e.head.unwrap(), e.white)
            };
            next_from.entry(from).or_default().push((id, to, outside));
        }
        for (v, list) in &next_from {
            if list.len() != 1 {
                let p = self.vertices[*v].pos;
                return Err(DomainError::Pinch(p.0, p.1));
            }
        }
        let va = self.edges[self.a].head.unwrap();
        let vb = self.edges[self.b].tail.unwrap();
        let total: usize = next_from.len();
        let mut arcs = Arcs::default();
        let mut v = va;
        let mut on_ab = true;
        let mut visited = HashSet::new();
        loop {
            // when a and b share a vertex the arc ba is empty
            if v == vb && !visited.is_empty() {
                on_ab = false;
            }
            let Some(&(e, to, outside)) = next_from.get(&v).and_then(|l| l.first()) else {
                return Err(DomainError::HalfEdge("a", "not on the outer boundary".into()));
            };
            if !visited.insert(e) {
                return Err(DomainError::NotSimplyConnected);
            }
            let color = self.faces[outside].color;
            if on_ab {
                if color != Color::White {
                    return Err(DomainError::ArcColor("ab"));
                }
                arcs.ab.push(e);
                arcs.outside_ab.push(outside);
            } else {
                if color != Color::Black {
                    return Err(DomainError::ArcColor("ba"));
                }
                arcs.ba.push(e);
                arcs.outside_ba.push(outside);
            }
            v = to;
            if v == va {
                break;
            }
        }
        if va == vb {
            on_ab = false;
        }
        if on_ab || visited.len() != total {
            return Err(DomainError::HalfEdge("b", "not on the outer boundary".into()));
        }
        Ok(arcs)
    }

    /// Unit segments of the full edges, each as (tail, head).
    pub fn segments(&self) -> Vec<((i32, i32), (i32, i32))> {
        self.edges
            .iter()
            .filter(|e| e.kind == EdgeKind::Full)
            .map(|e| (self.vertices[e.tail.unwrap()].pos, self.vertices[e.head.unwrap()].pos))
            .collect()
    }

    pub fn half_edge_spec(&self, e: usize) -> HalfEdgeSpec {
        let ed = &self.edges[e];
        match ed.kind {
            EdgeKind::Source => HalfEdgeSpec { vertex: self.vertices[ed.head.unwrap()].pos, dir: ed.dir.rev() },
            _ => HalfEdgeSpec { vertex: self.vertices[ed.tail.unwrap()].pos, dir: ed.dir },
        }
    }

    /// The smallest domain with one free primal edge: a single black square
    /// whose corner carries both half-edges.
    pub fn single_site(delta: f64) -> MedialDomain {
        let segs = [((0, 0), (1, 0)), ((1, 0), (1, 1)), ((1, 1), (0, 1)), ((0, 1), (0, 0))];
        MedialDomain::from_segments(
            &segs,
            HalfEdgeSpec { vertex: (0, 0), dir: Dir::S },
            HalfEdgeSpec { vertex: (0, 0), dir: Dir::W },
            delta,
            Validation::Strict,
        )
        .expect("single-site domain is valid")
    }

    /// A domain with no free primal edge: a staircase path of `steps` edges
    /// whose vertices are all forced corners.
    pub fn forced_path(steps: usize, delta: f64) -> Result<MedialDomain, DomainError> {
        if steps == 0 {
            return Err(DomainError::Param("path needs at least one edge".into()));
        }
        // staircase E, S, E, S, ... starting at (0, 0); black stays on the left
        let mut segs = Vec::new();
        let mut p = (0, 0);
        let mut dirs = Vec::new();
        for i in 0..steps {
            let d = if i % 2 == 0 { Dir::E } else { Dir::S };
            let q = add(p, d);
            segs.push((p, q));
            dirs.push(d);
            p = q;
        }
        let last = *dirs.last().unwrap();
        let first = dirs[0];
        let b_dir = if last == Dir::E { Dir::S } else { Dir::E };
        MedialDomain::from_segments(
            &segs,
            HalfEdgeSpec { vertex: (0, 0), dir: if first == Dir::E { Dir::N } else { Dir::W } },
            HalfEdgeSpec { vertex: p, dir: b_dir },
            delta,
            Validation::Relaxed,
        )
    }
}
