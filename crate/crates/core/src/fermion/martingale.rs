//! Martingale property of F along the exploration: the observable in the domain
//! slit by the first t steps equals the conditional average of the observable
//! in the domains slit further.

use super::FermionField;
use crate::exact::{enumerate, Cyclo16, Enumeration, ExactError};
use crate::lattice::{DomainError, EdgeId, EdgeKind, HalfEdgeSpec, MedialDomain, Validation};
use crate::par::Execution;
use crate::scalar::Scalar;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MartingaleError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// Remove the first `prefix.len()` interface edges after `a`; the last one
/// becomes the new starting half-edge.
pub fn slit(dom: &MedialDomain, prefix: &[EdgeId]) -> Result<MedialDomain, DomainError> {
    let Some(&last) = prefix.last() else {
        return Ok(dom.clone());
    };
    let drop: Vec<((i32, i32), (i32, i32))> = prefix
        .iter()
        .map(|&e| {
            let ed = &dom.edges[e];
            (dom.vertices[ed.tail.unwrap()].pos, dom.vertices[ed.head.unwrap()].pos)
        })
        .collect();
    let segs: Vec<_> = dom.segments().into_iter().filter(|s| !drop.contains(s)).collect();
    let ed = &dom.edges[last];
    let a = HalfEdgeSpec { vertex: dom.vertices[ed.head.unwrap()].pos, dir: ed.dir.rev() };
    MedialDomain::from_segments(&segs, a, dom.half_edge_spec(dom.b), dom.delta, Validation::Relaxed)
}

/// Geometric identity of a point, stable across slit domains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Edge(i64, i64),
    Corner((i32, i32), usize),
}

fn keyed<S: Clone>(dom: &MedialDomain, f: &FermionField<S>) -> BTreeMap<Key, S> {
    let mut m = BTreeMap::new();
    for (e, ed) in dom.edges.iter().enumerate() {
        if ed.kind == EdgeKind::Full {
            let k = Key::Edge((ed.mid.0 * 2.0).round() as i64, (ed.mid.1 * 2.0).round() as i64);
            m.insert(k, f.edge[e].clone());
        }
    }
    for (c, cn) in dom.corners.iter().enumerate() {
        m.insert(Key::Corner(dom.vertices[cn.vertex].pos, cn.quadrant), f.corner[c].clone());
    }
    m
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct MartingaleReport {
    pub residual: f64,
    /// Prefixes conditioned on, over all levels below `steps`.
    pub prefixes: usize,
    pub compared_points: usize,
}

struct Node<S> {
    field: BTreeMap<Key, S>,
    /// (step probability, child) for each continuation by one edge.
    children: Vec<(S, Node<S>)>,
}

trait Arith<S> {
    fn field(&self, en: &Enumeration, dom: &MedialDomain) -> FermionField<S>;
    fn weight(&self, loops: usize) -> S;
}

struct Exact;
impl Arith<Cyclo16> for Exact {
    fn field(&self, en: &Enumeration, dom: &MedialDomain) -> FermionField<Cyclo16> {
        en.field_q2(dom)
    }
    fn weight(&self, loops: usize) -> Cyclo16 {
        let mut w = Cyclo16::one();
        for _ in 0..loops {
            w = &w * &Cyclo16::sqrt2();
        }
        w
    }
}

struct Float(f64);
impl Arith<Complex64> for Float {
    fn field(&self, en: &Enumeration, dom: &MedialDomain) -> FermionField<Complex64> {
        en.field(dom, self.0)
    }
    fn weight(&self, loops: usize) -> Complex64 {
        Complex64::new(self.0.sqrt().powi(loops as i32), 0.0)
    }
}

fn grow<S: Scalar, A: Arith<S>>(
    root: &MedialDomain,
    prefix: &mut Vec<EdgeId>,
    depth: usize,
    ar: &A,
) -> Result<Node<S>, MartingaleError> {
    let dom = slit(root, prefix)?;
    let en = enumerate(&dom, Execution::Sequential)?;
    let field = keyed(&dom, &ar.field(&en, &dom));
    let mut children = Vec::new();
    if depth > 0 {
        // the current head edge in the root, and the slit vertex it enters
        let cur = prefix.last().copied().unwrap_or(root.a);
        let head = root.edges[cur].head.expect("interface edge has a head");
        let local = dom.vertex_at(root.vertices[head].pos).expect("slit keeps the next vertex");
        let mut options: Vec<(EdgeId, S)> = Vec::new();
        match dom.vertices[local].flip {
            Some(i) => {
                let mut p = [S::zero(), S::zero()];
                let mut z = S::zero();
                for x in 0..en.distribution.num_states() {
                    let w = ar.weight(en.distribution.loops(x as u64) as usize);
                    z = z.add(&w);
                    let bit = (x >> i) & 1;
                    p[bit] = p[bit].add(&w);
                }
                let zi = z.inv().expect("partition function is nonzero");
                for bit in [false, true] {
                    if let Some(next) = root.successor(cur, bit) {
                        options.push((next, p[bit as usize].mul(&zi)));
                    }
                }
            }
            None => {
                if let Some(next) = root.successor(cur, false) {
                    options.push((next, S::from_i64(1)));
                }
            }
        }
        for (next, p) in options {
            if root.edges[next].kind != EdgeKind::Full {
                continue; // reached b
            }
            prefix.push(next);
            children.push((p, grow(root, prefix, depth - 1, ar)?));
            prefix.pop();
        }
    }
    Ok(Node { field, children })
}

/// Conditional average of the observable `s` levels below `node`, on the
/// points present in every domain at that level.
fn average<S: Scalar>(node: &Node<S>, s: usize) -> BTreeMap<Key, S> {
    if s == 0 || node.children.is_empty() {
        return node.field.clone();
    }
    let mut acc: Option<BTreeMap<Key, S>> = None;
    for (p, child) in &node.children {
        let sub = average(child, s - 1);
        acc = Some(match acc {
            None => sub.into_iter().map(|(k, v)| (k, p.mul(&v))).collect(),
            Some(a) => a
                .into_iter()
                .filter_map(|(k, v)| sub.get(&k).map(|w| (k, v.add(&p.mul(w)))))
                .collect(),
        });
    }
    acc.unwrap()
}

fn check<S: Scalar>(node: &Node<S>, depth: usize, rep: &mut MartingaleReport) {
    if node.children.is_empty() {
        return;
    }
    rep.prefixes += 1;
    for s in 1..=depth {
        for (k, v) in average(node, s) {
            if let Some(f) = node.field.get(&k) {
                rep.residual = rep.residual.max(f.sub(&v).residual());
                rep.compared_points += 1;
            }
        }
    }
    for (_, child) in &node.children {
        check(child, depth - 1, rep);
    }
}

fn report<S: Scalar, A: Arith<S>>(dom: &MedialDomain, steps: usize, ar: &A) -> Result<MartingaleReport, MartingaleError> {
    let root = grow(dom, &mut Vec::new(), steps, ar)?;
    let mut rep = MartingaleReport::default();
    check(&root, steps, &mut rep);
    Ok(rep)
}

/// Worst deviation from the martingale property over all interface prefixes of
/// length < `steps`, in exact arithmetic at q = 2.
pub fn martingale_residual_exact(dom: &MedialDomain, steps: usize) -> Result<MartingaleReport, MartingaleError> {
    report(dom, steps, &Exact)
}

/// Same check in floating point for any q > 0.
pub fn martingale_residual(dom: &MedialDomain, q: f64, steps: usize) -> Result<MartingaleReport, MartingaleError> {
    report(dom, steps, &Float(q))
}

