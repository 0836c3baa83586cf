use fermilab::config::{decompose, BondState, Interface};
use fermilab::lattice::{
    build_rect_domain, square_domain, DomainError, DomainFile, EdgeKind, HalfEdgeSpec, MedialDomain, PointRef,
    RingGap, Validation, Dir,
};
use std::f64::consts::PI;
use std::path::Path;

fn figure() -> MedialDomain {
    DomainFile::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/figure_domain.json")).unwrap()
}

#[test]
fn figure_domain_has_thirteen_free_edges() {
    let d = figure();
    assert_eq!(d.num_flippable(), 13);
    let mut pos: Vec<_> = d.flippable.iter().map(|&v| d.vertices[v].pos).collect();
    pos.sort();
    let mut expected = vec![
        (1, 2), (1, 3), (2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (3, 3), (3, 4), (4, 2), (4, 3), (4, 4), (5, 3),
    ];
    expected.sort();
    assert_eq!(pos, expected);
}

#[test]
fn figure_arrows_are_reproduced() {
    let d = figure();
    let arrows = [
        ((2, 0), (3, 0)), ((1, 1), (2, 1)), ((3, 1), (2, 1)), ((3, 1), (4, 1)), ((0, 2), (1, 2)),
        ((2, 2), (1, 2)), ((2, 2), (3, 2)), ((4, 2), (3, 2)), ((4, 2), (5, 2)), ((1, 3), (0, 3)),
        ((1, 3), (2, 3)), ((3, 3), (2, 3)), ((3, 3), (4, 3)), ((5, 3), (4, 3)), ((2, 4), (3, 4)),
        ((4, 4), (3, 4)), ((4, 4), (5, 4)), ((3, 5), (4, 5)), ((0, 3), (0, 2)), ((1, 2), (1, 1)),
        ((1, 2), (1, 3)), ((2, 1), (2, 0)), ((2, 1), (2, 2)), ((2, 3), (2, 2)), ((2, 3), (2, 4)),
        ((3, 0), (3, 1)), ((3, 2), (3, 1)), ((3, 2), (3, 3)), ((3, 4), (3, 3)), ((3, 4), (3, 5)),
        ((4, 1), (4, 2)), ((4, 3), (4, 2)), ((4, 3), (4, 4)), ((4, 5), (4, 4)), ((5, 2), (5, 3)),
        ((5, 4), (5, 3)),
    ];
    for (p, q) in arrows {
        let e = d.edge_between(p, q).unwrap();
        let ed = &d.edges[e];
        assert_eq!(d.vertices[ed.tail.unwrap()].pos, p, "edge {p:?}-{q:?}");
        assert_eq!(d.vertices[ed.head.unwrap()].pos, q);
    }
    assert_eq!(d.edges[d.a].dir, Dir::S);
    assert_eq!(d.edges[d.b].dir, Dir::E);
}

#[test]
fn figure_edge_lines() {
    let d = figure();
    let q = PI / 4.0;
    // labels written next to edges, keyed by an endpoint pair
    let labels = [
        (((0, 2), (1, 2)), 0.0),
        (((1, 1), (2, 1)), 0.0),
        (((2, 0), (3, 0)), 0.0),
        (((0, 3), (1, 3)), 2.0 * q),
        (((1, 2), (2, 2)), 2.0 * q),
        (((2, 1), (3, 1)), 2.0 * q),
        (((0, 2), (0, 3)), q),
        (((1, 1), (1, 2)), q),
        (((1, 2), (1, 3)), 3.0 * q),
        (((2, 1), (2, 2)), 3.0 * q),
        (((3, 0), (3, 1)), 3.0 * q),
        (((5, 2), (5, 3)), 3.0 * q),
        (((5, 3), (5, 4)), q),
    ];
    for ((p, r), arg) in labels {
        let e = d.edge_between(p, r).unwrap();
        let l = d.line_of(PointRef::Edge(e)).unwrap();
        assert!((l.arg() - arg).abs() < 1e-12, "{p:?}-{r:?}: {} vs {arg}", l.arg());
    }
}

#[test]
fn figure_interface_is_realised() {
    let d = figure();
    let path: Vec<(i32, i32)> = vec![
        (1, 3), (2, 3), (2, 2), (3, 2), (3, 1), (4, 1), (4, 2), (3, 2), (3, 3), (4, 3), (4, 4), (5, 4), (5, 3),
    ];
    let mut found = 0;
    for x in 0..(1u64 << d.num_flippable()) {
        let it = Interface::trace(&d, &x).unwrap();
        let vs: Vec<_> = it.vertices(&d).iter().map(|&v| d.vertices[v].pos).collect();
        if vs == path {
            found += 1;
        }
    }
    // the path fixes every vertex it touches; the rest are free
    assert!(found > 0);
}

#[test]
fn figure_arcs_are_monochrome() {
    let d = figure();
    let arcs = d.boundary_arcs().unwrap();
    assert!(!arcs.ab.is_empty() && !arcs.ba.is_empty());
    let n_boundary = d.edges.iter().filter(|e| e.kind == EdgeKind::Full).count()
        - d.edges
            .iter()
            .filter(|e| e.kind == EdgeKind::Full && d.faces[e.black].inside && d.faces[e.white].inside)
            .count();
    assert_eq!(arcs.ab.len() + arcs.ba.len(), n_boundary);
}

#[test]
fn json_roundtrip_preserves_domain() {
    let d = square_domain(3, 0.25).unwrap();
    let f = DomainFile::from_domain(&d);
    let text = serde_json::to_string(&f).unwrap();
    let d2 = DomainFile::parse(&text).unwrap().to_domain().unwrap();
    assert_eq!(d.content_hash(), d2.content_hash());
    assert_eq!(d.num_flippable(), d2.num_flippable());
}

#[test]
fn rejects_wrong_half_edge_orientation() {
    let segs = [((0, 0), (1, 0)), ((1, 0), (1, 1)), ((1, 1), (0, 1)), ((0, 1), (0, 0))];
    let r = MedialDomain::from_segments(
        &segs,
        HalfEdgeSpec { vertex: (0, 0), dir: Dir::W },
        HalfEdgeSpec { vertex: (0, 0), dir: Dir::S },
        1.0,
        Validation::Strict,
    );
    assert!(matches!(r, Err(DomainError::HalfEdge(..))));
}

#[test]
fn rejects_bad_degree_and_pinch() {
    // a lone segment with half-edges at both ends has collinear degree-2 vertices
    let r = MedialDomain::from_segments(
        &[((0, 0), (1, 0))],
        HalfEdgeSpec { vertex: (0, 0), dir: Dir::W },
        HalfEdgeSpec { vertex: (1, 0), dir: Dir::E },
        1.0,
        Validation::Strict,
    );
    assert!(r.is_err());
    // two squares touching at a corner
    let mut segs = Vec::new();
    for (x, y) in [(0, 0), (1, 1)] {
        segs.push(((x, y), (x + 1, y)));
        segs.push(((x + 1, y), (x + 1, y + 1)));
        segs.push(((x + 1, y + 1), (x, y + 1)));
        segs.push(((x, y + 1), (x, y)));
    }
    let r = MedialDomain::from_segments(
        &segs,
        HalfEdgeSpec { vertex: (0, 0), dir: Dir::S },
        HalfEdgeSpec { vertex: (0, 0), dir: Dir::W },
        1.0,
        Validation::Strict,
    );
    assert!(r.is_err());
}

#[test]
fn rect_family_sizes() {
    let d = build_rect_domain(1, 1, RingGap(1), RingGap(0), 1.0).unwrap();
    assert_eq!(d.num_flippable(), 2);
    let d = square_domain(3, 1.0).unwrap();
    assert!(d.num_flippable() <= 20, "{}", d.num_flippable());
    assert_eq!(MedialDomain::single_site(1.0).num_flippable(), 1);
    let p = MedialDomain::forced_path(5, 1.0).unwrap();
    assert_eq!(p.num_flippable(), 0);
    let c = decompose(&p, &BondState::closed(0)).unwrap();
    assert_eq!(c.interface.edges.len(), 7);
    assert_eq!(c.loop_count(), 0);
}

#[test]
fn lines_of_corners_are_odd_eighths() {
    let d = square_domain(4, 1.0).unwrap();
    for c in 0..d.corners.len() {
        let l = d.line_of(PointRef::Corner(c)).unwrap();
        assert_eq!(l.eighths() % 2, 1);
    }
}
