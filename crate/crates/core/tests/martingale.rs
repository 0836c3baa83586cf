use fermilab::fermion::martingale::{martingale_residual, martingale_residual_exact, slit};
use fermilab::lattice::{opposite_sides_domain, DomainFile, MedialDomain};
use std::path::Path;

fn figure() -> MedialDomain {
    DomainFile::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/figure_domain.json")).unwrap()
}

#[test]
fn no_conditioning_is_trivial() {
    let d = opposite_sides_domain(3, 2, 1.0).unwrap();
    let r = martingale_residual_exact(&d, 0).unwrap();
    assert_eq!((r.residual, r.prefixes), (0.0, 0));
}

#[test]
fn exact_martingale_on_rectangle() {
    let d = opposite_sides_domain(3, 2, 1.0).unwrap();
    for t in 1..=2 {
        let r = martingale_residual_exact(&d, t).unwrap();
        assert!(r.compared_points > 0 && r.prefixes > 0);
        assert_eq!(r.residual, 0.0, "t={t}: {r:?}");
    }
}

#[test]
fn exact_martingale_on_figure_domain() {
    let r = martingale_residual_exact(&figure(), 2).unwrap();
    assert_eq!(r.residual, 0.0, "{r:?}");
}

#[test]
fn float_martingale_for_other_q() {
    let d = opposite_sides_domain(3, 2, 1.0).unwrap();
    for q in [1.0, 3.0] {
        let r = martingale_residual(&d, q, 2).unwrap();
        assert!(r.residual < 1e-12, "q={q}: {r:?}");
    }
}

#[test]
fn slit_removes_edges_and_moves_start() {
    let d = opposite_sides_domain(3, 2, 1.0).unwrap();
    let first = d.successor(d.a, false).unwrap();
    let s = slit(&d, &[first]).unwrap();
    assert_eq!(s.num_edges(), d.num_edges() - 1);
    assert!(s.num_flippable() < d.num_flippable());
    let ed = &d.edges[first];
    assert_eq!(s.vertices[s.edges[s.a].head.unwrap()].pos, d.vertices[ed.head.unwrap()].pos);
}
