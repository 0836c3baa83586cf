use fermilab::analysis::checks::{interior_squares, laplacian, residual_report};
use fermilab::config::{decompose, BondState};
use fermilab::exact::{enumerate, Cyclo16};
use fermilab::lattice::{
    build_rect_domain, opposite_sides_domain, Color, DomainFile, MedialDomain, PointRef, RingGap,
};
use fermilab::par::Execution;
use fermilab::scalar::Scalar;
use proptest::prelude::*;
use std::path::Path;

fn figure() -> MedialDomain {
    DomainFile::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/figure_domain.json")).unwrap()
}

/// Rotation from edge direction `from` to `to` in eighth turns, as a signed quarter turn.
fn turn(from: i32, to: i32) -> i32 {
    match (to - from).rem_euclid(8) {
        2 => 2,
        6 => -2,
        d => panic!("not a quarter turn: {d}"),
    }
}

/// Brute-force observable: decompose every state, recompute windings from edge
/// directions alone and sum exact weights.
fn oracle(dom: &MedialDomain) -> (Vec<Cyclo16>, Vec<Cyclo16>, Cyclo16) {
    let n = dom.num_flippable();
    let mut edge = vec![Cyclo16::zero(); dom.num_edges()];
    let mut corner = vec![Cyclo16::zero(); dom.corners.len()];
    let mut z = Cyclo16::zero();
    let sqrt2 = Cyclo16::sqrt2();
    for x in 0..(1u64 << n) {
        let cfg = decompose(dom, &BondState::from_u64(n, x)).unwrap();
        let mut w = Cyclo16::one();
        for _ in 0..cfg.loop_count() {
            w = &w * &sqrt2;
        }
        z = &z + &w;
        let es = &cfg.interface.edges;
        let dirs: Vec<i32> = es.iter().map(|&e| dom.edges[e].dir.angle8()).collect();
        // winding from each edge to b
        let mut k = vec![0i32; es.len()];
        for i in (0..es.len() - 1).rev() {
            k[i] = k[i + 1] - turn(dirs[i], dirs[i + 1]);
        }
        for (i, &e) in es.iter().enumerate() {
            edge[e] = &edge[e] + &(&w * &Cyclo16::zeta_pow(k[i]));
        }
        for (i, &c) in cfg.interface.corners.iter().enumerate() {
            let kc = k[i + 1] - turn(dirs[i], dirs[i + 1]) / 2;
            let val = &(&w * &Cyclo16::zeta_pow(kc)) * &Cyclo16::two_cos_pi8();
            corner[c] = &corner[c] + &val;
        }
    }
    let zi = z.inv().unwrap();
    let edge = edge.iter().map(|x| x * &zi).collect();
    let corner = corner.iter().map(|x| x * &zi).collect();
    (edge, corner, z)
}

#[test]
fn enumeration_matches_brute_force_oracle() {
    for dom in [figure(), opposite_sides_domain(3, 2, 1.0).unwrap(), opposite_sides_domain(2, 2, 1.0).unwrap()] {
        let en = enumerate(&dom, Execution::Sequential).unwrap();
        let (edge, corner, z) = oracle(&dom);
        assert_eq!(en.distribution.partition_q2(), z);
        let f = en.field_q2(&dom);
        assert_eq!(f.edge, edge);
        assert_eq!(f.corner, corner);
    }
}

#[test]
fn sequential_and_parallel_enumeration_agree() {
    let dom = opposite_sides_domain(4, 2, 1.0).unwrap();
    let a = enumerate(&dom, Execution::Sequential).unwrap();
    let b = enumerate(&dom, Execution::Parallel).unwrap();
    assert_eq!(a.distribution.loop_hist, b.distribution.loop_hist);
    assert_eq!(a.field_q2(&dom).edge, b.field_q2(&dom).edge);
}

#[test]
fn identities_hold_exactly_on_acceptance_domains() {
    let doms = vec![
        figure(),
        opposite_sides_domain(3, 2, 1.0).unwrap(),
        opposite_sides_domain(4, 2, 1.0).unwrap(),
        opposite_sides_domain(3, 3, 1.0).unwrap(),
    ];
    for dom in doms {
        let f = enumerate(&dom, Execution::Parallel).unwrap().field_q2(&dom);
        let (rep, h) = residual_report(&dom, &f);
        assert_eq!(rep.max(), 0.0, "{rep:?}");
        assert!(rep.checked_edges > 0 && rep.checked_squares > 0);
        for fid in interior_squares(&dom, Color::Black) {
            assert!(laplacian(&dom, &h, fid).unwrap().to_c64().re >= 0.0);
        }
        for fid in interior_squares(&dom, Color::White) {
            assert!(laplacian(&dom, &h, fid).unwrap().to_c64().re <= 0.0);
        }
    }
}

#[test]
fn endpoint_values_are_unimodular() {
    let dom = opposite_sides_domain(3, 2, 1.0).unwrap();
    let f = enumerate(&dom, Execution::Sequential).unwrap().field_q2(&dom);
    assert_eq!(f.edge[dom.b], Cyclo16::one());
    assert_eq!(Scalar::norm_sqr(&f.edge[dom.a]), Cyclo16::one());
}

#[test]
fn observable_lies_on_lines_for_every_q() {
    let dom = figure();
    let en = enumerate(&dom, Execution::Sequential).unwrap();
    for q in [0.5, 1.0, 2.0, 3.0] {
        let f = en.field(&dom, q);
        for (e, v) in f.edge.iter().enumerate() {
            let l = dom.line_of(PointRef::Edge(e)).unwrap();
            assert!((l.project(*v) - v).norm() < 1e-12);
        }
    }
}

#[test]
fn probabilities_sum_to_one() {
    let dom = opposite_sides_domain(3, 2, 1.0).unwrap();
    let en = enumerate(&dom, Execution::Sequential).unwrap();
    let total: f64 = en.distribution.states(2.0).map(|(_, w)| w).sum();
    assert!((total - en.distribution.partition_function(2.0)).abs() < 1e-9);
    let p = en.observables.edge_probability(&en.distribution, 2.0);
    assert!((p[dom.a] - 1.0).abs() < 1e-12 && (p[dom.b] - 1.0).abs() < 1e-12);
    assert!(p.iter().all(|&x| (0.0..=1.0 + 1e-12).contains(&x)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn identities_exact_for_random_rectangles(m in 2usize..=3, n in 2usize..=3, ga in 0usize..10, gb in 0usize..10) {
        let len = 2 * (m + n);
        let (ga, gb) = (ga % len, gb % len);
        prop_assume!(ga != gb);
        let dom = build_rect_domain(m, n, RingGap(ga), RingGap(gb), 1.0).unwrap();
        prop_assume!(dom.num_flippable() <= 16);
        let f = enumerate(&dom, Execution::Sequential).unwrap().field_q2(&dom);
        let (rep, _) = residual_report(&dom, &f);
        prop_assert_eq!(rep.max(), 0.0);
    }
}
