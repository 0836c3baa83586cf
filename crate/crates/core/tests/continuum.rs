use fermilab::analysis::build_h;
use fermilab::analysis::harmonic::Site;
use fermilab::continuum::{fjord_probe, integrate_h, reference_h, RectGeometry};
use fermilab::exact::enumerate;
use fermilab::lattice::{opposite_sides_domain, DomainFile};
use fermilab::par::Execution;
use num_complex::Complex64;
use std::path::Path;

fn unit(a: (f64, f64), b: (f64, f64)) -> RectGeometry {
    RectGeometry { width: 1.0, height: 1.0, a, b }
}

#[test]
fn opposite_corners_give_one_half_on_the_diagonal() {
    let r = reference_h(&unit((0.0, 0.0), (1.0, 1.0)), 64).unwrap();
    for k in 1..10 {
        let t = k as f64 / 10.0;
        assert!((r.h_at((t, t)).unwrap() - 0.5).abs() < 1e-9);
    }
    assert!(r.h.iter().all(|&v| (-1e-12..=1.0 + 1e-12).contains(&v)));
}

#[test]
fn boundary_values_and_resolution_stability() {
    let g = unit((0.5, 1.0), (0.5, 0.0));
    // counterclockwise from a at the top runs down the left side to b
    assert_eq!(g.boundary_value((0.0, 0.3), 1e-9), 0.0);
    assert_eq!(g.boundary_value((1.0, 0.3), 1e-9), 1.0);
    assert_eq!(g.boundary_value((0.5, 0.0), 1e-9), 0.5);
    let a = reference_h(&g, 64).unwrap();
    let b = reference_h(&g, 128).unwrap();
    assert!(a.error_estimate < 1e-3);
    for &p in &[(0.3, 0.4), (0.5, 0.5), (0.8, 0.7), (0.25, 0.75)] {
        assert!((a.h_at(p).unwrap() - b.h_at(p).unwrap()).abs() < 1e-4);
    }
    assert!((a.sqrt_phi_prime((0.5, 0.5)).unwrap() - b.sqrt_phi_prime((0.5, 0.5)).unwrap()).norm() < 1e-3);
    assert!(b.h_at((0.99, 0.5)).unwrap() > 0.9 && b.h_at((0.01, 0.5)).unwrap() < 0.1);
}

#[test]
fn square_root_satisfies_boundary_condition_on_straight_sides() {
    let g = unit((0.5, 1.0), (0.5, 0.0));
    let r = reference_h(&g, 128).unwrap();
    // f^2 times the tangent is real: horizontal sides need Im f^2 = 0, vertical ones Re f^2 = 0
    for t in [0.15, 0.25, 0.75, 0.85] {
        for s in [0.005, 0.995] {
            let f2 = r.sqrt_phi_prime((t, s)).unwrap().powi(2);
            assert!(f2.im.abs() < 0.05 * f2.norm(), "{t} {s} {f2}");
            let f2 = r.sqrt_phi_prime((s, t)).unwrap().powi(2);
            assert!(f2.re.abs() < 0.05 * f2.norm(), "{s} {t} {f2}");
        }
    }
}

#[test]
fn integral_of_f_squared_reproduces_two_h() {
    let r = reference_h(&unit((0.5, 1.0), (0.5, 0.0)), 128).unwrap();
    let (p0, p1) = ((0.3, 0.3), (0.7, 0.6));
    let steps = 400;
    let mut acc = 0.0;
    for k in 0..steps {
        let t0 = k as f64 / steps as f64;
        let t1 = (k + 1) as f64 / steps as f64;
        let pt = |t: f64| (p0.0 + t * (p1.0 - p0.0), p0.1 + t * (p1.1 - p0.1));
        let z = |p: (f64, f64)| Complex64::new(p.0, p.1);
        let fm = r.sqrt_phi_prime(pt(0.5 * (t0 + t1))).unwrap();
        acc += (fm * fm * (z(pt(t1)) - z(pt(t0)))).im;
    }
    let want = 2.0 * (r.h_at(p1).unwrap() - r.h_at(p0).unwrap());
    assert!((acc - want).abs() < 1e-3, "{acc} {want}");
}

#[test]
fn thin_fjord_barely_moves_h() {
    let g = unit((0.5, 1.0), (0.5, 0.0));
    let mut diffs = Vec::new();
    for res in [32usize, 64] {
        let plain = fjord_probe(&g, res, 1, 0.0).unwrap();
        let fjord = fjord_probe(&g, res, 1, 0.3).unwrap();
        let mut worst = 0.0f64;
        for j in res / 4..=3 * res / 4 {
            for i in res / 4..=3 * res / 4 {
                let (k1, k2) = (plain.idx(i, j), fjord.idx(i, j));
                assert_eq!(fjord.kind[k2], Site::Interior);
                worst = worst.max((plain.values[k1] - fjord.values[k2]).abs());
            }
        }
        diffs.push(worst);
    }
    assert!(diffs[1] < diffs[0] && diffs[1] < 1e-2, "{diffs:?}");
}

#[test]
fn least_squares_primitive_matches_exact_primitive() {
    for dom in [
        DomainFile::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/figure_domain.json")).unwrap(),
        opposite_sides_domain(3, 3, 1.0).unwrap(),
    ] {
        let f = enumerate(&dom, Execution::Sequential).unwrap().field(&dom, 2.0);
        let h = build_h(&dom, &f);
        let sq: Vec<f64> = f.edge.iter().map(|z| z.norm_sqr()).collect();
        let ls = integrate_h(&dom, &sq).unwrap();
        for (a, b) in h.values.iter().zip(&ls) {
            if let (Some(a), Some(b)) = (a, b) {
                assert!((a.re - b).abs() < 1e-9);
            }
        }
    }
}
