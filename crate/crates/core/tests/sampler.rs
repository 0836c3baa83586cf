use fermilab::config::BondState;
use fermilab::exact::enumerate;
use fermilab::lattice::{opposite_sides_domain, DomainFile, MedialDomain};
use fermilab::par::Execution;
use fermilab::sampler::{run, Algorithm, FkGraph, SamplerConfig};
use std::path::Path;

fn figure() -> MedialDomain {
    DomainFile::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/figure_domain.json")).unwrap()
}

#[test]
fn fk_weight_is_proportional_to_loop_weight() {
    for dom in [figure(), opposite_sides_domain(3, 2, 1.0).unwrap()] {
        let fk = FkGraph::new(&dom);
        let en = enumerate(&dom, Execution::Sequential).unwrap();
        let n = dom.num_flippable();
        for q in [1.0f64, 2.0, 3.0] {
            let s = q.sqrt();
            let mut ratio = None;
            for x in 0..(1u64 << n) {
                let st = BondState::from_u64(n, x);
                let o = st.count_open() as i32;
                let fk_w = s.powi(o) * q.powi(fk.free_clusters(&st) as i32);
                let r = fk_w / en.distribution.weight(x, q);
                let r0 = *ratio.get_or_insert(r);
                assert!((r / r0 - 1.0).abs() < 1e-12, "q={q} state={x}");
            }
        }
    }
}

fn compare(dom: &MedialDomain, q: f64, alg: Algorithm, sweeps: u64) {
    let exact = enumerate(dom, Execution::Sequential).unwrap();
    let f = exact.field(dom, q);
    let p = exact.observables.edge_probability(&exact.distribution, q);
    let cfg = SamplerConfig { q, sweeps, chains: 2, algorithm: alg, seed: 3, ..Default::default() };
    let mc = run(dom, &cfg, Execution::Parallel).unwrap();
    let mut worst = 0.0f64;
    for e in 0..dom.num_edges() {
        let d = mc.field.edge[e] - f.edge[e];
        let se = mc.field_se.edge[e];
        worst = worst.max(d.re.abs() / (se.re + 1e-3)).max(d.im.abs() / (se.im + 1e-3));
        worst = worst.max((mc.edge_prob[e] - p[e]).abs() / (mc.edge_prob_se[e] + 1e-3));
    }
    for c in 0..dom.corners.len() {
        let d = mc.field.corner[c] - f.corner[c];
        let se = mc.field_se.corner[c];
        worst = worst.max(d.re.abs() / (se.re + 1e-3)).max(d.im.abs() / (se.im + 1e-3));
    }
    assert!(worst < 5.0, "{alg:?} q={q}: worst deviation {worst} standard errors");
}

#[test]
fn metropolis_matches_exact() {
    let dom = figure();
    for q in [0.5, 2.0] {
        compare(&dom, q, Algorithm::Metropolis, 40_000);
    }
}

#[test]
fn cluster_chain_matches_exact() {
    let dom = opposite_sides_domain(3, 2, 1.0).unwrap();
    for q in [1.0, 2.0, 3.0] {
        compare(&dom, q, Algorithm::SwendsenWang, 40_000);
    }
}

#[test]
fn site_connection_probability_matches_exact() {
    let dom = opposite_sides_domain(3, 2, 1.0).unwrap();
    let fk = FkGraph::new(&dom);
    let site = (0..dom.faces.len()).find(|&f| fk.node_of_face[f] != u32::MAX && fk.node_of_face[f] != 0).unwrap();
    let en = enumerate(&dom, Execution::Sequential).unwrap();
    let (mut num, mut z) = (0.0, 0.0);
    for (st, w) in en.distribution.states(2.0) {
        z += w;
        if connected(&fk, &st, fk.node_of_face[site]) {
            num += w;
        }
    }
    let exact = num / z;
    let cfg = SamplerConfig { q: 2.0, sweeps: 40_000, track_site: Some(site), ..Default::default() };
    let (m, se) = run(&dom, &cfg, Execution::Sequential).unwrap().site_connection.unwrap();
    assert!((m - exact).abs() < 5.0 * se + 1e-3, "{m} vs {exact}");
}

fn connected(fk: &FkGraph, st: &BondState, node: u32) -> bool {
    let mut seen = vec![false; fk.n_nodes];
    let mut stack = vec![0u32];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for (i, &(a, b)) in fk.ends.iter().enumerate() {
            if !st.get(i) {
                continue;
            }
            let w = if a == u { b } else if b == u { a } else { continue };
            if !seen[w as usize] {
                seen[w as usize] = true;
                stack.push(w);
            }
        }
    }
    seen[node as usize]
}
