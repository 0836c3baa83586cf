//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test --release -p fermilab-cli --test acceptance`. Passing
//! criterion numbers as arguments (`-- 1 3 8`) runs a subset. Criteria listed in
//! `KNOWN_FAILURES` print FAIL without failing the process; any other failure does.

use fermilab::analysis::checks::{
    build_h, check_cauchy_riemann, check_h_boundary, check_hintf, check_preholomorphic, check_projection_sums,
    check_projections, check_sub_super,
};
use fermilab::analysis::green::{check_green_lemma, fit_glog};
use fermilab::analysis::probes::{check_verblunsky, l2_central, loglog_slope};
use fermilab::continuum::{compare_convergence, integrate_h, reference_h, ConvergenceRow, RectGeometry};
use fermilab::exact::{enumerate, Cyclo16};
use fermilab::fermion::martingale::martingale_residual_exact;
use fermilab::fermion::FermionField;
use fermilab::lattice::{
    build_rect_domain, opposite_sides_domain, square_domain, unit_square_delta, Color, DomainFile, MedialDomain, RingGap,
};
use fermilab::par::Execution;
use fermilab::sampler::{self, SamplerConfig};
use std::collections::BTreeSet;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

const KNOWN_FAILURES: [u32; 2] = [7, 8];
const EXEC: Execution = Execution::Parallel;
const SEED: u64 = 20_240_611;

struct Verdict {
    pass: bool,
    detail: String,
}

fn figure() -> MedialDomain {
    DomainFile::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/figure_domain.json")).unwrap()
}

/// The figure domain, then every rectangle with every placement of a and b on
/// its boundary and at most `max_bits` free primal edges.
fn domain_family(max_bits: usize) -> Vec<(String, MedialDomain)> {
    let mut out = vec![("figure".to_string(), figure())];
    let mut seen = BTreeSet::new();
    seen.insert(out[0].1.content_hash());
    for m in 1..=5 {
        for n in 1..=5 {
            let len = 2 * (m + n);
            for ga in 0..len {
                for gb in 0..len {
                    if ga == gb {
                        continue;
                    }
                    let Ok(d) = build_rect_domain(m, n, RingGap(ga), RingGap(gb), 1.0) else { continue };
                    if d.num_flippable() <= max_bits && seen.insert(d.content_hash()) {
                        out.push((format!("rect({m},{n}) a={ga} b={gb}"), d));
                    }
                }
            }
        }
    }
    for (m, n) in [(3, 2), (4, 2), (3, 3)] {
        let d = opposite_sides_domain(m, n, 1.0).unwrap();
        if d.num_flippable() <= max_bits && seen.insert(d.content_hash()) {
            out.push((format!("rect({m},{n})"), d));
        }
    }
    out
}

fn within(t: Instant, budget: Duration) -> (bool, String) {
    let e = t.elapsed();
    (e <= budget, format!("{:.1}s of {}s", e.as_secs_f64(), budget.as_secs()))
}

fn spread(xs: &[f64]) -> f64 {
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    hi / lo
}

struct ExactFields {
    fields: Vec<(String, MedialDomain, FermionField<Cyclo16>)>,
    elapsed: Duration,
}

fn exact_fields() -> ExactFields {
    let t = Instant::now();
    let fields = domain_family(20)
        .into_iter()
        .map(|(name, d)| {
            let f = enumerate(&d, EXEC).unwrap().field_q2(&d);
            (name, d, f)
        })
        .collect();
    ExactFields { fields, elapsed: t.elapsed() }
}

fn criterion1(ex: &ExactFields) -> Verdict {
    let t = Instant::now();
    let mut worst = (0.0f64, String::new());
    let mut points = 0;
    for (name, d, f) in &ex.fields {
        let (pre, ne) = check_preholomorphic(d, f);
        let (cr, ns) = check_cauchy_riemann(d, f);
        points += ne + ns;
        let r = pre.max(cr).max(check_projection_sums(d, f)).max(check_projections(d, f));
        if r > worst.0 || worst.1.is_empty() {
            worst = (r.max(worst.0), name.clone());
        }
    }
    let elapsed = ex.elapsed + t.elapsed();
    let ok_time = elapsed <= Duration::from_secs(300);
    Verdict {
        pass: worst.0 == 0.0 && ok_time,
        detail: format!(
            "{} domains, {points} edge/square checks, max residual {:e}, {:.1}s of 300s",
            ex.fields.len(),
            worst.0,
            elapsed.as_secs_f64()
        ),
    }
}

fn criterion2(ex: &ExactFields) -> Verdict {
    let t = Instant::now();
    let mut worst = 0.0f64;
    for (_, d, f) in &ex.fields {
        let h = build_h(d, f);
        worst = worst
            .max(h.closure_residual)
            .max(check_sub_super(d, f, &h))
            .max(check_h_boundary(d, &h))
            .max(check_hintf(d, f, &h));
    }
    let (ok_time, time) = within(t, Duration::from_secs(60));
    Verdict { pass: worst == 0.0 && ok_time, detail: format!("closure, sub/super, boundary, diagonal: max residual {worst:e}, {time}") }
}

fn criterion3() -> Verdict {
    let t = Instant::now();
    let d = opposite_sides_domain(3, 2, 1.0).unwrap();
    let r = martingale_residual_exact(&d, 2).unwrap();
    let (ok_time, time) = within(t, Duration::from_secs(120));
    Verdict {
        pass: r.residual == 0.0 && r.compared_points > 0 && ok_time,
        detail: format!("rect(3,2), t <= 2: {} prefixes, {} comparisons, residual {:e}, {time}", r.prefixes, r.compared_points, r.residual),
    }
}

fn criterion4() -> Verdict {
    let t = Instant::now();
    let fam = domain_family(12);
    let cfg = SamplerConfig { q: 2.0, sweeps: 100_000, seed: SEED, ..Default::default() };
    let (mut total, mut good) = (0usize, 0usize);
    let mut worst_domain = (1.0f64, String::new());
    let mut deterministic = true;
    for (k, (name, d)) in fam.iter().enumerate() {
        let en = enumerate(d, EXEC).unwrap();
        let f = en.field(d, 2.0);
        let p = en.observables.edge_probability(&en.distribution, 2.0);
        let mc = sampler::run(d, &cfg, EXEC).unwrap();
        if k == 0 {
            let again = sampler::run(d, &cfg, EXEC).unwrap();
            deterministic = again.field.corner == mc.field.corner && again.edge_prob == mc.edge_prob;
        }
        let ok = |diff: f64, se: f64| diff <= 3.0 * se + 1e-12;
        let (mut n, mut g) = (0usize, 0usize);
        for c in 0..d.corners.len() {
            let diff = mc.field.corner[c] - f.corner[c];
            let se = mc.field_se.corner[c];
            for (x, s) in [(diff.re.abs(), se.re), (diff.im.abs(), se.im)] {
                n += 1;
                g += ok(x, s) as usize;
            }
        }
        for e in 0..d.edges.len() {
            n += 1;
            g += ok((mc.edge_prob[e] - p[e]).abs(), mc.edge_prob_se[e]) as usize;
        }
        let frac = g as f64 / n as f64;
        if frac < worst_domain.0 {
            worst_domain = (frac, name.clone());
        }
        total += n;
        good += g;
    }
    let pooled = good as f64 / total as f64;
    let (ok_time, time) = within(t, Duration::from_secs(300));
    let pass = pooled >= 0.95 && deterministic && ok_time;
    Verdict {
        pass,
        detail: format!(
            "{} domains, {total} values, pooled {:.2}% within 3 SE, worst domain {:.1}% ({}), seed-deterministic {deterministic}, {time}",
            fam.len(),
            100.0 * pooled,
            100.0 * worst_domain.0,
            worst_domain.1
        ),
    }
}

struct Campaign {
    rows: Vec<ConvergenceRow>,
    l2: Vec<f64>,
    elapsed: Duration,
}

fn convergence_campaign() -> Campaign {
    let t = Instant::now();
    let mut rows = Vec::new();
    let mut l2 = Vec::new();
    for n in [8, 16, 32] {
        let d = square_domain(n, unit_square_delta(n)).unwrap();
        let cfg = SamplerConfig { q: 2.0, sweeps: 1_000_000, seed: SEED, ..Default::default() };
        let mc = sampler::run(&d, &cfg, EXEC).unwrap();
        let sq: Vec<f64> = mc.field.edge.iter().map(|z| z.norm_sqr()).collect();
        let h = integrate_h(&d, &sq).unwrap();
        let reference = reference_h(&RectGeometry::from_frame(&d.frame.unwrap()), 256).unwrap();
        rows.push(compare_convergence(&d, &h, &mc.field, &reference, 0.25).unwrap());
        l2.push(l2_central(&d, &mc.field, 0.0).unwrap());
    }
    Campaign { rows, l2, elapsed: t.elapsed() }
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn fmt(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ")
}

fn criterion5(c: &Campaign) -> Verdict {
    let e: Vec<f64> = c.rows.iter().map(|r| r.sup_h_err).collect();
    let ok_time = c.elapsed <= Duration::from_secs(1800);
    Verdict {
        pass: strictly_decreasing(&e) && e[2] < 0.05 && ok_time,
        detail: format!("sup |H - h| for N = 8, 16, 32: {}; campaign {:.0}s of 1800s", fmt(&e), c.elapsed.as_secs_f64()),
    }
}

fn criterion6(c: &Campaign) -> Verdict {
    let e: Vec<f64> = c.rows.iter().map(|r| r.sup_f_resid).collect();
    let cs: Vec<f64> = c.rows.iter().map(|r| r.fitted_c).collect();
    let stable = (cs[2] - cs[1]).abs() < 0.1 * cs[1].abs().min(cs[2].abs());
    Verdict {
        pass: strictly_decreasing(&e) && stable,
        detail: format!("sup |F/sqrt(delta) - c f|: {}; fitted c: {}", fmt(&e), fmt(&cs)),
    }
}

fn criterion10(c: &Campaign) -> Verdict {
    let s = spread(&c.l2);
    Verdict { pass: s < 1.5, detail: format!("delta * sum |F|^2 over the central quarter: {}; spread x{s:.3}", fmt(&c.l2)) }
}

fn criterion7() -> Verdict {
    let t = Instant::now();
    let (mut ns, mut pe, mut pm) = (Vec::new(), Vec::new(), Vec::new());
    for n in [8, 16, 32, 64] {
        let d = square_domain(n, unit_square_delta(n)).unwrap();
        let e = d.nearest_edge((0.5, 0.5)).unwrap();
        let f = d.nearest_face((0.5, 0.5), Color::Black).unwrap();
        let cfg = SamplerConfig { q: 2.0, sweeps: 200_000, seed: SEED, track_site: Some(f), ..Default::default() };
        let mc = sampler::run(&d, &cfg, EXEC).unwrap();
        ns.push(n as f64);
        pe.push(mc.edge_prob[e]);
        pm.push(mc.site_connection.unwrap().0);
    }
    let slope = loglog_slope(&ns, &pe);
    let mag = loglog_slope(&ns, &pm);
    let (ok_time, time) = within(t, Duration::from_secs(1800));
    Verdict {
        pass: (slope + 0.125).abs() <= 0.05 && ok_time,
        detail: format!(
            "P(center edge in interface) for N = 8..64: {}; slope {slope:.4} (target -0.125 +- 0.05); \
             diagnostic: P(center connected to wired arc) {}, slope {mag:.4}; {time}",
            fmt(&pe),
            fmt(&pm)
        ),
    }
}

fn criterion8() -> Verdict {
    let t = Instant::now();
    let ratios: Vec<f64> = [8, 16, 32].iter().map(|&l| check_green_lemma(l, EXEC).max_ratio).collect();
    let s = spread(&ratios);
    let fit = fit_glog((10, 40));
    let target = 1.0 / std::f64::consts::PI;
    let rel = (fit.slope - target).abs() / target;
    let (ok_time, time) = within(t, Duration::from_secs(300));
    Verdict {
        pass: s < 1.5 && rel <= 0.02 && ok_time,
        detail: format!(
            "max ratio for L = 8, 16, 32: {} (spread x{s:.3}, {}); log fit slope {:.6} vs 1/pi: off by {:.1}% ({}); {time}",
            fmt(&ratios),
            if s < 1.5 { "ok" } else { "too wide" },
            fit.slope,
            100.0 * rel,
            if rel <= 0.02 { "ok" } else { "out of tolerance" }
        ),
    }
}

fn criterion9() -> Verdict {
    let t = Instant::now();
    let worst: Vec<f64> = [8, 16, 32].iter().map(|&l| check_verblunsky(l, 100, SEED, EXEC).worst_ratio).collect();
    let s = spread(&worst);
    let (ok_time, time) = within(t, Duration::from_secs(300));
    Verdict { pass: s < 1.5 && ok_time, detail: format!("worst ratio over 100 samples for L = 8, 16, 32: {}; spread x{s:.3}; {time}", fmt(&worst)) }
}

fn criterion11() -> Verdict {
    let t = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for q in ["1", "3"] {
        let out = std::env::temp_dir().join(format!("fermilab-acceptance-{}-q{q}", std::process::id()));
        let o = Command::new(env!("CARGO_BIN_EXE_fermilab"))
            .args(["verify", "--rect", "3x2", "--q", q, "--out"])
            .arg(&out)
            .output()
            .expect("binary runs");
        let report = std::fs::read_to_string(out.join("verify.csv")).unwrap_or_default();
        let row = report.lines().find(|l| l.starts_with("preholomorphic,")).unwrap_or("");
        let cols: Vec<&str> = row.split(',').collect();
        let residual: f64 = cols.get(1).and_then(|s| s.parse().ok()).unwrap_or(0.0);
        let ok = o.status.success() && residual > 1e-9 && cols.get(2) == Some(&"FAIL-as-expected");
        pass &= ok;
        parts.push(format!("q={q}: preholomorphic residual {residual:.3e}, exit {:?}", o.status.code()));
    }
    let (ok_time, time) = within(t, Duration::from_secs(120));
    Verdict { pass: pass && ok_time, detail: format!("{}; {time}", parts.join("; ")) }
}

fn main() -> ExitCode {
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let want = |k: u32| wanted.is_empty() || wanted.contains(&k);
    let mut results: Vec<(u32, &str, Verdict)> = Vec::new();
    let mut record = |k: u32, title: &'static str, v: Verdict| {
        println!("{} [{k:>2}] {title}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        results.push((k, title, v));
    };

    if want(1) || want(2) {
        let ex = exact_fields();
        if want(1) {
            record(1, "exact discrete holomorphicity", criterion1(&ex));
        }
        if want(2) {
            record(2, "identities of H", criterion2(&ex));
        }
    }
    if want(3) {
        record(3, "martingale property", criterion3());
    }
    if want(4) {
        record(4, "sampler agrees with exact enumeration", criterion4());
    }
    if want(5) || want(6) || want(10) {
        let c = convergence_campaign();
        if want(5) {
            record(5, "convergence of H", criterion5(&c));
        }
        if want(6) {
            record(6, "convergence of F", criterion6(&c));
        }
        if want(10) {
            record(10, "L2 boundedness", criterion10(&c));
        }
    }
    if want(7) {
        record(7, "magnetization exponent", criterion7());
    }
    if want(8) {
        record(8, "Green's function gradient bound and log fit", criterion8());
    }
    if want(9) {
        record(9, "gradient bound for harmonic functions", criterion9());
    }
    if want(11) {
        record(11, "general q is exploratory", criterion11());
    }

    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    let unexpected: Vec<u32> = failed.iter().copied().filter(|k| !KNOWN_FAILURES.contains(k)).collect();
    println!(
        "acceptance: {} of {} criteria pass; failing {:?} (known deviations {:?})",
        results.len() - failed.len(),
        results.len(),
        failed,
        KNOWN_FAILURES
    );
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
