//! Markov chain Monte Carlo for the loop measure sqrt(q)^{#loops}.
//!
//! Two chains are provided. `Metropolis` toggles one free primal edge at a time
//! in the loop representation and works for any q > 0. `SwendsenWang` uses the
//! equivalent FK random-cluster representation (p = sqrt(q) / (1 + sqrt(q)),
//! black squares beyond the wired arc merged into one cluster of fixed color)
//! and needs integer q >= 1; it decorrelates far faster on large domains.

use crate::config::{toggle_delta, BondState, Interface};
use crate::fermion::FermionField;
use crate::lattice::{FaceId, MedialDomain};
use crate::par::{map_indexed, Execution};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("invalid sampler parameter: {0}")]
    Param(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    Metropolis,
    SwendsenWang,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub q: f64,
    /// Measured sweeps per chain.
    pub sweeps: u64,
    /// Discarded sweeps per chain; None means 10% of `sweeps`.
    pub burn_in: Option<u64>,
    pub seed: u64,
    pub chains: usize,
    /// Batches per chain for batch-means error bars.
    pub batches: usize,
    pub algorithm: Algorithm,
    /// Black square whose connection to the wired arc is recorded (cluster chain only).
    pub track_site: Option<FaceId>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            q: 2.0,
            sweeps: 10_000,
            burn_in: None,
            seed: 0,
            chains: 1,
            batches: 32,
            algorithm: Algorithm::SwendsenWang,
            track_site: None,
        }
    }
}

/// Monte Carlo estimate with batch-means standard errors.
#[derive(Clone, Debug)]
pub struct McResult {
    pub field: FermionField<Complex64>,
    /// Standard errors of real and imaginary parts, packed as re + i im.
    pub field_se: FermionField<Complex64>,
    pub edge_prob: Vec<f64>,
    pub edge_prob_se: Vec<f64>,
    /// Probability that `track_site` is connected to the wired arc.
    pub site_connection: Option<(f64, f64)>,
    pub acceptance: f64,
    pub sweeps: u64,
    pub chains: usize,
}

/// FK graph: one node per inside black square plus node 0 for everything wired.
#[derive(Clone, Debug)]
pub struct FkGraph {
    pub n_nodes: usize,
    pub ends: Vec<(u32, u32)>,
    pub node_of_face: Vec<u32>,
}

impl FkGraph {
    pub fn new(dom: &MedialDomain) -> FkGraph {
        let mut node_of_face = vec![u32::MAX; dom.faces.len()];
        let mut n = 1u32;
        for (i, f) in dom.faces.iter().enumerate() {
            if f.color == crate::lattice::Color::Black {
                if f.inside {
                    node_of_face[i] = n;
                    n += 1;
                } else {
                    node_of_face[i] = 0;
                }
            }
        }
        let ends = dom
            .flippable
            .iter()
            .map(|&v| {
                let (x, y) = dom.primal_endpoints(v).expect("interior vertex has two black squares");
                (node_of_face[x], node_of_face[y])
            })
            .collect();
        FkGraph { n_nodes: n as usize, ends, node_of_face }
    }

    /// Number of clusters not containing the wired node.
    pub fn free_clusters(&self, state: &BondState) -> usize {
        let mut uf: Vec<u32> = (0..self.n_nodes as u32).collect();
        for (i, &(a, b)) in self.ends.iter().enumerate() {
            if state.get(i) {
                union(&mut uf, a, b);
            }
        }
        let w = find(&mut uf, 0);
        (0..self.n_nodes as u32).filter(|&x| find(&mut uf, x) == x && x != w).count()
    }
}

#[inline]
fn find(uf: &mut [u32], mut x: u32) -> u32 {
    while uf[x as usize] != x {
        let p = uf[x as usize];
        uf[x as usize] = uf[p as usize];
        x = p;
    }
    x
}

#[inline]
fn union(uf: &mut [u32], a: u32, b: u32) {
    let (ra, rb) = (find(uf, a), find(uf, b));
    if ra != rb {
        // keep the smaller root so the wired node stays a root
        if ra < rb {
            uf[rb as usize] = ra;
        } else {
            uf[ra as usize] = rb;
        }
    }
}

/// One Markov chain.
pub struct Chain<'a> {
    dom: &'a MedialDomain,
    pub state: BondState,
    rng: ChaCha8Rng,
    sqrt_q: f64,
    q_int: u32,
    algorithm: Algorithm,
    fk: Option<FkGraph>,
    uf: Vec<u32>,
    color: Vec<u32>,
    perm: Vec<usize>,
    pub proposed: u64,
    pub accepted: u64,
}

impl<'a> Chain<'a> {
    pub fn new(dom: &'a MedialDomain, q: f64, algorithm: Algorithm, seed: u64, stream: u64) -> Result<Chain<'a>, SamplerError> {
        if !(q > 0.0 && q.is_finite()) {
            return Err(SamplerError::Param(format!("q must be positive, got {q}")));
        }
        let mut q_int = 0;
        let fk = if algorithm == Algorithm::SwendsenWang {
            if q < 1.0 || q.fract() != 0.0 {
                return Err(SamplerError::Param(format!("cluster updates need integer q >= 1, got {q}")));
            }
            q_int = q as u32;
            Some(FkGraph::new(dom))
        } else {
            None
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let n = dom.num_flippable();
        let state = BondState::random(n, &mut rng);
        let nodes = fk.as_ref().map_or(0, |f| f.n_nodes);
        Ok(Chain {
            dom,
            state,
            rng,
            sqrt_q: q.sqrt(),
            q_int,
            algorithm,
            fk,
            uf: vec![0; nodes],
            color: vec![0; nodes],
            perm: (0..n).collect(),
            proposed: 0,
            accepted: 0,
        })
    }

    pub fn sweep(&mut self) {
        match self.algorithm {
            Algorithm::Metropolis => self.metropolis_sweep(),
            Algorithm::SwendsenWang => self.cluster_sweep(),
        }
    }

    fn metropolis_sweep(&mut self) {
        self.perm.shuffle(&mut self.rng);
        for k in 0..self.perm.len() {
            let i = self.perm[k];
            let d = toggle_delta(self.dom, &self.state, i);
            self.proposed += 1;
            let accept = d >= 0 && self.sqrt_q >= 1.0
                || d <= 0 && self.sqrt_q <= 1.0
                || self.rng.gen::<f64>() < self.sqrt_q.powi(d);
            if accept {
                self.state.toggle(i);
                self.accepted += 1;
            }
        }
    }

    fn build_clusters(&mut self) {
        let fk = self.fk.as_ref().unwrap();
        for (i, x) in self.uf.iter_mut().enumerate() {
            *x = i as u32;
        }
        for (i, &(a, b)) in fk.ends.iter().enumerate() {
            if self.state.get(i) {
                union(&mut self.uf, a, b);
            }
        }
    }

    fn cluster_sweep(&mut self) {
        self.build_clusters();
        let fk = self.fk.as_ref().unwrap();
        let q = self.q_int;
        for x in 0..fk.n_nodes {
            if self.uf[x] == x as u32 {
                self.color[x] = if x == 0 || q == 1 { 0 } else { self.rng.gen_range(0..q) };
            }
        }
        let p = self.sqrt_q / (1.0 + self.sqrt_q);
        for (i, &(a, b)) in fk.ends.iter().enumerate() {
            let (ra, rb) = (find(&mut self.uf, a), find(&mut self.uf, b));
            let open = self.color[ra as usize] == self.color[rb as usize] && self.rng.gen::<f64>() < p;
            self.state.set(i, open);
        }
        self.proposed += fk.ends.len() as u64;
        self.accepted += fk.ends.len() as u64;
    }

    /// Whether an FK node is in the wired cluster in the current state.
    pub fn wired(&mut self, face: FaceId) -> bool {
        self.build_clusters();
        let node = self.fk.as_ref().unwrap().node_of_face[face];
        node != u32::MAX && find(&mut self.uf, node) == find(&mut self.uf, 0)
    }
}

struct Batch {
    count: u64,
    sum: Vec<Complex64>,
    hits: Vec<u64>,
    site: u64,
}

fn run_chain(dom: &MedialDomain, cfg: &SamplerConfig, chain: usize) -> Result<(Vec<Batch>, u64, u64), SamplerError> {
    let mut ch = Chain::new(dom, cfg.q, cfg.algorithm, cfg.seed, chain as u64)?;
    let burn = cfg.burn_in.unwrap_or(cfg.sweeps / 10);
    for _ in 0..burn {
        ch.sweep();
    }
    let ne = dom.num_edges();
    let np = ne + dom.corners.len();
    let nb = cfg.batches.max(1).min(cfg.sweeps.max(1) as usize);
    let mut batches: Vec<Batch> = (0..nb)
        .map(|_| Batch { count: 0, sum: vec![Complex64::new(0.0, 0.0); np], hits: vec![0; ne], site: 0 })
        .collect();
    let lam: Vec<Complex64> = (0..16).map(crate::lattice::lambda_pow).collect();
    let mut it = Interface::default();
    let (mut ew, mut cw) = (Vec::new(), Vec::new());
    for s in 0..cfg.sweeps {
        ch.sweep();
        let b = &mut batches[(s as u128 * nb as u128 / cfg.sweeps as u128) as usize];
        b.count += 1;
        it.trace_into(dom, &ch.state).expect("interface reaches b");
        it.windings_into(dom, &mut ew, &mut cw);
        for (i, &e) in it.edges.iter().enumerate() {
            b.sum[e] += lam[ew[i].rem_euclid(16) as usize];
            b.hits[e] += 1;
        }
        for (i, &c) in it.corners.iter().enumerate() {
            b.sum[ne + c] += lam[cw[i].rem_euclid(16) as usize];
        }
        if let Some(site) = cfg.track_site {
            if ch.wired(site) {
                b.site += 1;
            }
        }
    }
    Ok((batches, ch.proposed, ch.accepted))
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

fn combine(vals: &[Complex64]) -> (Complex64, Complex64) {
    let re: Vec<f64> = vals.iter().map(|z| z.re).collect();
    let im: Vec<f64> = vals.iter().map(|z| z.im).collect();
    let (mr, sr) = mean_se(&re);
    let (mi, si) = mean_se(&im);
    (Complex64::new(mr, mi), Complex64::new(sr, si))
}

/// Run `cfg.chains` independent chains and combine their batch means.
pub fn run(dom: &MedialDomain, cfg: &SamplerConfig, exec: Execution) -> Result<McResult, SamplerError> {
    if cfg.sweeps == 0 || cfg.chains == 0 {
        return Err(SamplerError::Param("need at least one sweep and one chain".into()));
    }
    if cfg.track_site.is_some() && cfg.algorithm != Algorithm::SwendsenWang {
        return Err(SamplerError::Param("site connection needs the cluster chain".into()));
    }
    let outs = map_indexed(exec, cfg.chains, |c| run_chain(dom, cfg, c));
    let mut batches = Vec::new();
    let (mut prop, mut acc) = (0u64, 0u64);
    for o in outs {
        let (b, p, a) = o?;
        batches.extend(b);
        prop += p;
        acc += a;
    }
    let ne = dom.num_edges();
    let cf = 2.0 * (std::f64::consts::PI / 8.0).cos();
    let fields: Vec<FermionField<Complex64>> = batches
        .iter()
        .map(|b| {
            let n = b.count.max(1) as f64;
            let edge = b.sum[..ne].iter().map(|z| z / n).collect();
            let corner = b.sum[ne..].iter().map(|z| z * (cf / n)).collect();
            FermionField::assemble(dom, corner, edge)
        })
        .collect();
    let pick = |sel: &dyn Fn(&FermionField<Complex64>) -> Option<Complex64>| -> Option<(Complex64, Complex64)> {
        let v: Option<Vec<Complex64>> = fields.iter().map(sel).collect();
        v.map(|v| combine(&v))
    };
    let nc = dom.corners.len();
    let nv = dom.vertices.len();
    let (mut corner, mut corner_se) = (Vec::with_capacity(nc), Vec::with_capacity(nc));
    for c in 0..nc {
        let (m, s) = pick(&|f| Some(f.corner[c])).unwrap();
        corner.push(m);
        corner_se.push(s);
    }
    let (mut edge, mut edge_se) = (Vec::with_capacity(ne), Vec::with_capacity(ne));
    for e in 0..ne {
        let (m, s) = pick(&|f| Some(f.edge[e])).unwrap();
        edge.push(m);
        edge_se.push(s);
    }
    let (mut vertex, mut vertex_se) = (Vec::with_capacity(nv), Vec::with_capacity(nv));
    for v in 0..nv {
        match pick(&|f| f.vertex[v]) {
            Some((m, s)) => {
                vertex.push(Some(m));
                vertex_se.push(Some(s));
            }
            None => {
                vertex.push(None);
                vertex_se.push(None);
            }
        }
    }
    let mut edge_prob = Vec::with_capacity(ne);
    let mut edge_prob_se = Vec::with_capacity(ne);
    for e in 0..ne {
        let xs: Vec<f64> = batches.iter().map(|b| b.hits[e] as f64 / b.count.max(1) as f64).collect();
        let (m, s) = mean_se(&xs);
        edge_prob.push(m);
        edge_prob_se.push(s);
    }
    let site_connection = cfg.track_site.map(|_| {
        let xs: Vec<f64> = batches.iter().map(|b| b.site as f64 / b.count.max(1) as f64).collect();
        mean_se(&xs)
    });
    Ok(McResult {
        field: FermionField { corner, edge, vertex },
        field_se: FermionField { corner: corner_se, edge: edge_se, vertex: vertex_se },
        edge_prob,
        edge_prob_se,
        site_connection,
        acceptance: if prop == 0 { 0.0 } else { acc as f64 / prop as f64 },
        sweeps: cfg.sweeps,
        chains: cfg.chains,
    })
}
