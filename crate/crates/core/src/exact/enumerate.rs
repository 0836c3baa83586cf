use super::Cyclo16;
use crate::config::{loop_count_with, toggle_delta, BondState, ConfigError, Interface};
use crate::fermion::FermionField;
use crate::lattice::MedialDomain;
use crate::par::{for_each_chunk_mut, Execution};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use std::sync::Mutex;
use thiserror::Error;

/// Largest number of free primal edges accepted for enumeration.
pub const MAX_EXACT_BITS: usize = 26;

#[derive(Debug, Error)]
pub enum ExactError {
    #[error("{bits} free primal edges exceed the enumeration limit of {max}")]
    TooLarge { bits: usize, max: usize },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Loop count of every bond state; state `s` has bit i equal to bit i of `s`.
#[derive(Clone, Debug)]
pub struct ExactDistribution {
    pub num_bits: usize,
    loops: Vec<u16>,
    /// Number of states with exactly L loops.
    pub loop_hist: Vec<u64>,
}

impl ExactDistribution {
    pub fn num_states(&self) -> usize {
        self.loops.len()
    }

    pub fn loops(&self, state: u64) -> u16 {
        self.loops[state as usize]
    }

    /// Unnormalised weight sqrt(q)^loops.
    pub fn weight(&self, state: u64, q: f64) -> f64 {
        q.sqrt().powi(self.loops(state) as i32)
    }

    pub fn partition_function(&self, q: f64) -> f64 {
        let s = q.sqrt();
        self.loop_hist.iter().enumerate().map(|(l, &n)| n as f64 * s.powi(l as i32)).sum()
    }

    /// Z at q = 2 as an exact element of Q(sqrt 2).
    pub fn partition_q2(&self) -> Cyclo16 {
        let (a, b) = split_sqrt2(self.loop_hist.iter().enumerate().map(|(l, &n)| (l, n as i128)));
        &Cyclo16::from_int(0).add_int(a) + &(Cyclo16::sqrt2().scale(&BigRational::from_integer(BigInt::from(b))))
    }

    pub fn probability(&self, state: u64, q: f64) -> f64 {
        self.weight(state, q) / self.partition_function(q)
    }

    /// All states with their unnormalised weights.
    pub fn states(&self, q: f64) -> impl Iterator<Item = (BondState, f64)> + '_ {
        let s = q.sqrt();
        (0..self.loops.len()).map(move |x| (BondState::from_u64(self.num_bits, x as u64), s.powi(self.loops[x] as i32)))
    }
}

impl Cyclo16 {
    fn add_int(&self, n: i128) -> Cyclo16 {
        self + &Cyclo16::from_rational(BigRational::from_integer(BigInt::from(n)))
    }
}

/// Split sum over L of n_L sqrt(2)^L into A + sqrt(2) B with integers A, B.
fn split_sqrt2(terms: impl Iterator<Item = (usize, i128)>) -> (i128, i128) {
    let (mut a, mut b) = (0i128, 0i128);
    for (l, n) in terms {
        if l % 2 == 0 {
            a += n << (l / 2);
        } else {
            b += n << (l / 2);
        }
    }
    (a, b)
}

/// Interface visit counts per point, loop number and winding (mod 16, eighth turns).
#[derive(Clone, Debug)]
pub struct ExactObservables {
    n_edges: usize,
    n_points: usize,
    lsize: usize,
    counts: Vec<u64>,
}

impl ExactObservables {
    fn idx(&self, point: usize, l: usize, k: usize) -> usize {
        (point * self.lsize + l) * 16 + k
    }

    /// Count of states with `l` loops whose interface passes `point` with winding k mod 16.
    pub fn count(&self, point: usize, l: usize, k: usize) -> u64 {
        if l >= self.lsize {
            return 0;
        }
        self.counts[self.idx(point, l, k % 16)]
    }

    fn point_sum_q2(&self, point: usize) -> Cyclo16 {
        // G = A + sqrt(2) B with A, B in Z[zeta]
        let mut a = [0i128; 8];
        let mut b = [0i128; 8];
        for l in 0..self.lsize {
            for k in 0..16 {
                let n = self.counts[self.idx(point, l, k)] as i128;
                if n == 0 {
                    continue;
                }
                let (slot, sign) = if k < 8 { (k, 1) } else { (k - 8, -1) };
                let v = sign * (n << (l / 2));
                if l % 2 == 0 {
                    a[slot] += v;
                } else {
                    b[slot] += v;
                }
            }
        }
        let ca = Cyclo16::from_big_coeffs(a.map(BigInt::from));
        let cb = Cyclo16::from_big_coeffs(b.map(BigInt::from));
        &ca + &(&Cyclo16::sqrt2() * &cb)
    }

    fn point_sum(&self, point: usize, q: f64) -> Complex64 {
        let s = q.sqrt();
        let mut z = Complex64::new(0.0, 0.0);
        for l in 0..self.lsize {
            let w = s.powi(l as i32);
            for k in 0..16 {
                let n = self.counts[self.idx(point, l, k)];
                if n != 0 {
                    z += crate::lattice::lambda_pow(k as i32) * (n as f64 * w);
                }
            }
        }
        z
    }

    /// Exact observable at q = 2.
    pub fn field_q2(&self, dom: &MedialDomain, dist: &ExactDistribution) -> FermionField<Cyclo16> {
        let (za, zb) = split_sqrt2(dist.loop_hist.iter().enumerate().map(|(l, &n)| (l, n as i128)));
        // 1 / (za + sqrt2 zb) = (za - sqrt2 zb) / (za^2 - 2 zb^2)
        let den = BigInt::from(za) * BigInt::from(za) - BigInt::from(2) * BigInt::from(zb) * BigInt::from(zb);
        let inv_z = (&Cyclo16::from_int(0).add_int(za) - &Cyclo16::sqrt2().scale(&BigRational::from_integer(BigInt::from(zb))))
            .scale(&BigRational::new(BigInt::from(1), den));
        let corner_factor = &Cyclo16::two_cos_pi8() * &inv_z;
        let edge: Vec<Cyclo16> = (0..self.n_edges).map(|e| &self.point_sum_q2(e) * &inv_z).collect();
        let corner: Vec<Cyclo16> = (self.n_edges..self.n_points)
            .map(|p| &self.point_sum_q2(p) * &corner_factor)
            .collect();
        FermionField::assemble(dom, corner, edge)
    }

    /// Observable for arbitrary q, in floating point.
    pub fn field(&self, dom: &MedialDomain, dist: &ExactDistribution, q: f64) -> FermionField<Complex64> {
        let z = dist.partition_function(q);
        let cf = 2.0 * (std::f64::consts::PI / 8.0).cos() / z;
        let edge = (0..self.n_edges).map(|e| self.point_sum(e, q) / z).collect();
        let corner = (self.n_edges..self.n_points).map(|p| self.point_sum(p, q) * cf).collect();
        FermionField::assemble(dom, corner, edge)
    }

    /// Probability that the interface uses each edge.
    pub fn edge_probability(&self, dist: &ExactDistribution, q: f64) -> Vec<f64> {
        let z = dist.partition_function(q);
        let s = q.sqrt();
        (0..self.n_edges)
            .map(|e| {
                let mut p = 0.0;
                for l in 0..self.lsize {
                    let n: u64 = (0..16).map(|k| self.counts[self.idx(e, l, k)]).sum();
                    p += n as f64 * s.powi(l as i32);
                }
                p / z
            })
            .collect()
    }

    /// Probability that the interface passes each corner.
    pub fn corner_probability(&self, dist: &ExactDistribution, q: f64) -> Vec<f64> {
        let z = dist.partition_function(q);
        let s = q.sqrt();
        (self.n_edges..self.n_points)
            .map(|c| {
                let mut p = 0.0;
                for l in 0..self.lsize {
                    let n: u64 = (0..16).map(|k| self.counts[self.idx(c, l, k)]).sum();
                    p += n as f64 * s.powi(l as i32);
                }
                p / z
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct Enumeration {
    pub distribution: ExactDistribution,
    pub observables: ExactObservables,
}

impl Enumeration {
    pub fn field_q2(&self, dom: &MedialDomain) -> FermionField<Cyclo16> {
        self.observables.field_q2(dom, &self.distribution)
    }

    pub fn field(&self, dom: &MedialDomain, q: f64) -> FermionField<Complex64> {
        self.observables.field(dom, &self.distribution, q)
    }
}

/// Enumerate all 2^N bond states, walking each block of states in Gray-code
/// order so that loop counts update by a local toggle.
pub fn enumerate(dom: &MedialDomain, exec: Execution) -> Result<Enumeration, ExactError> {
    let nbits = dom.num_flippable();
    if nbits > MAX_EXACT_BITS {
        return Err(ExactError::TooLarge { bits: nbits, max: MAX_EXACT_BITS });
    }
    let n_edges = dom.num_edges();
    let n_points = n_edges + dom.corners.len();
    let lsize = n_edges / 4 + 2;
    let high = nbits.min(6);
    let low = nbits - high;
    let nchunks = 1usize << high;
    let block = 1usize << low;
    let mut loops = vec![0u16; 1usize << nbits];
    let partials: Vec<Mutex<Option<(Vec<u64>, Vec<u64>)>>> = (0..nchunks).map(|_| Mutex::new(None)).collect();

    for_each_chunk_mut(exec, &mut loops, block, |chunk, out| {
        let mut counts = vec![0u64; n_points * lsize * 16];
        let mut hist = vec![0u64; lsize];
        let mut seen = Vec::new();
        let mut it = Interface::default();
        let (mut ew, mut cw) = (Vec::new(), Vec::new());
        let mut s = (chunk as u64) << low;
        let mut l = loop_count_with(dom, &s, &mut seen) as i64;
        for t in 0..block as u64 {
            if t > 0 {
                let bit = t.trailing_zeros() as usize;
                l += toggle_delta(dom, &s, bit) as i64;
                s ^= 1 << bit;
            }
            let lu = l as usize;
            out[(s as usize) & (block - 1)] = l as u16;
            hist[lu] += 1;
            it.trace_into(dom, &s).expect("interface reaches b");
            it.windings_into(dom, &mut ew, &mut cw);
            for (i, &e) in it.edges.iter().enumerate() {
                counts[((e * lsize) + lu) * 16 + (ew[i].rem_euclid(16) as usize)] += 1;
            }
            for (i, &c) in it.corners.iter().enumerate() {
                counts[(((n_edges + c) * lsize) + lu) * 16 + (cw[i].rem_euclid(16) as usize)] += 1;
            }
        }
        *partials[chunk].lock().unwrap() = Some((counts, hist));
    });

    let mut counts = vec![0u64; n_points * lsize * 16];
    let mut loop_hist = vec![0u64; lsize];
    for p in partials {
        let (c, h) = p.into_inner().unwrap().expect("every chunk ran");
        for (x, y) in counts.iter_mut().zip(c) {
            *x += y;
        }
        for (x, y) in loop_hist.iter_mut().zip(h) {
            *x += y;
        }
    }
    while loop_hist.len() > 1 && *loop_hist.last().unwrap() == 0 {
        loop_hist.pop();
    }
    let used = loop_hist.len();
    let mut trimmed = vec![0u64; n_points * used * 16];
    for p in 0..n_points {
        for l in 0..used {
            let src = (p * lsize + l) * 16;
            let dst = (p * used + l) * 16;
            trimmed[dst..dst + 16].copy_from_slice(&counts[src..src + 16]);
        }
    }
    Ok(Enumeration {
        distribution: ExactDistribution { num_bits: nbits, loops, loop_hist },
        observables: ExactObservables { n_edges, n_points, lsize: used, counts: trimmed },
    })
}
