//! Bond configurations and their loop decomposition.

use crate::lattice::{CornerId, EdgeId, MedialDomain, NIL};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("state has {got} bits but the domain has {expected} free primal edges")]
    Length { expected: usize, got: usize },
    #[error("strand did not close after {0} steps")]
    Runaway(usize),
    #[error("invalid hex state: {0}")]
    Hex(String),
}

/// Read access to the open/closed bits of the free primal edges.
pub trait Bits {
    fn bit(&self, i: u32) -> bool;
}

impl Bits for u64 {
    #[inline]
    fn bit(&self, i: u32) -> bool {
        (self >> i) & 1 == 1
    }
}

/// Open (true) or closed state of every free primal edge, indexed like
/// `MedialDomain::flippable`. Edges on the boundary arcs are fixed by the
/// boundary conditions and not stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BondState {
    words: Vec<u64>,
    len: usize,
}

impl Bits for BondState {
    #[inline]
    fn bit(&self, i: u32) -> bool {
        (self.words[(i >> 6) as usize] >> (i & 63)) & 1 == 1
    }
}

impl BondState {
    pub fn closed(len: usize) -> BondState {
        BondState { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn open(len: usize) -> BondState {
        let mut s = BondState::closed(len);
        for i in 0..len {
            s.set(i, true);
        }
        s
    }

    pub fn from_u64(len: usize, x: u64) -> BondState {
        let mut s = BondState::closed(len);
        if len > 0 {
            s.words[0] = if len >= 64 { x } else { x & ((1u64 << len) - 1) };
        }
        s
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> BondState {
        let mut s = BondState::closed(len);
        for i in 0..len {
            s.set(i, rng.gen());
        }
        s
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.bit(i as u32)
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        let w = &mut self.words[i >> 6];
        if v {
            *w |= 1 << (i & 63);
        } else {
            *w &= !(1 << (i & 63));
        }
    }

    #[inline]
    pub fn toggle(&mut self, i: usize) {
        self.words[i >> 6] ^= 1 << (i & 63);
    }

    pub fn count_open(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn as_u64(&self) -> Option<u64> {
        (self.len <= 64).then(|| self.words.first().copied().unwrap_or(0))
    }

    /// Hex string, least significant bit = bit 0, padded to whole nibbles.
    pub fn to_hex(&self) -> String {
        let nibbles = self.len.div_ceil(4).max(1);
        (0..nibbles)
            .rev()
            .map(|k| {
                let mut v = 0u32;
                for b in 0..4 {
                    let i = 4 * k + b;
                    if i < self.len && self.get(i) {
                        v |= 1 << b;
                    }
                }
                std::char::from_digit(v, 16).unwrap()
            })
            .collect()
    }

    pub fn from_hex(len: usize, s: &str) -> Result<BondState, ConfigError> {
        let mut st = BondState::closed(len);
        for (k, c) in s.chars().rev().enumerate() {
            let v = c.to_digit(16).ok_or_else(|| ConfigError::Hex(s.into()))?;
            for b in 0..4 {
                if v >> b & 1 == 1 {
                    let i = 4 * k + b;
                    if i >= len {
                        return Err(ConfigError::Hex(s.into()));
                    }
                    st.set(i, true);
                }
            }
        }
        Ok(st)
    }
}

/// Next edge and the corner used at the head of `e`, or None at `b`.
#[inline]
pub(crate) fn step<B: Bits + ?Sized>(dom: &MedialDomain, bits: &B, e: EdgeId) -> Option<(CornerId, EdgeId)> {
    let hb = dom.head_bit(e);
    let bit = hb != NIL && bits.bit(hb);
    let s = dom.succ_raw(e)[bit as usize];
    if s == NIL {
        None
    } else {
        Some((dom.succ_corner_raw(e)[bit as usize] as usize, s as usize))
    }
}

/// The exploration path from `a` to `b`: edges `e_0 = a, ..., e_n = b` with
/// `corners[i]` joining `edges[i]` to `edges[i + 1]`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Interface {
    pub edges: Vec<EdgeId>,
    pub corners: Vec<CornerId>,
}

impl Interface {
    pub fn trace<B: Bits + ?Sized>(dom: &MedialDomain, bits: &B) -> Result<Interface, ConfigError> {
        let mut it = Interface::default();
        it.trace_into(dom, bits)?;
        Ok(it)
    }

    /// Trace reusing the buffers.
    pub fn trace_into<B: Bits + ?Sized>(&mut self, dom: &MedialDomain, bits: &B) -> Result<(), ConfigError> {
        self.edges.clear();
        self.corners.clear();
        let cap = dom.num_edges() + 1;
        let mut e = dom.a;
        self.edges.push(e);
        while let Some((c, nx)) = step(dom, bits, e) {
            self.corners.push(c);
            self.edges.push(nx);
            e = nx;
            if self.edges.len() > cap {
                return Err(ConfigError::Runaway(cap));
            }
        }
        Ok(())
    }

    /// Winding measured from `b`, in eighth turns, for every edge and corner.
    pub fn windings_into(&self, dom: &MedialDomain, edge_w: &mut Vec<i32>, corner_w: &mut Vec<i32>) {
        let n = self.edges.len();
        edge_w.clear();
        edge_w.resize(n, 0);
        corner_w.clear();
        corner_w.resize(n - 1, 0);
        let mut k = 0;
        for i in (0..n - 1).rev() {
            let t = dom.corners[self.corners[i]].turn;
            corner_w[i] = k - t / 2;
            k -= t;
            edge_w[i] = k;
        }
    }

    pub fn windings(&self, dom: &MedialDomain) -> (Vec<i32>, Vec<i32>) {
        let (mut a, mut b) = (Vec::new(), Vec::new());
        self.windings_into(dom, &mut a, &mut b);
        (a, b)
    }

    /// Medial vertices visited, in order (a vertex visited twice appears twice).
    pub fn vertices(&self, dom: &MedialDomain) -> Vec<usize> {
        self.corners.iter().map(|&c| dom.corners[c].vertex).collect()
    }
}

/// Decomposition of a bond state into the interface and closed loops.
#[derive(Clone, Debug)]
pub struct Configuration {
    pub interface: Interface,
    pub loops: Vec<Vec<EdgeId>>,
}

impl Configuration {
    pub fn loop_count(&self) -> usize {
        self.loops.len()
    }
}

fn check_len(dom: &MedialDomain, state: &BondState) -> Result<(), ConfigError> {
    if state.len() != dom.num_flippable() {
        return Err(ConfigError::Length { expected: dom.num_flippable(), got: state.len() });
    }
    Ok(())
}

pub fn decompose(dom: &MedialDomain, state: &BondState) -> Result<Configuration, ConfigError> {
    check_len(dom, state)?;
    let interface = Interface::trace(dom, state)?;
    let mut seen = vec![false; dom.num_edges()];
    for &e in &interface.edges {
        seen[e] = true;
    }
    let mut loops = Vec::new();
    for start in 0..dom.num_edges() {
        if seen[start] {
            continue;
        }
        let mut lp = vec![start];
        seen[start] = true;
        let mut e = start;
        loop {
            let (_, nx) = step(dom, state, e).ok_or(ConfigError::Runaway(0))?;
            if nx == start {
                break;
            }
            seen[nx] = true;
            lp.push(nx);
            e = nx;
            if lp.len() > dom.num_edges() {
                return Err(ConfigError::Runaway(lp.len()));
            }
        }
        loops.push(lp);
    }
    Ok(Configuration { interface, loops })
}

/// Number of closed loops, using a caller-provided scratch buffer.
pub fn loop_count_with<B: Bits + ?Sized>(dom: &MedialDomain, bits: &B, seen: &mut Vec<bool>) -> usize {
    seen.clear();
    seen.resize(dom.num_edges(), false);
    let mut e = dom.a;
    seen[e] = true;
    while let Some((_, nx)) = step(dom, bits, e) {
        seen[nx] = true;
        e = nx;
    }
    let mut count = 0;
    for start in 0..dom.num_edges() {
        if seen[start] {
            continue;
        }
        count += 1;
        let mut e = start;
        loop {
            seen[e] = true;
            let (_, nx) = step(dom, bits, e).expect("closed loop cannot reach b");
            if nx == start {
                break;
            }
            e = nx;
        }
    }
    count
}

pub fn loop_count(dom: &MedialDomain, state: &BondState) -> Result<usize, ConfigError> {
    check_len(dom, state)?;
    Ok(loop_count_with(dom, state, &mut Vec::new()))
}

/// Change in the number of closed loops when bit `i` is toggled. Always +1 or -1.
///
/// The two strands through the vertex are followed forward in alternation;
/// whichever resolves first decides, so the cost is bounded by twice the
/// shorter of the two pieces.
pub fn toggle_delta<B: Bits + ?Sized>(dom: &MedialDomain, bits: &B, i: usize) -> i32 {
    let v = dom.flippable[i];
    let vert = &dom.vertices[v];
    let bit = bits.bit(i as u32);
    let mut ins = [0usize; 2];
    let mut k = 0;
    for e in vert.slots.iter().flatten() {
        if dom.edges[*e].head == Some(v) {
            ins[k] = *e;
            k += 1;
        }
    }
    debug_assert_eq!(k, 2);
    let outs = [dom.succ_raw(ins[0])[bit as usize], dom.succ_raw(ins[1])[bit as usize]];
    let mut cur = [outs[0] as usize, outs[1] as usize];
    let mut done = [false, false];
    let cap = 2 * dom.num_edges() + 4;
    for _ in 0..cap {
        for s in 0..2 {
            if done[s] {
                continue;
            }
            let c = cur[s];
            if c == ins[1 - s] {
                return 1;
            }
            if c == ins[s] {
                return -1;
            }
            match step(dom, bits, c) {
                Some((_, nx)) => cur[s] = nx,
                None => done[s] = true,
            }
        }
        if done[0] && done[1] {
            break;
        }
    }
    unreachable!("strands through a vertex must resolve")
}
