//! Exact evolution of the wave equation on a metric graph for piecewise
//! constant characteristic data, with energy, observed energy and an
//! observability ratio over a family of localized probes.
//!
//! On edge `j` with coordinate `x` in `[0, l]`, `r = (u_t + u_x)/2` travels
//! towards the tail and `s = (u_t - u_x)/2` towards the head. Each of the two
//! directed channels of an edge is stored as its arrival function at the
//! end it travels to: `r(x, t) = A_r(t + x)` and `s(x, t) = A_s(t + l - x)`.
//! A vertex of degree `m` maps arriving values `a` to departing values
//! `(2/m) (sum a) - a`; a leaf reflects with `-1` (Dirichlet) or `+1`.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::ggcc::check_cycles_and_exterior_paths;
use crate::graph::{Bc, ControlSet, EdgePoint, End, MetricGraph, Normalized, VertexTag};

/// Breakpoints closer than this are treated as one.
pub const SNAP: f64 = 1e-12;
/// Adjacent pieces whose values differ by at most this are merged.
pub const MERGE: f64 = 1e-13;
pub const DEFAULT_CAP: usize = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum WaveError {
    #[error("more than {0} breakpoints; the run was stopped")]
    BreakpointCap(usize),
    #[error("time must be finite and non-negative, got {0}")]
    BadTime(f64),
    #[error("pulse on edge {edge} does not fit inside it")]
    BadPulse { edge: usize },
}

/// `(start, end, value)`
pub type Piece = (f64, f64, f64);

/// `r` and `s` on each edge as sorted, disjoint pieces in edge coordinates;
/// zero elsewhere.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WaveState {
    pub time: f64,
    pub r: Vec<Vec<Piece>>,
    pub s: Vec<Vec<Piece>>,
}

fn sq_integral(p: &[Piece]) -> f64 {
    p.iter().map(|&(a, b, v)| v * v * (b - a)).fold(0.0, |acc, x| acc + x)
}

/// Adds `v` on `(a, b)` to a sorted disjoint piece list.
fn overlay(list: &mut Vec<Piece>, a: f64, b: f64, v: f64) {
    let mut cuts: Vec<f64> = list.iter().flat_map(|p| [p.0, p.1]).chain([a, b]).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let at = |x: f64| list.iter().find(|p| p.0 <= x && x < p.1).map_or(0.0, |p| p.2);
    let mut out: Vec<Piece> = Vec::new();
    for w in cuts.windows(2) {
        let m = 0.5 * (w[0] + w[1]);
        let val = at(m) + if a <= m && m < b { v } else { 0.0 };
        push_piece(&mut out, w[0], w[1], val);
    }
    *list = out;
}

fn push_piece(list: &mut Vec<Piece>, a: f64, b: f64, v: f64) {
    if v == 0.0 || b - a <= 0.0 {
        return;
    }
    if let Some(last) = list.last_mut() {
        if (a - last.1).abs() <= SNAP && (v - last.2).abs() <= MERGE {
            last.1 = b;
            return;
        }
    }
    list.push((a, b, v));
}

impl WaveState {
    pub fn zero(g: &MetricGraph) -> Self {
        let n = g.edges.len();
        WaveState { time: 0.0, r: vec![Vec::new(); n], s: vec![Vec::new(); n] }
    }

    /// `∫ (r^2 + s^2)`, which is `(1/2) ∫ (u_t^2 + u_x^2)`.
    pub fn energy(&self) -> f64 {
        self.r.iter().chain(&self.s).map(|p| sq_integral(p)).fold(0.0, |acc, x| acc + x)
    }

    pub fn edge_energy(&self) -> Vec<f64> {
        self.r.iter().zip(&self.s).map(|(r, s)| sq_integral(r) + sq_integral(s)).collect()
    }

    pub fn add_pulse(&mut self, g: &MetricGraph, p: &Pulse) -> Result<(), WaveError> {
        let len = g.edges.get(p.edge).map(|e| e.length).ok_or(WaveError::BadPulse { edge: p.edge })?;
        if !(p.start >= 0.0 && p.end <= len && p.start < p.end) {
            return Err(WaveError::BadPulse { edge: p.edge });
        }
        let (r, s) = match p.kind {
            PulseKind::LeftMover => (p.height, 0.0),
            PulseKind::RightMover => (0.0, p.height),
            PulseKind::Standing => (p.height / 2.0, p.height / 2.0),
        };
        if r != 0.0 {
            overlay(&mut self.r[p.edge], p.start, p.end, r);
        }
        if s != 0.0 {
            overlay(&mut self.s[p.edge], p.start, p.end, s);
        }
        Ok(())
    }

    /// Same position, time derivative negated: `r -> -s`, `s -> -r`.
    pub fn time_reversed(&self) -> WaveState {
        let neg = |l: &Vec<Piece>| l.iter().map(|&(a, b, v)| (a, b, -v)).collect();
        WaveState { time: self.time, r: self.s.iter().map(neg).collect(), s: self.r.iter().map(neg).collect() }
    }

    /// `∫ ((r - r')^2 + (s - s')^2)`
    pub fn distance_sq(&self, other: &WaveState) -> f64 {
        let diff = |x: &[Piece], y: &[Piece]| {
            let mut l = x.to_vec();
            for &(a, b, v) in y {
                overlay(&mut l, a, b, -v);
            }
            sq_integral(&l)
        };
        self.r.iter().zip(&other.r).chain(self.s.iter().zip(&other.s)).map(|(x, y)| diff(x, y)).fold(0.0, |acc, x| acc + x)
    }

    pub fn breakpoints(&self) -> usize {
        self.r.iter().chain(&self.s).map(Vec::len).sum()
    }
}

/// The `m x m` matrix `(2/m) J - I` taking arriving to departing values.
pub fn scattering_matrix(m: usize) -> Vec<Vec<f64>> {
    let t = 2.0 / m as f64;
    (0..m).map(|i| (0..m).map(|j| if i == j { t - 1.0 } else { t }).collect()).collect()
}

/// Departing values at a vertex of degree `incoming.len()`; a leaf
/// reflects with `-1` for Dirichlet and `+1` otherwise.
pub fn scatter(bc: Bc, incoming: &[f64]) -> Vec<f64> {
    if incoming.len() == 1 {
        let sign = if bc == Bc::Dirichlet { -1.0 } else { 1.0 };
        return vec![sign * incoming[0]];
    }
    let t = 2.0 / incoming.len() as f64 * incoming.iter().sum::<f64>();
    incoming.iter().map(|a| t - a).collect()
}

/// Arrival functions of every channel over `[0, horizon)`.
#[derive(Clone, Debug)]
pub struct Simulation {
    /// Channel `2j` is `r` on edge `j` (arrives at the tail), `2j + 1` is `s`.
    pub arrivals: Vec<Vec<Piece>>,
    pub lengths: Vec<f64>,
    pub horizon: f64,
}

fn channel_in(e: usize, end: End) -> usize {
    match end {
        End::Tail => 2 * e,
        End::Head => 2 * e + 1,
    }
}

fn value_at(list: &[Piece], t: f64) -> f64 {
    let i = list.partition_point(|p| p.1 <= t);
    match list.get(i) {
        Some(&(a, _, v)) if a <= t => v,
        _ => 0.0,
    }
}

impl Simulation {
    /// Runs until every channel is known on `[0, horizon)`.
    pub fn run(g: &MetricGraph, init: &WaveState, horizon: f64, cap: usize) -> Result<Self, WaveError> {
        if !(horizon.is_finite() && horizon >= 0.0) {
            return Err(WaveError::BadTime(horizon));
        }
        let lengths: Vec<f64> = g.edges.iter().map(|e| e.length).collect();
        let mut arrivals: Vec<Vec<Piece>> = vec![Vec::new(); 2 * g.edges.len()];
        for (j, &l) in lengths.iter().enumerate() {
            arrivals[2 * j] = init.r[j].clone();
            arrivals[2 * j + 1] = init.s[j].iter().rev().map(|&(a, b, v)| (l - b, l - a, v)).collect();
        }
        let inc = g.incidence();
        let h = lengths.iter().copied().fold(f64::INFINITY, f64::min);
        let mut total: usize = arrivals.iter().map(Vec::len).sum();
        let mut k = 0usize;
        loop {
            let t0 = k as f64 * h;
            if t0 + h > horizon + h {
                break;
            }
            let t1 = (k + 1) as f64 * h;
            for (v, ends) in inc.iter().enumerate() {
                let ins: Vec<usize> = ends.iter().map(|&(e, end)| channel_in(e, end)).collect();
                let mut cuts = vec![t0, t1];
                for &c in &ins {
                    let l = &arrivals[c];
                    let from = l.partition_point(|p| p.1 <= t0);
                    for p in &l[from..] {
                        if p.0 >= t1 {
                            break;
                        }
                        cuts.extend([p.0, p.1].into_iter().filter(|&x| x > t0 && x < t1));
                    }
                }
                cuts.sort_by(f64::total_cmp);
                let mut snapped: Vec<f64> = Vec::with_capacity(cuts.len());
                for x in cuts {
                    if snapped.last().map_or(true, |&y| x - y > SNAP) {
                        snapped.push(x);
                    }
                }
                if snapped.len() < 2 || (t1 - *snapped.last().unwrap()) > SNAP {
                    snapped.push(t1);
                } else {
                    *snapped.last_mut().unwrap() = t1;
                }
                let bc = g.vertices[v].bc;
                let mut incoming = vec![0.0; ins.len()];
                for w in snapped.windows(2) {
                    let m = 0.5 * (w[0] + w[1]);
                    for (slot, &c) in incoming.iter_mut().zip(&ins) {
                        *slot = value_at(&arrivals[c], m);
                    }
                    if incoming.iter().all(|&x| x == 0.0) {
                        continue;
                    }
                    let out = scatter(bc, &incoming);
                    for (&c, &val) in ins.iter().zip(&out) {
                        let oc = c ^ 1;
                        let l = lengths[oc / 2];
                        let before = arrivals[oc].len();
                        push_piece(&mut arrivals[oc], w[0] + l, w[1] + l, val);
                        total += arrivals[oc].len() - before;
                    }
                }
                if total > cap {
                    return Err(WaveError::BreakpointCap(cap));
                }
            }
            k += 1;
        }
        Ok(Simulation { arrivals, lengths, horizon })
    }

    pub fn state_at(&self, t: f64) -> WaveState {
        let n = self.lengths.len();
        let mut st = WaveState { time: t, r: vec![Vec::new(); n], s: vec![Vec::new(); n] };
        for (j, &l) in self.lengths.iter().enumerate() {
            for (c, target) in [(2 * j, 0), (2 * j + 1, 1)] {
                let list = &self.arrivals[c];
                let from = list.partition_point(|p| p.1 <= t);
                let mut out = Vec::new();
                for &(a, b, v) in &list[from..] {
                    if a >= t + l {
                        break;
                    }
                    let (a, b) = (a.max(t) - t, b.min(t + l) - t);
                    if b > a {
                        out.push((a, b, v));
                    }
                }
                if target == 0 {
                    st.r[j] = out;
                } else {
                    st.s[j] = out.into_iter().rev().map(|(a, b, v)| (l - b, l - a, v)).collect();
                }
            }
        }
        st
    }

    pub fn breakpoints(&self) -> usize {
        self.arrivals.iter().map(Vec::len).sum()
    }

    /// `∫_0^T ∫_ω u_t^2 dx dt` with `u_t = r + s`, exactly: each term is a
    /// value product times the area of a polygon in the `(x, t)` plane.
    pub fn observed_energy(&self, omega: &ControlSet, t: f64) -> f64 {
        let mut total = 0.0;
        for (e, list) in omega.iter() {
            let l = self.lengths[e];
            let r = &self.arrivals[2 * e];
            let s = &self.arrivals[2 * e + 1];
            for &(alpha, beta) in list {
                let rect = [(alpha, 0.0), (beta, 0.0), (beta, t), (alpha, t)];
                // r depends on u = t + x, s on w = t + l - x
                let r_pieces = slice(r, alpha, t + beta);
                let s_pieces = slice(s, l - beta, t + l - alpha);
                for &(u0, u1, v) in r_pieces {
                    let poly = clip_band(&rect, 1.0, 1.0, 0.0, u0, u1);
                    total += v * v * area(&poly);
                    let near = slice(s_pieces, u0 + l - 2.0 * beta, u1 + l - 2.0 * alpha);
                    for &(w0, w1, vs) in near {
                        let p2 = clip_band(&poly, -1.0, 1.0, l, w0, w1);
                        total += 2.0 * v * vs * area(&p2);
                    }
                }
                for &(w0, w1, v) in s_pieces {
                    let poly = clip_band(&rect, -1.0, 1.0, l, w0, w1);
                    total += v * v * area(&poly);
                }
            }
        }
        total
    }
}

/// Pieces overlapping the open interval `(lo, hi)`.
fn slice(list: &[Piece], lo: f64, hi: f64) -> &[Piece] {
    let from = list.partition_point(|p| p.1 <= lo);
    let to = list.partition_point(|p| p.0 < hi);
    if from >= to {
        &[]
    } else {
        &list[from..to]
    }
}

/// Keeps the part of `poly` with `lo <= a x + b t + c <= hi`.
fn clip_band(poly: &[(f64, f64)], a: f64, b: f64, c: f64, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let f = |p: &(f64, f64)| a * p.0 + b * p.1 + c;
    let p1 = clip_half(poly, |p| f(p) - lo);
    clip_half(&p1, |p| hi - f(p))
}

/// Sutherland-Hodgman against `{g >= 0}` for an affine `g`.
fn clip_half(poly: &[(f64, f64)], g: impl Fn(&(f64, f64)) -> f64) -> Vec<(f64, f64)> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 2);
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let (gp, gq) = (g(&p), g(&q));
        if gp >= 0.0 {
            out.push(p);
        }
        if (gp >= 0.0) != (gq >= 0.0) {
            let s = gp / (gp - gq);
            out.push((p.0 + s * (q.0 - p.0), p.1 + s * (q.1 - p.1)));
        }
    }
    out
}

fn area(poly: &[(f64, f64)]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let n = poly.len();
    let twice: f64 = (0..n).map(|i| {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        p.0 * q.1 - q.0 * p.1
    }).sum();
    0.5 * twice.abs()
}

/// The state after time `t`.
pub fn evolve(g: &MetricGraph, state: &WaveState, t: f64) -> Result<WaveState, WaveError> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(WaveError::BadTime(t));
    }
    let max_len = g.edges.iter().map(|e| e.length).fold(0.0, f64::max);
    let sim = Simulation::run(g, state, t + max_len, DEFAULT_CAP)?;
    let mut out = sim.state_at(t);
    out.time = state.time + t;
    Ok(out)
}

/// `∫_0^T ∫_ω u_t^2` for the solution starting at `initial`.
pub fn observed_energy(g: &MetricGraph, initial: &WaveState, omega: &ControlSet, t: f64) -> Result<f64, WaveError> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(WaveError::BadTime(t));
    }
    let max_len = g.edges.iter().map(|e| e.length).fold(0.0, f64::max);
    let sim = Simulation::run(g, initial, t + max_len, DEFAULT_CAP)?;
    Ok(sim.observed_energy(omega, t))
}

// ------------------------------------------------------------ probes

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseKind {
    /// Only `r`: travels towards the tail.
    LeftMover,
    /// Only `s`: travels towards the head.
    RightMover,
    /// `u_t` bump with `u = 0`: half in each direction.
    Standing,
}

/// A constant bump of `u_t` (or of one characteristic) on `(start, end)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Pulse {
    pub edge: usize,
    pub start: f64,
    pub end: f64,
    pub kind: PulseKind,
    pub height: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Probe {
    pub label: String,
    pub pulses: Vec<Pulse>,
}

impl Probe {
    pub fn state(&self, g: &MetricGraph) -> Result<WaveState, WaveError> {
        let mut st = WaveState::zero(g);
        for p in &self.pulses {
            st.add_pulse(g, p)?;
        }
        Ok(st)
    }
}

/// Per edge of `g`: centers every `l/16`, width `l/32`, each kind, both signs.
pub fn grid_probes(g: &MetricGraph) -> Vec<Probe> {
    let mut out = Vec::new();
    for (j, e) in g.edges.iter().enumerate() {
        let l = e.length;
        for i in 0..16 {
            let c = (i as f64 + 0.5) * l / 16.0;
            for kind in [PulseKind::LeftMover, PulseKind::RightMover, PulseKind::Standing] {
                for sign in [1.0, -1.0] {
                    out.push(Probe {
                        label: format!("grid edge={j} center={c:.6} kind={kind:?} sign={sign:+}"),
                        pulses: vec![Pulse { edge: j, start: c - l / 64.0, end: c + l / 64.0, kind, height: sign }],
                    });
                }
            }
        }
    }
    out
}

/// Pulse on a normalized edge, `dist` measured from `from`, moving towards
/// (`inward = false`) or away from that end; mapped to original coordinates.
fn mover(n: &Normalized, edge: usize, from: End, near: f64, far: f64, away: bool, height: f64) -> Pulse {
    let len = n.graph.edges[edge].length;
    let (a, b) = match from {
        End::Tail => (near, far),
        End::Head => (len - far, len - near),
    };
    let towards_head = (from == End::Tail) == away;
    let kind = if towards_head { PulseKind::RightMover } else { PulseKind::LeftMover };
    let p0 = n.to_original(EdgePoint { edge, x: a });
    let p1 = n.to_original(EdgePoint { edge, x: b });
    Pulse { edge: p0.edge, start: p0.x.min(p1.x), end: p0.x.max(p1.x), kind, height }
}

/// Pulses that stay unobserved as long as possible: a mover leaving each
/// point where the uncontrolled part touches the control set, odd pairs
/// converging on each branching vertex from equal distances, and movers at
/// both ends of every edge of a cycle or path that avoids the control set.
pub fn adversarial_probes(n: &Normalized) -> Vec<Probe> {
    let g = &n.graph;
    let mut inc: Vec<Vec<(usize, End)>> = vec![Vec::new(); g.vertices.len()];
    for (v, ends) in g.incidence().into_iter().enumerate() {
        inc[v] = ends.into_iter().filter(|&(e, _)| !n.controlled[e]).collect();
    }
    let mut out = Vec::new();
    for v in 0..g.vertices.len() {
        if n.tag(v) == VertexTag::OmegaBoundary {
            for &(e, end) in &inc[v] {
                let eps = g.edges[e].length / 64.0;
                out.push(Probe {
                    label: format!("leave control at vertex {v} along edge {e}"),
                    pulses: vec![mover(n, e, end, eps / 4.0, eps, true, 1.0)],
                });
            }
        }
        let ends = &inc[v];
        for i in 0..ends.len() {
            for j in i + 1..ends.len() {
                let (e1, end1) = ends[i];
                let (e2, end2) = ends[j];
                let d = g.edges[e1].length.min(g.edges[e2].length);
                let eps = d / 64.0;
                out.push(Probe {
                    label: format!("odd pair into vertex {v} along edges {e1}, {e2}"),
                    pulses: vec![
                        mover(n, e1, end1, d - eps, d - eps / 4.0, false, 1.0),
                        mover(n, e2, end2, d - eps, d - eps / 4.0, false, -1.0),
                    ],
                });
            }
        }
    }
    if let (false, Some(v)) = check_cycles_and_exterior_paths(n) {
        for s in &v.path().steps {
            let eps = g.edges[s.edge].length / 64.0;
            for end in [End::Tail, End::Head] {
                for away in [true, false] {
                    let (near, far) = if away { (eps / 4.0, eps) } else { (eps, 2.0 * eps) };
                    out.push(Probe {
                        label: format!("unobserved walk, edge {} end {end:?} away={away}", s.edge),
                        pulses: vec![mover(n, s.edge, end, near, far, away, 1.0)],
                    });
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObservabilityResult {
    /// Smallest observed / initial energy over the probes.
    pub ratio: f64,
    pub argmin_probe: Probe,
    pub probes: usize,
}

/// `min observed_energy / energy` over `probes`, computed in parallel.
pub fn observability_ratio(
    g: &MetricGraph,
    omega: &ControlSet,
    t: f64,
    probes: &[Probe],
) -> Result<ObservabilityResult, WaveError> {
    let ratios: Vec<f64> = probes
        .par_iter()
        .map(|p| {
            let st = p.state(g)?;
            Ok(observed_energy(g, &st, omega, t)? / st.energy())
        })
        .collect::<Result<_, WaveError>>()?;
    let (i, ratio) = ratios
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one probe");
    Ok(ObservabilityResult { ratio, argmin_probe: probes[i].clone(), probes: probes.len() })
}

/// Grid probes on `g` plus adversarial probes built on the split graph.
pub fn default_probes(g: &MetricGraph, n: &Normalized) -> Vec<Probe> {
    let mut p = grid_probes(g);
    p.extend(adversarial_probes(n));
    p
}
