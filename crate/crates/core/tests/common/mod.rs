#![allow(dead_code)]

use graphwave::graph::{validate, Bc, ControlSet, MetricGraph};
use graphwave::wavesim::{Piece, WaveState};
use rand::Rng;

/// Connected graph with `1..=max_edges` edges (loops and parallel edges
/// allowed), lengths in `[0.1, 2]`, random orientation, boundary conditions
/// on leaves, and a random control set made of whole edges and sub-intervals.
pub fn random_instance<R: Rng>(rng: &mut R, max_edges: usize) -> (MetricGraph, ControlSet) {
    let ne = rng.random_range(1..=max_edges);
    let nv = rng.random_range(2..=ne + 1);
    let mut pairs = Vec::with_capacity(ne);
    for i in 1..nv {
        pairs.push((rng.random_range(0..i), i));
    }
    while pairs.len() < ne {
        pairs.push((rng.random_range(0..nv), rng.random_range(0..nv)));
    }
    let edges: Vec<(usize, usize, f64)> = pairs
        .into_iter()
        .map(|(a, b)| {
            let len = rng.random_range(0.1..=2.0);
            if rng.random_bool(0.5) {
                (a, b, len)
            } else {
                (b, a, len)
            }
        })
        .collect();
    random_bcs_and_control(rng, nv, &edges, 0.4, 0.2)
}

/// Random tree with `1..=max_edges` edges.
pub fn random_tree<R: Rng>(rng: &mut R, max_edges: usize, p_whole: f64, p_part: f64) -> (MetricGraph, ControlSet) {
    let ne = rng.random_range(1..=max_edges);
    let edges: Vec<(usize, usize, f64)> = (1..=ne)
        .map(|i| {
            let p = rng.random_range(0..i);
            let len = rng.random_range(0.1..=2.0);
            if rng.random_bool(0.5) {
                (p, i, len)
            } else {
                (i, p, len)
            }
        })
        .collect();
    random_bcs_and_control(rng, ne + 1, &edges, p_whole, p_part)
}

fn random_bcs_and_control<R: Rng>(
    rng: &mut R,
    nv: usize,
    edges: &[(usize, usize, f64)],
    p_whole: f64,
    p_part: f64,
) -> (MetricGraph, ControlSet) {
    let mut deg = vec![0; nv];
    for &(a, b, _) in edges {
        deg[a] += 1;
        deg[b] += 1;
    }
    let bcs: Vec<Bc> = deg
        .iter()
        .map(|&d| {
            if d != 1 {
                Bc::Interior
            } else {
                match rng.random_range(0..10) {
                    0 => Bc::Interior,
                    1..=4 => Bc::Neumann,
                    _ => Bc::Dirichlet,
                }
            }
        })
        .collect();
    let g = MetricGraph::new(&bcs, edges);
    let mut w = ControlSet::empty();
    for (e, &(_, _, len)) in edges.iter().enumerate() {
        let u: f64 = rng.random();
        if u < p_whole {
            w.add(e, 0.0, len);
        } else if u < p_whole + p_part {
            let mut a = rng.random_range(0.0..len);
            let mut b = rng.random_range(0.0..len);
            if a > b {
                std::mem::swap(&mut a, &mut b);
            }
            // sometimes touch an end
            match rng.random_range(0..4) {
                0 => a = 0.0,
                1 => b = len,
                _ => {}
            }
            if b - a > 1e-3 {
                w.add(e, a, b);
            }
        }
    }
    debug_assert!(validate(&g, &w).is_empty());
    (g, w)
}

/// Up to three disjoint constant pieces per characteristic on each edge.
pub fn random_state<R: Rng>(rng: &mut R, g: &MetricGraph) -> WaveState {
    let mut st = WaveState::zero(g);
    for (j, e) in g.edges.iter().enumerate() {
        for side in 0..2 {
            let k = rng.random_range(0..=3);
            let mut cuts: Vec<f64> = (0..2 * k).map(|_| rng.random_range(0.0..e.length)).collect();
            cuts.sort_by(f64::total_cmp);
            let pieces: Vec<Piece> = cuts
                .chunks(2)
                .filter(|c| c[1] > c[0])
                .map(|c| (c[0], c[1], rng.random_range(-2.0..2.0)))
                .collect();
            if side == 0 {
                st.r[j] = pieces;
            } else {
                st.s[j] = pieces;
            }
        }
    }
    st
}
