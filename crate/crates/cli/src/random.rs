use graphwave::graph::{Bc, ControlSet, MetricGraph};
use rand::Rng;

/// Connected graph with `1..=max_edges` edges (loops and parallel edges
/// allowed), lengths in `[0.1, 2]`, boundary conditions on leaves and a
/// control set mixing whole edges and sub-intervals.
pub fn instance<R: Rng>(rng: &mut R, max_edges: usize) -> (MetricGraph, ControlSet) {
    let ne = rng.random_range(1..=max_edges);
    let nv = rng.random_range(2..=ne + 1);
    let mut pairs: Vec<(usize, usize)> = (1..nv).map(|i| (rng.random_range(0..i), i)).collect();
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
    let mut deg = vec![0; nv];
    for &(a, b, _) in &edges {
        deg[a] += 1;
        deg[b] += 1;
    }
    let bcs: Vec<Bc> = deg
        .iter()
        .map(|&d| match (d, rng.random_range(0..10)) {
            (1, 0) => Bc::Interior,
            (1, 1..=4) => Bc::Neumann,
            (1, _) => Bc::Dirichlet,
            _ => Bc::Interior,
        })
        .collect();
    let g = MetricGraph::new(&bcs, &edges);
    let mut w = ControlSet::empty();
    for (e, &(_, _, len)) in edges.iter().enumerate() {
        let u: f64 = rng.random();
        if u < 0.4 {
            w.add(e, 0.0, len);
        } else if u < 0.6 {
            let a = rng.random_range(0.0..len);
            let b = rng.random_range(0.0..len);
            if (a - b).abs() > 1e-3 {
                w.add(e, a.min(b), a.max(b));
            }
        }
    }
    (g, w)
}
