//! Eigenvalues and eigenfunctions of the Laplacian on a metric graph with
//! Kirchhoff conditions inside and Dirichlet or Neumann conditions at the
//! leaves, found as zeros of the smallest singular value of the secular
//! matrix.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{Bc, ControlSet, End, MetricGraph};

#[derive(Debug, Error, PartialEq)]
pub enum SpectralError {
    #[error("wavenumber must be positive, got {0}")]
    NonPositiveK(f64),
    #[error("condition rows ({rows}) do not match unknowns ({cols})")]
    Dimension { rows: usize, cols: usize },
    #[error("not an X graph: {0}")]
    NotXGraph(String),
}

/// `u_j(x) = a_j sin(kx) + b_j cos(kx)` on each edge.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeWave {
    pub k: f64,
    pub coeffs: Vec<(f64, f64)>,
}

/// `∫_{x0}^{x1} (a sin kx + b cos kx)(c sin kx + d cos kx) dx`
pub fn segment_inner(k: f64, (a, b): (f64, f64), (c, d): (f64, f64), x0: f64, x1: f64) -> f64 {
    let ss = |x: f64| x / 2.0 - (2.0 * k * x).sin() / (4.0 * k);
    let cc = |x: f64| x / 2.0 + (2.0 * k * x).sin() / (4.0 * k);
    let sc = |x: f64| (k * x).sin().powi(2) / (2.0 * k);
    a * c * (ss(x1) - ss(x0)) + b * d * (cc(x1) - cc(x0)) + (a * d + b * c) * (sc(x1) - sc(x0))
}

impl EdgeWave {
    pub fn value(&self, edge: usize, x: f64) -> f64 {
        let (a, b) = self.coeffs[edge];
        a * (self.k * x).sin() + b * (self.k * x).cos()
    }

    fn end_value_and_flux(&self, g: &MetricGraph, edge: usize, end: End) -> (f64, f64) {
        let (a, b) = self.coeffs[edge];
        let k = self.k;
        match end {
            End::Tail => (b, -k * a),
            End::Head => {
                let kl = k * g.edges[edge].length;
                (a * kl.sin() + b * kl.cos(), k * (a * kl.cos() - b * kl.sin()))
            }
        }
    }

    pub fn inner(&self, other: &EdgeWave, g: &MetricGraph) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .zip(&g.edges)
            .map(|((&u, &w), e)| segment_inner(self.k, u, w, 0.0, e.length))
            .sum()
    }

    pub fn norm_sq(&self, g: &MetricGraph) -> f64 {
        self.inner(self, g)
    }

    fn coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt()
    }

    /// Largest vertex-condition violation, relative to the coefficient norm.
    /// Fluxes are divided by `k`.
    pub fn max_residual(&self, g: &MetricGraph) -> f64 {
        let deg = g.degrees();
        let mut worst: f64 = 0.0;
        for (v, ends) in g.incidence().iter().enumerate() {
            let vals: Vec<(f64, f64)> = ends.iter().map(|&(e, end)| self.end_value_and_flux(g, e, end)).collect();
            if deg[v] == 1 {
                let (u, du) = vals[0];
                worst = worst.max(match g.vertices[v].bc {
                    Bc::Dirichlet => u.abs(),
                    _ => (du / self.k).abs(),
                });
            } else {
                for w in &vals[1..] {
                    worst = worst.max((w.0 - vals[0].0).abs());
                }
                worst = worst.max((vals.iter().map(|x| x.1).sum::<f64>() / self.k).abs());
            }
        }
        worst / self.coeff_norm().max(f64::MIN_POSITIVE)
    }
}

/// Rows: at a vertex of degree one its boundary condition (Kirchhoff with a
/// single edge acts as Neumann), elsewhere continuity between consecutive
/// ends and the sum of outward derivatives. Derivative rows are divided by `k`.
/// Columns `2j, 2j+1` hold `a_j, b_j`.
pub fn secular_matrix(g: &MetricGraph, k: f64) -> Result<DMatrix<f64>, SpectralError> {
    if !(k > 0.0) {
        return Err(SpectralError::NonPositiveK(k));
    }
    let cols = 2 * g.edges.len();
    let inc = g.incidence();
    let rows: usize = inc.iter().map(Vec::len).sum();
    if rows != cols {
        return Err(SpectralError::Dimension { rows, cols });
    }
    let mut m = DMatrix::zeros(rows, cols);
    // (value row, flux/k row) coefficients for an end
    let end_rows = |e: usize, end: End| -> ([f64; 2], [f64; 2]) {
        match end {
            End::Tail => ([0.0, 1.0], [-1.0, 0.0]),
            End::Head => {
                let kl = k * g.edges[e].length;
                ([kl.sin(), kl.cos()], [kl.cos(), -kl.sin()])
            }
        }
    };
    let mut r = 0;
    for (v, ends) in inc.iter().enumerate() {
        if ends.len() == 1 {
            let (e, end) = ends[0];
            let (val, flux) = end_rows(e, end);
            let row = if g.vertices[v].bc == Bc::Dirichlet { val } else { flux };
            m[(r, 2 * e)] = row[0];
            m[(r, 2 * e + 1)] = row[1];
            r += 1;
            continue;
        }
        let (e0, end0) = ends[0];
        let (v0, _) = end_rows(e0, end0);
        for &(e, end) in &ends[1..] {
            let (val, _) = end_rows(e, end);
            m[(r, 2 * e0)] += v0[0];
            m[(r, 2 * e0 + 1)] += v0[1];
            m[(r, 2 * e)] -= val[0];
            m[(r, 2 * e + 1)] -= val[1];
            r += 1;
        }
        for &(e, end) in ends {
            let (_, flux) = end_rows(e, end);
            m[(r, 2 * e)] += flux[0];
            m[(r, 2 * e + 1)] += flux[1];
        }
        r += 1;
    }
    Ok(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EigenOptions {
    pub k_floor: f64,
    /// Accept a refined minimum of the smallest singular value below this.
    pub root_tol: f64,
    /// Singular values below this count towards the multiplicity.
    pub mult_tol: f64,
    /// Scan step; defaults to `pi / (16 * total length)` and is capped at
    /// `pi / (4 * total length)`.
    pub step: Option<f64>,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions { k_floor: 1e-6, root_tol: 1e-8, mult_tol: 1e-5, step: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenPair {
    pub k: f64,
    pub lambda: f64,
    pub multiplicity: usize,
    /// L2-orthonormal basis of the eigenspace.
    pub eigenfunctions: Vec<EdgeWave>,
    pub sigma_min: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Spectrum {
    pub pairs: Vec<EigenPair>,
    pub step: f64,
    /// Roots closer than ten scan steps, which may hide a merged pair.
    pub warnings: Vec<String>,
    /// No Dirichlet vertex: constants are an eigenfunction at `k = 0`,
    /// which the scan does not report.
    pub zero_mode: bool,
}

impl Spectrum {
    pub fn count(&self) -> usize {
        self.pairs.iter().map(|p| p.multiplicity).sum()
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        self.pairs.iter().flat_map(|p| std::iter::repeat(p.k).take(p.multiplicity)).collect()
    }
}

fn sorted_svd(m: DMatrix<f64>) -> (Vec<f64>, Vec<DVector<f64>>) {
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let s = idx.iter().map(|&i| svd.singular_values[i]).collect();
    let v = idx.iter().map(|&i| vt.row(i).transpose()).collect();
    (s, v)
}

fn sigma_min(g: &MetricGraph, k: f64) -> f64 {
    let m = secular_matrix(g, k).expect("validated graph");
    m.singular_values().iter().copied().fold(f64::INFINITY, f64::min)
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a) <= 1e-15 * b.abs().max(1.0) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        c
    } else {
        d
    }
}

/// Orthonormalizes in `L2(G)` by modified Gram-Schmidt, dropping vectors that
/// become negligible.
fn orthonormalize(g: &MetricGraph, waves: Vec<EdgeWave>) -> Vec<EdgeWave> {
    let mut out: Vec<EdgeWave> = Vec::new();
    for mut w in waves {
        for _ in 0..2 {
            for u in &out {
                let c = w.inner(u, g);
                for (x, y) in w.coeffs.iter_mut().zip(&u.coeffs) {
                    x.0 -= c * y.0;
                    x.1 -= c * y.1;
                }
            }
        }
        let n = w.norm_sq(g).sqrt();
        if n > 1e-8 {
            w.coeffs.iter_mut().for_each(|x| {
                x.0 /= n;
                x.1 /= n;
            });
            out.push(w);
        }
    }
    out
}

/// Points per bracket in the second, finer scan.
const FINE: usize = 32;

/// All eigenvalues `k^2` with `k_floor < k <= k_max`, with multiplicities
/// and orthonormal eigenfunctions.
pub fn eigenvalues(g: &MetricGraph, k_max: f64, opts: &EigenOptions) -> Result<Spectrum, SpectralError> {
    if !(k_max > 0.0) {
        return Err(SpectralError::NonPositiveK(k_max));
    }
    secular_matrix(g, 1.0)?;
    let max_step = PI / (4.0 * g.total_length());
    let step = opts.step.map_or(max_step / 4.0, |s| s.min(max_step));
    let n = ((k_max + step - opts.k_floor) / step).ceil() as usize + 1;
    let grid: Vec<f64> = (0..=n).map(|i| opts.k_floor + i as f64 * step).collect();
    let sig: Vec<f64> = grid.par_iter().map(|&k| sigma_min(g, k)).collect();
    let candidates: Vec<usize> = (1..n).filter(|&i| sig[i] <= sig[i - 1] && sig[i] < sig[i + 1]).collect();
    // a bracket may hold two roots; rescan it finely before refining
    let brackets: Vec<(f64, f64)> = candidates
        .par_iter()
        .flat_map_iter(|&i| {
            let (a, b) = (grid[i - 1], grid[i + 1]);
            let fine: Vec<f64> = (0..=FINE).map(|j| a + (b - a) * j as f64 / FINE as f64).collect();
            let fs: Vec<f64> = fine.iter().map(|&k| sigma_min(g, k)).collect();
            (1..FINE)
                .filter(|&j| fs[j] <= fs[j - 1] && fs[j] < fs[j + 1])
                .map(|j| (fine[j - 1], fine[j + 1]))
                .collect::<Vec<_>>()
        })
        .collect();
    let mut roots: Vec<(f64, f64)> = brackets
        .par_iter()
        .filter_map(|&(a, b)| {
            let k = golden_min(|k| sigma_min(g, k), a, b);
            let s = sigma_min(g, k);
            (s < opts.root_tol && k <= k_max + 1e-9).then_some((k, s))
        })
        .collect();
    roots.sort_by(|a, b| a.0.total_cmp(&b.0));
    roots.dedup_by(|b, a| (b.0 - a.0).abs() < 1e-9 * a.0.max(1.0));
    let mut warnings = Vec::new();
    for w in roots.windows(2) {
        if w[1].0 - w[0].0 < 10.0 * step {
            warnings.push(format!("roots {:.12} and {:.12} are closer than ten scan steps", w[0].0, w[1].0));
        }
    }
    let pairs = roots
        .into_par_iter()
        .map(|(k, s)| {
            let (sv, vecs) = sorted_svd(secular_matrix(g, k).expect("checked"));
            let mult = sv.iter().take_while(|&&x| x < opts.mult_tol).count().max(1);
            let waves = vecs
                .into_iter()
                .take(mult)
                .map(|v| EdgeWave { k, coeffs: (0..g.edges.len()).map(|j| (v[2 * j], v[2 * j + 1])).collect() })
                .collect();
            let eigenfunctions = orthonormalize(g, waves);
            EigenPair { k, lambda: k * k, multiplicity: eigenfunctions.len(), eigenfunctions, sigma_min: s }
        })
        .collect();
    let zero_mode = !g.vertices.iter().any(|v| v.bc == Bc::Dirichlet);
    Ok(Spectrum { pairs, step, warnings, zero_mode })
}

/// `∫_ω |phi|^2`
pub fn observation_mass(phi: &EdgeWave, omega: &ControlSet) -> f64 {
    omega_inner(phi, phi, omega)
}

fn omega_inner(u: &EdgeWave, w: &EdgeWave, omega: &ControlSet) -> f64 {
    omega
        .iter()
        .map(|(e, list)| list.iter().map(|&(a, b)| segment_inner(u.k, u.coeffs[e], w.coeffs[e], a, b)).sum::<f64>())
        .fold(0.0, |acc, x| acc + x)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeRow {
    pub k: f64,
    pub lambda: f64,
    pub multiplicity: usize,
    /// Smallest `∫_ω |phi|^2` over unit eigenfunctions of this eigenvalue.
    pub obs_mass_min: f64,
}

/// Smallest eigenvalue of the ω-restricted Gram matrix of the eigenspace.
pub fn min_mass(pair: &EigenPair, omega: &ControlSet) -> f64 {
    let m = pair.eigenfunctions.len();
    let gram = DMatrix::from_fn(m, m, |i, j| omega_inner(&pair.eigenfunctions[i], &pair.eigenfunctions[j], omega));
    SymmetricEigen::new(gram).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min).max(0.0)
}

pub fn resolvent_probe(g: &MetricGraph, omega: &ControlSet, k_max: f64) -> Result<Vec<ProbeRow>, SpectralError> {
    let sp = eigenvalues(g, k_max, &EigenOptions::default())?;
    Ok(sp
        .pairs
        .iter()
        .map(|p| ProbeRow { k: p.k, lambda: p.lambda, multiplicity: p.multiplicity, obs_mass_min: min_mass(p, omega) })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeylCheck {
    pub counted: usize,
    pub predicted: f64,
    pub tolerance: f64,
    pub ok: bool,
}

/// Eigenvalue count up to `k_max` against `total length * k_max / pi`.
pub fn weyl_count_check(g: &MetricGraph, k_max: f64) -> Result<WeylCheck, SpectralError> {
    let counted = eigenvalues(g, k_max, &EigenOptions::default())?.count();
    let predicted = g.total_length() * k_max / PI;
    let tolerance = (g.vertices.len() + 2) as f64;
    Ok(WeylCheck { counted, predicted, tolerance, ok: (counted as f64 - predicted).abs() <= tolerance })
}

/// `a sin(kt) + b cos(kt)` for `t` in `(0, len)`, `t` the distance from the
/// center of the X graph.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadialWave {
    pub len: f64,
    pub a: f64,
    pub b: f64,
}

impl RadialWave {
    pub fn norm_sq(&self, k: f64) -> f64 {
        segment_inner(k, (self.a, self.b), (self.a, self.b), 0.0, self.len)
    }

    fn combine(&self, o: &RadialWave, s: f64) -> RadialWave {
        RadialWave { len: self.len, a: (self.a + s * o.a) / 2.0, b: (self.b + s * o.b) / 2.0 }
    }
}

/// `f = (u1 - u2)/2` on the bottom pair, `g = (u3 - u4)/2` on the top pair,
/// `h = (u1 + u2)/2` then `(u3 + u4)/2` along the bottom-top line.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymmetryTriple {
    pub k: f64,
    pub f: RadialWave,
    pub g: RadialWave,
    pub h_bottom: RadialWave,
    pub h_top: RadialWave,
}

impl SymmetryTriple {
    /// `2 (|f|^2 + |g|^2 + |h|^2)`, equal to `|u|^2`.
    pub fn norm_identity(&self) -> f64 {
        let k = self.k;
        2.0 * (self.f.norm_sq(k) + self.g.norm_sq(k) + self.h_bottom.norm_sq(k) + self.h_top.norm_sq(k))
    }
}

/// Splits a function on an X graph (center of degree four, edges 0, 1 of one
/// length and 2, 3 of another) into its odd and even parts.
pub fn symmetry_decompose(gr: &MetricGraph, u: &EdgeWave) -> Result<SymmetryTriple, SpectralError> {
    let deg = gr.degrees();
    let bad = |m: &str| Err(SpectralError::NotXGraph(m.to_string()));
    if gr.edges.len() != 4 {
        return bad("needs four edges");
    }
    let Some(center) = deg.iter().position(|&d| d == 4) else { return bad("no vertex of degree four") };
    if gr.edges.iter().any(|e| e.is_loop() || (e.tail != center && e.head != center)) {
        return bad("every edge must join the center to a leaf");
    }
    let l = |i: usize| gr.edges[i].length;
    if (l(0) - l(1)).abs() > 1e-12 || (l(2) - l(3)).abs() > 1e-12 {
        return bad("edges 0, 1 and edges 2, 3 need equal lengths");
    }
    let k = u.k;
    let radial: Vec<RadialWave> = (0..4)
        .map(|i| {
            let e = &gr.edges[i];
            let (a, b) = u.coeffs[i];
            if e.tail == center {
                RadialWave { len: e.length, a, b }
            } else {
                let kl = k * e.length;
                RadialWave { len: e.length, a: -a * kl.cos() + b * kl.sin(), b: a * kl.sin() + b * kl.cos() }
            }
        })
        .collect();
    Ok(SymmetryTriple {
        k,
        f: radial[0].combine(&radial[1], -1.0),
        g: radial[2].combine(&radial[3], -1.0),
        h_bottom: radial[0].combine(&radial[1], 1.0),
        h_top: radial[2].combine(&radial[3], 1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Bc::*;

    fn ks(g: &MetricGraph, k_max: f64) -> Vec<f64> {
        eigenvalues(g, k_max, &EigenOptions::default()).unwrap().wavenumbers()
    }

    #[test]
    fn interval_spectra() {
        let dd = MetricGraph::new(&[Dirichlet, Dirichlet], &[(0, 1, 1.0)]);
        let k = ks(&dd, 10.0 * PI);
        assert_eq!(k.len(), 10);
        for (i, k) in k.iter().enumerate() {
            assert!((k - (i + 1) as f64 * PI).abs() < 1e-9 * k);
        }
        let dn = MetricGraph::new(&[Dirichlet, Neumann], &[(0, 1, 2.0)]);
        let k = ks(&dn, 10.0);
        for (i, k) in k.iter().enumerate() {
            assert!((k - (i as f64 + 0.5) * PI / 2.0).abs() < 1e-9 * k);
        }
        assert!(secular_matrix(&dd, 0.0).is_err());
    }

    #[test]
    fn equilateral_star() {
        let g = MetricGraph::new(&[Interior, Dirichlet, Dirichlet, Dirichlet], &[(0, 1, 1.0), (0, 2, 1.0), (3, 0, 1.0)]);
        let s = eigenvalues(&g, 2.0 * PI, &EigenOptions::default()).unwrap();
        let got: Vec<(f64, usize)> = s.pairs.iter().map(|p| (p.k / PI, p.multiplicity)).collect();
        let want = [(0.5, 1), (1.0, 2), (1.5, 1), (2.0, 2)];
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!((g.0 - w.0).abs() < 1e-9 && g.1 == w.1, "{got:?}");
        }
        for p in &s.pairs {
            for (i, u) in p.eigenfunctions.iter().enumerate() {
                assert!(u.max_residual(&g) < 1e-8);
                assert!((u.norm_sq(&g) - 1.0).abs() < 1e-10);
                for w in &p.eigenfunctions[i + 1..] {
                    assert!(u.inner(w, &g).abs() < 1e-8);
                }
            }
        }
        let w = weyl_count_check(&g, 2.0 * PI).unwrap();
        assert_eq!(w.counted, 6);
        assert!((w.predicted - 6.0).abs() < 1e-12);
    }

    #[test]
    fn masses() {
        let g = MetricGraph::new(&[Dirichlet, Dirichlet], &[(0, 1, 1.0)]);
        let s = eigenvalues(&g, 4.0, &EigenOptions::default()).unwrap();
        let phi = &s.pairs[0].eigenfunctions[0];
        let mut half = ControlSet::empty();
        half.add(0, 0.0, 0.5);
        assert!((observation_mass(phi, &half) - 0.5).abs() < 1e-12);
        assert!((observation_mass(phi, &ControlSet::whole_edges(&g, &[0])) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn x_graph_localized_mode() {
        let g = MetricGraph::new(
            &[Interior, Dirichlet, Dirichlet, Dirichlet, Dirichlet],
            &[(1, 0, 1.0), (2, 0, 1.0), (0, 3, 1.0), (0, 4, 1.0)],
        );
        let omega = ControlSet::whole_edges(&g, &[0, 2]);
        let rows = resolvent_probe(&g, &omega, 3.5).unwrap();
        let at_pi = rows.iter().find(|r| (r.k - PI).abs() < 1e-9).unwrap();
        assert!(at_pi.multiplicity >= 2);
        assert!(at_pi.obs_mass_min < 1e-12);
        let s = eigenvalues(&g, 3.5, &EigenOptions::default()).unwrap();
        for p in &s.pairs {
            for u in &p.eigenfunctions {
                let t = symmetry_decompose(&g, u).unwrap();
                assert!((t.norm_identity() - u.norm_sq(&g)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn splitting_an_edge_keeps_the_spectrum() {
        let g = MetricGraph::new(&[Interior, Dirichlet, Neumann, Dirichlet], &[(0, 1, 1.0), (0, 2, 0.7), (3, 0, 1.3)]);
        let h = MetricGraph::new(
            &[Interior, Dirichlet, Neumann, Dirichlet, Interior],
            &[(0, 1, 1.0), (0, 2, 0.7), (3, 4, 0.4), (4, 0, 0.9)],
        );
        let (a, b) = (ks(&g, 15.0), ks(&h, 15.0));
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9 * x);
        }
    }
}
