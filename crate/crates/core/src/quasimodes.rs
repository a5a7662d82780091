//! Unobserved approximate eigenfunctions supported on a path or cycle that
//! avoids the control set, and the resolvent sequences of the X graph.

use std::f64::consts::PI;

use gauss_quad::GaussLegendre;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

use crate::diophantine::{convergents, dirichlet_simultaneous, DiophantineError, SimultaneousApproximation};
use crate::ggcc::{check_cycles_and_exterior_paths, GraphPath};
use crate::graph::{Bc, End, MetricGraph, Normalized};
use crate::real::Real;

/// Largest allowed `mu * max edge length`.
pub const MAX_PHASE: f64 = 1e5;
/// Quadrature nodes per wavelength.
pub const NODES_PER_WAVELENGTH: usize = 20;

#[derive(Debug, Error)]
pub enum QuasimodeError {
    #[error("every walk avoiding the control set is bounded; there is no unobserved path")]
    GgccHolds,
    #[error("n = {0} is too small: some edge gets no full oscillation, retry with a larger n")]
    NTooSmall(u64),
    #[error("n = {n} needs frequency {phase:.3e} per edge length, above the cap {MAX_PHASE:e}")]
    TooOscillatory { n: u64, phase: f64 },
    #[error(transparent)]
    Diophantine(#[from] DiophantineError),
}

/// `amplitude * sin(frequency * x)` in the edge's own coordinate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Profile {
    pub edge: usize,
    pub amplitude: f64,
    pub frequency: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VertexResidual {
    pub vertex: usize,
    /// Spread of the end values meeting at the vertex, or the value itself
    /// at a Dirichlet vertex.
    pub continuity: f64,
    /// Sum of outward derivatives (zero expected at interior and Neumann vertices).
    pub flux: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Quasimode {
    pub n: u64,
    pub mu: f64,
    /// Path edge lengths in path order, and their sum.
    pub lengths: Vec<f64>,
    pub total_length: f64,
    pub approximation: SimultaneousApproximation,
    /// `p_j - q l_j / L`
    pub eps: Vec<f64>,
    pub profiles: Vec<Profile>,
    pub residuals: Vec<VertexResidual>,
    pub path: GraphPath,
}

impl Quasimode {
    pub fn max_flux_residual(&self, g: &MetricGraph) -> f64 {
        self.residuals
            .iter()
            .filter(|r| g.vertices[r.vertex].bc != Bc::Dirichlet)
            .map(|r| r.flux.abs())
            .fold(0.0, f64::max)
    }

    pub fn max_continuity_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.continuity).fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Pair {
    pub closed_form: f64,
    pub quadrature: f64,
}

impl Pair {
    pub fn rel_diff(&self) -> f64 {
        (self.closed_form - self.quadrature).abs() / self.closed_form.abs().max(f64::MIN_POSITIVE)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuasimodeMetrics {
    pub l2_norm_sq: Pair,
    pub grad_norm_sq: Pair,
    /// `||u'' + mu^2 u||^2`
    pub defect_sq: Pair,
}

/// A cycle or a path between two exterior vertices avoiding the control set.
pub fn find_violating_path(n: &Normalized) -> Result<GraphPath, QuasimodeError> {
    match check_cycles_and_exterior_paths(n) {
        (false, Some(v)) => Ok(v.path().clone()),
        _ => Err(QuasimodeError::GgccHolds),
    }
}

/// Quasimode of index `n` on `path`: with `alpha_j = l_j / L` and `(q, p_j)`
/// from simultaneous approximation at `N = n`, edge `j` carries
/// `sqrt(2/L)/mu_j sin(mu_j s)` where `mu_j = 2 pi p_j / l_j` and `s` runs
/// along the path. The frequency is `mu = 2 pi q / L`.
pub fn build_quasimode(g: &MetricGraph, path: &GraphPath, n: u64) -> Result<Quasimode, QuasimodeError> {
    let lengths: Vec<f64> = path.steps.iter().map(|s| g.edges[s.edge].length).collect();
    let total: f64 = lengths.iter().sum();
    let alphas: Vec<f64> = lengths.iter().map(|l| l / total).collect();
    let approx = dirichlet_simultaneous(&alphas, n)?;
    if approx.p.iter().any(|&p| p < 1) {
        return Err(QuasimodeError::NTooSmall(n));
    }
    let q = approx.q as f64;
    let mu = 2.0 * PI * q / total;
    let max_len = lengths.iter().copied().fold(0.0, f64::max);
    if mu * max_len > MAX_PHASE {
        return Err(QuasimodeError::TooOscillatory { n, phase: mu * max_len });
    }
    let eps = approx.p.iter().zip(&alphas).map(|(&p, a)| p as f64 - q * a).collect();
    let scale = (2.0 / total).sqrt();
    let profiles = path
        .steps
        .iter()
        .zip(&lengths)
        .zip(&approx.p)
        .map(|((s, &l), &p)| {
            let frequency = 2.0 * PI * p as f64 / l;
            // sin(mu (l - x)) = -sin(mu x) when mu l is a multiple of 2 pi
            let sign = match s.dir {
                crate::ggcc::Dir::Forward => 1.0,
                crate::ggcc::Dir::Backward => -1.0,
            };
            Profile { edge: s.edge, amplitude: sign * scale / frequency, frequency }
        })
        .collect::<Vec<_>>();
    let residuals = vertex_residuals(g, &profiles);
    Ok(Quasimode {
        n,
        mu,
        lengths,
        total_length: total,
        approximation: approx,
        eps,
        profiles,
        residuals,
        path: path.clone(),
    })
}

fn vertex_residuals(g: &MetricGraph, profiles: &[Profile]) -> Vec<VertexResidual> {
    let prof = |e: usize| profiles.iter().find(|p| p.edge == e);
    g.incidence()
        .iter()
        .enumerate()
        .map(|(v, ends)| {
            let mut values = Vec::new();
            let mut flux = 0.0;
            for &(e, end) in ends {
                let l = g.edges[e].length;
                let (val, outward) = match prof(e) {
                    None => (0.0, 0.0),
                    Some(p) => match end {
                        End::Tail => (0.0, -p.amplitude * p.frequency),
                        End::Head => (p.amplitude * (p.frequency * l).sin(), p.amplitude * p.frequency * (p.frequency * l).cos()),
                    },
                };
                values.push(val);
                flux += outward;
            }
            let continuity = if g.vertices[v].bc == Bc::Dirichlet {
                values.iter().map(|x| x.abs()).fold(0.0, f64::max)
            } else {
                let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                hi - lo
            };
            VertexResidual { vertex: v, continuity, flux }
        })
        .collect()
}

/// Closed forms, and composite Gauss-Legendre quadrature with
/// [`NODES_PER_WAVELENGTH`] nodes per period of each profile.
pub fn metrics(g: &MetricGraph, qm: &Quasimode) -> QuasimodeMetrics {
    let total = qm.total_length;
    let mu_n = qm.mu;
    let mut l2 = 0.0;
    let mut defect = 0.0;
    for ((l, &p), eps) in qm.lengths.iter().zip(&qm.approximation.p).zip(&qm.eps) {
        let a = l / total;
        let p = p as f64;
        l2 += a * (1.0 - eps / p).powi(2);
        defect += a * eps * eps * (2.0 * PI / l + mu_n / p).powi(2);
    }
    l2 /= mu_n * mu_n;
    // same summation order as the total, so this is exactly one
    let grad = qm.lengths.iter().sum::<f64>() / total;
    let rule = GaussLegendre::new(NODES_PER_WAVELENGTH).expect("positive degree");
    let mut ql2 = 0.0;
    let mut qgrad = 0.0;
    let mut qdef = 0.0;
    for pr in &qm.profiles {
        let len = g.edges[pr.edge].length;
        let panels = ((pr.frequency * len / (2.0 * PI)).ceil() as usize).max(1);
        let h = len / panels as f64;
        let (a, k) = (pr.amplitude, pr.frequency);
        for i in 0..panels {
            let (x0, x1) = (i as f64 * h, (i + 1) as f64 * h);
            ql2 += rule.integrate(x0, x1, |x| (a * (k * x).sin()).powi(2));
            qgrad += rule.integrate(x0, x1, |x| (a * k * (k * x).cos()).powi(2));
            qdef += rule.integrate(x0, x1, |x| {
                let u = a * (k * x).sin();
                (-k * k * u + mu_n * mu_n * u).powi(2)
            });
        }
    }
    QuasimodeMetrics {
        l2_norm_sq: Pair { closed_form: l2, quadrature: ql2 },
        grad_norm_sq: Pair { closed_form: grad, quadrature: qgrad },
        defect_sq: Pair { closed_form: defect, quadrature: qdef },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolventTerm {
    pub n: usize,
    pub p: String,
    pub q: String,
    pub lambda: f64,
    /// `q |q l - p|`
    pub quality: f64,
    pub l2_norm_sq: f64,
    pub defect_sq: f64,
}

/// On the X graph with bottom edges of length 1 and top edges of length
/// `ell`, the functions `sin(q pi x)` on e2 and `(ell q/p) sin(p pi x/ell)`
/// on e4, at `lambda = (q pi)^2`, for `(p, q)` running over the convergents
/// of `ell` (or `(k p, k q)` when `ell = p/q` is rational). Returns
/// `||u||^2 = 1/2 + ell^3 q^2/(2 p^2)` and
/// `||(Delta + lambda) u||^2 = (ell^3 pi^4 q^2 / (2 p^2)) (q^2 - p^2/ell^2)^2`.
pub fn x_graph_resolvent_sequence(ell: &Real, depth: usize) -> Vec<ResolventTerm> {
    let pairs: Vec<(BigInt, BigInt)> = if ell.is_exact() {
        let v = &ell.value;
        (1..=depth).map(|k| (v.numer() * BigInt::from(k), v.denom() * BigInt::from(k))).collect()
    } else {
        convergents(ell, depth).into_iter().map(|c| (c.p, c.q)).collect()
    };
    let l = ell.to_f64();
    pairs
        .into_iter()
        .enumerate()
        .filter(|(_, (p, _))| *p > BigInt::from(0))
        .map(|(i, (p, q))| {
            // q ell - p to full precision, then q^2 - p^2/ell^2 = (q ell - p)(q ell + p)/ell^2
            let qr = Real::exact(BigRational::from(q.clone()));
            let pr = Real::exact(BigRational::from(p.clone()));
            let delta = qr.mul(ell).sub(&pr).to_f64();
            let (pf, qf) = (p.to_f64().unwrap_or(f64::INFINITY), q.to_f64().unwrap_or(f64::INFINITY));
            let gap = delta * (qf * l + pf) / (l * l);
            let weight = l.powi(3) * qf * qf / (2.0 * pf * pf);
            ResolventTerm {
                n: i + 1,
                p: p.to_string(),
                q: q.to_string(),
                lambda: (qf * PI).powi(2),
                quality: qf * delta.abs(),
                l2_norm_sq: 0.5 + weight,
                defect_sq: weight * PI.powi(4) * gap * gap,
            }
        })
        .collect()
}
