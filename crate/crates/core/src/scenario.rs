//! Named example graphs with their control sets.

use serde::Serialize;
use thiserror::Error;

use crate::graph::{validate, Bc, ControlSet, MetricGraph};
use crate::real::Real;

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error("unknown scenario '{0}' (known: {known})", known = NAMES.join(", "))]
    Unknown(String),
    #[error("{0}")]
    Params(String),
}

pub const NAMES: [&str; 6] = ["interval", "star", "x_graph", "mixed_x", "bot_graph", "triangle"];

/// A length parameter, keeping the expression it came from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Param {
    pub value: f64,
    pub expr: Option<String>,
}

impl Param {
    pub fn parse(s: &str) -> Result<Param, ScenarioError> {
        let r = Real::parse(s).map_err(|e| ScenarioError::Params(format!("'{s}': {e}")))?;
        let plain = s.trim().parse::<f64>().is_ok();
        Ok(Param { value: r.to_f64(), expr: (!plain).then(|| s.trim().to_string()) })
    }
}

impl From<f64> for Param {
    fn from(value: f64) -> Self {
        Param { value, expr: None }
    }
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub params: Vec<Param>,
    pub graph: MetricGraph,
    pub omega: ControlSet,
    pub note: &'static str,
}

fn positive(name: &str, p: &Param) -> Result<(), ScenarioError> {
    if p.value.is_finite() && p.value > 0.0 {
        Ok(())
    } else {
        Err(ScenarioError::Params(format!("{name} must be a positive length, got {}", p.value)))
    }
}

fn with_exprs(mut g: MetricGraph, exprs: &[Option<String>]) -> MetricGraph {
    for (e, x) in g.edges.iter_mut().zip(exprs) {
        e.expr = x.clone();
    }
    g
}

fn finish(name: &str, params: Vec<Param>, graph: MetricGraph, omega: ControlSet, note: &'static str) -> Result<Scenario, ScenarioError> {
    let diags = validate(&graph, &omega);
    if !diags.is_empty() {
        return Err(ScenarioError::Params(diags.join("; ")));
    }
    Ok(Scenario { name: name.to_string(), params, graph, omega, note })
}

/// One edge `(0, ℓ)` with the given end conditions and control intervals.
pub fn interval(len: Param, left: Bc, right: Bc, omega: &[(f64, f64)]) -> Result<Scenario, ScenarioError> {
    positive("length", &len)?;
    if left == Bc::Interior || right == Bc::Interior {
        return Err(ScenarioError::Params("interval ends need dirichlet or neumann".into()));
    }
    let g = with_exprs(MetricGraph::new(&[left, right], &[(0, 1, len.value)]), &[len.expr.clone()]);
    let mut w = ControlSet::empty();
    for &(a, b) in omega {
        w.add(0, a, b);
    }
    finish("interval", vec![len], g, w, "single edge")
}

/// Star with center 0 and Dirichlet tips; arm `i` runs from the center to
/// vertex `i + 1`. The first arm is controlled.
pub fn star(lengths: &[Param]) -> Result<Scenario, ScenarioError> {
    if lengths.len() < 2 {
        return Err(ScenarioError::Params("star needs at least two arms".into()));
    }
    for p in lengths {
        positive("arm length", p)?;
    }
    let mut bcs = vec![Bc::Interior];
    bcs.extend(std::iter::repeat(Bc::Dirichlet).take(lengths.len()));
    let edges: Vec<_> = lengths.iter().enumerate().map(|(i, p)| (0, i + 1, p.value)).collect();
    let exprs: Vec<_> = lengths.iter().map(|p| p.expr.clone()).collect();
    let g = with_exprs(MetricGraph::new(&bcs, &edges), &exprs);
    let w = ControlSet::whole_edges(&g, &[0]);
    finish("star", lengths.to_vec(), g, w, "star with one controlled arm")
}

fn x_shape(name: &str, lt: Param, lb: Param, bottom: Bc, top: Bc, note: &'static str) -> Result<Scenario, ScenarioError> {
    positive("l_t", &lt)?;
    positive("l_b", &lb)?;
    // e1, e2 run from their tips to the center; e3, e4 from the center out
    let g = MetricGraph::new(
        &[Bc::Interior, bottom, bottom, top, top],
        &[(1, 0, lb.value), (2, 0, lb.value), (0, 3, lt.value), (0, 4, lt.value)],
    );
    let g = with_exprs(g, &[lb.expr.clone(), lb.expr.clone(), lt.expr.clone(), lt.expr.clone()]);
    let w = ControlSet::whole_edges(&g, &[0, 2]);
    finish(name, vec![lt, lb], g, w, note)
}

/// Four-edge star: e1, e2 of length `lb`, e3, e4 of length `lt`, Dirichlet
/// tips, control on e1 and e3 (edges 0 and 2).
pub fn x_graph(lt: Param, lb: Param) -> Result<Scenario, ScenarioError> {
    x_shape("x_graph", lt, lb, Bc::Dirichlet, Bc::Dirichlet, "X graph, control on e1 and e3")
}

/// X graph with unit edges, Neumann tips on e1, e2 and Dirichlet tips on e3, e4.
pub fn mixed_x() -> Result<Scenario, ScenarioError> {
    x_shape("mixed_x", 1.0.into(), 1.0.into(), Bc::Neumann, Bc::Dirichlet, "X graph with mixed tip conditions")
}

/// Three-star whose uncontrolled part is a smaller star with arms
/// `l1, l2, l3` around the center (vertex 0). Arms share a length `R`, run
/// from the center to Dirichlet tips 1, 2, 3 and are controlled on `(l_i, R)`.
pub fn bot_graph(l1: Param, l2: Param, l3: Param) -> Result<Scenario, ScenarioError> {
    for p in [&l1, &l2, &l3] {
        positive("arm depth", p)?;
    }
    let longest = l1.value.max(l2.value).max(l3.value);
    let r = if longest < 1.0 { 1.0 } else { longest.ceil() + 1.0 };
    let g = MetricGraph::new(&[Bc::Interior, Bc::Dirichlet, Bc::Dirichlet, Bc::Dirichlet], &[(0, 1, r), (0, 2, r), (0, 3, r)]);
    let mut w = ControlSet::empty();
    for (i, p) in [&l1, &l2, &l3].iter().enumerate() {
        w.add(i, p.value, r);
    }
    finish("bot_graph", vec![l1, l2, l3], g, w, "three uncontrolled arms around the center")
}

/// Triangle 0-1-2 with sides `a, b, c`, uncontrolled, plus a controlled
/// pendant edge of length 1 from vertex 0 to a Dirichlet vertex 3.
pub fn triangle(a: Param, b: Param, c: Param) -> Result<Scenario, ScenarioError> {
    for p in [&a, &b, &c] {
        positive("side", p)?;
    }
    let g = MetricGraph::new(
        &[Bc::Interior, Bc::Interior, Bc::Interior, Bc::Dirichlet],
        &[(0, 1, a.value), (1, 2, b.value), (2, 0, c.value), (0, 3, 1.0)],
    );
    let g = with_exprs(g, &[a.expr.clone(), b.expr.clone(), c.expr.clone(), None]);
    let w = ControlSet::whole_edges(&g, &[3]);
    finish("triangle", vec![a, b, c], g, w, "uncontrolled cycle")
}

fn parse_bc(s: &str) -> Result<Bc, ScenarioError> {
    match s {
        "dirichlet" | "D" => Ok(Bc::Dirichlet),
        "neumann" | "N" => Ok(Bc::Neumann),
        _ => Err(ScenarioError::Params(format!("unknown end condition '{s}'"))),
    }
}

/// Builds a scenario from textual parameters, with defaults when omitted:
///
/// - `interval [len [left right [a b]...]]`
/// - `star [l1 l2 ...]`
/// - `x_graph [l_t l_b]`
/// - `mixed_x`
/// - `bot_graph [l1 l2 l3]`
/// - `triangle [a b c]`
pub fn build(name: &str, args: &[String]) -> Result<Scenario, ScenarioError> {
    let nums = |defaults: &[&str]| -> Result<Vec<Param>, ScenarioError> {
        if args.is_empty() {
            defaults.iter().map(|s| Param::parse(s)).collect()
        } else if args.len() != defaults.len() {
            Err(ScenarioError::Params(format!("{name} takes {} parameters, got {}", defaults.len(), args.len())))
        } else {
            args.iter().map(|s| Param::parse(s)).collect()
        }
    };
    match name {
        "interval" => {
            let len = match args.first() {
                Some(s) => Param::parse(s)?,
                None => 1.0.into(),
            };
            let (left, right) = match (args.get(1), args.get(2)) {
                (Some(l), Some(r)) => (parse_bc(l)?, parse_bc(r)?),
                (None, None) => (Bc::Dirichlet, Bc::Dirichlet),
                _ => return Err(ScenarioError::Params("give both end conditions".into())),
            };
            let rest = args.get(3..).unwrap_or(&[]);
            if rest.len() % 2 != 0 {
                return Err(ScenarioError::Params("control intervals come in pairs".into()));
            }
            let mut omega = Vec::new();
            for pair in rest.chunks(2) {
                omega.push((Param::parse(&pair[0])?.value, Param::parse(&pair[1])?.value));
            }
            if args.len() <= 3 {
                omega.push((0.0, 0.25 * len.value));
            }
            interval(len, left, right, &omega)
        }
        "star" => {
            let p = if args.is_empty() { nums(&["1", "1", "sqrt(2)"])? } else { args.iter().map(|s| Param::parse(s)).collect::<Result<_, _>>()? };
            star(&p)
        }
        "x_graph" => {
            let p = nums(&["sqrt(2)", "1"])?;
            x_graph(p[0].clone(), p[1].clone())
        }
        "mixed_x" => {
            if !args.is_empty() {
                return Err(ScenarioError::Params("mixed_x takes no parameters".into()));
            }
            mixed_x()
        }
        "bot_graph" => {
            let p = nums(&["3", "2", "1"])?;
            bot_graph(p[0].clone(), p[1].clone(), p[2].clone())
        }
        "triangle" => {
            let p = nums(&["1", "1", "sqrt(2)"])?;
            triangle(p[0].clone(), p[1].clone(), p[2].clone())
        }
        _ => Err(ScenarioError::Unknown(name.to_string())),
    }
}

/// Every scenario with default parameters, plus the X graph at the ratios
/// 3/2 and e.
pub fn catalog() -> Vec<Scenario> {
    let mut out: Vec<Scenario> = NAMES.iter().map(|n| build(n, &[]).expect("defaults are valid")).collect();
    for lt in ["3/2", "e"] {
        out.push(build("x_graph", &[lt.to_string(), "1".to_string()]).expect("valid"));
    }
    out
}
