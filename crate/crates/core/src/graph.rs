//! Finite metric graphs, control sets, and the splitting of edges at the
//! endpoints of the control set.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::real::{ExprError, Real};

/// Intervals closer than this are merged; endpoints this close to an edge
/// end snap onto it.
pub const INTERVAL_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bc {
    Interior,
    Dirichlet,
    Neumann,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Vertex {
    pub id: usize,
    pub bc: Bc,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub id: usize,
    pub tail: usize,
    pub head: usize,
    pub length: f64,
    /// Defining expression when the length was given symbolically.
    pub expr: Option<String>,
}

impl Edge {
    pub fn new(id: usize, tail: usize, head: usize, length: f64) -> Self {
        Edge { id, tail, head, length, expr: None }
    }

    pub fn is_loop(&self) -> bool {
        self.tail == self.head
    }

    pub fn other(&self, v: usize) -> usize {
        if v == self.tail {
            self.head
        } else {
            self.tail
        }
    }
}

/// Which end of an edge sits at a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum End {
    Tail,
    Head,
}

impl End {
    pub fn flip(self) -> End {
        match self {
            End::Tail => End::Head,
            End::Head => End::Tail,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
}

impl MetricGraph {
    pub fn new(bcs: &[Bc], edges: &[(usize, usize, f64)]) -> Self {
        MetricGraph {
            vertices: bcs.iter().enumerate().map(|(id, &bc)| Vertex { id, bc }).collect(),
            edges: edges.iter().enumerate().map(|(id, &(t, h, l))| Edge::new(id, t, h, l)).collect(),
        }
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    /// Edge ends at each vertex, loops contributing both ends; sorted by edge id.
    pub fn incidence(&self) -> Vec<Vec<(usize, End)>> {
        let mut inc = vec![Vec::new(); self.vertices.len()];
        for e in &self.edges {
            if e.tail < inc.len() {
                inc[e.tail].push((e.id, End::Tail));
            }
            if e.head < inc.len() {
                inc[e.head].push((e.id, End::Head));
            }
        }
        inc
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.incidence().iter().map(Vec::len).collect()
    }

    pub fn end_vertex(&self, edge: usize, end: End) -> usize {
        let e = &self.edges[edge];
        match end {
            End::Tail => e.tail,
            End::Head => e.head,
        }
    }

    /// Connected components as sorted vertex lists (isolated vertices included).
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut uf = UnionFind::new(self.vertices.len());
        for e in &self.edges {
            uf.union(e.tail, e.head);
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..self.vertices.len() {
            groups.entry(uf.find(v)).or_default().push(v);
        }
        let mut out: Vec<Vec<usize>> = groups.into_values().collect();
        out.sort();
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }
}

/// Per-edge union of open intervals.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ControlSet {
    intervals: BTreeMap<usize, Vec<(f64, f64)>>,
}

impl ControlSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn whole_edges(graph: &MetricGraph, edges: &[usize]) -> Self {
        let mut w = Self::empty();
        for &e in edges {
            w.add(e, 0.0, graph.edges[e].length);
        }
        w
    }

    /// Adds `(a, b)` on `edge`, merging with what is already there.
    pub fn add(&mut self, edge: usize, a: f64, b: f64) {
        let list = self.intervals.entry(edge).or_default();
        list.push((a, b));
        canonicalize(list);
    }

    pub fn on(&self, edge: usize) -> &[(f64, f64)] {
        self.intervals.get(&edge).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[(f64, f64)])> {
        self.intervals.iter().filter(|(_, v)| !v.is_empty()).map(|(&e, v)| (e, v.as_slice()))
    }

    pub fn is_empty(&self) -> bool {
        self.iter().next().is_none()
    }

    pub fn measure(&self) -> f64 {
        self.iter().flat_map(|(_, v)| v.iter()).map(|(a, b)| b - a).sum()
    }

    /// Whether `(a, b)` covers the whole edge of length `len`.
    pub fn covers_edge(&self, edge: usize, len: f64) -> bool {
        matches!(self.on(edge), [(a, b)] if *a <= INTERVAL_EPS && *b >= len - INTERVAL_EPS)
    }

    /// Whether every interval of `self` is contained in some interval of `other`.
    pub fn is_subset_of(&self, other: &ControlSet) -> bool {
        self.iter().all(|(e, list)| {
            list.iter().all(|&(a, b)| {
                other.on(e).iter().any(|&(c, d)| c <= a + INTERVAL_EPS && b <= d + INTERVAL_EPS)
            })
        })
    }
}

fn canonicalize(list: &mut Vec<(f64, f64)>) {
    list.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(list.len());
    for &(a, b) in list.iter() {
        match out.last_mut() {
            Some(last) if a <= last.1 + INTERVAL_EPS => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    *list = out;
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgePoint {
    pub edge: usize,
    pub x: f64,
}

/// Human-readable problems with a graph and control set; empty when valid.
pub fn validate(graph: &MetricGraph, omega: &ControlSet) -> Vec<String> {
    let mut diags = Vec::new();
    if graph.edges.is_empty() {
        diags.push("graph has no edges".to_string());
    }
    for (i, v) in graph.vertices.iter().enumerate() {
        if v.id != i {
            diags.push(format!("vertex ids must be 0..{} in order (found {} at position {i})", graph.vertices.len(), v.id));
        }
    }
    for (i, e) in graph.edges.iter().enumerate() {
        if e.id != i {
            diags.push(format!("edge ids must be 0..{} in order (found {} at position {i})", graph.edges.len(), e.id));
        }
        if !(e.length > 0.0) || !e.length.is_finite() {
            diags.push(format!("edge {}: non-positive length", e.id));
        }
        for v in [e.tail, e.head] {
            if v >= graph.vertices.len() {
                diags.push(format!("edge {}: unknown vertex {v}", e.id));
            }
        }
    }
    let deg = graph.degrees();
    for v in &graph.vertices {
        let d = deg.get(v.id).copied().unwrap_or(0);
        match v.bc {
            Bc::Dirichlet | Bc::Neumann if d != 1 => {
                diags.push(format!("vertex {}: boundary condition on a vertex of degree {d} (needs degree 1)", v.id))
            }
            Bc::Interior if d == 0 => diags.push(format!("vertex {}: isolated vertex", v.id)),
            _ => {}
        }
    }
    for (e, list) in omega.iter() {
        let Some(edge) = graph.edges.get(e) else {
            diags.push(format!("control on unknown edge {e}"));
            continue;
        };
        for &(a, b) in list {
            if !(a.is_finite() && b.is_finite()) || a >= b {
                diags.push(format!("edge {e}: empty interval ({a}, {b})"));
            } else if a < -INTERVAL_EPS || b > edge.length + INTERVAL_EPS {
                diags.push(format!("edge {e}: interval exceeds edge ({a}, {b}) on length {}", edge.length));
            }
        }
    }
    diags
}

/// Vertex classification inside the uncontrolled part.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexTag {
    /// Degree one in the original graph.
    WasExterior,
    /// Incident to a controlled edge.
    OmegaBoundary,
    Interior,
}

/// A graph in which every edge is either inside the control set or disjoint
/// from it, together with the bookkeeping that relates it to the input.
#[derive(Clone, Debug)]
pub struct Normalized {
    pub graph: MetricGraph,
    pub omega: ControlSet,
    pub controlled: Vec<bool>,
    /// Per vertex: degree one in the original graph.
    pub exterior: Vec<bool>,
    /// Per vertex: the original vertex id, `None` for inserted split points.
    pub origin: Vec<Option<usize>>,
    /// Per normalized edge: original edge id and offset of its tail.
    pub pieces: Vec<(usize, f64)>,
    /// Per original edge: its pieces in order from tail to head.
    pub splits: Vec<Vec<usize>>,
}

/// Splits edges at every endpoint of `omega`. Inserted vertices are interior.
pub fn normalize(graph: &MetricGraph, omega: &ControlSet) -> Normalized {
    let deg = graph.degrees();
    let mut vertices = graph.vertices.clone();
    let mut exterior: Vec<bool> = deg.iter().map(|&d| d == 1).collect();
    let mut origin: Vec<Option<usize>> = (0..vertices.len()).map(Some).collect();
    let mut edges = Vec::new();
    let mut controlled = Vec::new();
    let mut pieces = Vec::new();
    let mut splits = Vec::with_capacity(graph.edges.len());

    for e in &graph.edges {
        let len = e.length;
        let mut cuts: Vec<(f64, bool)> = Vec::new(); // (start coordinate, controlled)
        let mut pos = 0.0;
        for &(a, b) in omega.on(e.id) {
            let a = if a <= INTERVAL_EPS { 0.0 } else { a };
            let b = if b >= len - INTERVAL_EPS { len } else { b.min(len) };
            if a > pos {
                cuts.push((pos, false));
            }
            cuts.push((a, true));
            pos = b;
        }
        if pos < len {
            cuts.push((pos, false));
        }
        let mut ids = Vec::with_capacity(cuts.len());
        let mut prev_vertex = e.tail;
        for (i, &(start, ctrl)) in cuts.iter().enumerate() {
            let end = cuts.get(i + 1).map_or(len, |c| c.0);
            let head = if i + 1 == cuts.len() {
                e.head
            } else {
                vertices.push(Vertex { id: vertices.len(), bc: Bc::Interior });
                exterior.push(false);
                origin.push(None);
                vertices.len() - 1
            };
            let id = edges.len();
            let piece_len = if cuts.len() == 1 { len } else { end - start };
            let mut ne = Edge::new(id, prev_vertex, head, piece_len);
            if cuts.len() == 1 {
                ne.expr = e.expr.clone();
            }
            edges.push(ne);
            controlled.push(ctrl);
            pieces.push((e.id, start));
            ids.push(id);
            prev_vertex = head;
        }
        splits.push(ids);
    }
    let g = MetricGraph { vertices, edges };
    let ids: Vec<usize> = (0..g.edges.len()).filter(|&i| controlled[i]).collect();
    let w = ControlSet::whole_edges(&g, &ids);
    Normalized { graph: g, omega: w, controlled, exterior, origin, pieces, splits }
}

impl Normalized {
    /// Original point to normalized point.
    pub fn to_normalized(&self, p: EdgePoint) -> EdgePoint {
        let ids = &self.splits[p.edge];
        let mut k = ids.len() - 1;
        for (i, &id) in ids.iter().enumerate().skip(1) {
            if p.x < self.pieces[id].1 {
                k = i - 1;
                break;
            }
        }
        let id = ids[k];
        let x = (p.x - self.pieces[id].1).clamp(0.0, self.graph.edges[id].length);
        EdgePoint { edge: id, x }
    }

    /// Normalized point back to the original graph.
    pub fn to_original(&self, p: EdgePoint) -> EdgePoint {
        let (edge, off) = self.pieces[p.edge];
        EdgePoint { edge, x: off + p.x }
    }

    pub fn tag(&self, v: usize) -> VertexTag {
        if self.exterior[v] {
            return VertexTag::WasExterior;
        }
        let inc = self.graph.incidence();
        if inc[v].iter().any(|&(e, _)| self.controlled[e]) {
            VertexTag::OmegaBoundary
        } else {
            VertexTag::Interior
        }
    }

    /// Connected components of the uncontrolled edges.
    pub fn uncontrolled_subgraph(&self) -> Vec<Component> {
        let g = &self.graph;
        let inc = g.incidence();
        let mut uf = UnionFind::new(g.vertices.len());
        let mut any = vec![false; g.vertices.len()];
        for e in g.edges.iter().filter(|e| !self.controlled[e.id]) {
            uf.union(e.tail, e.head);
            any[e.tail] = true;
            any[e.head] = true;
        }
        let mut by_root: BTreeMap<usize, Component> = BTreeMap::new();
        for v in 0..g.vertices.len() {
            if !any[v] {
                continue;
            }
            let tag = if self.exterior[v] {
                VertexTag::WasExterior
            } else if inc[v].iter().any(|&(e, _)| self.controlled[e]) {
                VertexTag::OmegaBoundary
            } else {
                VertexTag::Interior
            };
            let c = by_root.entry(uf.find(v)).or_default();
            c.vertices.push(v);
            c.tags.push(tag);
        }
        for e in g.edges.iter().filter(|e| !self.controlled[e.id]) {
            by_root.get_mut(&uf.find(e.tail)).unwrap().edges.push(e.id);
        }
        let mut out: Vec<Component> = by_root.into_values().collect();
        out.sort_by_key(|c| c.edges[0]);
        out
    }
}

/// One connected piece of the uncontrolled part, in normalized ids.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Component {
    pub vertices: Vec<usize>,
    pub tags: Vec<VertexTag>,
    pub edges: Vec<usize>,
}

impl Component {
    pub fn tag_of(&self, v: usize) -> Option<VertexTag> {
        self.vertices.iter().position(|&x| x == v).map(|i| self.tags[i])
    }

    pub fn count(&self, tag: VertexTag) -> usize {
        self.tags.iter().filter(|&&t| t == tag).count()
    }

    /// The component as a standalone graph (vertices and edges renumbered in
    /// the order of `self.vertices` / `self.edges`).
    pub fn to_graph(&self, parent: &MetricGraph) -> MetricGraph {
        let idx = |v: usize| self.vertices.iter().position(|&x| x == v).unwrap();
        MetricGraph {
            vertices: self
                .vertices
                .iter()
                .enumerate()
                .map(|(i, &v)| Vertex { id: i, bc: parent.vertices[v].bc })
                .collect(),
            edges: self
                .edges
                .iter()
                .enumerate()
                .map(|(i, &e)| {
                    let pe = &parent.edges[e];
                    Edge { id: i, tail: idx(pe.tail), head: idx(pe.head), length: pe.length, expr: pe.expr.clone() }
                })
                .collect(),
        }
    }
}

/// Disjoint-set forest with union by size and path halving.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }
}

// ---------------------------------------------------------------- JSON I/O

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("malformed graph file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("edge {edge}: {source}")]
    Expr { edge: usize, source: ExprError },
    #[error("invalid graph: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

#[derive(Serialize, Deserialize)]
struct FileVertex {
    id: usize,
    bc: Bc,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum FileLength {
    Value(f64),
    Expr { expr: String },
}

#[derive(Serialize, Deserialize)]
struct FileEdge {
    id: usize,
    from: usize,
    to: usize,
    length: FileLength,
}

#[derive(Serialize, Deserialize)]
struct FileControl {
    edge: usize,
    intervals: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    vertices: Vec<FileVertex>,
    edges: Vec<FileEdge>,
    #[serde(default)]
    control: Vec<FileControl>,
}

/// Parses the JSON graph format. The result is not validated.
pub fn from_json(text: &str) -> Result<(MetricGraph, ControlSet), GraphError> {
    let f: GraphFile = serde_json::from_str(text)?;
    let mut vertices: Vec<Vertex> = f.vertices.into_iter().map(|v| Vertex { id: v.id, bc: v.bc }).collect();
    vertices.sort_by_key(|v| v.id);
    let mut edges = Vec::with_capacity(f.edges.len());
    for e in f.edges {
        let (length, expr) = match e.length {
            FileLength::Value(x) => (x, None),
            FileLength::Expr { expr } => {
                let r = Real::parse(&expr).map_err(|source| GraphError::Expr { edge: e.id, source })?;
                (r.to_f64(), Some(expr))
            }
        };
        edges.push(Edge { id: e.id, tail: e.from, head: e.to, length, expr });
    }
    edges.sort_by_key(|e| e.id);
    let mut omega = ControlSet::empty();
    for c in f.control {
        for [a, b] in c.intervals {
            omega.intervals.entry(c.edge).or_default().push((a, b));
        }
    }
    for list in omega.intervals.values_mut() {
        canonicalize(list);
    }
    Ok((MetricGraph { vertices, edges }, omega))
}

/// Parses and validates.
pub fn load(text: &str) -> Result<(MetricGraph, ControlSet), GraphError> {
    let (g, w) = from_json(text)?;
    let diags = validate(&g, &w);
    if diags.is_empty() {
        Ok((g, w))
    } else {
        Err(GraphError::Invalid(diags))
    }
}

pub fn to_json(graph: &MetricGraph, omega: &ControlSet) -> String {
    let f = GraphFile {
        vertices: graph.vertices.iter().map(|v| FileVertex { id: v.id, bc: v.bc }).collect(),
        edges: graph
            .edges
            .iter()
            .map(|e| FileEdge {
                id: e.id,
                from: e.tail,
                to: e.head,
                length: match &e.expr {
                    Some(s) => FileLength::Expr { expr: s.clone() },
                    None => FileLength::Value(e.length),
                },
            })
            .collect(),
        control: omega
            .iter()
            .map(|(e, list)| FileControl { edge: e, intervals: list.iter().map(|&(a, b)| [a, b]).collect() })
            .collect(),
    };
    serde_json::to_string_pretty(&f).expect("plain data serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use Bc::*;

    fn interval() -> MetricGraph {
        MetricGraph::new(&[Dirichlet, Dirichlet], &[(0, 1, 1.0)])
    }

    #[test]
    fn validate_examples() {
        let mut w = ControlSet::empty();
        w.add(0, 0.2, 0.4);
        assert!(validate(&interval(), &w).is_empty());

        let bad = MetricGraph::new(&[Dirichlet, Dirichlet], &[(0, 1, 0.0)]);
        let d = validate(&bad, &ControlSet::empty());
        assert_eq!(d.len(), 1);
        assert!(d[0].contains("non-positive length"));

        let mut w = ControlSet::empty();
        w.add(0, 0.5, 1.5);
        let d = validate(&interval(), &w);
        assert_eq!(d.len(), 1);
        assert!(d[0].contains("interval exceeds edge"));
    }

    #[test]
    fn validate_degree_rules() {
        let g = MetricGraph::new(&[Dirichlet, Interior, Dirichlet], &[(0, 1, 1.0), (1, 0, 1.0), (1, 2, 1.0)]);
        let d = validate(&g, &ControlSet::empty());
        assert!(d.iter().any(|s| s.contains("vertex 0")));
        let g = MetricGraph::new(&[Interior], &[(0, 0, 1.0)]);
        assert!(validate(&g, &ControlSet::empty()).is_empty());
    }

    #[test]
    fn intervals_merge_when_touching() {
        let mut w = ControlSet::empty();
        w.add(0, 0.1, 0.3);
        w.add(0, 0.3 + 1e-13, 0.5);
        w.add(0, 0.7, 0.8);
        w.add(0, 0.2, 0.25);
        assert_eq!(w.on(0), &[(0.1, 0.5), (0.7, 0.8)]);
    }

    #[test]
    fn split_single_edge() {
        let mut w = ControlSet::empty();
        w.add(0, 0.2, 0.4);
        let n = normalize(&interval(), &w);
        let lens: Vec<f64> = n.graph.edges.iter().map(|e| e.length).collect();
        assert_eq!(lens, vec![0.2, 0.2, 0.6]);
        assert_eq!(n.controlled, vec![false, true, false]);
        assert_eq!(n.graph.total_length(), 1.0);
        assert!(n.graph.vertices[2..].iter().all(|v| v.bc == Interior));
        assert!(validate(&n.graph, &n.omega).is_empty());
    }

    #[test]
    fn whole_edge_control_leaves_graph_unchanged() {
        let g = interval();
        let n = normalize(&g, &ControlSet::whole_edges(&g, &[0]));
        assert_eq!(n.graph, g);
        assert_eq!(n.controlled, vec![true]);
    }

    #[test]
    fn point_map_round_trip() {
        let mut w = ControlSet::empty();
        w.add(0, 0.2, 0.4);
        let n = normalize(&interval(), &w);
        for x in [0.0, 0.1, 0.2, 0.3, 0.4, 0.77, 1.0] {
            let p = EdgePoint { edge: 0, x };
            let q = n.to_original(n.to_normalized(p));
            assert_eq!(q.edge, 0);
            assert!((q.x - x).abs() < 1e-12);
        }
        assert_eq!(n.to_normalized(EdgePoint { edge: 0, x: 0.3 }).edge, 1);
    }

    #[test]
    fn uncontrolled_components() {
        let g = interval();
        assert!(normalize(&g, &ControlSet::whole_edges(&g, &[0])).uncontrolled_subgraph().is_empty());
        let mut w = ControlSet::empty();
        w.add(0, 0.2, 0.4);
        let comps = normalize(&g, &w).uncontrolled_subgraph();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].edges, vec![0]);
        assert_eq!(comps[0].count(VertexTag::WasExterior), 1);
        assert_eq!(comps[0].count(VertexTag::OmegaBoundary), 1);
    }

    #[test]
    fn json_round_trip_with_expressions() {
        let text = r#"{"vertices":[{"id":0,"bc":"dirichlet"},{"id":1,"bc":"neumann"}],
            "edges":[{"id":0,"from":0,"to":1,"length":{"expr":"sqrt(2)"}}],
            "control":[{"edge":0,"intervals":[[0.2,0.4]]}]}"#;
        let (g, w) = load(text).unwrap();
        assert_eq!(g.edges[0].length, 2f64.sqrt());
        assert_eq!(g.edges[0].expr.as_deref(), Some("sqrt(2)"));
        let (g2, w2) = load(&to_json(&g, &w)).unwrap();
        assert_eq!(g, g2);
        assert_eq!(w, w2);
    }

    #[test]
    fn load_reports_diagnostics() {
        let text = r#"{"vertices":[{"id":0,"bc":"dirichlet"},{"id":1,"bc":"dirichlet"}],
            "edges":[{"id":0,"from":0,"to":1,"length":-1}]}"#;
        assert!(matches!(load(text), Err(GraphError::Invalid(_))));
        assert!(matches!(load("{"), Err(GraphError::Json(_))));
    }
}
