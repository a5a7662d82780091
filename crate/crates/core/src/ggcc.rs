//! The geometric control condition on a metric graph, decided five different
//! ways, with certificates, counterexamples and the two control-time
//! quantities (longest unobserved path, optimal watershed time).
//!
//! Every function here takes the output of [`crate::graph::normalize`], so an
//! edge is either wholly controlled or wholly uncontrolled.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::graph::{End, MetricGraph, Normalized, UnionFind, VertexTag};

/// Coverage and overlap tolerance used by [`verify_watershed`].
pub const COVER_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Dir {
    /// tail to head
    Forward,
    Backward,
}

impl Dir {
    pub fn leaving(end: End) -> Dir {
        match end {
            End::Tail => Dir::Forward,
            End::Head => Dir::Backward,
        }
    }

    pub fn entry_end(self) -> End {
        match self {
            Dir::Forward => End::Tail,
            Dir::Backward => End::Head,
        }
    }

    pub fn exit_end(self) -> End {
        self.entry_end().flip()
    }

    pub fn reverse(self) -> Dir {
        match self {
            Dir::Forward => Dir::Backward,
            Dir::Backward => Dir::Forward,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Step {
    pub edge: usize,
    pub dir: Dir,
}

/// A walk along edges. `start` and `end` are coordinates in the first and
/// last edge's own parameter, so partial edges can be described.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphPath {
    pub steps: Vec<Step>,
    pub start: f64,
    pub end: f64,
    pub total_length: f64,
    /// The walk returns to its starting state (a periodic path).
    pub closed: bool,
}

impl GraphPath {
    /// A walk along whole edges.
    pub fn whole(g: &MetricGraph, steps: Vec<Step>, closed: bool) -> Self {
        let start = steps.first().map_or(0.0, |s| entry_coord(g, *s));
        let end = steps.last().map_or(0.0, |s| exit_coord(g, *s));
        let total_length = steps.iter().map(|s| g.edges[s.edge].length).sum();
        GraphPath { steps, start, end, total_length, closed }
    }

    pub fn edges(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.edge).collect()
    }

    /// Vertices visited, from the start vertex of the first step.
    pub fn vertices(&self, g: &MetricGraph) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        if let Some(s) = self.steps.first() {
            out.push(g.end_vertex(s.edge, s.dir.entry_end()));
        }
        out.extend(self.steps.iter().map(|s| g.end_vertex(s.edge, s.dir.exit_end())));
        out
    }
}

fn entry_coord(g: &MetricGraph, s: Step) -> f64 {
    match s.dir {
        Dir::Forward => 0.0,
        Dir::Backward => g.edges[s.edge].length,
    }
}

fn exit_coord(g: &MetricGraph, s: Step) -> f64 {
    match s.dir {
        Dir::Forward => g.edges[s.edge].length,
        Dir::Backward => 0.0,
    }
}

fn step_from(g: &MetricGraph, v: usize, edge: usize) -> Step {
    let dir = if g.edges[edge].tail == v { Dir::Forward } else { Dir::Backward };
    Step { edge, dir }
}

/// Uncontrolled incidence plus vertex tags, computed once per call.
struct View<'a> {
    n: &'a Normalized,
    inc: Vec<Vec<(usize, End)>>,
    tag: Vec<VertexTag>,
}

impl<'a> View<'a> {
    fn new(n: &'a Normalized) -> Self {
        let full = n.graph.incidence();
        let tag = (0..n.graph.vertices.len())
            .map(|v| {
                if n.exterior[v] {
                    VertexTag::WasExterior
                } else if full[v].iter().any(|&(e, _)| n.controlled[e]) {
                    VertexTag::OmegaBoundary
                } else {
                    VertexTag::Interior
                }
            })
            .collect();
        let inc = full.into_iter().map(|l| l.into_iter().filter(|&(e, _)| !n.controlled[e]).collect()).collect();
        View { n, inc, tag }
    }

    fn g(&self) -> &MetricGraph {
        &self.n.graph
    }

    fn uncontrolled(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.g().edges.len()).filter(|&e| !self.n.controlled[e])
    }

    fn exterior(&self, v: usize) -> bool {
        self.tag[v] == VertexTag::WasExterior
    }

    /// Path between two vertices along uncontrolled edges (BFS, lowest edge first).
    fn bfs_path(&self, from: usize, to: usize) -> Option<Vec<Step>> {
        let g = self.g();
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; g.vertices.len()];
        let mut seen = vec![false; g.vertices.len()];
        let mut q = VecDeque::from([from]);
        seen[from] = true;
        while let Some(v) = q.pop_front() {
            if v == to {
                break;
            }
            for &(e, _) in &self.inc[v] {
                let w = g.edges[e].other(v);
                if !seen[w] {
                    seen[w] = true;
                    prev[w] = Some((v, e));
                    q.push_back(w);
                }
            }
        }
        if !seen[to] {
            return None;
        }
        let mut edges = Vec::new();
        let mut v = to;
        while let Some((u, e)) = prev[v] {
            edges.push((u, e));
            v = u;
        }
        edges.reverse();
        Some(edges.into_iter().map(|(u, e)| step_from(g, u, e)).collect())
    }
}

// ------------------------------------------------------ criterion: cycles

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Cycle { path: GraphPath },
    ExteriorPath { path: GraphPath },
}

impl Violation {
    pub fn path(&self) -> &GraphPath {
        match self {
            Violation::Cycle { path } | Violation::ExteriorPath { path } => path,
        }
    }
}

/// True iff the uncontrolled part has no cycle and no path joining two
/// vertices that were exterior. Otherwise returns one such cycle or path;
/// components are scanned in order of their lowest edge id.
pub fn check_cycles_and_exterior_paths(n: &Normalized) -> (bool, Option<Violation>) {
    let view = View::new(n);
    let g = view.g();
    let nv = g.vertices.len();
    let mut visited = vec![false; nv];
    for e0 in view.uncontrolled() {
        let root = g.edges[e0].tail;
        if visited[root] {
            continue;
        }
        // iterative DFS with parent edges
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; nv];
        let mut on_stack = vec![false; nv];
        let mut members = vec![root];
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        visited[root] = true;
        on_stack[root] = true;
        let mut cycle: Option<Vec<Step>> = None;
        while let Some(&mut (v, ref mut idx)) = stack.last_mut() {
            if *idx >= view.inc[v].len() {
                on_stack[v] = false;
                stack.pop();
                continue;
            }
            let (e, end) = view.inc[v][*idx];
            *idx += 1;
            if parent[v].map(|p| p.1) == Some(e) {
                continue;
            }
            let edge = &g.edges[e];
            let w = if edge.is_loop() { v } else { edge.other(v) };
            if edge.is_loop() && end == End::Head {
                continue; // the loop was seen from its tail end
            }
            if !visited[w] {
                visited[w] = true;
                on_stack[w] = true;
                parent[w] = Some((v, e));
                members.push(w);
                stack.push((w, 0));
            } else if on_stack[w] && cycle.is_none() {
                // tree path w -> v, then e back to w
                let mut chain = Vec::new();
                let mut x = v;
                while x != w {
                    let (p, pe) = parent[x].expect("on-stack vertex has a parent chain to w");
                    chain.push((p, pe));
                    x = p;
                }
                chain.reverse();
                let mut steps: Vec<Step> = chain.into_iter().map(|(p, pe)| step_from(g, p, pe)).collect();
                steps.push(step_from(g, v, e));
                cycle = Some(steps);
            }
        }
        if let Some(steps) = cycle {
            return (false, Some(Violation::Cycle { path: GraphPath::whole(g, steps, true) }));
        }
        members.sort_unstable();
        let ext: Vec<usize> = members.iter().copied().filter(|&v| view.exterior(v)).collect();
        if ext.len() >= 2 {
            let steps = view.bfs_path(ext[0], ext[1]).expect("same component");
            return (false, Some(Violation::ExteriorPath { path: GraphPath::whole(g, steps, false) }));
        }
    }
    (true, None)
}

// ------------------------------------------------------ criterion: forest

/// True iff every uncontrolled component is acyclic and contains at most one
/// vertex that was exterior.
pub fn check_forest(n: &Normalized) -> bool {
    let view = View::new(n);
    let g = view.g();
    let mut uf = UnionFind::new(g.vertices.len());
    for e in view.uncontrolled() {
        if !uf.union(g.edges[e].tail, g.edges[e].head) {
            return false;
        }
    }
    let mut count: BTreeMap<usize, usize> = BTreeMap::new();
    for v in 0..g.vertices.len() {
        if view.exterior(v) && !view.inc[v].is_empty() {
            let c = count.entry(uf.find(v)).or_default();
            *c += 1;
            if *c > 1 {
                return false;
            }
        }
    }
    true
}

// ------------------------------------------------------ criterion: ABP

/// Uncontrolled edge id to the interior vertex it is assigned to.
pub type AbpCertificate = BTreeMap<usize, usize>;

/// Acyclicity (edge count per component) plus a matching of every
/// uncontrolled edge to a distinct incident vertex that was not exterior.
pub fn check_abp(n: &Normalized) -> (bool, Option<AbpCertificate>) {
    let view = View::new(n);
    let g = view.g();
    for c in n.uncontrolled_subgraph() {
        if c.edges.len() + 1 != c.vertices.len() {
            return (false, None);
        }
    }
    let left: Vec<usize> = view.uncontrolled().collect();
    let udeg: Vec<usize> = view.inc.iter().map(Vec::len).collect();
    let adj: Vec<Vec<usize>> = left
        .iter()
        .map(|&e| {
            let ed = &g.edges[e];
            let mut c: Vec<usize> = [ed.tail, ed.head].into_iter().filter(|&v| !view.exterior(v)).collect();
            c.dedup();
            // leaves first keeps hubs free for later edges
            c.sort_by_key(|&v| (udeg[v], v));
            c
        })
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; g.vertices.len()];
    for i in 0..left.len() {
        let mut seen = vec![false; g.vertices.len()];
        if !augment(i, &adj, &mut owner, &mut seen) {
            return (false, None);
        }
    }
    let mut cert = AbpCertificate::new();
    for (v, o) in owner.iter().enumerate() {
        if let Some(i) = o {
            cert.insert(left[*i], v);
        }
    }
    (true, Some(cert))
}

fn augment(i: usize, adj: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
    for &v in &adj[i] {
        if seen[v] {
            continue;
        }
        seen[v] = true;
        if owner[v].is_none() || augment(owner[v].unwrap(), adj, owner, seen) {
            owner[v] = Some(i);
            return true;
        }
    }
    false
}

/// Checks a certificate on its own terms.
pub fn verify_abp(n: &Normalized, cert: &AbpCertificate) -> bool {
    let g = &n.graph;
    let mut used = std::collections::BTreeSet::new();
    let all = (0..g.edges.len()).filter(|&e| !n.controlled[e]).all(|e| cert.contains_key(&e));
    all && cert.iter().all(|(&e, &v)| {
        e < g.edges.len()
            && !n.controlled[e]
            && (g.edges[e].tail == v || g.edges[e].head == v)
            && !n.exterior[v]
            && used.insert(v)
    })
}

// ------------------------------------------------------ criterion: watershed

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct River {
    /// Directed downstream from `source`.
    pub path: GraphPath,
    /// The vertex (on the boundary of the control set) where the river starts.
    pub source: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Watershed {
    pub rivers: Vec<River>,
}

impl Watershed {
    pub fn longest_river(&self) -> f64 {
        self.rivers.iter().map(|r| r.path.total_length).fold(0.0, f64::max)
    }
}

/// Roots each uncontrolled component (at its exterior vertex if any, else its
/// lowest vertex), starts a river at every source leaf, lets them flow
/// towards the root and stops all but one at each confluence. Returns the
/// result only if it passes [`verify_watershed`].
pub fn construct_watershed(n: &Normalized) -> Option<Watershed> {
    let view = View::new(n);
    let g = view.g();
    let mut rivers = Vec::new();
    for comp in n.uncontrolled_subgraph() {
        let root = comp
            .vertices
            .iter()
            .copied()
            .find(|&v| view.exterior(v))
            .unwrap_or(comp.vertices[0]);
        // BFS spanning tree
        let mut parent: Vec<Option<usize>> = vec![None; g.vertices.len()];
        let mut seen = vec![false; g.vertices.len()];
        let mut order = vec![root];
        seen[root] = true;
        let mut i = 0;
        while i < order.len() {
            let v = order[i];
            i += 1;
            for &(e, _) in &view.inc[v] {
                let w = g.edges[e].other(v);
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(e);
                    order.push(w);
                }
            }
        }
        // rivers arriving at each vertex from below: (steps, source)
        let mut arriving: Vec<Vec<(Vec<Step>, usize)>> = vec![Vec::new(); g.vertices.len()];
        for &v in order.iter().rev() {
            let mut here = std::mem::take(&mut arriving[v]);
            let is_leaf = view.inc[v].len() == 1 && v != root;
            if is_leaf && view.tag[v] == VertexTag::OmegaBoundary {
                here.push((Vec::new(), v));
            }
            let Some(pe) = parent[v] else {
                for (steps, source) in here {
                    if !steps.is_empty() {
                        rivers.push(River { path: GraphPath::whole(g, steps, false), source });
                    }
                }
                continue;
            };
            if here.is_empty() {
                continue; // nothing flows out of this branch
            }
            here.sort_by_key(|(s, _)| s.last().map_or(usize::MAX, |x| x.edge));
            let mut it = here.into_iter();
            let (mut cont, src) = it.next().unwrap();
            for (steps, source) in it {
                rivers.push(River { path: GraphPath::whole(g, steps, false), source });
            }
            cont.push(step_from(g, v, pe));
            let up = g.edges[pe].other(v);
            arriving[up].push((cont, src));
        }
    }
    let w = Watershed { rivers };
    verify_watershed(n, &w).ok().map(|_| w)
}

/// Checks the four watershed conditions independently of how `w` was built:
/// each river is a legal walk with an end on the boundary of the control set,
/// rivers are disjoint, together they cover the uncontrolled part (up to
/// [`COVER_TOL`]), and at most one river passes through any vertex.
pub fn verify_watershed(n: &Normalized, w: &Watershed) -> Result<(), String> {
    let view = View::new(n);
    let g = view.g();
    let mut cover: Vec<Vec<(f64, f64)>> = vec![Vec::new(); g.edges.len()];
    let mut passes = vec![0usize; g.vertices.len()];
    let at_vertex = |edge: usize, x: f64| -> Option<usize> {
        let e = &g.edges[edge];
        if x.abs() <= COVER_TOL {
            Some(e.tail)
        } else if (x - e.length).abs() <= COVER_TOL {
            Some(e.head)
        } else {
            None
        }
    };
    for (ri, r) in w.rivers.iter().enumerate() {
        let p = &r.path;
        if p.steps.is_empty() {
            return Err(format!("river {ri} is empty"));
        }
        for (k, s) in p.steps.iter().enumerate() {
            let Some(edge) = g.edges.get(s.edge) else {
                return Err(format!("river {ri}: unknown edge {}", s.edge));
            };
            if n.controlled[s.edge] {
                return Err(format!("river {ri} enters controlled edge {}", s.edge));
            }
            let from = if k == 0 { p.start } else { entry_coord(g, *s) };
            let to = if k + 1 == p.steps.len() { p.end } else { exit_coord(g, *s) };
            let ok_dir = match s.dir {
                Dir::Forward => from < to,
                Dir::Backward => from > to,
            };
            if !ok_dir || from < -COVER_TOL || to < -COVER_TOL || from > edge.length + COVER_TOL || to > edge.length + COVER_TOL {
                return Err(format!("river {ri}: bad coordinates on edge {}", s.edge));
            }
            cover[s.edge].push((from.min(to), from.max(to)));
            if k + 1 < p.steps.len() {
                let next = p.steps[k + 1];
                let v = g.end_vertex(s.edge, s.dir.exit_end());
                if g.end_vertex(next.edge, next.dir.entry_end()) != v {
                    return Err(format!("river {ri}: steps {k} and {} are not adjacent", k + 1));
                }
                let u_turn = next.edge == s.edge && next.dir.entry_end() == s.dir.exit_end();
                if u_turn && !view.exterior(v) {
                    return Err(format!("river {ri}: turns back at vertex {v}"));
                }
                passes[v] += 1;
            }
        }
        let first = p.steps[0];
        let last = *p.steps.last().unwrap();
        let ends = [at_vertex(first.edge, p.start), at_vertex(last.edge, p.end)];
        if !ends.iter().flatten().any(|&v| view.tag[v] == VertexTag::OmegaBoundary) {
            return Err(format!("river {ri} has no end on the control set"));
        }
    }
    let mut uncovered = 0.0;
    for e in view.uncontrolled() {
        let list = &mut cover[e];
        list.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut pos = 0.0;
        for &(a, b) in list.iter() {
            if a < pos - COVER_TOL {
                return Err(format!("rivers overlap on edge {e}"));
            }
            uncovered += (a - pos).max(0.0);
            pos = pos.max(b);
        }
        uncovered += (g.edges[e].length - pos).max(0.0);
    }
    if uncovered > COVER_TOL {
        return Err(format!("rivers leave {uncovered:.3e} of the uncontrolled part uncovered"));
    }
    if let Some(v) = passes.iter().position(|&c| c > 1) {
        return Err(format!("{} rivers pass through vertex {v}", passes[v]));
    }
    Ok(())
}

// ------------------------------------------------------ criterion: periodic paths

/// Depth-first search over (edge, direction) states of walks that avoid the
/// control set. Returns a periodic walk if one is found within `max_steps`;
/// the search is exhaustive once `max_steps >= 2|E| + 2`.
pub fn periodic_path_search(n: &Normalized, max_steps: usize) -> Option<GraphPath> {
    let view = View::new(n);
    let g = view.g();
    let ne = g.edges.len();
    let idx = |s: Step| 2 * s.edge + usize::from(s.dir == Dir::Backward);
    let succ = |s: Step| -> Vec<Step> {
        let exit = s.dir.exit_end();
        let v = g.end_vertex(s.edge, exit);
        if view.exterior(v) {
            return vec![Step { edge: s.edge, dir: s.dir.reverse() }];
        }
        view.inc[v]
            .iter()
            .filter(|&&(e, end)| !(e == s.edge && end == exit))
            .map(|&(e, end)| Step { edge: e, dir: Dir::leaving(end) })
            .collect()
    };
    #[derive(Clone, Copy, PartialEq)]
    enum Color {
        White,
        Gray,
        Black,
    }
    let mut color = vec![Color::White; 2 * ne];
    for e in view.uncontrolled() {
        for dir in [Dir::Forward, Dir::Backward] {
            let s0 = Step { edge: e, dir };
            if color[idx(s0)] != Color::White {
                continue;
            }
            // stack of (state, successors, next index, truncated)
            let mut stack: Vec<(Step, Vec<Step>, usize, bool)> = vec![(s0, succ(s0), 0, false)];
            color[idx(s0)] = Color::Gray;
            while let Some(top) = stack.last_mut() {
                let (s, ref list, ref mut i, truncated) = *top;
                if *i >= list.len() {
                    color[idx(s)] = if truncated { Color::White } else { Color::Black };
                    stack.pop();
                    if truncated {
                        if let Some(parent) = stack.last_mut() {
                            parent.3 = true;
                        }
                    }
                    continue;
                }
                let t = list[*i];
                *i += 1;
                match color[idx(t)] {
                    Color::Gray => {
                        let pos = stack.iter().position(|x| x.0 == t).expect("gray state is on the stack");
                        let steps: Vec<Step> = stack[pos..].iter().map(|x| x.0).collect();
                        return Some(GraphPath::whole(g, steps, true));
                    }
                    Color::Black => {}
                    Color::White => {
                        if stack.len() >= max_steps {
                            stack.last_mut().unwrap().3 = true;
                        } else {
                            color[idx(t)] = Color::Gray;
                            let l = succ(t);
                            stack.push((t, l, 0, false));
                        }
                    }
                }
            }
        }
    }
    None
}

// ------------------------------------------------------ time quantities

/// Supremum of the lengths of walks avoiding the control set: per component,
/// twice the largest distance from the exterior vertex, or the diameter when
/// there is none. `None` when the supremum is infinite.
pub fn ggcc_length(n: &Normalized) -> Option<f64> {
    let view = View::new(n);
    let g = view.g();
    let mut best: f64 = 0.0;
    for comp in n.uncontrolled_subgraph() {
        let dist_from = |s: usize| -> Option<Vec<f64>> {
            let mut d = vec![f64::NAN; g.vertices.len()];
            let mut via = vec![usize::MAX; g.vertices.len()];
            d[s] = 0.0;
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for &(e, _) in &view.inc[v] {
                    if e == via[v] {
                        continue;
                    }
                    let w = g.edges[e].other(v);
                    if !d[w].is_nan() {
                        return None; // second route: a cycle
                    }
                    d[w] = d[v] + g.edges[e].length;
                    via[w] = e;
                    stack.push(w);
                }
            }
            Some(d)
        };
        let ext: Vec<usize> = comp.vertices.iter().copied().filter(|&v| view.exterior(v)).collect();
        let far = |d: &[f64]| {
            comp.vertices.iter().copied().max_by(|&a, &b| d[a].total_cmp(&d[b])).expect("non-empty")
        };
        let len = match ext.len() {
            0 => {
                let d0 = dist_from(comp.vertices[0])?;
                let a = far(&d0);
                let da = dist_from(a)?;
                da[far(&da)]
            }
            1 => {
                let d = dist_from(ext[0])?;
                2.0 * d[far(&d)]
            }
            _ => return None,
        };
        best = best.max(len);
    }
    Some(best)
}

/// Uncontrolled edges grouped into pieces joined only at vertices off the
/// control set. Rivers never gain by passing through a control-set vertex,
/// so each piece can be optimized on its own.
fn pieces(view: &View) -> Vec<Vec<usize>> {
    let g = view.g();
    let mut uf = UnionFind::new(g.edges.len());
    for v in 0..g.vertices.len() {
        if view.tag[v] == VertexTag::OmegaBoundary {
            continue;
        }
        let l = &view.inc[v];
        for w in l.windows(2) {
            uf.union(w[0].0, w[1].0);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for e in view.uncontrolled() {
        groups.entry(uf.find(e)).or_default().push(e);
    }
    groups.into_values().collect()
}

struct PieceSolver<'a, 'b> {
    view: &'b View<'a>,
    in_piece: Vec<bool>,
}

/// Continuing river at a vertex: used length, worst finished river below,
/// the river's steps so far and its source.
struct Flow {
    used: f64,
    worst: f64,
    steps: Vec<Step>,
    source: usize,
}

impl<'a, 'b> PieceSolver<'a, 'b> {
    fn ends(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.view.inc[v].iter().map(|x| x.0).filter(|&e| self.in_piece[e])
    }

    /// Rivers flowing into `v` from everything except `skip`; the smallest
    /// continues, the rest end at `v` and are appended to `done`.
    fn into_vertex(&self, v: usize, skip: Option<usize>, done: &mut Vec<River>) -> Option<Vec<Flow>> {
        let g = self.view.g();
        let mut flows = Vec::new();
        for e in self.ends(v).filter(|&e| Some(e) != skip).collect::<Vec<_>>() {
            let w = g.edges[e].other(v);
            let mut f = self.flow_out(w, e, done)?;
            f.used += g.edges[e].length;
            f.steps.push(step_from(g, w, e));
            flows.push(f);
        }
        Some(flows)
    }

    /// The river leaving `v` along edge `toward`.
    fn flow_out(&self, v: usize, toward: usize, done: &mut Vec<River>) -> Option<Flow> {
        if self.view.tag[v] == VertexTag::OmegaBoundary {
            return Some(Flow { used: 0.0, worst: 0.0, steps: Vec::new(), source: v });
        }
        let mut flows = self.into_vertex(v, Some(toward), done)?;
        if flows.is_empty() {
            return None; // a dead end with no source
        }
        flows.sort_by(|a, b| a.used.total_cmp(&b.used).then(a.steps.last().map(|s| s.edge).cmp(&b.steps.last().map(|s| s.edge))));
        let mut it = flows.into_iter();
        let mut cont = it.next().unwrap();
        for f in it {
            cont.worst = cont.worst.max(f.worst).max(f.used);
            done.push(River { path: GraphPath::whole(self.view.g(), f.steps, false), source: f.source });
        }
        Some(cont)
    }

    fn sink_at_vertex(&self, v: usize) -> Option<(f64, Vec<River>)> {
        let mut done = Vec::new();
        let flows = self.into_vertex(v, None, &mut done)?;
        let mut worst: f64 = 0.0;
        for f in flows {
            worst = worst.max(f.worst).max(f.used);
            if !f.steps.is_empty() {
                done.push(River { path: GraphPath::whole(self.view.g(), f.steps, false), source: f.source });
            }
        }
        Some((worst, done))
    }

    fn sink_on_edge(&self, e: usize) -> Option<(f64, Vec<River>)> {
        let g = self.view.g();
        let edge = &g.edges[e];
        let w = edge.length;
        let mut done = Vec::new();
        let a = self.flow_out(edge.tail, e, &mut done)?;
        let b = self.flow_out(edge.head, e, &mut done)?;
        // tail-side river covers [0, t], head-side covers [t, w]
        let t = ((b.used + w - a.used) / 2.0).clamp(0.0, w);
        let worst = a.worst.max(b.worst).max(a.used + t).max(b.used + w - t);
        for (f, from, covered) in [(a, edge.tail, t), (b, edge.head, w - t)] {
            let mut steps = f.steps;
            let mut end = None;
            if covered > 0.0 {
                steps.push(step_from(g, from, e));
                end = Some(t);
            }
            if steps.is_empty() {
                continue;
            }
            let mut path = GraphPath::whole(g, steps, false);
            if let Some(x) = end {
                path.end = x;
                path.total_length -= w - covered;
            }
            done.push(River { path, source: f.source });
        }
        Some((worst, done))
    }
}

/// Twice the smallest achievable longest-river length over all watersheds,
/// with one optimal watershed. Within each piece every river drains to a
/// single sink: the exterior vertex when there is one, otherwise the best
/// vertex or edge point. At a fixed sink, continuing the shortest arriving
/// river at every confluence is optimal. `None` when the condition fails.
pub fn optimal_watershed(n: &Normalized) -> Option<(f64, Watershed)> {
    if !check_forest(n) {
        return None;
    }
    let view = View::new(n);
    let g = view.g();
    let mut t_star: f64 = 0.0;
    let mut rivers = Vec::new();
    for piece in pieces(&view) {
        let mut in_piece = vec![false; g.edges.len()];
        let mut verts = Vec::new();
        for &e in &piece {
            in_piece[e] = true;
            verts.push(g.edges[e].tail);
            verts.push(g.edges[e].head);
        }
        verts.sort_unstable();
        verts.dedup();
        let solver = PieceSolver { view: &view, in_piece };
        let ext: Vec<usize> = verts.iter().copied().filter(|&v| view.exterior(v)).collect();
        let best = if let Some(&x) = ext.first() {
            solver.sink_at_vertex(x)?
        } else {
            let mut best: Option<(f64, Vec<River>)> = None;
            let cands = verts
                .iter()
                .map(|&v| solver.sink_at_vertex(v))
                .chain(piece.iter().map(|&e| solver.sink_on_edge(e)));
            for c in cands.flatten() {
                if best.as_ref().map_or(true, |b| c.0 < b.0 - 1e-15) {
                    best = Some(c);
                }
            }
            best?
        };
        t_star = t_star.max(2.0 * best.0);
        rivers.extend(best.1);
    }
    Some((t_star, Watershed { rivers }))
}

/// `T*`: twice the minimal longest-river length.
pub fn optimal_watershed_time(n: &Normalized) -> Option<f64> {
    optimal_watershed(n).map(|x| x.0)
}

// ------------------------------------------------------ verdict

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Criteria {
    /// Walks avoiding the control set have bounded length.
    pub bounded_length: bool,
    pub cycles_and_exterior_paths: bool,
    pub forest: bool,
    pub periodic_paths: bool,
    pub abp: bool,
    pub watershed: bool,
}

impl Criteria {
    pub fn all_agree(&self) -> bool {
        let v = [self.bounded_length, self.cycles_and_exterior_paths, self.forest, self.periodic_paths, self.abp, self.watershed];
        v.iter().all(|&x| x == v[0])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Violation { violation: Violation },
    Certificates { abp: AbpCertificate, watershed: Watershed },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GgccVerdict {
    pub holds: bool,
    pub criteria: Criteria,
    pub witness: Option<Witness>,
    #[serde(rename = "L")]
    pub ggcc_length: Option<f64>,
    #[serde(rename = "T_star")]
    pub optimal_time: Option<f64>,
}

/// Runs every criterion.
pub fn evaluate(n: &Normalized) -> GgccVerdict {
    let (cyc, violation) = check_cycles_and_exterior_paths(n);
    let forest = check_forest(n);
    let max_steps = 2 * n.graph.edges.len() + 2;
    let periodic = periodic_path_search(n, max_steps).is_none();
    let (abp, cert) = check_abp(n);
    let ws = construct_watershed(n);
    let length = ggcc_length(n);
    let criteria = Criteria {
        bounded_length: length.is_some(),
        cycles_and_exterior_paths: cyc,
        forest,
        periodic_paths: periodic,
        abp,
        watershed: ws.is_some(),
    };
    let witness = match (violation, cert, ws) {
        (Some(v), _, _) => Some(Witness::Violation { violation: v }),
        (None, Some(abp), Some(watershed)) => Some(Witness::Certificates { abp, watershed }),
        _ => None,
    };
    GgccVerdict { holds: cyc, criteria, witness, ggcc_length: length, optimal_time: optimal_watershed_time(n) }
}
