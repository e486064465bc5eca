//! Signal flow graphs with frequency-dependent edge gains.
//!
//! A graph encodes the node-balance equations `x_v = Σ_u gain(u→v)·x_u` of a
//! linear network. Transfer functions between any pair of nodes are evaluated
//! with Mason's gain rule ([`SignalFlowGraph::mason_gain`]); a direct sparse
//! linear solve of the same equations ([`SignalFlowGraph::linear_solve_gain`])
//! is kept alongside as an independent cross-check.
//!
//! Graphs are immutable once built. Loop structure is computed at build time
//! because it does not depend on frequency.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Edge gain as a function of angular frequency (rad/s).
pub type GainFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Source,
    Internal,
    Sink,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SfgNode {
    pub id: String,
    pub kind: NodeKind,
}

#[derive(Clone)]
pub struct SfgEdge {
    pub from: String,
    pub to: String,
    pub label: String,
    gain: GainFn,
}

impl SfgEdge {
    pub fn gain(&self, omega: f64) -> Complex64 {
        (self.gain)(omega)
    }
}

impl fmt::Debug for SfgEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SfgEdge")
            .field("from", &self.from)
            .field("to", &self.to)
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

/// A simple cycle, rotated so that it starts at its smallest node id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Loop {
    pub nodes: Vec<String>,
}

impl Loop {
    pub fn touches(&self, other: &Loop) -> bool {
        self.nodes.iter().any(|n| other.nodes.contains(n))
    }
}

#[derive(Default)]
pub struct SfgBuilder {
    nodes: Vec<SfgNode>,
    edges: Vec<SfgEdge>,
}

impl SfgBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(mut self, id: impl Into<String>, kind: NodeKind) -> Self {
        self.nodes.push(SfgNode {
            id: id.into(),
            kind,
        });
        self
    }

    pub fn edge<F>(
        mut self,
        from: impl Into<String>,
        to: impl Into<String>,
        label: impl Into<String>,
        gain: F,
    ) -> Self
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        self.edges.push(SfgEdge {
            from: from.into(),
            to: to.into(),
            label: label.into(),
            gain: Arc::new(gain),
        });
        self
    }

    /// Frequency-independent edge.
    pub fn constant_edge(
        self,
        from: impl Into<String>,
        to: impl Into<String>,
        label: impl Into<String>,
        gain: Complex64,
    ) -> Self {
        self.edge(from, to, label, move |_| gain)
    }

    pub fn build(self) -> Result<SignalFlowGraph> {
        let mut nodes = self.nodes;
        nodes.sort_by(|a, b| a.id.cmp(&b.id));
        for pair in nodes.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(Error::DuplicateNode(pair[0].id.clone()));
            }
        }
        let index: HashMap<String, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.clone(), i))
            .collect();

        let mut edges = self.edges;
        let mut ends = Vec::with_capacity(edges.len());
        for e in &edges {
            let invalid = |reason| Error::InvalidEdge {
                from: e.from.clone(),
                to: e.to.clone(),
                reason,
            };
            let u = *index
                .get(&e.from)
                .ok_or_else(|| invalid("unknown tail node"))?;
            let v = *index
                .get(&e.to)
                .ok_or_else(|| invalid("unknown head node"))?;
            if nodes[v].kind == NodeKind::Source {
                return Err(invalid("a source cannot have incoming edges"));
            }
            if nodes[u].kind == NodeKind::Sink {
                return Err(invalid("a sink cannot have outgoing edges"));
            }
            ends.push((u, v));
        }
        let mut order: Vec<usize> = (0..edges.len()).collect();
        order.sort_by_key(|&i| ends[i]);
        for w in order.windows(2) {
            if ends[w[0]] == ends[w[1]] {
                let e = &edges[w[0]];
                return Err(Error::InvalidEdge {
                    from: e.from.clone(),
                    to: e.to.clone(),
                    reason: "more than one edge for this ordered pair",
                });
            }
        }
        let mut slots: Vec<Option<SfgEdge>> = edges.drain(..).map(Some).collect();
        let edges: Vec<SfgEdge> = order.iter().map(|&i| slots[i].take().unwrap()).collect();
        let ends: Vec<(usize, usize)> = order.iter().map(|&i| ends[i]).collect();

        let mut succ = vec![Vec::new(); nodes.len()];
        for (k, &(u, v)) in ends.iter().enumerate() {
            succ[u].push((v, k));
        }

        let mut g = SignalFlowGraph {
            nodes,
            index,
            edges,
            ends,
            succ,
            loops: Vec::new(),
        };
        g.loops = g.find_loops();
        if g.loops.len() > MAX_LOOPS {
            return Err(Error::TooManyLoops(g.loops.len()));
        }
        Ok(g)
    }
}

const MAX_LOOPS: usize = 1 << 16;

/// Loop stored by node indices plus the edges it traverses.
#[derive(Debug, Clone)]
struct LoopIx {
    nodes: Vec<usize>,
    edges: Vec<usize>,
    mask: NodeSet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct NodeSet(Vec<u64>);

impl NodeSet {
    fn new(n: usize) -> Self {
        NodeSet(vec![0; n.div_ceil(64).max(1)])
    }
    fn from_nodes(n: usize, nodes: &[usize]) -> Self {
        let mut s = Self::new(n);
        for &i in nodes {
            s.0[i / 64] |= 1 << (i % 64);
        }
        s
    }
    fn intersects(&self, other: &NodeSet) -> bool {
        self.0.iter().zip(&other.0).any(|(a, b)| a & b != 0)
    }
    fn union(&self, other: &NodeSet) -> NodeSet {
        NodeSet(self.0.iter().zip(&other.0).map(|(a, b)| a | b).collect())
    }
}

pub struct SignalFlowGraph {
    nodes: Vec<SfgNode>,
    index: HashMap<String, usize>,
    edges: Vec<SfgEdge>,
    ends: Vec<(usize, usize)>,
    succ: Vec<Vec<(usize, usize)>>,
    loops: Vec<LoopIx>,
}

/// Per-source gains into one destination, plus the summed power gain.
#[derive(Debug, Clone)]
pub struct SourceGains {
    pub gains: BTreeMap<String, Complex64>,
    pub total_power: f64,
}

impl SignalFlowGraph {
    pub fn builder() -> SfgBuilder {
        SfgBuilder::new()
    }

    pub fn nodes(&self) -> &[SfgNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[SfgEdge] {
        &self.edges
    }

    pub fn node_index(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownNode(id.to_string()))
    }

    pub fn sources(&self) -> impl Iterator<Item = &SfgNode> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Source)
    }

    /// Every simple path from `src` to `dst`, in lexicographic order of the
    /// node-id sequences.
    pub fn enumerate_paths(&self, src: &str, dst: &str) -> Result<Vec<Vec<String>>> {
        let s = self.node_index(src)?;
        let d = self.node_index(dst)?;
        Ok(self
            .paths_ix(s, d)
            .into_iter()
            .map(|(nodes, _)| self.names(&nodes))
            .collect())
    }

    /// Every simple cycle exactly once, each starting at its smallest node id.
    pub fn enumerate_loops(&self) -> Vec<Loop> {
        self.loops
            .iter()
            .map(|l| Loop {
                nodes: self.names(&l.nodes),
            })
            .collect()
    }

    /// Graph determinant `1 − ΣL + Σ L_iL_j − …` over non-touching loop sets.
    pub fn graph_determinant(&self, omega: f64) -> Result<Complex64> {
        let gains = self.edge_gains(omega)?;
        let lg = self.loop_gains(&gains);
        let all: Vec<usize> = (0..self.loops.len()).collect();
        Ok(self.determinant(&lg, &all))
    }

    /// Transfer function from an injection at `src` to the value at `dst`.
    pub fn mason_gain(&self, src: &str, dst: &str, omega: f64) -> Result<Complex64> {
        let s = self.node_index(src)?;
        let d = self.node_index(dst)?;
        let gains = self.edge_gains(omega)?;
        self.mason_ix(s, d, omega, &gains)
    }

    /// Same transfer function as [`Self::mason_gain`], obtained by solving
    /// `(I − Aᵀ)x = e_src` with an LU factorization.
    pub fn linear_solve_gain(&self, src: &str, dst: &str, omega: f64) -> Result<Complex64> {
        let s = self.node_index(src)?;
        let d = self.node_index(dst)?;
        let gains = self.edge_gains(omega)?;
        let n = self.nodes.len();
        let mut m = DMatrix::<Complex64>::identity(n, n);
        for (k, &(u, v)) in self.ends.iter().enumerate() {
            m[(v, u)] -= gains[k];
        }
        let mut rhs = DVector::<Complex64>::zeros(n);
        rhs[s] = Complex64::new(1.0, 0.0);
        let x = m.lu().solve(&rhs).ok_or(Error::Singular { omega })?;
        let value = x[d];
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::Singular { omega });
        }
        Ok(value)
    }

    /// Mason gain from every source node into `dst`.
    pub fn all_source_gains(&self, dst: &str, omega: f64) -> Result<SourceGains> {
        let d = self.node_index(dst)?;
        let gains = self.edge_gains(omega)?;
        let mut out = BTreeMap::new();
        let mut total = 0.0;
        for (i, node) in self.nodes.iter().enumerate() {
            if node.kind == NodeKind::Source {
                let g = self.mason_ix(i, d, omega, &gains)?;
                total += g.norm_sqr();
                out.insert(node.id.clone(), g);
            }
        }
        Ok(SourceGains {
            gains: out,
            total_power: total,
        })
    }

    /// Plain-text adjacency listing, one `from -> to : label` per line.
    pub fn adjacency_listing(&self) -> String {
        let mut s = String::new();
        for e in &self.edges {
            s.push_str(&format!("{} -> {} : {}\n", e.from, e.to, e.label));
        }
        s
    }

    fn names(&self, ix: &[usize]) -> Vec<String> {
        ix.iter().map(|&i| self.nodes[i].id.clone()).collect()
    }

    fn edge_gains(&self, omega: f64) -> Result<Vec<Complex64>> {
        self.edges
            .iter()
            .map(|e| {
                let g = e.gain(omega);
                if g.re.is_finite() && g.im.is_finite() {
                    Ok(g)
                } else {
                    Err(Error::EdgeGain {
                        from: e.from.clone(),
                        to: e.to.clone(),
                        omega,
                    })
                }
            })
            .collect()
    }

    fn loop_gains(&self, gains: &[Complex64]) -> Vec<Complex64> {
        self.loops
            .iter()
            .map(|l| l.edges.iter().map(|&k| gains[k]).product())
            .collect()
    }

    fn mason_ix(&self, s: usize, d: usize, omega: f64, gains: &[Complex64]) -> Result<Complex64> {
        let lg = self.loop_gains(gains);
        let all: Vec<usize> = (0..self.loops.len()).collect();
        let delta = self.determinant(&lg, &all);
        let scale = 1.0 + lg.iter().map(|l| l.norm()).sum::<f64>();
        if delta.norm() < 1e-14 * scale {
            return Err(Error::Singular { omega });
        }
        let mut numer = Complex64::new(0.0, 0.0);
        for (nodes, edges) in self.paths_ix(s, d) {
            let path_gain: Complex64 = edges.iter().map(|&k| gains[k]).product();
            let on_path = NodeSet::from_nodes(self.nodes.len(), &nodes);
            let free: Vec<usize> = (0..self.loops.len())
                .filter(|&i| !self.loops[i].mask.intersects(&on_path))
                .collect();
            numer += path_gain * self.determinant(&lg, &free);
        }
        Ok(numer / delta)
    }

    /// Inclusion–exclusion over sets of mutually non-touching loops drawn
    /// from `allowed` (ascending loop indices).
    fn determinant(&self, loop_gains: &[Complex64], allowed: &[usize]) -> Complex64 {
        fn expand(
            g: &SignalFlowGraph,
            gains: &[Complex64],
            allowed: &[usize],
            used: &NodeSet,
        ) -> Complex64 {
            let mut total = Complex64::new(1.0, 0.0);
            for (pos, &i) in allowed.iter().enumerate() {
                let l = &g.loops[i];
                if l.mask.intersects(used) {
                    continue;
                }
                // only loops after i, so each set is visited once
                total -= gains[i] * expand(g, gains, &allowed[pos + 1..], &used.union(&l.mask));
            }
            total
        }
        expand(self, loop_gains, allowed, &NodeSet::new(self.nodes.len()))
    }

    fn paths_ix(&self, s: usize, d: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
        let mut out = Vec::new();
        let mut visited = vec![false; self.nodes.len()];
        let mut nodes = vec![s];
        let mut edges = Vec::new();
        visited[s] = true;
        self.dfs_paths(s, d, &mut visited, &mut nodes, &mut edges, &mut out);
        out
    }

    fn dfs_paths(
        &self,
        at: usize,
        d: usize,
        visited: &mut [bool],
        nodes: &mut Vec<usize>,
        edges: &mut Vec<usize>,
        out: &mut Vec<(Vec<usize>, Vec<usize>)>,
    ) {
        if at == d {
            out.push((nodes.clone(), edges.clone()));
            return;
        }
        // successors are stored in node-index order, which is id order
        for &(v, k) in &self.succ[at] {
            if visited[v] {
                continue;
            }
            visited[v] = true;
            nodes.push(v);
            edges.push(k);
            self.dfs_paths(v, d, visited, nodes, edges, out);
            nodes.pop();
            edges.pop();
            visited[v] = false;
        }
    }

    fn find_loops(&self) -> Vec<LoopIx> {
        let n = self.nodes.len();
        let mut loops = Vec::new();
        for start in 0..n {
            let mut nodes = vec![start];
            let mut edges = Vec::new();
            let mut visited = vec![false; n];
            visited[start] = true;
            self.dfs_loops(
                start,
                start,
                &mut visited,
                &mut nodes,
                &mut edges,
                &mut loops,
            );
        }
        loops
    }

    fn dfs_loops(
        &self,
        start: usize,
        at: usize,
        visited: &mut [bool],
        nodes: &mut Vec<usize>,
        edges: &mut Vec<usize>,
        out: &mut Vec<LoopIx>,
    ) {
        for &(v, k) in &self.succ[at] {
            if v == start {
                let mut e = edges.clone();
                e.push(k);
                out.push(LoopIx {
                    mask: NodeSet::from_nodes(self.nodes.len(), nodes),
                    nodes: nodes.clone(),
                    edges: e,
                });
            } else if v > start && !visited[v] {
                visited[v] = true;
                nodes.push(v);
                edges.push(k);
                self.dfs_loops(start, v, visited, nodes, edges, out);
                nodes.pop();
                edges.pop();
                visited[v] = false;
            }
        }
    }
}

impl fmt::Debug for SignalFlowGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SignalFlowGraph")
            .field("nodes", &self.nodes)
            .field("edges", &self.edges)
            .field("loops", &self.loops.len())
            .finish()
    }
}
