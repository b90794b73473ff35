//! Directed, unweighted graphs with stable node labels.
//!
//! A [`DiGraph`] is immutable once built and keeps both successor and
//! predecessor lists sorted, so edge membership is a binary search and
//! ego-subgraph expansion can walk edges in either direction.

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Label and dense index of a node within one graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NodeId {
    pub label: String,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiGraph {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
    edge_count: usize,
}

/// Incremental builder. Indices are assigned in first-seen order; self-loops
/// and duplicate edges are discarded.
#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<(usize, usize)>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, label: &str) -> Result<usize> {
        if label.is_empty() {
            return Err(Error::EmptyLabel);
        }
        if let Some(&i) = self.index.get(label) {
            return Ok(i);
        }
        let i = self.labels.len();
        self.labels.push(label.to_owned());
        self.index.insert(label.to_owned(), i);
        Ok(i)
    }

    pub fn add_edge(&mut self, src: &str, dst: &str) -> Result<()> {
        let s = self.add_node(src)?;
        let d = self.add_node(dst)?;
        if s != d {
            self.edges.push((s, d));
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn build(self) -> DiGraph {
        let n = self.labels.len();
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for &(s, d) in &self.edges {
            out_adj[s].push(d);
        }
        let mut edge_count = 0;
        for (s, succ) in out_adj.iter_mut().enumerate() {
            succ.sort_unstable();
            succ.dedup();
            edge_count += succ.len();
            for &d in succ.iter() {
                in_adj[d].push(s);
            }
        }
        // in_adj is filled in ascending source order, so it is already sorted
        DiGraph {
            labels: self.labels,
            index: self.index,
            out_adj,
            in_adj,
            edge_count,
        }
    }
}

/// Builds a graph from labelled edges.
pub fn build_graph<I, S, T>(edges: I) -> Result<DiGraph>
where
    I: IntoIterator<Item = (S, T)>,
    S: AsRef<str>,
    T: AsRef<str>,
{
    let mut b = GraphBuilder::new();
    let mut any = false;
    for (s, d) in edges {
        b.add_edge(s.as_ref(), d.as_ref())?;
        any = true;
    }
    if !any {
        return Err(Error::EmptyGraph);
    }
    Ok(b.build())
}

impl DiGraph {
    /// A graph with no nodes.
    pub fn empty() -> Self {
        GraphBuilder::new().build()
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn node(&self, i: usize) -> NodeId {
        NodeId {
            label: self.labels[i].clone(),
            index: i,
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.node_count()).map(|i| self.node(i))
    }

    pub fn out_neighbors(&self, i: usize) -> &[usize] {
        &self.out_adj[i]
    }

    pub fn in_neighbors(&self, i: usize) -> &[usize] {
        &self.in_adj[i]
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.out_adj[i].len()
    }

    pub fn in_degree(&self, i: usize) -> usize {
        self.in_adj[i].len()
    }

    pub fn has_edge(&self, src: usize, dst: usize) -> bool {
        self.out_adj[src].binary_search(&dst).is_ok()
    }

    /// Edges as index pairs in (src, dst) ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out_adj
            .iter()
            .enumerate()
            .flat_map(|(s, succ)| succ.iter().map(move |&d| (s, d)))
    }

    pub fn labelled_edges(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.edges().map(|(s, d)| (self.label(s), self.label(d)))
    }

    /// Sorted union of in- and out-neighbours.
    pub fn undirected_neighbors(&self, i: usize) -> Vec<usize> {
        let mut v: Vec<usize> = self.out_adj[i]
            .iter()
            .chain(self.in_adj[i].iter())
            .copied()
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Checks the out/in mirror and edge-count invariants.
    pub fn check_invariants(&self) -> bool {
        let n = self.node_count();
        if self.out_adj.len() != n || self.in_adj.len() != n || self.index.len() != n {
            return false;
        }
        let mut total = 0;
        for i in 0..n {
            let succ = &self.out_adj[i];
            if succ.windows(2).any(|w| w[0] >= w[1]) || succ.contains(&i) {
                return false;
            }
            if self.in_adj[i].windows(2).any(|w| w[0] >= w[1]) {
                return false;
            }
            total += succ.len();
            if succ.iter().any(|&j| self.in_adj[j].binary_search(&i).is_err()) {
                return false;
            }
            if self.in_adj[i].iter().any(|&j| !self.has_edge(j, i)) {
                return false;
            }
            if self.index.get(&self.labels[i]) != Some(&i) {
                return false;
            }
        }
        total == self.edge_count
    }
}

/// Induced subgraph over every node within `hops` undirected steps of
/// `center`. Retained edges keep their direction; node indices in the
/// result follow ascending index order of the source graph.
pub fn khop_ego_subgraph(g: &DiGraph, center: &str, hops: usize) -> Result<DiGraph> {
    if hops == 0 {
        return Err(Error::InvalidArgument("hops must be >= 1".into()));
    }
    let c = g
        .index_of(center)
        .ok_or_else(|| Error::UnknownNode(center.to_owned()))?;
    let mut seen: HashSet<usize> = HashSet::from([c]);
    let mut frontier = vec![c];
    for _ in 0..hops {
        let mut next = Vec::new();
        for &u in &frontier {
            for &v in g.out_adj[u].iter().chain(g.in_adj[u].iter()) {
                if seen.insert(v) {
                    next.push(v);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    let mut members: Vec<usize> = seen.into_iter().collect();
    members.sort_unstable();
    Ok(induced_subgraph(g, &members))
}

/// Induced subgraph over `members` (sorted, unique source indices).
pub fn induced_subgraph(g: &DiGraph, members: &[usize]) -> DiGraph {
    let local: HashMap<usize, usize> = members.iter().enumerate().map(|(l, &o)| (o, l)).collect();
    let n = members.len();
    let labels: Vec<String> = members.iter().map(|&o| g.labels[o].clone()).collect();
    let index = labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
    let mut out_adj = vec![Vec::new(); n];
    let mut in_adj = vec![Vec::new(); n];
    let mut edge_count = 0;
    for (ls, &os) in members.iter().enumerate() {
        for &od in &g.out_adj[os] {
            if let Some(&ld) = local.get(&od) {
                out_adj[ls].push(ld);
                in_adj[ld].push(ls);
                edge_count += 1;
            }
        }
    }
    // members ascending keeps the local index order monotone, so both lists
    // come out sorted
    DiGraph {
        labels,
        index,
        out_adj,
        in_adj,
        edge_count,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub node_count: usize,
    pub edge_count: usize,
    pub min_out_degree: usize,
    pub avg_out_degree: f64,
    pub max_out_degree: usize,
    pub min_in_degree: usize,
    pub avg_in_degree: f64,
    pub max_in_degree: usize,
}

pub fn graph_stats(g: &DiGraph) -> GraphStats {
    let n = g.node_count();
    let outs = (0..n).map(|i| g.out_degree(i));
    let ins = (0..n).map(|i| g.in_degree(i));
    let avg = if n == 0 {
        0.0
    } else {
        g.edge_count() as f64 / n as f64
    };
    GraphStats {
        node_count: n,
        edge_count: g.edge_count(),
        min_out_degree: outs.clone().min().unwrap_or(0),
        avg_out_degree: avg,
        max_out_degree: outs.max().unwrap_or(0),
        min_in_degree: ins.clone().min().unwrap_or(0),
        avg_in_degree: avg,
        max_in_degree: ins.max().unwrap_or(0),
    }
}

/// Node and edge differences between an original graph and its
/// reconstruction, compared by label.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDiff {
    pub added_nodes: usize,
    pub missing_nodes: usize,
    pub added_edges: usize,
    pub missing_edges: usize,
    pub added_node_list: Vec<String>,
    pub missing_node_list: Vec<String>,
    pub added_edge_list: Vec<(String, String)>,
    pub missing_edge_list: Vec<(String, String)>,
}

impl GraphDiff {
    pub fn is_empty(&self) -> bool {
        self.added_nodes == 0
            && self.missing_nodes == 0
            && self.added_edges == 0
            && self.missing_edges == 0
    }
}

fn label_sets(g: &DiGraph) -> (BTreeSet<&str>, BTreeSet<(&str, &str)>) {
    (
        g.labels().iter().map(String::as_str).collect(),
        g.labelled_edges().collect(),
    )
}

/// `reconstructed` is expected to contain only nodes that carry at least one
/// predicted edge, so an original node absent from it counts as missing.
pub fn graph_diff(original: &DiGraph, reconstructed: &DiGraph) -> GraphDiff {
    let (on, oe) = label_sets(original);
    let (rn, re) = label_sets(reconstructed);
    let owned = |s: &&str| (*s).to_owned();
    let owned_pair = |p: &(&str, &str)| (p.0.to_owned(), p.1.to_owned());
    let added_node_list: Vec<String> = rn.difference(&on).map(owned).collect();
    let missing_node_list: Vec<String> = on.difference(&rn).map(owned).collect();
    let added_edge_list: Vec<(String, String)> = re.difference(&oe).map(owned_pair).collect();
    let missing_edge_list: Vec<(String, String)> = oe.difference(&re).map(owned_pair).collect();
    GraphDiff {
        added_nodes: added_node_list.len(),
        missing_nodes: missing_node_list.len(),
        added_edges: added_edge_list.len(),
        missing_edges: missing_edge_list.len(),
        added_node_list,
        missing_node_list,
        added_edge_list,
        missing_edge_list,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SyntheticKind {
    Path,
    Cycle,
    Star,
    /// Directed G(n, p) with every ordered pair included independently.
    Erdos { p: f64 },
    /// Directed preferential attachment: node t links to `m` earlier nodes
    /// chosen proportionally to (in-degree + 1).
    ScaleFree { m: usize },
}

impl SyntheticKind {
    /// Parses the short names used on the command line with default
    /// parameters (`erdos` uses p = 4/n, `scale_free` uses m = 1).
    pub fn parse(name: &str, n: usize) -> Result<Self> {
        Ok(match name {
            "path" => SyntheticKind::Path,
            "cycle" => SyntheticKind::Cycle,
            "star" => SyntheticKind::Star,
            "erdos" => SyntheticKind::Erdos {
                p: (4.0 / n.max(1) as f64).min(1.0),
            },
            "scale_free" => SyntheticKind::ScaleFree { m: 1 },
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown synthetic kind {other:?}"
                )))
            }
        })
    }
}

/// Deterministic synthetic fixtures with labels "n0".."n{n-1}".
pub fn gen_synthetic(kind: SyntheticKind, n: usize, seed: u64) -> Result<DiGraph> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    let mut b = GraphBuilder::new();
    let labels: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    for l in &labels {
        b.add_node(l)?;
    }
    let mut rng = seed::rng(seed);
    match kind {
        SyntheticKind::Path => {
            for i in 1..n {
                b.add_edge(&labels[i - 1], &labels[i])?;
            }
        }
        SyntheticKind::Cycle => {
            for i in 0..n {
                b.add_edge(&labels[i], &labels[(i + 1) % n])?;
            }
        }
        SyntheticKind::Star => {
            for leaf in labels.iter().skip(1) {
                b.add_edge(&labels[0], leaf)?;
            }
        }
        SyntheticKind::Erdos { p } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("p = {p} outside [0, 1]")));
            }
            for i in 0..n {
                for j in 0..n {
                    if i != j && rng.random::<f64>() < p {
                        b.add_edge(&labels[i], &labels[j])?;
                    }
                }
            }
        }
        SyntheticKind::ScaleFree { m } => {
            if m == 0 {
                return Err(Error::InvalidArgument("m must be >= 1".into()));
            }
            // each node appears once for itself plus once per in-edge
            let mut urn: Vec<usize> = Vec::with_capacity(n * (m + 1));
            urn.push(0);
            for t in 1..n {
                let mut targets = BTreeSet::new();
                let want = m.min(t);
                while targets.len() < want {
                    targets.insert(urn[rng.random_range(0..urn.len())]);
                }
                for &d in &targets {
                    b.add_edge(&labels[t], &labels[d])?;
                    urn.push(d);
                }
                urn.push(t);
            }
        }
    }
    Ok(b.build())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path4() -> DiGraph {
        build_graph([("a", "b"), ("b", "c"), ("c", "d")]).unwrap()
    }

    #[test]
    fn build_assigns_first_seen_indices() {
        let g = build_graph([("a", "b"), ("b", "c")]).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.labels(), ["a", "b", "c"]);
        assert_eq!(g.out_neighbors(0), [1]);
        assert!(g.check_invariants());
    }

    #[test]
    fn build_dedups_and_drops_self_loops() {
        let g = build_graph([("a", "b"), ("a", "b")]).unwrap();
        assert_eq!(g.edge_count(), 1);
        let g = build_graph([("z", "z")]).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (1, 0));
    }

    #[test]
    fn build_rejects_empty_input() {
        let none: [(&str, &str); 0] = [];
        assert!(matches!(build_graph(none), Err(Error::EmptyGraph)));
        assert!(matches!(build_graph([("", "b")]), Err(Error::EmptyLabel)));
    }

    #[test]
    fn four_cycle_is_regular() {
        let g = build_graph([("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")]).unwrap();
        for i in 0..4 {
            assert_eq!((g.out_degree(i), g.in_degree(i)), (1, 1));
        }
        let s = graph_stats(&g);
        assert_eq!((s.node_count, s.edge_count), (4, 4));
    }

    #[test]
    fn stats_examples() {
        let g = build_graph([("a", "b")]).unwrap();
        assert_eq!(graph_stats(&g).avg_out_degree, 0.5);
        let star = gen_synthetic(SyntheticKind::Star, 6, 0).unwrap();
        assert_eq!(graph_stats(&star).max_out_degree, 5);
    }

    #[test]
    fn khop_on_path() {
        let g = path4();
        let s = khop_ego_subgraph(&g, "b", 1).unwrap();
        assert_eq!(s.labels(), ["a", "b", "c"]);
        let e: Vec<_> = s.labelled_edges().collect();
        assert_eq!(e, [("a", "b"), ("b", "c")]);
        let s = khop_ego_subgraph(&g, "a", 3).unwrap();
        assert_eq!(s, g);
    }

    #[test]
    fn khop_isolated_and_errors() {
        let mut b = GraphBuilder::new();
        b.add_edge("a", "b").unwrap();
        b.add_node("z").unwrap();
        let g = b.build();
        let s = khop_ego_subgraph(&g, "z", 2).unwrap();
        assert_eq!(s.labels(), ["z"]);
        assert_eq!(s.edge_count(), 0);
        assert!(matches!(khop_ego_subgraph(&g, "q", 1), Err(Error::UnknownNode(_))));
        assert!(khop_ego_subgraph(&g, "a", 0).is_err());
    }

    #[test]
    fn khop_keeps_induced_edges() {
        // a-b and a-c are in the 1-hop ball of a, so the b->c edge is retained
        let g = build_graph([("a", "b"), ("c", "a"), ("b", "c"), ("c", "d")]).unwrap();
        let s = khop_ego_subgraph(&g, "a", 1).unwrap();
        assert_eq!(s.node_count(), 3);
        assert_eq!(s.edge_count(), 3);
        assert!(s.check_invariants());
    }

    #[test]
    fn diff_examples() {
        let o = build_graph([("a", "b"), ("b", "c")]).unwrap();
        let r = build_graph([("a", "b"), ("a", "c")]).unwrap();
        let d = graph_diff(&o, &r);
        assert_eq!(d.added_edge_list, [("a".to_string(), "c".to_string())]);
        assert_eq!(d.missing_edge_list, [("b".to_string(), "c".to_string())]);
        assert_eq!((d.added_edges, d.missing_edges), (1, 1));
        assert!(graph_diff(&o, &o).is_empty());

        let o = build_graph([("a", "b")]).unwrap();
        let d = graph_diff(&o, &DiGraph::empty());
        assert_eq!((d.missing_edges, d.missing_nodes), (1, 2));
    }

    #[test]
    fn synthetic_fixtures() {
        let c = gen_synthetic(SyntheticKind::Cycle, 5, 3).unwrap();
        assert_eq!((c.node_count(), c.edge_count()), (5, 5));
        let s = gen_synthetic(SyntheticKind::Star, 6, 3).unwrap();
        assert_eq!((s.node_count(), s.edge_count()), (6, 5));
        let e1 = gen_synthetic(SyntheticKind::parse("erdos", 20).unwrap(), 20, 7).unwrap();
        let e2 = gen_synthetic(SyntheticKind::parse("erdos", 20).unwrap(), 20, 7).unwrap();
        assert_eq!(e1, e2);
        let sf = gen_synthetic(SyntheticKind::ScaleFree { m: 2 }, 50, 1).unwrap();
        assert_eq!(sf.edge_count(), 1 + 2 * 48);
        assert!(sf.check_invariants());
        assert!(gen_synthetic(SyntheticKind::Path, 0, 0).is_err());
    }
}
