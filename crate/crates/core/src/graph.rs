//! Undirected multigraph with multiplicity-weighted adjacency, BFS/diameter
//! traversals, and exact random-walk steps.
//!
//! Parallel edges and self-loops are first-class: the permutation-based
//! expander generators emit them, and the spectral certificates are stated for
//! the multigraph they emit. A self-loop contributes 2 to its endpoint's
//! degree (adjacency diagonal entry 2 per loop), keeping row sums equal to
//! degrees.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use thiserror::Error;

/// Dense node index in `0..n`.
pub type NodeId = usize;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    EmptyGraph,
    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: NodeId, n: usize },
    #[error("edge multiplicity must be at least 1")]
    ZeroMultiplicity,
    #[error("graph has an isolated node ({node}); random walk is undefined")]
    IsolatedNode { node: NodeId },
    #[error("walk distribution has {got} entries, graph has {want} nodes")]
    DistributionLength { got: usize, want: usize },
    #[error("invalid distribution: {reason}")]
    InvalidDistribution { reason: String },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Undirected multigraph in compressed-adjacency form.
///
/// Neighbor lists are sorted by node id and carry multiplicities. A self-loop
/// is stored once in its endpoint's list; its multiplicity counts loops, each
/// of which adds 2 to the degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiGraph {
    n: usize,
    adj: Vec<Vec<(NodeId, u32)>>,
    degrees: Vec<usize>,
    total_edge_endpoints: usize,
}

impl MultiGraph {
    /// Build from an edge list; duplicate `(u, v)` entries accumulate
    /// multiplicity, and orientation is ignored.
    pub fn from_edge_list(n: usize, edges: &[(NodeId, NodeId, u32)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::EmptyGraph);
        }
        let mut acc: BTreeMap<(NodeId, NodeId), u64> = BTreeMap::new();
        for &(u, v, mult) in edges {
            if u >= n {
                return Err(GraphError::NodeOutOfRange { node: u, n });
            }
            if v >= n {
                return Err(GraphError::NodeOutOfRange { node: v, n });
            }
            if mult == 0 {
                return Err(GraphError::ZeroMultiplicity);
            }
            let key = (u.min(v), u.max(v));
            *acc.entry(key).or_insert(0) += mult as u64;
        }
        let mut adj: Vec<Vec<(NodeId, u32)>> = vec![Vec::new(); n];
        for (&(u, v), &mult) in &acc {
            let mult = u32::try_from(mult).expect("edge multiplicity overflow");
            adj[u].push((v, mult));
            if u != v {
                adj[v].push((u, mult));
            }
        }
        for list in &mut adj {
            list.sort_unstable_by_key(|&(v, _)| v);
        }
        let mut degrees = vec![0usize; n];
        for (u, list) in adj.iter().enumerate() {
            for &(v, mult) in list {
                degrees[u] += if v == u { 2 * mult as usize } else { mult as usize };
            }
        }
        let total_edge_endpoints = degrees.iter().sum();
        Ok(MultiGraph { n, adj, degrees, total_edge_endpoints })
    }

    /// Cycle graph C_n.
    pub fn cycle(n: usize) -> Self {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1)).collect();
        MultiGraph::from_edge_list(n, &edges).expect("cycle construction")
    }

    /// Complete graph K_n.
    pub fn complete(n: usize) -> Self {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v, 1));
            }
        }
        MultiGraph::from_edge_list(n, &edges).expect("complete construction")
    }

    /// Path graph P_n.
    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (0..n.saturating_sub(1)).map(|i| (i, i + 1, 1)).collect();
        MultiGraph::from_edge_list(n, &edges).expect("path construction")
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Sum of degrees over all nodes (each loop counts 2).
    pub fn total_edge_endpoints(&self) -> usize {
        self.total_edge_endpoints
    }

    /// Multiplicity-weighted degree; a self-loop contributes 2.
    ///
    /// Panics if `v` is out of range.
    pub fn degree(&self, v: NodeId) -> usize {
        assert!(v < self.n, "node {v} out of range for graph with {} nodes", self.n);
        self.degrees[v]
    }

    /// Sorted neighbor list of `v` with multiplicities (self-loop listed once).
    pub fn neighbors(&self, v: NodeId) -> &[(NodeId, u32)] {
        assert!(v < self.n, "node {v} out of range for graph with {} nodes", self.n);
        &self.adj[v]
    }

    pub fn multiplicity(&self, u: NodeId, v: NodeId) -> u32 {
        assert!(u < self.n && v < self.n);
        match self.adj[u].binary_search_by_key(&v, |&(w, _)| w) {
            Ok(i) => self.adj[u][i].1,
            Err(_) => 0,
        }
    }

    /// Undirected edges as `(u, v, mult)` with `u <= v`, sorted.
    pub fn edges(&self) -> Vec<(NodeId, NodeId, u32)> {
        let mut out = Vec::new();
        for (u, list) in self.adj.iter().enumerate() {
            for &(v, mult) in list {
                if v >= u {
                    out.push((u, v, mult));
                }
            }
        }
        out
    }

    /// Common degree if the graph is regular.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.degrees[0];
        if self.degrees.iter().all(|&x| x == d) {
            Some(d)
        } else {
            None
        }
    }

    pub fn has_isolated_node(&self) -> bool {
        self.degrees.iter().any(|&d| d == 0)
    }

    /// Copy with all self-loops removed.
    pub fn without_self_loops(&self) -> MultiGraph {
        let edges: Vec<_> = self.edges().into_iter().filter(|&(u, v, _)| u != v).collect();
        MultiGraph::from_edge_list(self.n, &edges).unwrap_or_else(|_| {
            // All edges were loops; rebuild the empty graph explicitly.
            MultiGraph::from_edge_list(self.n, &[]).expect("empty graph")
        })
    }

    /// Exact hop distances from `source`; `None` marks unreachable nodes.
    ///
    /// Panics if `source` is out of range.
    pub fn bfs_distances(&self, source: NodeId) -> Vec<Option<usize>> {
        assert!(source < self.n, "source {source} out of range");
        let mut dist = vec![None; self.n];
        dist[source] = Some(0);
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &(v, _) in &self.adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.bfs_distances(0).iter().all(|d| d.is_some())
    }

    /// Maximum over all pairs of BFS distance; `None` if disconnected.
    pub fn diameter(&self) -> Option<usize> {
        let mut best = 0;
        for s in 0..self.n {
            for d in self.bfs_distances(s) {
                match d {
                    Some(d) => best = best.max(d),
                    None => return None,
                }
            }
        }
        Some(best)
    }
}

/// Probability distribution over the nodes of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkDistribution {
    probs: Vec<f64>,
}

impl WalkDistribution {
    const SUM_TOL: f64 = 1e-12;

    pub fn new(probs: Vec<f64>) -> Result<Self, GraphError> {
        if probs.iter().any(|&p| !(p >= 0.0)) {
            return Err(GraphError::InvalidDistribution {
                reason: "negative or non-finite entry".into(),
            });
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > Self::SUM_TOL {
            return Err(GraphError::InvalidDistribution {
                reason: format!("entries sum to {sum}, expected 1"),
            });
        }
        Ok(WalkDistribution { probs })
    }

    pub fn point_mass(n: usize, v: NodeId) -> Self {
        assert!(v < n);
        let mut probs = vec![0.0; n];
        probs[v] = 1.0;
        WalkDistribution { probs }
    }

    pub fn uniform(n: usize) -> Self {
        WalkDistribution { probs: vec![1.0 / n as f64; n] }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn l1_distance_to_uniform(&self) -> f64 {
        let u = 1.0 / self.probs.len() as f64;
        self.probs.iter().map(|p| (p - u).abs()).sum()
    }
}

/// One exact step of the multiplicity-weighted random walk:
/// `out(v) = sum_u mult(u,v) * dist(u) / degree(u)` (for regular graphs this
/// is the usual `D^{-1} A` recurrence). Mass is conserved exactly up to
/// rounding.
pub fn walk_step(g: &MultiGraph, dist: &WalkDistribution) -> Result<WalkDistribution, GraphError> {
    if dist.probs.len() != g.n {
        return Err(GraphError::DistributionLength { got: dist.probs.len(), want: g.n });
    }
    if let Some(node) = g.degrees.iter().position(|&d| d == 0) {
        return Err(GraphError::IsolatedNode { node });
    }
    let mut out = vec![0.0; g.n];
    for u in 0..g.n {
        let pu = dist.probs[u];
        if pu == 0.0 {
            continue;
        }
        let inv_deg = 1.0 / g.degrees[u] as f64;
        for &(v, mult) in &g.adj[u] {
            if v == u {
                out[u] += pu * (2 * mult) as f64 * inv_deg;
            } else {
                out[v] += pu * mult as f64 * inv_deg;
            }
        }
    }
    Ok(WalkDistribution { probs: out })
}

/// Read the edge-list text format: first line `n m`, then `m` lines `u v mult`
/// (whitespace-separated decimal integers).
pub fn read_edge_list<R: BufRead>(reader: R) -> Result<MultiGraph, GraphError> {
    let mut lines = reader.lines().enumerate();
    let (n, m) = loop {
        let (idx, line) = lines
            .next()
            .ok_or(GraphError::Parse { line: 1, msg: "missing header line `n m`".into() })?;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let n: usize = parse_field(&mut it, idx + 1, "n")?;
        let m: usize = parse_field(&mut it, idx + 1, "m")?;
        break (n, m);
    };
    let mut edges = Vec::with_capacity(m);
    let mut read = 0;
    for (idx, line) in lines {
        if read == m {
            break;
        }
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let u: usize = parse_field(&mut it, idx + 1, "u")?;
        let v: usize = parse_field(&mut it, idx + 1, "v")?;
        let mult: u32 = parse_field(&mut it, idx + 1, "mult")?;
        edges.push((u, v, mult));
        read += 1;
    }
    if read != m {
        return Err(GraphError::Parse {
            line: read + 1,
            msg: format!("expected {m} edge lines, found {read}"),
        });
    }
    MultiGraph::from_edge_list(n, &edges)
}

fn parse_field<'a, T: std::str::FromStr>(
    it: &mut impl Iterator<Item = &'a str>,
    line: usize,
    name: &str,
) -> Result<T, GraphError> {
    let tok = it
        .next()
        .ok_or_else(|| GraphError::Parse { line, msg: format!("missing field `{name}`") })?;
    tok.parse().map_err(|_| GraphError::Parse {
        line,
        msg: format!("field `{name}` is not a valid integer: `{tok}`"),
    })
}

/// Write the edge-list text format (canonical `u <= v` order).
pub fn write_edge_list<W: Write>(g: &MultiGraph, mut w: W) -> Result<(), GraphError> {
    let edges = g.edges();
    writeln!(w, "{} {}", g.node_count(), edges.len())?;
    for (u, v, mult) in edges {
        writeln!(w, "{u} {v} {mult}")?;
    }
    Ok(())
}

pub fn read_edge_list_path(path: &Path) -> Result<MultiGraph, GraphError> {
    let file = std::fs::File::open(path)?;
    read_edge_list(std::io::BufReader::new(file))
}

pub fn write_edge_list_path(g: &MultiGraph, path: &Path) -> Result<(), GraphError> {
    let file = std::fs::File::create(path)?;
    write_edge_list(g, std::io::BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge_degrees() {
        let g = MultiGraph::from_edge_list(2, &[(0, 1, 1)]).unwrap();
        assert_eq!(g.degree(0), 1);
        assert_eq!(g.degree(1), 1);
        assert_eq!(g.total_edge_endpoints(), 2);
    }

    #[test]
    fn cycle_is_two_regular() {
        let g = MultiGraph::from_edge_list(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)]).unwrap();
        assert_eq!(g.regular_degree(), Some(2));
        assert_eq!(g, MultiGraph::cycle(4));
    }

    #[test]
    fn duplicate_entries_accumulate_multiplicity() {
        // Oracle: accumulate-and-count over the raw list.
        let raw = [(0usize, 1usize, 1u32), (0, 1, 1)];
        let mut expected = 0u32;
        for &(u, v, m) in &raw {
            if (u.min(v), u.max(v)) == (0, 1) {
                expected += m;
            }
        }
        let g = MultiGraph::from_edge_list(3, &raw).unwrap();
        assert_eq!(g.multiplicity(0, 1), expected);
        assert_eq!(expected, 2);
        assert_eq!(g.degree(0), 2);
    }

    #[test]
    fn self_loop_contributes_two() {
        let g = MultiGraph::from_edge_list(2, &[(0, 0, 1), (0, 1, 1)]).unwrap();
        assert_eq!(g.degree(0), 3);
        assert_eq!(g.degree(1), 1);
        let stripped = g.without_self_loops();
        assert_eq!(stripped.degree(0), 1);
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(MultiGraph::from_edge_list(0, &[]), Err(GraphError::EmptyGraph)));
        assert!(matches!(
            MultiGraph::from_edge_list(2, &[(0, 2, 1)]),
            Err(GraphError::NodeOutOfRange { node: 2, .. })
        ));
        assert!(matches!(
            MultiGraph::from_edge_list(2, &[(0, 1, 0)]),
            Err(GraphError::ZeroMultiplicity)
        ));
    }

    #[test]
    fn bfs_on_known_graphs() {
        let c4 = MultiGraph::cycle(4);
        assert_eq!(c4.bfs_distances(0), vec![Some(0), Some(1), Some(2), Some(1)]);
        let k4 = MultiGraph::complete(4);
        assert_eq!(k4.bfs_distances(0), vec![Some(0), Some(1), Some(1), Some(1)]);
        let two_edges = MultiGraph::from_edge_list(4, &[(0, 1, 1), (2, 3, 1)]).unwrap();
        let d = two_edges.bfs_distances(0);
        assert_eq!(d[1], Some(1));
        assert_eq!(d[2], None);
        assert_eq!(d[3], None);
    }

    #[test]
    fn diameters() {
        assert_eq!(MultiGraph::cycle(8).diameter(), Some(4));
        assert_eq!(MultiGraph::path(5).diameter(), Some(4));
        assert_eq!(petersen().diameter(), Some(2));
        let disconnected = MultiGraph::from_edge_list(4, &[(0, 1, 1), (2, 3, 1)]).unwrap();
        assert_eq!(disconnected.diameter(), None);
    }

    fn petersen() -> MultiGraph {
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push((i, (i + 1) % 5, 1)); // outer cycle
            edges.push((i, i + 5, 1)); // spokes
            edges.push((5 + i, 5 + (i + 2) % 5, 1)); // inner pentagram
        }
        MultiGraph::from_edge_list(10, &edges).unwrap()
    }

    // Oracle for BFS on small graphs: Floyd-Warshall all-pairs distances.
    fn floyd_warshall(g: &MultiGraph) -> Vec<Vec<Option<usize>>> {
        let n = g.node_count();
        let inf = usize::MAX / 2;
        let mut d = vec![vec![inf; n]; n];
        for v in 0..n {
            d[v][v] = 0;
        }
        for (u, v, _) in g.edges() {
            if u != v {
                d[u][v] = 1;
                d[v][u] = 1;
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
                }
            }
        }
        d.into_iter()
            .map(|row| row.into_iter().map(|x| if x >= inf { None } else { Some(x) }).collect())
            .collect()
    }

    #[test]
    fn walk_step_on_cycles_and_cliques() {
        let c4 = MultiGraph::cycle(4);
        let step = walk_step(&c4, &WalkDistribution::point_mass(4, 0)).unwrap();
        assert_eq!(step.probs(), &[0.0, 0.5, 0.0, 0.5]);
        let step2 = walk_step(&c4, &WalkDistribution::new(vec![0.0, 0.5, 0.0, 0.5]).unwrap()).unwrap();
        assert_eq!(step2.probs(), &[0.5, 0.0, 0.5, 0.0]);

        // Matrix-vector oracle with explicit D^{-1} A on the regular C4.
        let dist = WalkDistribution::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let mut expect = vec![0.0; 4];
        for v in 0..4 {
            for u in 0..4 {
                expect[v] += c4.multiplicity(u, v) as f64 / 2.0 * dist.probs()[u];
            }
        }
        let got = walk_step(&c4, &dist).unwrap();
        for (a, b) in got.probs().iter().zip(&expect) {
            assert!((a - b).abs() < 1e-15);
        }

        let k4 = MultiGraph::complete(4);
        let uni = WalkDistribution::uniform(4);
        let stepped = walk_step(&k4, &uni).unwrap();
        for p in stepped.probs() {
            assert!((p - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn walk_step_errors_on_isolated_node() {
        let g = MultiGraph::from_edge_list(3, &[(0, 1, 1)]).unwrap();
        let err = walk_step(&g, &WalkDistribution::point_mass(3, 0)).unwrap_err();
        assert!(matches!(err, GraphError::IsolatedNode { node: 2 }));
    }

    #[test]
    fn walk_conserves_mass_over_many_steps() {
        let g = MultiGraph::from_edge_list(5, &[(0, 1, 2), (1, 2, 1), (2, 3, 3), (3, 4, 1), (4, 0, 1), (2, 2, 1)])
            .unwrap();
        let mut dist = WalkDistribution::point_mass(5, 0);
        for _ in 0..1000 {
            dist = walk_step(&g, &dist).unwrap();
            let sum: f64 = dist.probs().iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_is_stationary_on_regular_graphs() {
        for g in [MultiGraph::cycle(7), MultiGraph::complete(5), petersen()] {
            let n = g.node_count();
            let uni = WalkDistribution::uniform(n);
            let stepped = walk_step(&g, &uni).unwrap();
            for p in stepped.probs() {
                assert!((p - 1.0 / n as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn edge_list_roundtrip() {
        let g = MultiGraph::from_edge_list(5, &[(0, 1, 2), (3, 3, 1), (2, 4, 1)]).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        let back = read_edge_list(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn edge_list_parse_errors_carry_line_numbers() {
        let bad = "3 2\n0 1 1\n0 x 1\n";
        let err = read_edge_list(std::io::Cursor::new(bad)).unwrap_err();
        match err {
            GraphError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other}"),
        }
        let truncated = "3 2\n0 1 1\n";
        let err = read_edge_list(std::io::Cursor::new(truncated)).unwrap_err();
        assert!(matches!(err, GraphError::Parse { .. }));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_edges(n: usize) -> impl Strategy<Value = Vec<(usize, usize, u32)>> {
            proptest::collection::vec((0..n, 0..n, 1u32..4), 0..24)
        }

        proptest! {
            #[test]
            fn symmetry_holds_for_random_edge_lists(edges in arb_edges(8)) {
                let g = MultiGraph::from_edge_list(8, &edges).unwrap();
                for u in 0..8 {
                    for v in 0..8 {
                        prop_assert_eq!(g.multiplicity(u, v), g.multiplicity(v, u));
                    }
                }
                let total: usize = (0..8).map(|v| g.degree(v)).sum();
                prop_assert_eq!(total, g.total_edge_endpoints());
            }

            #[test]
            fn bfs_matches_floyd_warshall(edges in arb_edges(8)) {
                let g = MultiGraph::from_edge_list(8, &edges).unwrap();
                let oracle = floyd_warshall(&g);
                for s in 0..8 {
                    prop_assert_eq!(&g.bfs_distances(s), &oracle[s]);
                }
            }
        }
    }
}
