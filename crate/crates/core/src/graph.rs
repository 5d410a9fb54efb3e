//! Network topology: undirected graphs, geometric generation, incidence and
//! PDMM edge matrices, and the corruption model of a passive adversary.
//!
//! Nodes are 0-based. Edges are stored sorted as `(i, j)` with `i < j`, and
//! that order fixes the edge index `l` used by every matrix in the crate.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;

/// Undirected simple graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    /// Per node: `(neighbor, edge index)` sorted by neighbor.
    incident: Vec<Vec<(usize, usize)>>,
}

impl Graph {
    /// Builds a graph, normalising each pair to `(min, max)` and sorting.
    /// Self-loops, duplicates and out-of-range endpoints are rejected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut list: Vec<(usize, usize)> = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop at node {}", a + 1)));
            }
            let (i, j) = (a.min(b), a.max(b));
            if j >= n {
                return Err(Error::NodeOutOfRange { node: j, n });
            }
            list.push((i, j));
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(format!(
                "duplicate edge ({}, {})",
                w[0].0 + 1,
                w[0].1 + 1
            )));
        }
        let mut incident = vec![Vec::new(); n];
        for (l, &(i, j)) in list.iter().enumerate() {
            incident[i].push((j, l));
            incident[j].push((i, l));
        }
        for adj in &mut incident {
            adj.sort_unstable();
        }
        Ok(Self { n, edges: list, incident })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degree(&self, i: usize) -> usize {
        self.incident[i].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.incident.iter().map(Vec::len).collect()
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.incident[i].iter().map(|&(j, _)| j)
    }

    /// `(neighbor, edge index)` pairs of node `i`.
    pub fn incident(&self, i: usize) -> &[(usize, usize)] {
        &self.incident[i]
    }

    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        self.incident
            .get(i)?
            .binary_search_by_key(&j, |&(k, _)| k)
            .ok()
            .map(|pos| self.incident[i][pos].1)
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edge_index(i, j).is_some()
    }

    /// Index of the directed dual `λ_{i|j}` in a length-2m dual vector:
    /// `l` when `i < j`, `l + m` otherwise.
    pub fn dual_index(&self, i: usize, j: usize) -> Option<usize> {
        let l = self.edge_index(i, j)?;
        Some(if i < j { l } else { l + self.m() })
    }

    /// `B_{i|j}`: +1 when `i < j`, −1 otherwise.
    pub fn sign(i: usize, j: usize) -> f64 {
        if i < j {
            1.0
        } else {
            -1.0
        }
    }

    /// Number of connected components, with a component label per node.
    pub fn components(&self) -> (usize, Vec<usize>) {
        let mut label = vec![usize::MAX; self.n];
        let mut count = 0;
        for start in 0..self.n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = count;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for v in self.neighbors(u) {
                    if label[v] == usize::MAX {
                        label[v] = count;
                        queue.push_back(v);
                    }
                }
            }
            count += 1;
        }
        (count, label)
    }

    /// Whether the graph's bipartite double cover is disconnected, i.e. the
    /// graph has no odd cycle (per connected component).
    pub fn is_bipartite(&self) -> bool {
        let mut color = vec![u8::MAX; self.n];
        for start in 0..self.n {
            if color[start] != u8::MAX {
                continue;
            }
            color[start] = 0;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for v in self.neighbors(u) {
                    if color[v] == u8::MAX {
                        color[v] = 1 - color[u];
                        queue.push_back(v);
                    } else if color[v] == color[u] {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Edge-list text: header `n m`, then one `i j` pair per line (0-based).
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {}", self.n, self.m()).unwrap();
        for &(i, j) in &self.edges {
            writeln!(out, "{i} {j}").unwrap();
        }
        out
    }

    /// Parses the edge-list format. Blank lines and `#` comments are ignored.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty edge list".into()))?;
        let (n, m) = parse_pair(header)?;
        let mut edges = Vec::with_capacity(m);
        for line in lines {
            edges.push(parse_pair(line)?);
        }
        if edges.len() != m {
            return Err(Error::Parse(format!(
                "header declares {m} edges but {} were listed",
                edges.len()
            )));
        }
        Graph::new(n, edges)
    }

    pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_edge_list(&text)
    }

    pub fn write_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_edge_list())?;
        Ok(())
    }
}

fn parse_pair(line: &str) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace();
    let mut next = || -> Result<usize> {
        it.next()
            .ok_or_else(|| Error::Parse(format!("expected two integers in `{line}`")))?
            .parse::<usize>()
            .map_err(|e| Error::Parse(format!("`{line}`: {e}")))
    };
    let pair = (next()?, next()?);
    if it.next().is_some() {
        return Err(Error::Parse(format!("trailing tokens in `{line}`")));
    }
    Ok(pair)
}

/// Connectivity radius² used for geometric graphs: `2 ln(n) / n`.
pub fn default_radius_sq(n: usize) -> f64 {
    2.0 * (n as f64).ln() / n as f64
}

/// Node positions on the unit square, drawn as node 0 x, node 0 y, node 1 x, …
pub fn geometric_positions(n: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut stream = rng::seeded(seed);
    (0..n)
        .map(|_| {
            let x: f64 = stream.random();
            let y: f64 = stream.random();
            (x, y)
        })
        .collect()
}

/// Random geometric graph on the unit square: edge `(i, j)` iff the squared
/// Euclidean distance is at most `radius_sq`. May be disconnected.
pub fn random_geometric_graph(n: usize, radius_sq: f64, seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 nodes, got {n}")));
    }
    if !(radius_sq > 0.0) {
        return Err(Error::InvalidArgument(format!("radius² must be positive, got {radius_sq}")));
    }
    let pos = geometric_positions(n, seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = pos[i].0 - pos[j].0;
            let dy = pos[i].1 - pos[j].1;
            if dx * dx + dy * dy <= radius_sq {
                edges.push((i, j));
            }
        }
    }
    Graph::new(n, edges)
}

/// Maximum number of seeds tried by [`connected_geometric_graph`].
pub const MAX_CONNECT_ATTEMPTS: u32 = 100;

/// Draws geometric graphs with seeds `seed, seed + 1, …` until one is
/// connected. Returns the graph together with the seed that produced it.
pub fn connected_geometric_graph(n: usize, radius_sq: f64, seed: u64) -> Result<(Graph, u64)> {
    for attempt in 0..MAX_CONNECT_ATTEMPTS {
        let s = seed.wrapping_add(u64::from(attempt));
        let g = random_geometric_graph(n, radius_sq, s)?;
        if is_connected(&g) {
            return Ok((g, s));
        }
    }
    Err(Error::NoConnectedInstance { seed, attempts: MAX_CONNECT_ATTEMPTS })
}

pub fn is_connected(g: &Graph) -> bool {
    g.n() >= 1 && g.components().0 == 1
}

/// Graph incidence matrix `B` (m×n).
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceMatrix(pub DMatrix<f64>);

impl IncidenceMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// Row `l` for edge `(i, j)`, `i < j`, holds `+1` at `i` and `−1` at `j`.
pub fn incidence_matrix(g: &Graph) -> IncidenceMatrix {
    let mut b = DMatrix::zeros(g.m(), g.n());
    for (l, &(i, j)) in g.edges().iter().enumerate() {
        b[(l, i)] = 1.0;
        b[(l, j)] = -1.0;
    }
    IncidenceMatrix(b)
}

/// PDMM edge matrices: `C` (2m×n) and the block-swap permutation `P` (2m×2m).
#[derive(Debug, Clone, PartialEq)]
pub struct PdmmEdgeMatrices {
    pub c: DMatrix<f64>,
    pub p: DMatrix<f64>,
}

impl PdmmEdgeMatrices {
    pub fn m(&self) -> usize {
        self.c.nrows() / 2
    }

    pub fn n(&self) -> usize {
        self.c.ncols()
    }

    /// `P·C`.
    pub fn pc(&self) -> DMatrix<f64> {
        &self.p * &self.c
    }
}

pub fn pdmm_edge_matrices(g: &Graph) -> Result<PdmmEdgeMatrices> {
    let m = g.m();
    if m == 0 {
        return Err(Error::EmptyEdgeSet);
    }
    let mut c = DMatrix::zeros(2 * m, g.n());
    let mut p = DMatrix::zeros(2 * m, 2 * m);
    for (l, &(i, j)) in g.edges().iter().enumerate() {
        c[(l, i)] = 1.0;
        c[(l + m, j)] = -1.0;
        p[(l, l + m)] = 1.0;
        p[(l + m, l)] = 1.0;
    }
    Ok(PdmmEdgeMatrices { c, p })
}

/// Passive adversary: the corrupted node set and everything derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct CorruptionModel {
    corrupted_mask: Vec<bool>,
    corrupted: Vec<usize>,
    honest: Vec<usize>,
    /// Indices of edges with at least one corrupted endpoint.
    corrupted_edges: Vec<usize>,
}

impl CorruptionModel {
    pub fn new(g: &Graph, corrupted: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut mask = vec![false; g.n()];
        for c in corrupted {
            if c >= g.n() {
                return Err(Error::NodeOutOfRange { node: c, n: g.n() });
            }
            mask[c] = true;
        }
        let corrupted: Vec<usize> = (0..g.n()).filter(|&i| mask[i]).collect();
        let honest: Vec<usize> = (0..g.n()).filter(|&i| !mask[i]).collect();
        let corrupted_edges = g
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, &(i, j))| mask[i] || mask[j])
            .map(|(l, _)| l)
            .collect();
        Ok(Self { corrupted_mask: mask, corrupted, honest, corrupted_edges })
    }

    /// Everyone except `target` is corrupted.
    pub fn all_but(g: &Graph, target: usize) -> Result<Self> {
        if target >= g.n() {
            return Err(Error::NodeOutOfRange { node: target, n: g.n() });
        }
        Self::new(g, (0..g.n()).filter(|&j| j != target))
    }

    pub fn is_corrupted(&self, i: usize) -> bool {
        self.corrupted_mask[i]
    }

    pub fn corrupted(&self) -> &[usize] {
        &self.corrupted
    }

    pub fn honest(&self) -> &[usize] {
        &self.honest
    }

    pub fn corrupted_edges(&self) -> &[usize] {
        &self.corrupted_edges
    }

    pub fn honest_neighbors<'a>(&'a self, g: &'a Graph, i: usize) -> impl Iterator<Item = usize> + 'a {
        g.neighbors(i).filter(move |&j| !self.corrupted_mask[j])
    }

    pub fn corrupted_neighbors<'a>(&'a self, g: &'a Graph, i: usize) -> impl Iterator<Item = usize> + 'a {
        g.neighbors(i).filter(move |&j| self.corrupted_mask[j])
    }

    /// Every honest node has at least one corrupted neighbor. Returns the
    /// first honest node without one.
    pub fn check_observed(&self, g: &Graph) -> Result<()> {
        match self
            .honest
            .iter()
            .find(|&&i| self.corrupted_neighbors(g, i).next().is_none())
        {
            Some(&i) => Err(Error::HonestNodeUnobserved(i)),
            None => Ok(()),
        }
    }
}

/// Connected component of `i` in the subgraph induced on the honest nodes.
pub fn honest_component(g: &Graph, cm: &CorruptionModel, i: usize) -> Result<Vec<usize>> {
    if i >= g.n() {
        return Err(Error::NodeOutOfRange { node: i, n: g.n() });
    }
    if cm.is_corrupted(i) {
        return Err(Error::CorruptedTarget(i));
    }
    let mut seen = vec![false; g.n()];
    seen[i] = true;
    let mut queue = VecDeque::from([i]);
    let mut out = Vec::new();
    while let Some(u) = queue.pop_front() {
        out.push(u);
        for v in cm.honest_neighbors(g, u) {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::Graph;

    pub fn path3() -> Graph {
        Graph::new(3, [(0, 1), (1, 2)]).unwrap()
    }

    pub fn k2() -> Graph {
        Graph::new(2, [(0, 1)]).unwrap()
    }

    pub fn cycle3() -> Graph {
        Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn rejects_bad_edges() {
        assert!(Graph::new(3, [(1, 1)]).is_err());
        assert!(Graph::new(3, [(0, 1), (1, 0)]).is_err());
        assert!(matches!(Graph::new(3, [(0, 3)]), Err(Error::NodeOutOfRange { .. })));
    }

    #[test]
    fn degrees_sum_to_twice_edges() {
        let g = random_geometric_graph(30, 0.1, 5).unwrap();
        assert_eq!(g.degrees().iter().sum::<usize>(), 2 * g.m());
    }

    #[test]
    fn k2_from_full_radius() {
        for seed in 0..20 {
            let g = random_geometric_graph(2, 2.0, seed).unwrap();
            assert_eq!(g.edges(), &[(0, 1)]);
        }
    }

    #[test]
    fn tiny_radius_gives_no_edges() {
        let g = random_geometric_graph(3, 1e-300, 1).unwrap();
        assert_eq!(g.m(), 0);
    }

    #[test]
    fn geometric_graph_is_deterministic() {
        let a = random_geometric_graph(10, default_radius_sq(10), 7).unwrap();
        let b = random_geometric_graph(10, default_radius_sq(10), 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ten_node_instance_connects() {
        let (g, used) = connected_geometric_graph(10, default_radius_sq(10), 7).unwrap();
        assert!(is_connected(&g));
        assert!(used >= 7 && used < 7 + u64::from(MAX_CONNECT_ATTEMPTS));
    }

    #[test]
    fn incidence_of_path() {
        let b = incidence_matrix(&path3());
        assert_eq!(b.0, DMatrix::from_row_slice(2, 3, &[1.0, -1.0, 0.0, 0.0, 1.0, -1.0]));
        let ones = nalgebra::DVector::from_element(3, 1.0);
        assert_eq!((&b.0 * ones).norm(), 0.0);
        assert_eq!(incidence_matrix(&k2()).0, DMatrix::from_row_slice(1, 2, &[1.0, -1.0]));
    }

    #[test]
    fn pdmm_matrices_single_edge() {
        let mats = pdmm_edge_matrices(&k2()).unwrap();
        assert_eq!(mats.c, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]));
        assert_eq!(mats.p, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
    }

    #[test]
    fn pdmm_matrices_identities() {
        let g = path3();
        let mats = pdmm_edge_matrices(&g).unwrap();
        let b = incidence_matrix(&g).0;
        assert_eq!(&mats.p * &mats.p, DMatrix::identity(4, 4));
        let sum = &mats.c + mats.pc();
        assert_eq!(sum, crate::linalg::vstack(&b, &b));
        assert!(matches!(
            pdmm_edge_matrices(&Graph::new(2, []).unwrap()),
            Err(Error::EmptyEdgeSet)
        ));
    }

    #[test]
    fn dual_indices() {
        let g = path3();
        assert_eq!(g.dual_index(0, 1), Some(0));
        assert_eq!(g.dual_index(1, 0), Some(2));
        assert_eq!(g.dual_index(2, 1), Some(3));
        assert_eq!(g.dual_index(0, 2), None);
    }

    #[test]
    fn connectivity() {
        assert!(is_connected(&k2()));
        assert!(!is_connected(&Graph::new(2, []).unwrap()));
        assert!(is_connected(&path3()));
    }

    #[test]
    fn star_with_corrupted_leaves() {
        let g = Graph::new(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let cm = CorruptionModel::new(&g, [1, 2, 3]).unwrap();
        assert_eq!(honest_component(&g, &cm, 0).unwrap(), vec![0]);
        assert!(matches!(honest_component(&g, &cm, 1), Err(Error::CorruptedTarget(1))));
    }

    #[test]
    fn no_corruption_component_is_everything() {
        let g = path3();
        let cm = CorruptionModel::new(&g, []).unwrap();
        assert_eq!(honest_component(&g, &cm, 1).unwrap(), vec![0, 1, 2]);
        assert!(cm.corrupted_edges().is_empty());
    }

    #[test]
    fn corrupted_edges_and_observation() {
        let g = cycle3();
        let cm = CorruptionModel::new(&g, [2]).unwrap();
        // edges sorted: (0,1), (0,2), (1,2)
        assert_eq!(cm.corrupted_edges(), &[1, 2]);
        assert!(cm.check_observed(&g).is_ok());
        let path = path3();
        let cm = CorruptionModel::new(&path, [2]).unwrap();
        assert!(matches!(cm.check_observed(&path), Err(Error::HonestNodeUnobserved(0))));
    }

    #[test]
    fn edge_list_round_trip() {
        let g = cycle3();
        let parsed = Graph::parse_edge_list(&g.to_edge_list()).unwrap();
        assert_eq!(parsed, g);
        assert!(Graph::parse_edge_list("3 2\n0 1\n").is_err());
        assert!(Graph::parse_edge_list("# comment\n3 1\n\n0 2 # trailing\n").is_ok());
    }

    #[test]
    fn bipartite_detection() {
        assert!(path3().is_bipartite());
        assert!(!cycle3().is_bipartite());
    }
}
