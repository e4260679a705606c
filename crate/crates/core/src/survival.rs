//! Points that avoid the holes forever, coded by cylinders.
//!
//! A level-`n` cylinder survives the coding step when its closed interval
//! misses every forbidden open interval; edges follow the shift. Cycles of
//! the resulting graph are periodic orbits avoiding the holes.

use std::collections::VecDeque;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::linalg::{spectral_radius, SparseMatrix};
use crate::maps::{refine, CylinderWord, MapError, MarkovMap, RefinedPartition};
use crate::noise::HoleModel;

/// Open interval `(lo, hi)`; empty when `lo ≥ hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpenInterval {
    pub lo: f64,
    pub hi: f64,
}

impl OpenInterval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn is_empty(&self) -> bool {
        self.lo >= self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    /// Whether the closed interval `[a, b]` meets this open interval.
    pub fn meets_closed(&self, a: f64, b: f64) -> bool {
        !self.is_empty() && a < self.hi && b > self.lo
    }
}

/// Cylinders avoiding the forbidden intervals, with shift edges.
#[derive(Clone, Debug)]
pub struct SubshiftGraph {
    partition: Arc<RefinedPartition>,
    forbidden: Vec<OpenInterval>,
    /// Partition index of each node.
    nodes: Vec<usize>,
    node_of: Vec<Option<usize>>,
    edges: Vec<Vec<usize>>,
}

impl SubshiftGraph {
    pub fn level(&self) -> usize {
        self.partition.level()
    }

    pub fn partition(&self) -> &Arc<RefinedPartition> {
        &self.partition
    }

    pub fn forbidden(&self) -> &[OpenInterval] {
        &self.forbidden
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Partition indices of the nodes.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn node_of(&self, partition_index: usize) -> Option<usize> {
        self.node_of[partition_index]
    }

    pub fn edges(&self, node: usize) -> &[usize] {
        &self.edges[node]
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    pub fn word(&self, node: usize) -> &CylinderWord {
        &self.partition.cylinder(self.nodes[node]).word
    }

    /// Adjacency matrix with `weight(node)` on every edge leaving `node`.
    pub fn weighted_adjacency(&self, weight: impl Fn(usize) -> f64) -> SparseMatrix {
        let rows = self
            .edges
            .iter()
            .enumerate()
            .map(|(u, out)| {
                let w = weight(u);
                out.iter().map(|&v| (v, w)).collect()
            })
            .collect();
        SparseMatrix::new(self.nodes.len(), rows)
    }

    /// Sub-graph of the nodes for which `keep` holds.
    fn restricted(&self, keep: &[bool]) -> SubshiftGraph {
        let nodes: Vec<usize> = self.nodes.iter().zip(keep).filter(|(_, k)| **k).map(|(n, _)| *n).collect();
        let mut node_of = vec![None; self.partition.len()];
        for (i, &n) in nodes.iter().enumerate() {
            node_of[n] = Some(i);
        }
        let edges = nodes
            .iter()
            .map(|&n| {
                let old = self.node_of[n].unwrap();
                self.edges[old]
                    .iter()
                    .filter_map(|&v| node_of[self.nodes[v]])
                    .collect()
            })
            .collect();
        SubshiftGraph {
            partition: Arc::clone(&self.partition),
            forbidden: self.forbidden.clone(),
            nodes,
            node_of,
            edges,
        }
    }

    /// Repeatedly drops nodes without incoming or outgoing edges; what is left
    /// lies on bi-infinite paths.
    pub fn pruned(&self) -> SubshiftGraph {
        let n = self.nodes.len();
        let mut alive = vec![true; n];
        let mut indeg = vec![0usize; n];
        let mut outdeg: Vec<usize> = self.edges.iter().map(Vec::len).collect();
        let mut preds = vec![Vec::new(); n];
        for (u, out) in self.edges.iter().enumerate() {
            for &v in out {
                indeg[v] += 1;
                preds[v].push(u);
            }
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&u| indeg[u] == 0 || outdeg[u] == 0).collect();
        while let Some(u) = queue.pop_front() {
            if !alive[u] {
                continue;
            }
            alive[u] = false;
            for &v in &self.edges[u] {
                if alive[v] {
                    indeg[v] -= 1;
                    if indeg[v] == 0 {
                        queue.push_back(v);
                    }
                }
            }
            for &p in &preds[u] {
                if alive[p] {
                    outdeg[p] -= 1;
                    if outdeg[p] == 0 {
                        queue.push_back(p);
                    }
                }
            }
        }
        self.restricted(&alive)
    }

    /// Shortest directed cycle, as a node list.
    pub fn shortest_cycle(&self) -> Option<Vec<usize>> {
        if let Some(u) = (0..self.len()).find(|&u| self.edges[u].contains(&u)) {
            return Some(vec![u]);
        }
        let n = self.len();
        let mut best: Option<Vec<usize>> = None;
        for start in 0..n {
            let bound = best.as_ref().map_or(usize::MAX, Vec::len);
            let mut parent = vec![usize::MAX; n];
            let mut depth = vec![usize::MAX; n];
            let mut queue = VecDeque::from([start]);
            depth[start] = 0;
            'bfs: while let Some(u) = queue.pop_front() {
                if depth[u] + 1 >= bound {
                    break;
                }
                for &v in &self.edges[u] {
                    if v == start {
                        let mut cycle = vec![u];
                        let mut w = u;
                        while w != start {
                            w = parent[w];
                            cycle.push(w);
                        }
                        cycle.reverse();
                        best = Some(cycle);
                        break 'bfs;
                    }
                    if depth[v] == usize::MAX {
                        depth[v] = depth[u] + 1;
                        parent[v] = u;
                        queue.push_back(v);
                    }
                }
            }
        }
        best
    }
}

/// Avoidance graph of level-`n` cylinders: a cylinder is excluded iff its
/// closed interval meets one of the open `forbidden` intervals.
pub fn build_avoidance_graph(map: &MarkovMap, forbidden: &[OpenInterval], n: usize) -> Result<SubshiftGraph, MapError> {
    let partition = Arc::new(refine(map, n)?);
    Ok(graph_on(partition, forbidden))
}

/// Same as [`build_avoidance_graph`] on an existing partition.
pub fn graph_on(partition: Arc<RefinedPartition>, forbidden: &[OpenInterval]) -> SubshiftGraph {
    let mut nodes = Vec::new();
    let mut node_of = vec![None; partition.len()];
    for (i, c) in partition.cylinders().iter().enumerate() {
        if !forbidden.iter().any(|f| f.meets_closed(c.lo, c.hi)) {
            node_of[i] = Some(nodes.len());
            nodes.push(i);
        }
    }
    let edges = nodes
        .iter()
        .map(|&i| partition.successors(i).iter().filter_map(|&k| node_of[k]).collect())
        .collect();
    SubshiftGraph {
        partition,
        forbidden: forbidden.to_vec(),
        nodes,
        node_of,
        edges,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurvivorVerdict {
    pub nonempty: bool,
    /// Node cycle.
    pub cycle: Option<Vec<usize>>,
    /// Period word: the symbolic orbit is this word repeated forever.
    pub word: Option<CylinderWord>,
}

/// Nonempty iff the graph carries a directed cycle; the witness is a
/// shortest one.
pub fn is_survivor_set_nonempty(graph: &SubshiftGraph) -> SurvivorVerdict {
    match graph.shortest_cycle() {
        None => SurvivorVerdict { nonempty: false, cycle: None, word: None },
        Some(cycle) => {
            let word = CylinderWord(cycle.iter().map(|&u| graph.word(u).0[0]).collect());
            SurvivorVerdict { nonempty: true, cycle: Some(cycle), word: Some(word) }
        }
    }
}

/// The point whose itinerary is `word` repeated forever: fixed point of the
/// composed inverse branches.
pub fn periodic_point(map: &MarkovMap, word: &CylinderWord) -> f64 {
    let mut x = 0.5;
    for _ in 0..200 {
        let prev = x;
        for &s in word.0.iter().rev() {
            x = map.inverse(s, x);
        }
        if (x - prev).abs() < 1e-15 {
            break;
        }
    }
    x
}

/// Checks that the periodic orbit of `word` follows the word and stays
/// outside every forbidden interval.
pub fn verify_periodic_witness(map: &MarkovMap, forbidden: &[OpenInterval], word: &CylinderWord) -> bool {
    let x = periodic_point(map, word);
    let mut y = x;
    for &s in &word.0 {
        // the inverse branches land in the closed cell, so compare by bounds
        let (lo, hi) = map.cell_bounds(s);
        if y < lo - 1e-12 || y > hi + 1e-12 || forbidden.iter().any(|f| f.contains(y)) {
            return false;
        }
        y = map.branches()[s].value(y);
    }
    (y - x).abs() < 1e-9
}

#[derive(Clone, Debug, PartialEq)]
pub struct BowenDimension {
    pub dimension: f64,
    /// True when the graph has no cycle.
    pub empty: bool,
    /// `(lower, upper)` bounds; equal to `dimension` for affine maps.
    pub bounds: (f64, f64),
}

const BOWEN_TOL: f64 = 1e-10;

fn bowen_root(graph: &SubshiftGraph, log_derivative: &[f64]) -> f64 {
    let radius = |s: f64| {
        let m = graph.weighted_adjacency(|u| (-s * log_derivative[u]).exp());
        spectral_radius(&m, 1e-14, 1_000_000)
    };
    if radius(1.0) >= 1.0 - 1e-12 {
        return 1.0;
    }
    if radius(0.0) <= 1.0 + 1e-12 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > BOWEN_TOL * 0.1 {
        let mid = 0.5 * (lo + hi);
        if radius(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Root `s*` of `spectral radius(W_s) = 1` with `W_s[u][v] = |T′(u)|^{−s}` on
/// each edge, by bisection on `[0, 1]`.
///
/// Affine maps get the exact weights. Other maps get a dimension interval
/// from the per-cylinder derivative extremes and report its midpoint.
pub fn bowen_dimension(graph: &SubshiftGraph, map: &MarkovMap) -> BowenDimension {
    if graph.shortest_cycle().is_none() {
        return BowenDimension { dimension: 0.0, empty: true, bounds: (0.0, 0.0) };
    }
    let ranges: Vec<(f64, f64)> = graph
        .nodes()
        .iter()
        .map(|&i| {
            let c = graph.partition.cylinder(i);
            map.derivative_range(c.first_symbol(), c.lo, c.hi)
        })
        .collect();
    if map.is_piecewise_affine() {
        let logs: Vec<f64> = ranges.iter().map(|r| r.0.ln()).collect();
        let s = bowen_root(graph, &logs);
        return BowenDimension { dimension: s, empty: false, bounds: (s, s) };
    }
    let upper = bowen_root(graph, &ranges.iter().map(|r| r.0.ln()).collect::<Vec<_>>());
    let lower = bowen_root(graph, &ranges.iter().map(|r| r.1.ln()).collect::<Vec<_>>());
    BowenDimension { dimension: 0.5 * (lower + upper), empty: false, bounds: (lower, upper) }
}

/// Number of level-`m` cylinders, `m = 1..=m_max`, whose midpoint orbit
/// `x, T x, …, T^{m−1} x` stays outside the forbidden set.
pub fn surviving_cylinder_counts(map: &MarkovMap, forbidden: &[OpenInterval], m_max: usize) -> Vec<usize> {
    let avoids = |x: f64| !forbidden.iter().any(|f| f.contains(x));
    let mut cells: Vec<usize> = (0..map.cells())
        .filter(|&i| {
            let (lo, hi) = map.cell_bounds(i);
            avoids(0.5 * (lo + hi))
        })
        .collect();
    let mut level: Vec<(f64, f64)> = cells.iter().map(|&i| map.cell_bounds(i)).collect();
    let mut counts = vec![level.len()];
    for _ in 1..m_max {
        let mut next = Vec::new();
        let mut next_cells = Vec::new();
        for a in 0..map.cells() {
            for (&(lo, hi), &c) in level.iter().zip(&cells) {
                if !map.admissible(a, c) {
                    continue;
                }
                let (x0, x1) = (map.inverse(a, lo), map.inverse(a, hi));
                let (lo2, hi2) = (x0.min(x1), x0.max(x1));
                if avoids(0.5 * (lo2 + hi2)) {
                    next.push((lo2, hi2));
                    next_cells.push(a);
                }
            }
        }
        level = next;
        cells = next_cells;
        counts.push(level.len());
    }
    counts
}

/// Box-counting slope: least-squares slope of `log N(m)` against `m·log γ`
/// over `m ∈ [m_max/2, m_max]`, with `γ` the minimal expansion.
pub fn box_counting_dimension(map: &MarkovMap, forbidden: &[OpenInterval], m_max: usize) -> f64 {
    let counts = surviving_cylinder_counts(map, forbidden, m_max);
    let log_gamma = map.expansion().0.ln();
    let pts: Vec<(f64, f64)> = (m_max / 2..=m_max)
        .filter(|&m| m >= 1 && counts[m - 1] > 0)
        .map(|m| (m as f64 * log_gamma, (counts[m - 1] as f64).ln()))
        .collect();
    least_squares_slope(&pts)
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Level-`n` cylinders carrying the support of the open equilibrium state:
/// the avoidance graph of `{g = 0}`, pruned to bi-infinite paths. Returned as
/// partition indices.
pub fn mu_hat_support(map: &MarkovMap, holes: &HoleModel, n: usize) -> Result<Vec<usize>, MapError> {
    Ok(build_avoidance_graph(map, &holes.zero_region(), n)?.pruned().nodes().to_vec())
}

/// Level-`n` cylinders on bi-infinite paths avoiding the largest hole.
pub fn survivor_nodes(map: &MarkovMap, holes: &HoleModel, n: usize) -> Result<Vec<usize>, MapError> {
    Ok(build_avoidance_graph(map, &holes.max_hole(), n)?.pruned().nodes().to_vec())
}

/// CSV of nodes (`node,word,lo,hi`) followed by edges (`from,to`).
pub fn write_graph_csv<W: std::io::Write>(graph: &SubshiftGraph, mut out: W) -> std::io::Result<()> {
    writeln!(out, "node,word,lo,hi")?;
    for (u, &i) in graph.nodes().iter().enumerate() {
        let c = graph.partition.cylinder(i);
        writeln!(out, "{u},{},{},{}", c.word, c.lo, c.hi)?;
    }
    writeln!(out, "from,to")?;
    for (u, out_edges) in graph.edges.iter().enumerate() {
        for v in out_edges {
            writeln!(out, "{u},{v}")?;
        }
    }
    Ok(())
}
