use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{usage, Result, SyncError};
use crate::group::{GroupKind, Rotation};

/// One measured relative rotation `g̃_ij ≈ g_i⁻¹ g_j`, stored with `i < j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub measurement: Rotation,
    pub kappa: f64,
}

/// Nodes `0..node_count` and relative-rotation measurements between them.
///
/// Each unordered pair is stored once; the reverse measurement is implied as
/// the inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementGraph {
    pub group: GroupKind,
    pub node_count: usize,
    edges: Vec<Edge>,
    index: HashMap<(usize, usize), usize>,
}

impl MeasurementGraph {
    pub fn new(group: GroupKind, node_count: usize) -> Self {
        MeasurementGraph { group, node_count, edges: Vec::new(), index: HashMap::new() }
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Adds a measurement of `g_i⁻¹ g_j`. Pairs with `i > j` are stored as the
    /// inverse measurement on `(j, i)`.
    pub fn add_edge(&mut self, i: usize, j: usize, measurement: Rotation, kappa: f64) -> Result<()> {
        if i == j {
            return Err(usage!("self-loop on node {i}"));
        }
        if i >= self.node_count || j >= self.node_count {
            return Err(usage!("edge ({i}, {j}) refers to a node outside 0..{}", self.node_count));
        }
        if measurement.group() != self.group {
            return Err(usage!(
                "edge ({i}, {j}) carries an {} measurement in an {} graph",
                measurement.group(),
                self.group
            ));
        }
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(usage!("edge ({i}, {j}) has non-positive concentration {kappa}"));
        }
        let (a, b, m) = if i < j { (i, j, measurement) } else { (j, i, measurement.inverse()) };
        if self.index.contains_key(&(a, b)) {
            return Err(usage!("duplicate edge ({a}, {b})"));
        }
        self.index.insert((a, b), self.edges.len());
        self.edges.push(Edge { i: a, j: b, measurement: m, kappa });
        Ok(())
    }

    /// The measurement from `i` to `j` in either orientation, if the edge exists.
    pub fn measurement(&self, i: usize, j: usize) -> Option<Rotation> {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        let e = &self.edges[*self.index.get(&(a, b))?];
        Some(if i < j { e.measurement } else { e.measurement.inverse() })
    }

    pub fn neighbours(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for e in &self.edges {
            adj[e.i].push(e.j);
            adj[e.j].push(e.i);
        }
        adj
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let adj = self.neighbours();
        let mut seen = vec![false; self.node_count];
        let mut out = Vec::new();
        for start in 0..self.node_count {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                for &v in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                        stack.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn check_connected(&self) -> Result<()> {
        if self.node_count == 0 {
            return Err(SyncError::Structural("graph has no nodes".into()));
        }
        let comps = self.components();
        if comps.len() == 1 {
            return Ok(());
        }
        let shown: Vec<String> = comps
            .iter()
            .take(5)
            .map(|c| {
                let head: Vec<String> = c.iter().take(8).map(|v| v.to_string()).collect();
                let more = if c.len() > 8 { ", ..." } else { "" };
                format!("{{{}{more}}}", head.join(", "))
            })
            .collect();
        Err(SyncError::Structural(format!(
            "graph is disconnected with {} components: {}{}",
            comps.len(),
            shown.join(" "),
            if comps.len() > 5 { " ..." } else { "" }
        )))
    }

    /// The same topology with replaced measurements (one per stored edge, in order).
    pub fn with_measurements(&self, measurements: &[Rotation]) -> Result<Self> {
        if measurements.len() != self.edges.len() {
            return Err(usage!("{} measurements for {} edges", measurements.len(), self.edges.len()));
        }
        let edges = self.edges.iter().zip(measurements).map(|(e, m)| Edge { measurement: *m, ..*e }).collect();
        Ok(MeasurementGraph { edges, group: self.group, node_count: self.node_count, index: self.index.clone() })
    }

    /// Noise-free graph with `g̃_ij = g_i⁻¹ g_j` on the given pairs.
    pub fn noiseless(truth: &[Rotation], pairs: &[(usize, usize)], kappa: f64) -> Result<Self> {
        let group = truth.first().ok_or_else(|| usage!("no ground-truth rotations"))?.group();
        let mut g = MeasurementGraph::new(group, truth.len());
        for &(i, j) in pairs {
            g.add_edge(i, j, truth[i].between(&truth[j])?, kappa)?;
        }
        Ok(g)
    }
}

/// Serializable summary used in reports.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GraphSummary {
    pub group: GroupKind,
    pub nodes: usize,
    pub edges: usize,
}

impl From<&MeasurementGraph> for GraphSummary {
    fn from(g: &MeasurementGraph) -> Self {
        GraphSummary { group: g.group, nodes: g.node_count, edges: g.edge_count() }
    }
}
