//! Synthetic rotation-averaging instances: topology, ground truth, Langevin
//! noise and uniform outlier corruption.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{usage, Result, SyncError};
use crate::group::{sample_haar, sample_langevin, GroupKind, Rotation};
use crate::laplacian::MeasurementGraph;

/// Default concentration used by the benchmark suites.
pub fn default_kappa(group: GroupKind) -> f64 {
    match group {
        GroupKind::So2 => 50.0,
        GroupKind::So3 => 25.0,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Complete,
    SmallWorld { k_local: usize, p_rewire: f64 },
    Custom(Vec<(usize, usize)>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Concentration {
    Global(f64),
    /// One value per edge, in the order edges are generated.
    PerEdge(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisConfig {
    pub group: GroupKind,
    pub node_count: usize,
    pub topology: Topology,
    pub kappa: Concentration,
    pub corruption_fraction: f64,
    pub seed: u64,
}

impl SynthesisConfig {
    pub fn new(group: GroupKind, node_count: usize, topology: Topology) -> Self {
        SynthesisConfig {
            group,
            node_count,
            topology,
            kappa: Concentration::Global(default_kappa(group)),
            corruption_fraction: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.node_count < 2 {
            return Err(usage!("graph must have at least 2 nodes, got {}", self.node_count));
        }
        if !(0.0..=1.0).contains(&self.corruption_fraction) {
            return Err(usage!("corruption fraction {} outside [0, 1]", self.corruption_fraction));
        }
        match &self.kappa {
            Concentration::Global(k) if !(*k > 0.0 && k.is_finite()) => {
                Err(usage!("concentration {k} must be positive"))
            }
            Concentration::PerEdge(ks) if ks.iter().any(|k| !(*k > 0.0 && k.is_finite())) => {
                Err(usage!("per-edge concentrations must be positive"))
            }
            _ => Ok(()),
        }
    }
}

/// A generated instance.
#[derive(Clone, Debug)]
pub struct Instance {
    pub truth: Vec<Rotation>,
    pub graph: MeasurementGraph,
    /// Per stored edge: whether its noise was drawn from the Haar measure.
    pub corrupted: Vec<bool>,
}

const MAX_ATTEMPTS: usize = 100;

/// Watts-Strogatz small world with the NetworkX rewiring order.
///
/// Returns sorted pairs `(i, j)` with `i < j`.
pub fn watts_strogatz<R: Rng + ?Sized>(
    n: usize,
    k_local: usize,
    p_rewire: f64,
    rng: &mut R,
) -> Result<Vec<(usize, usize)>> {
    if !k_local.is_multiple_of(2) || k_local == 0 || k_local >= n {
        return Err(usage!("small-world degree {k_local} must be even, positive and below N = {n}"));
    }
    if !(0.0..=1.0).contains(&p_rewire) {
        return Err(usage!("rewiring probability {p_rewire} outside [0, 1]"));
    }
    let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
    let mut edges = BTreeSet::new();
    let mut degree = vec![0usize; n];
    for j in 1..=k_local / 2 {
        for u in 0..n {
            edges.insert(key(u, (u + j) % n));
            degree[u] += 1;
            degree[(u + j) % n] += 1;
        }
    }
    for j in 1..=k_local / 2 {
        for u in 0..n {
            let v = (u + j) % n;
            if rng.random::<f64>() < p_rewire {
                let mut w = rng.random_range(0..n);
                let mut give_up = false;
                while w == u || edges.contains(&key(u, w)) {
                    w = rng.random_range(0..n);
                    if degree[u] >= n - 1 {
                        give_up = true;
                        break;
                    }
                }
                if !give_up && edges.remove(&key(u, v)) {
                    degree[v] -= 1;
                    edges.insert(key(u, w));
                    degree[w] += 1;
                }
            }
        }
    }
    Ok(edges.into_iter().collect())
}

fn connected(n: usize, pairs: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut comps = n;
    for &(a, b) in pairs {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            comps -= 1;
        }
    }
    comps == 1
}

fn topology_pairs<R: Rng + ?Sized>(cfg: &SynthesisConfig, rng: &mut R) -> Result<Vec<(usize, usize)>> {
    let n = cfg.node_count;
    match &cfg.topology {
        Topology::Complete => Ok((0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()),
        Topology::SmallWorld { k_local, p_rewire } => {
            for _ in 0..MAX_ATTEMPTS {
                let pairs = watts_strogatz(n, *k_local, *p_rewire, rng)?;
                if connected(n, &pairs) {
                    return Ok(pairs);
                }
            }
            Err(SyncError::Structural(format!(
                "no connected small-world graph (N = {n}, k = {k_local}, p = {p_rewire}) in {MAX_ATTEMPTS} attempts"
            )))
        }
        Topology::Custom(pairs) => {
            if !connected(n, pairs) || pairs.iter().any(|&(a, b)| a >= n || b >= n) {
                return Err(SyncError::Structural("custom edge list does not connect all nodes".into()));
            }
            Ok(pairs.clone())
        }
    }
}

/// Draws ground truth and noisy measurements `g̃_ij = g_i⁻¹ g_j ε_ij`.
///
/// The rng stream is consumed in a fixed order (topology, truth, corrupted
/// set, per-edge noise) so the instance is a pure function of the config.
pub fn generate(cfg: &SynthesisConfig) -> Result<Instance> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pairs = topology_pairs(cfg, &mut rng)?;
    let kappas = match &cfg.kappa {
        Concentration::Global(k) => vec![*k; pairs.len()],
        Concentration::PerEdge(ks) if ks.len() == pairs.len() => ks.clone(),
        Concentration::PerEdge(ks) => return Err(usage!("{} concentrations for {} edges", ks.len(), pairs.len())),
    };
    let truth: Vec<Rotation> = (0..cfg.node_count).map(|_| sample_haar(cfg.group, &mut rng)).collect();
    let bad = (cfg.corruption_fraction * pairs.len() as f64).round() as usize;
    let mut corrupted = vec![false; pairs.len()];
    for k in sample(&mut rng, pairs.len(), bad) {
        corrupted[k] = true;
    }
    let identity = Rotation::identity(cfg.group);
    let mut graph = MeasurementGraph::new(cfg.group, cfg.node_count);
    for (k, &(i, j)) in pairs.iter().enumerate() {
        let noise = if corrupted[k] {
            sample_haar(cfg.group, &mut rng)
        } else {
            sample_langevin(&identity, kappas[k], &mut rng)?
        };
        let m = truth[i].between(&truth[j])?.compose(&noise)?;
        graph.add_edge(i, j, m, kappas[k])?;
    }
    Ok(Instance { truth, graph, corrupted })
}

/// Average local clustering coefficient of an undirected simple graph.
pub fn clustering_coefficient(n: usize, pairs: &[(usize, usize)]) -> f64 {
    let mut adj = vec![BTreeSet::new(); n];
    for &(a, b) in pairs {
        adj[a].insert(b);
        adj[b].insert(a);
    }
    let mut total = 0.0;
    for nb in &adj {
        let k = nb.len();
        if k < 2 {
            continue;
        }
        let v: Vec<usize> = nb.iter().copied().collect();
        let mut links = 0;
        for (x, &a) in v.iter().enumerate() {
            for &b in &v[x + 1..] {
                if adj[a].contains(&b) {
                    links += 1;
                }
            }
        }
        total += 2.0 * links as f64 / (k * (k - 1)) as f64;
    }
    total / n as f64
}
