//! The rotation part of g2o pose-graph files.
//!
//! `EDGE_SE3:QUAT` and `EDGE_SE2` records become measurements; translations
//! are dropped. The concentration of an edge is the mean of the diagonal of
//! its rotational information block (the single `θθ` entry for SE2). `VERTEX_*`
//! records only register node ids. Anything else is skipped and counted.
//! Node ids are renumbered `0..N` in increasing order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use irrepsync::{GroupKind, MeasurementGraph, Rotation};

use crate::error::{parse_error, Result};

#[derive(Clone, Debug)]
pub struct G2oGraph {
    pub graph: MeasurementGraph,
    /// Original g2o id of each node.
    pub ids: Vec<u64>,
    /// Skipped record types and how often they appeared.
    pub skipped: BTreeMap<String, usize>,
}

struct RawEdge {
    line: usize,
    a: u64,
    b: u64,
    rotation: Rotation,
    kappa: f64,
}

fn numbers(fields: &[&str], origin: &str, line: usize) -> Result<Vec<f64>> {
    fields
        .iter()
        .map(|f| f.parse::<f64>().map_err(|e| parse_error(origin, line, format!("bad number `{f}`: {e}"))))
        .collect()
}

fn id(field: &str, origin: &str, line: usize) -> Result<u64> {
    field.parse().map_err(|e| parse_error(origin, line, format!("bad vertex id `{field}`: {e}")))
}

fn mean_information(info: &[f64], n: usize, rows: std::ops::Range<usize>) -> f64 {
    let diag = upper_diagonal(n);
    let picked: Vec<f64> = rows.map(|r| info[diag[r]]).collect();
    // isotropic blocks come back exactly; averaging equal values can drift by an ulp
    if picked.iter().all(|v| *v == picked[0]) {
        return picked[0];
    }
    picked.iter().sum::<f64>() / picked.len() as f64
}

/// Row-major offsets of the diagonal within the upper triangle of an `n × n` matrix.
fn upper_diagonal(n: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(n);
    let mut offset = 0;
    for r in 0..n {
        out.push(offset);
        offset += n - r;
    }
    out
}

pub fn parse_g2o(text: &str, origin: &str) -> Result<G2oGraph> {
    let mut group: Option<(GroupKind, usize)> = None;
    let mut vertices = BTreeSet::new();
    let mut edges = Vec::new();
    let mut skipped = BTreeMap::new();
    let mut set_group = |g: GroupKind, line: usize| -> Result<()> {
        match group {
            Some((seen, first)) if seen != g => {
                Err(parse_error(origin, line, format!("{g} record in a file whose line {first} was {seen}")))
            }
            Some(_) => Ok(()),
            None => {
                group = Some((g, line));
                Ok(())
            }
        }
    };
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let f: Vec<&str> = raw.split_whitespace().collect();
        let Some(&tag) = f.first() else { continue };
        if tag.starts_with('#') {
            continue;
        }
        match tag {
            "VERTEX_SE3:QUAT" | "VERTEX_SE2" => {
                set_group(if tag == "VERTEX_SE2" { GroupKind::So2 } else { GroupKind::So3 }, line)?;
                let need = if tag == "VERTEX_SE2" { 5 } else { 9 };
                if f.len() < need {
                    return Err(parse_error(origin, line, format!("{tag} needs {need} fields, got {}", f.len())));
                }
                vertices.insert(id(f[1], origin, line)?);
            }
            "EDGE_SE3:QUAT" => {
                set_group(GroupKind::So3, line)?;
                if f.len() != 3 + 7 + 21 {
                    return Err(parse_error(origin, line, format!("EDGE_SE3:QUAT needs 31 fields, got {}", f.len())));
                }
                let v = numbers(&f[3..], origin, line)?;
                // pose is x y z qx qy qz qw
                let rotation = Rotation::from_quaternion(v[6], v[3], v[4], v[5])
                    .map_err(|e| parse_error(origin, line, e.to_string()))?;
                let kappa = mean_information(&v[7..], 6, 3..6);
                edges.push(RawEdge { line, a: id(f[1], origin, line)?, b: id(f[2], origin, line)?, rotation, kappa });
            }
            "EDGE_SE2" => {
                set_group(GroupKind::So2, line)?;
                if f.len() != 3 + 3 + 6 {
                    return Err(parse_error(origin, line, format!("EDGE_SE2 needs 12 fields, got {}", f.len())));
                }
                let v = numbers(&f[3..], origin, line)?;
                if !v[2].is_finite() {
                    return Err(parse_error(origin, line, "non-finite angle"));
                }
                let kappa = mean_information(&v[3..], 3, 2..3);
                edges.push(RawEdge {
                    line,
                    a: id(f[1], origin, line)?,
                    b: id(f[2], origin, line)?,
                    rotation: Rotation::so2(v[2]),
                    kappa,
                });
            }
            other => *skipped.entry(other.to_string()).or_insert(0) += 1,
        }
    }
    let (group, _) = group.ok_or_else(|| parse_error(origin, 1, "no SE2 or SE3 records"))?;
    for e in &edges {
        vertices.insert(e.a);
        vertices.insert(e.b);
    }
    let ids: Vec<u64> = vertices.into_iter().collect();
    let index: BTreeMap<u64, usize> = ids.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    let mut graph = MeasurementGraph::new(group, ids.len());
    for e in edges {
        graph
            .add_edge(index[&e.a], index[&e.b], e.rotation, e.kappa)
            .map_err(|err| parse_error(origin, e.line, err.to_string()))?;
    }
    for (tag, count) in &skipped {
        log::info!("{origin}: skipped {count} `{tag}` records");
    }
    Ok(G2oGraph { graph, ids, skipped })
}

/// Writes `graph` as a g2o subset: identity vertices, zero translations and an
/// isotropic information matrix equal to `κ`.
pub fn write_g2o(graph: &MeasurementGraph) -> String {
    let mut out = String::new();
    for i in 0..graph.node_count {
        match graph.group {
            GroupKind::So2 => writeln!(out, "VERTEX_SE2 {i} 0 0 0").unwrap(),
            GroupKind::So3 => writeln!(out, "VERTEX_SE3:QUAT {i} 0 0 0 0 0 0 1").unwrap(),
        }
    }
    for e in graph.edges() {
        let n = match graph.group {
            GroupKind::So2 => {
                write!(out, "EDGE_SE2 {} {} 0 0 {}", e.i, e.j, e.measurement.as_angle().expect("SO2 edge")).unwrap();
                3
            }
            GroupKind::So3 => {
                let q = e.measurement.as_quaternion().expect("SO3 edge");
                write!(out, "EDGE_SE3:QUAT {} {} 0 0 0 {} {} {} {}", e.i, e.j, q.i, q.j, q.k, q.w).unwrap();
                6
            }
        };
        for r in 0..n {
            for c in r..n {
                write!(out, " {}", if r == c { e.kappa } else { 0.0 }).unwrap();
            }
        }
        out.push('\n');
    }
    out
}
