//! Plain-text graph format.
//!
//! ```text
//! SO3 4
//! EDGE 0 1 0.98 0.1 0.0 -0.17 25
//! NODE 0 1 0 0 0
//! ```
//!
//! The header gives the group and node count. `EDGE i j <rotation> κ` is a
//! measurement of `g_i⁻¹ g_j`; `NODE i <rotation>` is an absolute rotation.
//! Rotations are an angle for SO(2) and a `w x y z` quaternion for SO(3).

use std::fmt::Write;

use irrepsync::{GroupKind, MeasurementGraph, Rotation};

use crate::error::{parse_error, CliError, Result};

/// Contents of a graph file; either section may be empty.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphFile {
    pub graph: MeasurementGraph,
    /// Rotations from `NODE` lines, indexed by node.
    pub nodes: Vec<Option<Rotation>>,
}

impl GraphFile {
    /// All node rotations, or an error naming the first missing node.
    pub fn rotations(&self, origin: &str) -> Result<Vec<Rotation>> {
        self.nodes
            .iter()
            .enumerate()
            .map(|(i, r)| r.ok_or_else(|| CliError::Usage(format!("{origin}: no NODE line for node {i}"))))
            .collect()
    }
}

fn rotation_fields(group: GroupKind) -> usize {
    match group {
        GroupKind::So2 => 1,
        GroupKind::So3 => 4,
    }
}

fn parse_rotation(group: GroupKind, fields: &[&str], origin: &str, line: usize) -> Result<Rotation> {
    let values = fields
        .iter()
        .map(|f| f.parse::<f64>().map_err(|e| parse_error(origin, line, format!("bad number `{f}`: {e}"))))
        .collect::<Result<Vec<f64>>>()?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(parse_error(origin, line, "non-finite rotation component"));
    }
    Ok(match group {
        GroupKind::So2 => Rotation::so2(values[0]),
        GroupKind::So3 => Rotation::from_quaternion(values[0], values[1], values[2], values[3])
            .map_err(|e| parse_error(origin, line, e.to_string()))?,
    })
}

fn parse_index(field: &str, n: usize, origin: &str, line: usize) -> Result<usize> {
    let i: usize = field.parse().map_err(|e| parse_error(origin, line, format!("bad node index `{field}`: {e}")))?;
    if i >= n {
        return Err(parse_error(origin, line, format!("node {i} outside 0..{n}")));
    }
    Ok(i)
}

pub fn parse_graph(text: &str, origin: &str) -> Result<GraphFile> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (line, header) = lines.next().ok_or_else(|| parse_error(origin, 1, "empty graph file"))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 2 {
        return Err(parse_error(origin, line, format!("expected header `SO2|SO3 <nodes>`, got `{header}`")));
    }
    let group: GroupKind =
        head[0].parse().map_err(|e: irrepsync::SyncError| parse_error(origin, line, e.to_string()))?;
    let n: usize =
        head[1].parse().map_err(|e| parse_error(origin, line, format!("bad node count `{}`: {e}", head[1])))?;
    let r = rotation_fields(group);
    let mut graph = MeasurementGraph::new(group, n);
    let mut nodes = vec![None; n];
    for (line, content) in lines {
        let f: Vec<&str> = content.split_whitespace().collect();
        match f[0] {
            "EDGE" => {
                if f.len() != 4 + r {
                    return Err(parse_error(
                        origin,
                        line,
                        format!("{group} EDGE needs {} fields, got {}", 4 + r, f.len()),
                    ));
                }
                let i = parse_index(f[1], n, origin, line)?;
                let j = parse_index(f[2], n, origin, line)?;
                let m = parse_rotation(group, &f[3..3 + r], origin, line)?;
                let kappa: f64 =
                    f[3 + r].parse().map_err(|e| parse_error(origin, line, format!("bad concentration: {e}")))?;
                graph.add_edge(i, j, m, kappa).map_err(|e| parse_error(origin, line, e.to_string()))?;
            }
            "NODE" => {
                if f.len() != 2 + r {
                    return Err(parse_error(
                        origin,
                        line,
                        format!("{group} NODE needs {} fields, got {}", 2 + r, f.len()),
                    ));
                }
                let i = parse_index(f[1], n, origin, line)?;
                if nodes[i].is_some() {
                    return Err(parse_error(origin, line, format!("node {i} given twice")));
                }
                nodes[i] = Some(parse_rotation(group, &f[2..], origin, line)?);
            }
            other => return Err(parse_error(origin, line, format!("unknown record `{other}`"))),
        }
    }
    Ok(GraphFile { graph, nodes })
}

fn push_rotation(out: &mut String, r: &Rotation) {
    match (r.as_angle(), r.as_quaternion()) {
        (Some(a), _) => write!(out, " {a}").unwrap(),
        (_, Some(q)) => write!(out, " {} {} {} {}", q.w, q.i, q.j, q.k).unwrap(),
        _ => unreachable!(),
    }
}

/// Header plus one `EDGE` line per measurement, in storage order.
pub fn write_edges(graph: &MeasurementGraph) -> String {
    let mut out = format!("{} {}\n", graph.group, graph.node_count);
    for e in graph.edges() {
        write!(out, "EDGE {} {}", e.i, e.j).unwrap();
        push_rotation(&mut out, &e.measurement);
        writeln!(out, " {}", e.kappa).unwrap();
    }
    out
}

/// Header plus one `NODE` line per rotation.
pub fn write_nodes(group: GroupKind, rotations: &[Rotation]) -> String {
    let mut out = format!("{} {}\n", group, rotations.len());
    for (i, r) in rotations.iter().enumerate() {
        write!(out, "NODE {i}").unwrap();
        push_rotation(&mut out, r);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_edges_and_nodes() {
        let text = "# demo\nSO2 3\nEDGE 0 1 0.5 10\nEDGE 2 1 1.0 4  # reversed\nNODE 1 0.25\n";
        let f = parse_graph(text, "g").unwrap();
        assert_eq!(f.graph.edge_count(), 2);
        assert_eq!(f.graph.edges()[1].i, 1);
        assert_eq!(f.nodes[1], Some(Rotation::so2(0.25)));
        assert!(f.rotations("g").is_err());
    }

    #[test]
    fn malformed_lines_name_the_line() {
        for (text, line) in [
            ("SO3 2\nEDGE 0 1 1 0 0 25\n", 2),
            ("SO2 2\n\nEDGE 0 5 0.1 1\n", 3),
            ("SO2 2\nEDGE 0 1 0.1 -1\n", 2),
            ("SO2 2\nEDGE 0 1 x 1\n", 2),
            ("SO4 2\n", 1),
            ("SO2 2\nVERTEX 0\n", 2),
            ("SO2 2\nNODE 0 1\nNODE 0 2\n", 3),
        ] {
            match parse_graph(text, "g") {
                Err(CliError::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn writing_round_trips_exactly() {
        let mut g = MeasurementGraph::new(GroupKind::So3, 3);
        g.add_edge(0, 1, Rotation::from_quaternion(0.3, -0.2, 0.9, 0.1).unwrap(), 12.5).unwrap();
        g.add_edge(1, 2, Rotation::from_quaternion(1.0, 0.0, 0.0, 0.0).unwrap(), 1e-3).unwrap();
        let back = parse_graph(&write_edges(&g), "g").unwrap();
        assert_eq!(back.graph, g);

        let rs = vec![Rotation::so2(0.1), Rotation::so2(6.2)];
        let back = parse_graph(&write_nodes(GroupKind::So2, &rs), "g").unwrap();
        assert_eq!(back.rotations("g").unwrap(), rs);
    }
}
