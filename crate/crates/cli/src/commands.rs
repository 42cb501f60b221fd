//! The work behind each subcommand, kept free of argument parsing so tests
//! can drive it directly.

use std::collections::BTreeMap;
use std::path::Path;

use irrepsync::consensus::{argmax_on_group, edge_posterior, posterior_samples, ArgmaxOptions};
use irrepsync::group::wigner::zyz_angles;
use irrepsync::{
    error_report, generate, ErrorReport, Instance, MeasurementGraph, Rotation, Solution, SolveDiagnostics,
    SolverConfig, SynthesisConfig,
};
use serde::Serialize;

use crate::error::{read_file, CliError, Result};
use crate::g2o::parse_g2o;
use crate::graph_file::{parse_graph, write_edges, write_nodes};

#[derive(Serialize)]
struct Manifest<'a> {
    seed: u64,
    config: &'a SynthesisConfig,
    nodes: usize,
    edges: usize,
    corrupted_count: usize,
    /// Per edge, in file order.
    corrupted: &'a [bool],
    graph_file: &'a str,
    truth_file: &'a str,
}

pub struct GeneratedFiles {
    pub instance: Instance,
    pub graph: String,
    pub truth: String,
    pub manifest: String,
}

pub const GRAPH_FILE: &str = "graph.txt";
pub const TRUTH_FILE: &str = "truth.txt";
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn generate_files(cfg: &SynthesisConfig) -> Result<GeneratedFiles> {
    let instance = generate(cfg)?;
    let manifest = Manifest {
        seed: cfg.seed,
        config: cfg,
        nodes: instance.graph.node_count,
        edges: instance.graph.edge_count(),
        corrupted_count: instance.corrupted.iter().filter(|c| **c).count(),
        corrupted: &instance.corrupted,
        graph_file: GRAPH_FILE,
        truth_file: TRUTH_FILE,
    };
    let manifest = serde_json::to_string_pretty(&manifest).expect("manifest serialises") + "\n";
    Ok(GeneratedFiles {
        graph: write_edges(&instance.graph),
        truth: write_nodes(instance.graph.group, &instance.truth),
        manifest,
        instance,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Text,
    G2o,
}

impl std::str::FromStr for InputFormat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "text" | "txt" => Ok(InputFormat::Text),
            "g2o" => Ok(InputFormat::G2o),
            other => Err(format!("unknown format `{other}`, expected text or g2o")),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InputSummary {
    pub path: String,
    pub format: InputFormat,
    /// g2o record types that were ignored, with counts.
    pub skipped_records: BTreeMap<String, usize>,
    pub uniform_kappa: Option<f64>,
}

pub struct LoadedGraph {
    pub graph: MeasurementGraph,
    /// Ground truth when the file carries `NODE` lines for every node.
    pub truth: Option<Vec<Rotation>>,
    pub summary: InputSummary,
}

/// Reads a graph in either format; `.g2o` files are detected by extension.
pub fn load_graph(path: &Path, format: Option<InputFormat>, uniform_kappa: Option<f64>) -> Result<LoadedGraph> {
    let text = read_file(path)?;
    let origin = path.display().to_string();
    let format = format.unwrap_or(if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("g2o")) {
        InputFormat::G2o
    } else {
        InputFormat::Text
    });
    let (graph, truth, skipped) = match format {
        InputFormat::Text => {
            let f = parse_graph(&text, &origin)?;
            let truth = f.nodes.iter().all(Option::is_some).then(|| f.nodes.iter().map(|r| r.unwrap()).collect());
            (f.graph, truth.filter(|t: &Vec<Rotation>| !t.is_empty()), BTreeMap::new())
        }
        InputFormat::G2o => {
            let g = parse_g2o(&text, &origin)?;
            (g.graph, None, g.skipped)
        }
    };
    let graph = match uniform_kappa {
        Some(k) => with_uniform_kappa(&graph, k)?,
        None => graph,
    };
    Ok(LoadedGraph {
        graph,
        truth,
        summary: InputSummary { path: origin, format, skipped_records: skipped, uniform_kappa },
    })
}

pub fn with_uniform_kappa(graph: &MeasurementGraph, kappa: f64) -> Result<MeasurementGraph> {
    let mut g = MeasurementGraph::new(graph.group, graph.node_count);
    for e in graph.edges() {
        g.add_edge(e.i, e.j, e.measurement, kappa)?;
    }
    Ok(g)
}

pub fn load_rotations(path: &Path) -> Result<Vec<Rotation>> {
    let origin = path.display().to_string();
    parse_graph(&read_file(path)?, &origin)?.rotations(&origin)
}

#[derive(Serialize)]
pub struct ConfigEcho {
    pub max_order: usize,
    pub loss: String,
    pub lambda: irrepsync::LambdaPolicy,
    pub kernel: irrepsync::Kernel,
    pub grid_resolution: Option<f64>,
    pub refine_steps: usize,
    pub seed: u64,
    pub solver: String,
    pub baseline: bool,
    pub threads: usize,
}

impl ConfigEcho {
    pub fn new(cfg: &SolverConfig) -> Self {
        let cfg = cfg.effective();
        ConfigEcho {
            max_order: cfg.max_order,
            loss: cfg.loss.kind.name().to_string(),
            lambda: cfg.loss.lambda,
            kernel: cfg.kernel,
            grid_resolution: cfg.grid_resolution,
            refine_steps: cfg.refine_steps,
            seed: cfg.seed,
            solver: format!("{:?}", cfg.solver).to_ascii_lowercase(),
            baseline: cfg.baseline,
            threads: rayon::current_num_threads(),
        }
    }
}

#[derive(Serialize)]
pub struct SolveReport {
    pub input: InputSummary,
    pub config: ConfigEcho,
    pub diagnostics: SolveDiagnostics,
    /// Present when ground truth was supplied.
    pub metrics: Option<ErrorReport>,
}

pub struct SolveOutput {
    pub solution: Solution,
    pub report: SolveReport,
}

pub fn run_solve(input: LoadedGraph, truth: Option<Vec<Rotation>>, cfg: &SolverConfig) -> Result<SolveOutput> {
    let solution = irrepsync::solve(&input.graph, cfg)?;
    let truth = truth.or(input.truth);
    let metrics = truth.map(|t| error_report(&t, &solution.estimate.rotations)).transpose()?;
    let report = SolveReport {
        input: input.summary,
        config: ConfigEcho::new(cfg),
        diagnostics: solution.diagnostics.clone(),
        metrics,
    };
    Ok(SolveOutput { solution, report })
}

pub fn estimate_text(solution: &Solution) -> String {
    write_nodes(solution.denoised.group, &solution.estimate.rotations)
}

/// Denoised edges in the graph format, with unit concentration (the weight
/// the recovery step gives them).
pub fn denoised_text(solution: &Solution) -> Result<String> {
    Ok(write_edges(&solution.denoised.as_measurement_graph()?))
}

/// Parses `i-j` (or `i,j`).
pub fn parse_edge(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once(['-', ',']).ok_or_else(|| format!("expected `i-j`, got `{s}`"))?;
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("bad node `{x}`: {e}"));
    Ok((parse(a)?, parse(b)?))
}

#[derive(Serialize)]
struct So2Sample {
    angle: f64,
    distance_to_estimate: f64,
    value: f64,
}

#[derive(Serialize)]
struct So3Sample {
    alpha: f64,
    beta: f64,
    gamma: f64,
    distance_to_estimate: f64,
    value: f64,
}

/// Grid samples of `|D_ij|²` for one edge, with each sample's angular
/// distance to the denoised estimate.
pub fn posterior_csv(solution: &Solution, i: usize, j: usize, resolution: f64) -> Result<String> {
    let n = solution.denoised.node_count;
    if i >= n || j >= n || i == j {
        return Err(CliError::Usage(format!("posterior edge ({i}, {j}) is not a pair of distinct nodes in 0..{n}")));
    }
    let p = edge_posterior(&solution.blocks, i, j)?;
    let centre = match solution.denoised.estimate(i, j) {
        Some(r) => r,
        None => argmax_on_group(&p, &ArgmaxOptions::for_order(p.max_order()))?.0,
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    for (g, value) in posterior_samples(&p, resolution)? {
        let distance_to_estimate = g.angle_to(&centre)?;
        let res = match (g.as_angle(), g.as_quaternion()) {
            (Some(angle), _) => w.serialize(So2Sample { angle, distance_to_estimate, value }),
            (_, Some(q)) => {
                let (alpha, beta, gamma) = zyz_angles(q);
                w.serialize(So3Sample { alpha, beta, gamma, distance_to_estimate, value })
            }
            _ => unreachable!(),
        };
        res.map_err(|e| CliError::Usage(format!("writing posterior CSV: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(format!("writing posterior CSV: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn run_eval(truth: &[Rotation], estimate: &[Rotation]) -> Result<ErrorReport> {
    Ok(error_report(truth, estimate)?)
}
