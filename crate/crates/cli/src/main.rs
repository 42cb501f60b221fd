use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use irrepsync::SyncError;
use irrepsync_cli::commands::{
    denoised_text, estimate_text, generate_files, load_graph, load_rotations, parse_edge, posterior_csv, run_eval,
    run_solve, InputFormat, GRAPH_FILE, MANIFEST_FILE, TRUTH_FILE,
};
use irrepsync_cli::config::KeyValues;
use irrepsync_cli::settings::{solver_config, synthesis_config, SolverFlags, SynthesisFlags};
use irrepsync_cli::sweep::{run_sweep, sweep_csv, Method, SweepConfig};
use irrepsync_cli::{CliError, Result};

#[derive(Parser)]
#[command(name = "irrepsync", version, about = "Rotation averaging by multi-irreducible spectral synchronization")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// More log output; repeat for debug.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a synthetic instance and write graph, ground truth and manifest.
    Generate {
        /// `key = value` file; flags override it
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        synthesis: SynthesisFlags,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the full pipeline on a graph file.
    Solve {
        /// Text graph file or `.g2o` pose graph
        graph: PathBuf,
        /// `key = value` file; flags override it
        #[arg(long)]
        config: Option<PathBuf>,
        /// text or g2o (default: by extension).
        #[arg(long)]
        format: Option<InputFormat>,
        /// Give every edge this concentration, ignoring file values.
        #[arg(long)]
        uniform_kappa: Option<f64>,
        /// Ground-truth NODE file; adds error metrics to the report.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverFlags,
        /// Dump grid samples of |D_ij|² for edge `i-j` (repeatable).
        #[arg(long = "posterior", value_parser = parse_edge)]
        posteriors: Vec<(usize, usize)>,
        /// Grid step of posterior dumps (default: the argmax grid).
        #[arg(long)]
        posterior_res: Option<f64>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare an estimate with ground truth.
    Eval {
        /// Ground-truth NODE file
        truth: PathBuf,
        /// Estimated NODE file
        estimate: PathBuf,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Average errors over seeds for each method and corruption level.
    Sweep {
        /// `key = value` file; flags override it
        #[arg(long)]
        config: Option<PathBuf>,
        /// Instances per cell
        #[arg(long)]
        seeds: Option<usize>,
        /// First instance seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated corruption fractions.
        #[arg(long, value_delimiter = ',')]
        corruptions: Option<Vec<f64>>,
        /// Comma-separated methods, e.g. `baseline,cauchy-l8`.
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<Method>>,
        /// Output CSV file.
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(path: Option<&Path>) -> Result<KeyValues> {
    match path {
        None => Ok(KeyValues::empty()),
        Some(p) => KeyValues::parse(&irrepsync_cli::error::read_file(p)?, &p.display().to_string()),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })
}

fn write(path: &Path, contents: &str) -> Result<()> {
    irrepsync_cli::error::write_file(path, contents.as_bytes())
}

fn init_threads(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start {n} worker threads: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { config, synthesis, out } => {
            let mut kv = load_config(config.as_deref())?;
            let cfg = synthesis_config(&mut kv, &synthesis)?;
            kv.finish()?;
            init_threads(cli.threads)?;
            let files = generate_files(&cfg)?;
            create_dir(&out)?;
            write(&out.join(GRAPH_FILE), &files.graph)?;
            write(&out.join(TRUTH_FILE), &files.truth)?;
            write(&out.join(MANIFEST_FILE), &files.manifest)?;
            log::info!("wrote {} edges to {}", files.instance.graph.edge_count(), out.display());
        }
        Command::Solve { graph, config, format, uniform_kappa, truth, solver, posteriors, posterior_res, out } => {
            let mut kv = load_config(config.as_deref())?;
            let (cfg, threads) = solver_config(&mut kv, &solver)?;
            kv.finish()?;
            init_threads(cli.threads.or(threads))?;
            let input = load_graph(&graph, format, uniform_kappa)?;
            let truth = truth.as_deref().map(load_rotations).transpose()?;
            let result = run_solve(input, truth, &cfg)?;
            let resolution = posterior_res.unwrap_or(result.report.diagnostics.grid_resolution);
            let dumps = posteriors
                .iter()
                .map(|&(i, j)| posterior_csv(&result.solution, i, j, resolution).map(|csv| (i, j, csv)))
                .collect::<Result<Vec<_>>>()?;
            // all writes happen after the parallel work is done
            create_dir(&out)?;
            write(&out.join("estimate.txt"), &estimate_text(&result.solution))?;
            write(&out.join("denoised.txt"), &denoised_text(&result.solution)?)?;
            write(
                &out.join("report.json"),
                &(serde_json::to_string_pretty(&result.report).expect("report serialises") + "\n"),
            )?;
            for (i, j, csv) in dumps {
                write(&out.join(format!("posterior_{i}_{j}.csv")), &csv)?;
            }
            if let Some(m) = &result.report.metrics {
                println!("d_F = {:.6}  d_inf = {:.6}", m.d_f, m.d_inf);
            }
        }
        Command::Eval { truth, estimate, out } => {
            let report = run_eval(&load_rotations(&truth)?, &load_rotations(&estimate)?)?;
            let json = serde_json::to_string_pretty(&report).expect("report serialises") + "\n";
            match out {
                Some(path) => write(&path, &json)?,
                None => print!("{json}"),
            }
        }
        Command::Sweep { config, seeds, seed, corruptions, methods, out } => {
            let mut kv = load_config(config.as_deref())?;
            let threads: Option<usize> = kv.take("threads")?;
            let mut cfg = SweepConfig::from_config(&mut kv)?;
            kv.finish()?;
            cfg.seeds = seeds.unwrap_or(cfg.seeds);
            cfg.base_seed = seed.unwrap_or(cfg.base_seed);
            cfg.corruptions = corruptions.unwrap_or(cfg.corruptions);
            cfg.methods = methods.unwrap_or(cfg.methods);
            cfg.validate()?;
            init_threads(cli.threads.or(threads))?;
            let rows = run_sweep(&cfg);
            write(&out, &sweep_csv(&cfg, &rows)?)?;
            for r in &rows {
                println!("{:<14} {:>5.2}  d_F {:.4} ({:.4})", r.method, r.corruption, r.mean_d_f, r.mean_d_inf);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Usage(_) | CliError::Parse { .. } | CliError::Sync(SyncError::Usage(_)) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
