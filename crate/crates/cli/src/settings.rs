//! Command settings: a config file supplies defaults, flags override them.

use clap::Args;
use irrepsync::consensus::DEFAULT_REFINE_STEPS;
use irrepsync::synthesis::default_kappa;
use irrepsync::{
    Concentration, GroupKind, Kernel, LossKind, LossSpec, SolverChoice, SolverConfig, SynthesisConfig, Topology,
};

use crate::config::KeyValues;
use crate::error::{CliError, Result};

fn parse_loss(s: &str) -> std::result::Result<LossKind, String> {
    s.parse::<LossKind>().map_err(|e| e.to_string())
}

fn parse_kernel(s: &str) -> std::result::Result<Kernel, String> {
    s.parse::<Kernel>().map_err(|e| e.to_string())
}

fn parse_group(s: &str) -> std::result::Result<GroupKind, String> {
    s.parse::<GroupKind>().map_err(|e| e.to_string())
}

#[derive(Clone, Debug, Default, Args)]
pub struct SolverFlags {
    /// Highest irrep order.
    #[arg(long)]
    pub lmax: Option<usize>,
    /// quadratic, cauchy or gmc.
    #[arg(long, value_parser = parse_loss)]
    pub loss: Option<LossKind>,
    /// Fixed robust-loss scale instead of the concentration fit.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// dirichlet or fejer.
    #[arg(long, value_parser = parse_kernel)]
    pub kernel: Option<Kernel>,
    /// Argmax grid step in radians.
    #[arg(long)]
    pub grid_res: Option<f64>,
    /// Golden-section iterations per line search
    #[arg(long)]
    pub refine_steps: Option<usize>,
    /// Seeds the iterative eigensolver's start block.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Order-1 quadratic spectral baseline.
    #[arg(long)]
    pub baseline: bool,
    /// auto, dense or lobpcg.
    #[arg(long)]
    pub solver: Option<String>,
}

/// Resolves a solver configuration; returns it with the requested thread count.
pub fn solver_config(kv: &mut KeyValues, flags: &SolverFlags) -> Result<(SolverConfig, Option<usize>)> {
    let defaults = SolverConfig::default();
    let lmax = kv.take("lmax")?;
    let loss: Option<LossKind> = kv.take("loss")?;
    let lambda = kv.take("lambda")?;
    let kernel = kv.take("kernel")?;
    let grid_res = kv.take("grid_res")?;
    let refine_steps = kv.take("refine_steps")?;
    let seed = kv.take("seed")?;
    let baseline = kv.take_bool("baseline")?;
    let solver: Option<String> = kv.take("solver")?;
    let threads = kv.take("threads")?;

    let kind = flags.loss.clone().or(loss).unwrap_or(defaults.loss.kind.clone());
    let loss = match flags.lambda.or(lambda) {
        Some(l) => LossSpec::with_fixed_lambda(kind, l),
        None => LossSpec::new(kind),
    };
    let seed = flags.seed.or(seed).unwrap_or(defaults.seed);
    let solver = match flags.solver.clone().or(solver).as_deref().map(str::to_ascii_lowercase).as_deref() {
        None | Some("auto") => SolverChoice::Auto,
        Some("dense") => SolverChoice::Dense,
        Some("lobpcg") => SolverChoice::Lobpcg { seed },
        Some(other) => {
            return Err(CliError::Usage(format!("unknown solver `{other}`, expected auto, dense or lobpcg")))
        }
    };
    let cfg = SolverConfig {
        max_order: flags.lmax.or(lmax).unwrap_or(defaults.max_order),
        loss,
        kernel: flags.kernel.or(kernel).unwrap_or(defaults.kernel),
        grid_resolution: flags.grid_res.or(grid_res),
        refine_steps: flags.refine_steps.or(refine_steps).unwrap_or(DEFAULT_REFINE_STEPS),
        seed,
        solver,
        baseline: flags.baseline || baseline.unwrap_or(false),
    };
    cfg.validate()?;
    Ok((cfg, threads))
}

#[derive(Clone, Debug, Default, Args)]
pub struct SynthesisFlags {
    /// SO2 or SO3.
    #[arg(long, value_parser = parse_group)]
    pub group: Option<GroupKind>,
    /// Number of nodes
    #[arg(long)]
    pub nodes: Option<usize>,
    /// complete or small-world.
    #[arg(long)]
    pub topology: Option<String>,
    /// Ring-lattice degree of the small-world topology.
    #[arg(long)]
    pub k_local: Option<usize>,
    /// Small-world rewiring probability.
    #[arg(long)]
    pub p_rewire: Option<f64>,
    /// Langevin concentration of every edge.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Fraction of edges replaced by Haar-random measurements.
    #[arg(long)]
    pub corruption: Option<f64>,
    /// Instance seed
    #[arg(long)]
    pub seed: Option<u64>,
}

pub const DEFAULT_NODES: usize = 50;
pub const DEFAULT_K_LOCAL: usize = 8;
pub const DEFAULT_P_REWIRE: f64 = 0.3;

pub fn synthesis_config(kv: &mut KeyValues, flags: &SynthesisFlags) -> Result<SynthesisConfig> {
    let group = kv.take("group")?;
    let nodes = kv.take("nodes")?;
    let topology: Option<String> = kv.take("topology")?;
    let k_local = kv.take("k_local")?;
    let p_rewire = kv.take("p_rewire")?;
    let kappa = kv.take("kappa")?;
    let corruption = kv.take("corruption")?;
    let seed = kv.take("seed")?;

    let group = flags.group.or(group).unwrap_or(GroupKind::So3);
    let topology = match flags
        .topology
        .clone()
        .or(topology)
        .as_deref()
        .map(|t| t.to_ascii_lowercase().replace('_', "-"))
        .as_deref()
    {
        None | Some("small-world") => Topology::SmallWorld {
            k_local: flags.k_local.or(k_local).unwrap_or(DEFAULT_K_LOCAL),
            p_rewire: flags.p_rewire.or(p_rewire).unwrap_or(DEFAULT_P_REWIRE),
        },
        Some("complete") => Topology::Complete,
        Some(other) => {
            return Err(CliError::Usage(format!("unknown topology `{other}`, expected complete or small-world")))
        }
    };
    let mut cfg = SynthesisConfig::new(group, flags.nodes.or(nodes).unwrap_or(DEFAULT_NODES), topology);
    cfg.kappa = Concentration::Global(flags.kappa.or(kappa).unwrap_or(default_kappa(group)));
    cfg.corruption_fraction = flags.corruption.or(corruption).unwrap_or(0.0);
    cfg.seed = flags.seed.or(seed).unwrap_or(0);
    cfg.validate()?;
    Ok(cfg)
}
