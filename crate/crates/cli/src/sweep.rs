//! Parameter sweeps: methods × corruption levels, averaged over seeds.

use std::fmt;
use std::str::FromStr;

use irrepsync::{
    error_report, generate, Concentration, GroupKind, Kernel, LossKind, LossSpec, SolverConfig, SynthesisConfig,
    Topology,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::KeyValues;
use crate::error::{CliError, Result};
use crate::settings::{DEFAULT_K_LOCAL, DEFAULT_NODES, DEFAULT_P_REWIRE};

/// `baseline`, or `<loss>-l<order>` such as `cauchy-l8`.
#[derive(Clone, Debug)]
pub enum Method {
    Baseline,
    Loss { kind: LossKind, max_order: usize },
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Baseline => f.write_str("baseline"),
            Method::Loss { kind, max_order } => write!(f, "{}-l{max_order}", kind.name()),
        }
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim().to_ascii_lowercase();
        if s == "baseline" {
            return Ok(Method::Baseline);
        }
        let (loss, order) =
            s.rsplit_once("-l").ok_or_else(|| format!("expected `baseline` or `<loss>-l<order>`, got `{s}`"))?;
        let kind = loss.parse::<LossKind>().map_err(|e| e.to_string())?;
        let max_order = order.parse().map_err(|e| format!("bad order in `{s}`: {e}"))?;
        Ok(Method::Loss { kind, max_order })
    }
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub group: GroupKind,
    pub nodes: usize,
    pub k_local: usize,
    pub p_rewire: f64,
    pub kappa: f64,
    pub corruptions: Vec<f64>,
    pub methods: Vec<Method>,
    pub seeds: usize,
    pub base_seed: u64,
    pub kernel: Kernel,
    pub grid_resolution: Option<f64>,
    pub refine_steps: usize,
}

impl SweepConfig {
    pub fn defaults(group: GroupKind) -> Self {
        SweepConfig {
            group,
            nodes: DEFAULT_NODES,
            k_local: DEFAULT_K_LOCAL,
            p_rewire: DEFAULT_P_REWIRE,
            kappa: irrepsync::synthesis::default_kappa(group),
            corruptions: vec![0.0, 0.1, 0.2, 0.3],
            methods: vec![
                Method::Baseline,
                Method::Loss { kind: LossKind::Cauchy, max_order: 3 },
                Method::Loss { kind: LossKind::Cauchy, max_order: 8 },
            ],
            seeds: 10,
            base_seed: 0,
            kernel: Kernel::Fejer,
            grid_resolution: None,
            refine_steps: irrepsync::consensus::DEFAULT_REFINE_STEPS,
        }
    }

    pub fn from_config(kv: &mut KeyValues) -> Result<Self> {
        let group = kv.take("group")?.unwrap_or(GroupKind::So3);
        let d = SweepConfig::defaults(group);
        let cfg = SweepConfig {
            group,
            nodes: kv.take("nodes")?.unwrap_or(d.nodes),
            k_local: kv.take("k_local")?.unwrap_or(d.k_local),
            p_rewire: kv.take("p_rewire")?.unwrap_or(d.p_rewire),
            kappa: kv.take("kappa")?.unwrap_or(d.kappa),
            corruptions: kv.take_list("corruptions")?.unwrap_or(d.corruptions),
            methods: kv.take_list("methods")?.unwrap_or(d.methods),
            seeds: kv.take("seeds")?.unwrap_or(d.seeds),
            base_seed: kv.take("seed")?.unwrap_or(d.base_seed),
            kernel: kv.take("kernel")?.unwrap_or(d.kernel),
            grid_resolution: kv.take("grid_res")?.or(d.grid_resolution),
            refine_steps: kv.take("refine_steps")?.unwrap_or(d.refine_steps),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds == 0 || self.methods.is_empty() || self.corruptions.is_empty() {
            return Err(CliError::Usage("a sweep needs at least one seed, method and corruption level".into()));
        }
        for c in &self.corruptions {
            self.synthesis(*c, self.base_seed).validate()?;
        }
        for m in &self.methods {
            self.solver(m).validate()?;
        }
        Ok(())
    }

    fn synthesis(&self, corruption: f64, seed: u64) -> SynthesisConfig {
        let mut cfg = SynthesisConfig::new(
            self.group,
            self.nodes,
            Topology::SmallWorld { k_local: self.k_local, p_rewire: self.p_rewire },
        );
        cfg.kappa = Concentration::Global(self.kappa);
        cfg.corruption_fraction = corruption;
        cfg.seed = seed;
        cfg
    }

    fn solver(&self, method: &Method) -> SolverConfig {
        let base = SolverConfig {
            kernel: self.kernel,
            grid_resolution: self.grid_resolution,
            refine_steps: self.refine_steps,
            ..SolverConfig::default()
        };
        match method {
            Method::Baseline => SolverConfig { baseline: true, ..base },
            Method::Loss { kind, max_order } => {
                SolverConfig { max_order: *max_order, loss: LossSpec::new(kind.clone()), ..base }
            }
        }
    }
}

/// One cell of the table. Means are NaN when any seed failed.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub method: String,
    pub corruption: f64,
    pub mean_d_f: f64,
    pub mean_d_inf: f64,
    pub runs: usize,
    pub failures: usize,
}

/// Runs every (method, corruption, seed) triple in parallel; rows come back in
/// method-major order regardless of scheduling.
pub fn run_sweep(cfg: &SweepConfig) -> Vec<SweepRow> {
    let jobs: Vec<(usize, usize, u64)> = (0..cfg.methods.len())
        .flat_map(|m| (0..cfg.corruptions.len()).flat_map(move |c| (0..cfg.seeds as u64).map(move |s| (m, c, s))))
        .collect();
    let results: Vec<Option<(f64, f64)>> = jobs
        .par_iter()
        .map(|&(m, c, s)| {
            let seed = cfg.base_seed + s;
            let run = || -> irrepsync::Result<(f64, f64)> {
                let inst = generate(&cfg.synthesis(cfg.corruptions[c], seed))?;
                let sol = irrepsync::solve(&inst.graph, &cfg.solver(&cfg.methods[m]))?;
                let r = error_report(&inst.truth, &sol.estimate.rotations)?;
                Ok((r.d_f, r.d_inf))
            };
            match run() {
                Ok(v) => Some(v),
                Err(e) => {
                    log::error!("{} at corruption {} seed {seed}: {e}", cfg.methods[m], cfg.corruptions[c]);
                    None
                }
            }
        })
        .collect();
    results
        .chunks(cfg.seeds)
        .enumerate()
        .map(|(cell, runs)| {
            let (m, c) = (cell / cfg.corruptions.len(), cell % cfg.corruptions.len());
            let ok: Vec<(f64, f64)> = runs.iter().flatten().copied().collect();
            let failures = runs.len() - ok.len();
            let mean = |f: fn(&(f64, f64)) -> f64| {
                if failures > 0 {
                    f64::NAN
                } else {
                    ok.iter().map(f).sum::<f64>() / ok.len() as f64
                }
            };
            SweepRow {
                method: cfg.methods[m].to_string(),
                corruption: cfg.corruptions[c],
                mean_d_f: mean(|r| r.0),
                mean_d_inf: mean(|r| r.1),
                runs: runs.len(),
                failures,
            }
        })
        .collect()
}

/// CSV with `#` metadata lines ahead of the header row.
pub fn sweep_csv(cfg: &SweepConfig, rows: &[SweepRow]) -> Result<String> {
    let mut out = format!(
        "# irrepsync {} sweep\n# group={} nodes={} topology=small-world k_local={} p_rewire={} kappa={} kernel={} seeds={} base_seed={}\n",
        env!("CARGO_PKG_VERSION"),
        cfg.group,
        cfg.nodes,
        cfg.k_local,
        cfg.p_rewire,
        cfg.kappa,
        cfg.kernel,
        cfg.seeds,
        cfg.base_seed
    );
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Usage(format!("writing sweep CSV: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(format!("writing sweep CSV: {e}")))?;
    out.push_str(std::str::from_utf8(&bytes).expect("csv output is UTF-8"));
    Ok(out)
}
