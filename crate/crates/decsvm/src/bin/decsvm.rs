use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

use decsvm::harness::{self, ExperimentConfig};

#[derive(Parser)]
#[command(name = "decsvm", about = "Decentralized penalized convoluted SVM experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every mode; each one overrides the config file.
#[derive(Args)]
struct Common {
    /// TOML experiment config; defaults reproduce the baseline setting.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    base_seed: Option<u64>,
    #[arg(long)]
    replications: Option<usize>,
    /// Kernel name: uniform | gaussian | logistic | laplacian | epanechnikov
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Communication rounds for the comparison studies.
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    p_flip: Option<f64>,
    #[arg(long)]
    p_c: Option<f64>,
    #[arg(long)]
    lambda_grid_size: Option<usize>,
}

impl Common {
    fn build(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_toml_file(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = &self.output_dir {
            cfg.output_dir = v.clone();
        }
        if let Some(v) = self.base_seed {
            cfg.base_seed = v;
        }
        if let Some(v) = self.replications {
            cfg.replications = v;
        }
        if let Some(v) = &self.kernel {
            cfg.kernel = v.parse().map_err(anyhow::Error::msg)?;
        }
        if let Some(v) = self.bandwidth {
            cfg.bandwidth = Some(v);
        }
        if let Some(v) = self.rounds {
            cfg.admm.budget_rounds = v;
        }
        if let Some(v) = self.p {
            cfg.synth.p = v;
        }
        if let Some(v) = self.n {
            cfg.synth.n = v;
        }
        if let Some(v) = self.m {
            cfg.synth.m = v;
        }
        if let Some(v) = self.rho {
            cfg.synth.rho = v;
        }
        if let Some(v) = self.p_flip {
            cfg.synth.p_flip = v;
        }
        if let Some(v) = self.p_c {
            cfg.graph.p_c = v;
        }
        if let Some(v) = self.lambda_grid_size {
            cfg.tuning.grid_size = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Per-kernel convergence traces toward the pooled reference.
    Converge {
        #[command(flatten)]
        common: Common,
        /// Trace horizon in rounds.
        #[arg(long)]
        trace_rounds: Option<usize>,
    },
    /// Replicated five-method comparison on synthetic data.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Penalty-grid sweep report.
    Tune {
        #[command(flatten)]
        common: Common,
    },
    /// Communities-and-crime comparison over random splits.
    Realdata {
        #[command(flatten)]
        common: Common,
        /// Raw data file (comma separated, identifiers first, target last).
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        edge_list: Option<PathBuf>,
        #[arg(long)]
        splits: Option<usize>,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Converge { common, trace_rounds } => {
            let mut cfg = common.build()?;
            if let Some(t) = trace_rounds {
                cfg.admm.converge_rounds = t;
            }
            let traces = harness::run_converge(&cfg)?;
            for (kernel, trace) in &traces {
                let last = trace.dist_to_ref.last().copied().unwrap_or(f64::NAN);
                println!(
                    "{}: {} rounds, final distance to reference {last:.6e}",
                    kernel.name(),
                    trace.rounds.len()
                );
            }
            println!("traces written to {}", cfg.output_dir.display());
        }
        Command::Simulate { common } => {
            let cfg = common.build()?;
            let out = harness::run_simulate(&cfg)?;
            println!("{:<8} {:>12} {:>8} {:>10}", "method", "est_error", "f1", "support");
            for s in &out.summary {
                println!(
                    "{:<8} {:>12.4} {:>8.4} {:>10.2}",
                    s.method, s.mean_error, s.mean_f1, s.mean_support
                );
            }
            println!("rows written to {}", cfg.output_dir.join("results.csv").display());
        }
        Command::Tune { common } => {
            let cfg = common.build()?;
            let (lambdas, crit, pick) = harness::run_tune(&cfg)?;
            for (i, (l, c)) in lambdas.iter().zip(crit.iter()).enumerate() {
                let mark = if i == pick { " <-- selected" } else { "" };
                println!("lambda {l:.6} criterion {c:.6}{mark}");
            }
        }
        Command::Realdata { common, data, edge_list, splits } => {
            let mut cfg = common.build()?;
            if let Some(d) = data {
                cfg.realdata.data_path = d;
            }
            if let Some(e) = edge_list {
                cfg.realdata.edge_list = e;
            }
            if let Some(s) = splits {
                cfg.realdata.splits = s;
            }
            let out = harness::run_realdata(&cfg)?;
            println!("{:<8} {:<8} {:>10} {:>10}", "p_flip", "method", "accuracy", "support");
            for ((flip, method), (acc, supp)) in &out.summary {
                println!("{flip:<8} {method:<8} {acc:>10.4} {supp:>10.2}");
            }
        }
    }
    Ok(())
}
