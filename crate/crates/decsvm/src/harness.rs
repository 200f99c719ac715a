//! Experiment driver: declarative configs, seeded replications, and the
//! CSV tables/series behind the simulation and real-data studies.

use ndarray::Array1;
use serde::{Deserialize, Serialize};
use sha2::Digest;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::admm::{hard_threshold_support, run_decsvm, AdmmConfig, IterationTrace};
use crate::baselines::{average_consensus, dsubgd, DsubgdConfig};
use crate::error::{DecsvmError, Result};
use crate::evaluate::{
    classification_accuracy, f1_score, lambda_grid, lambda_max_bound, mbic, network_estimation_error,
    select_lambda, support_of,
};
use crate::ingest::{binarize_and_partition, load_and_clean, RealDataConfig};
use crate::netgraph::Topology;
use crate::refsolver::{solve_csvm, PenaltySpec, SolveOptions};
use crate::smoothing::{bandwidth_default, KernelKind, SmoothedHingeLoss};
use crate::synthgen::{pool_shards, sample_shards, true_parameter, LabeledShard, SynthConfig};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GraphSettings {
    pub p_c: f64,
    /// Optional fixed topology (1-based edge list file) instead of a fresh
    /// random graph per replication.
    pub edge_list: Option<PathBuf>,
}

impl Default for GraphSettings {
    fn default() -> Self {
        GraphSettings { p_c: 0.5, edge_list: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct AdmmSettings {
    pub tau: f64,
    pub lambda0: f64,
    /// Communication budget for the comparison studies.
    pub budget_rounds: usize,
    /// Longer horizon for convergence traces.
    pub converge_rounds: usize,
    pub trace_every: usize,
    /// Start from zero instead of the per-node penalized fits.
    pub zero_init: bool,
}

impl Default for AdmmSettings {
    fn default() -> Self {
        AdmmSettings {
            tau: 1.0,
            lambda0: 0.0,
            budget_rounds: 100,
            converge_rounds: 400,
            trace_every: 1,
            zero_init: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TuningSettings {
    pub grid_size: usize,
    pub decades: f64,
    /// Complexity-term scale; `None` uses `1/N` (see `evaluate::mbic`).
    pub mbic_scale: Option<f64>,
}

impl Default for TuningSettings {
    fn default() -> Self {
        TuningSettings { grid_size: 30, decades: 3.0, mbic_scale: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DsubgdSettings {
    pub step0: f64,
    pub decay: f64,
    pub lambda: f64,
}

impl Default for DsubgdSettings {
    fn default() -> Self {
        DsubgdSettings { step0: 0.5, decay: 0.5, lambda: 0.001 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RealdataSettings {
    pub data_path: PathBuf,
    pub edge_list: PathBuf,
    pub splits: usize,
    pub flip_levels: Vec<f64>,
    pub rate_threshold: f64,
    pub test_fraction: f64,
}

impl Default for RealdataSettings {
    fn default() -> Self {
        RealdataSettings {
            data_path: PathBuf::from("data/communities.data"),
            edge_list: PathBuf::from("data/division_edges.txt"),
            splits: 20,
            flip_levels: vec![0.0, 0.01, 0.05],
            rate_threshold: 0.15,
            test_fraction: 0.2,
        }
    }
}

/// Top-level config; every default matches the baseline simulation setting
/// so an empty file reproduces it.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub synth: SynthConfig,
    pub graph: GraphSettings,
    pub admm: AdmmSettings,
    pub tuning: TuningSettings,
    pub dsubgd: DsubgdSettings,
    pub realdata: RealdataSettings,
    pub kernel: KernelKind,
    /// Kernels swept by the convergence study.
    pub kernels: Vec<KernelKind>,
    /// Override for the data-driven bandwidth rule.
    pub bandwidth: Option<f64>,
    pub gossip_rounds: usize,
    pub replications: usize,
    pub base_seed: u64,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            synth: SynthConfig { p: 100, s: 10, mu: 0.4, rho: 0.5, m: 10, n: 100, p_flip: 0.01 },
            graph: GraphSettings::default(),
            admm: AdmmSettings::default(),
            tuning: TuningSettings::default(),
            dsubgd: DsubgdSettings::default(),
            realdata: RealdataSettings::default(),
            kernel: KernelKind::Epanechnikov,
            kernels: KernelKind::ALL.to_vec(),
            bandwidth: None,
            gossip_rounds: 100,
            replications: 20,
            base_seed: 0,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ExperimentConfig = toml::from_str(&text)
            .map_err(|e| DecsvmError::InvalidConfig(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.synth.validate()?;
        if self.replications < 1 {
            return Err(DecsvmError::InvalidConfig("replications must be >= 1".into()));
        }
        if self.tuning.grid_size < 2 || !(self.tuning.decades > 0.0) {
            return Err(DecsvmError::InvalidConfig("bad tuning grid".into()));
        }
        if !(self.admm.tau > 0.0) || self.admm.lambda0 < 0.0 {
            return Err(DecsvmError::InvalidConfig("bad consensus settings".into()));
        }
        if let Some(h) = self.bandwidth {
            if !(h > 0.0) {
                return Err(DecsvmError::InvalidConfig("bandwidth must be positive".into()));
            }
        }
        Ok(())
    }

    /// Short content hash stamped into every output CSV.
    pub fn hash(&self) -> String {
        let text = toml::to_string(self).unwrap_or_default();
        let digest = sha2::Sha256::digest(text.as_bytes());
        digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
    }

    pub fn loss(&self, n_total: usize, p: usize) -> Result<SmoothedHingeLoss> {
        let h = self.bandwidth.unwrap_or_else(|| bandwidth_default(n_total, p));
        SmoothedHingeLoss::new(self.kernel, h)
    }

    fn mbic_scale(&self, n_total: usize) -> f64 {
        self.tuning.mbic_scale.unwrap_or(1.0 / n_total as f64)
    }
}

/// One aggregated table cell.
#[derive(Debug, Clone, Serialize)]
pub struct MethodSummary {
    pub method: String,
    pub mean_error: f64,
    pub mean_f1: f64,
    pub mean_support: f64,
}

/// One per-replication row.
#[derive(Debug, Clone, Serialize)]
pub struct SimRow {
    pub replication: usize,
    pub method: String,
    pub lambda: f64,
    pub estimation_error: f64,
    pub f1: f64,
    pub support_size: f64,
}

pub struct SimulateOutcome {
    pub rows: Vec<SimRow>,
    pub summary: Vec<MethodSummary>,
}

fn warm_path_fit(
    shard: &LabeledShard,
    loss: SmoothedHingeLoss,
    lambda0: f64,
    lambdas: &[f64],
) -> Result<Vec<Array1<f64>>> {
    let mut fits = Vec::with_capacity(lambdas.len());
    let mut init: Option<Array1<f64>> = None;
    for &lambda in lambdas {
        let mut opts = SolveOptions::new(loss, PenaltySpec { lambda, lambda0 });
        opts.max_iter = 2000;
        opts.tol = 1e-7;
        opts.init = init.clone();
        let beta = solve_csvm(shard.x.view(), shard.y.view(), &opts)?;
        init = Some(beta.clone());
        fits.push(beta);
    }
    Ok(fits)
}

fn local_path_fits(
    shards: &[LabeledShard],
    loss: SmoothedHingeLoss,
    lambda0: f64,
    lambdas: &[f64],
) -> Result<Vec<Vec<Array1<f64>>>> {
    // indexed [lambda][node]
    let per_node: Vec<Vec<Array1<f64>>> = shards
        .iter()
        .map(|s| warm_path_fit(s, loss, lambda0, lambdas))
        .collect::<Result<_>>()?;
    Ok((0..lambdas.len())
        .map(|i| per_node.iter().map(|path| path[i].clone()).collect())
        .collect())
}

fn mbic_over_path(
    shards: &[LabeledShard],
    path: &[Vec<Array1<f64>>],
    scale: f64,
) -> Result<Vec<f64>> {
    path.iter().map(|betas| mbic(shards, betas, scale)).collect()
}

fn report(
    betas: &[Array1<f64>],
    truth_beta: &Array1<f64>,
    truth_support: &[usize],
) -> Result<(f64, f64, f64)> {
    let err = network_estimation_error(betas, truth_beta.view())?;
    let mut f1 = 0.0;
    let mut supp = 0.0;
    for b in betas {
        let s = support_of(b.view());
        f1 += f1_score(&s, truth_support);
        supp += s.len() as f64;
    }
    Ok((err, f1 / betas.len() as f64, supp / betas.len() as f64))
}

fn topology_for(cfg: &ExperimentConfig, seed: u64) -> Result<Topology> {
    match &cfg.graph.edge_list {
        Some(path) => Topology::from_edge_list_file(cfg.synth.m, path),
        None => Topology::erdos_renyi_connected(cfg.synth.m, cfg.graph.p_c, seed),
    }
}

/// Tune and run the decentralized solver over the penalty path, returning
/// the per-node hard-thresholded estimates at the selected penalty.
fn tune_decsvm(
    shards: &[LabeledShard],
    topology: &Topology,
    loss: SmoothedHingeLoss,
    cfg: &ExperimentConfig,
    lambdas: &[f64],
    locals_path: &[Vec<Array1<f64>>],
    scale: f64,
) -> Result<(usize, Vec<Array1<f64>>)> {
    let mut criteria = Vec::with_capacity(lambdas.len());
    let mut fits: Vec<Vec<Array1<f64>>> = Vec::with_capacity(lambdas.len());
    for (i, &lambda) in lambdas.iter().enumerate() {
        let pen = PenaltySpec { lambda, lambda0: cfg.admm.lambda0 };
        let mut acfg = AdmmConfig::new(loss, pen, cfg.admm.budget_rounds);
        acfg.tau = cfg.admm.tau;
        acfg.trace_every = cfg.admm.budget_rounds.max(1);
        let init = if cfg.admm.zero_init { None } else { Some(&locals_path[i][..]) };
        let out = run_decsvm(shards, topology, &acfg, init)?;
        let thresholded: Vec<Array1<f64>> = out
            .estimates
            .iter()
            .map(|b| hard_threshold_support(b, lambda).0)
            .collect();
        criteria.push(mbic(shards, &thresholded, scale)?);
        fits.push(thresholded);
    }
    let pick = select_lambda(lambdas, &criteria)?;
    Ok((pick, fits.swap_remove(pick)))
}

fn tune_dsubgd(
    shards: &[LabeledShard],
    topology: &Topology,
    cfg: &ExperimentConfig,
    lambdas: &[f64],
    scale: f64,
) -> Result<(usize, Vec<Array1<f64>>)> {
    let mut criteria = Vec::with_capacity(lambdas.len());
    let mut fits = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let dcfg = DsubgdConfig {
            lambda,
            step0: cfg.dsubgd.step0,
            decay: cfg.dsubgd.decay,
            rounds: cfg.admm.budget_rounds,
        };
        let out = dsubgd(shards, topology, &dcfg, None)?;
        criteria.push(mbic(shards, &out, scale)?);
        fits.push(out);
    }
    let pick = select_lambda(lambdas, &criteria)?;
    Ok((pick, fits.swap_remove(pick)))
}

/// One replication of the five-method comparison.
fn simulate_one(cfg: &ExperimentConfig, replication: usize) -> Result<Vec<SimRow>> {
    let seed = cfg.base_seed + replication as u64;
    let topology = topology_for(cfg, seed)?;
    let shards = sample_shards(&cfg.synth, seed)?;
    let truth = true_parameter(&cfg.synth)?;
    let truth_support = truth.feature_support();
    let n_total = cfg.synth.n_total();
    let loss = cfg.loss(n_total, cfg.synth.p)?;
    let scale = cfg.mbic_scale(n_total);

    let pooled = pool_shards(&shards)?;
    let lmax = lambda_max_bound(&shards, &loss)?;
    let lambdas = lambda_grid(lmax, cfg.tuning.grid_size, cfg.tuning.decades);
    let m = shards.len();

    let mut rows = Vec::new();
    let mut push = |method: &str, lambda: f64, betas: &[Array1<f64>]| -> Result<()> {
        let (err, f1, supp) = report(betas, &truth.beta, &truth_support)?;
        rows.push(SimRow {
            replication,
            method: method.to_string(),
            lambda,
            estimation_error: err,
            f1,
            support_size: supp,
        });
        Ok(())
    };

    // pooled oracle
    let pooled_path = warm_path_fit(&pooled, loss, cfg.admm.lambda0, &lambdas)?;
    let pooled_crit: Vec<f64> = pooled_path
        .iter()
        .map(|b| mbic(std::slice::from_ref(&pooled), std::slice::from_ref(b), scale))
        .collect::<Result<_>>()?;
    let pick = select_lambda(&lambdas, &pooled_crit)?;
    let pooled_betas: Vec<Array1<f64>> = (0..m).map(|_| pooled_path[pick].clone()).collect();
    push("pooled", lambdas[pick], &pooled_betas)?;

    // per-node fits, jointly tuned
    let locals_path = local_path_fits(&shards, loss, cfg.admm.lambda0, &lambdas)?;
    let local_crit = mbic_over_path(&shards, &locals_path, scale)?;
    let pick = select_lambda(&lambdas, &local_crit)?;
    push("local", lambdas[pick], &locals_path[pick])?;

    // gossip-averaged locals
    let averaged = average_consensus(&locals_path[pick], &topology, cfg.gossip_rounds)?;
    push("avg", lambdas[pick], &averaged)?;

    // decentralized subgradient baseline
    let (pick, ds) = tune_dsubgd(&shards, &topology, cfg, &lambdas, scale)?;
    push("dsubgd", lambdas[pick], &ds)?;

    // decentralized smoothed solver
    let (pick, dec) =
        tune_decsvm(&shards, &topology, loss, cfg, &lambdas, &locals_path, scale)?;
    push("decsvm", lambdas[pick], &dec)?;

    Ok(rows)
}

fn summarize(rows: &[SimRow]) -> Vec<MethodSummary> {
    let mut acc: BTreeMap<String, (f64, f64, f64, usize)> = BTreeMap::new();
    for r in rows {
        let e = acc.entry(r.method.clone()).or_insert((0.0, 0.0, 0.0, 0));
        e.0 += r.estimation_error;
        e.1 += r.f1;
        e.2 += r.support_size;
        e.3 += 1;
    }
    acc.into_iter()
        .map(|(method, (e, f, s, k))| MethodSummary {
            method,
            mean_error: e / k as f64,
            mean_f1: f / k as f64,
            mean_support: s / k as f64,
        })
        .collect()
}

/// Replicated five-method comparison; writes `results.csv` and
/// `summary.csv` under the output directory.
pub fn run_simulate(cfg: &ExperimentConfig) -> Result<SimulateOutcome> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    let hash = cfg.hash();
    let mut rows = Vec::new();
    let results_path = cfg.output_dir.join("results.csv");
    let mut w = csv::Writer::from_path(&results_path)?;
    w.write_record([
        "config", "replication", "method", "lambda", "estimation_error", "f1", "support_size",
    ])?;
    for r in 0..cfg.replications {
        let rep_rows = simulate_one(cfg, r)?;
        for row in &rep_rows {
            w.write_record([
                hash.clone(),
                row.replication.to_string(),
                row.method.clone(),
                row.lambda.to_string(),
                row.estimation_error.to_string(),
                row.f1.to_string(),
                row.support_size.to_string(),
            ])?;
        }
        w.flush()?; // partial results survive an interrupted run
        rows.extend(rep_rows);
    }
    let summary = summarize(&rows);
    let mut ws = csv::Writer::from_path(cfg.output_dir.join("summary.csv"))?;
    ws.write_record(["config", "method", "mean_error", "mean_f1", "mean_support"])?;
    for s in &summary {
        ws.write_record([
            hash.clone(),
            s.method.clone(),
            s.mean_error.to_string(),
            s.mean_f1.to_string(),
            s.mean_support.to_string(),
        ])?;
    }
    ws.flush()?;
    Ok(SimulateOutcome { rows, summary })
}

/// Tune the penalty once on pooled data; returns the grid, criterion values
/// and the selected index.
pub fn tune_once(
    shards: &[LabeledShard],
    loss: SmoothedHingeLoss,
    cfg: &ExperimentConfig,
) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    let pooled = pool_shards(shards)?;
    let lmax = lambda_max_bound(shards, &loss)?;
    let lambdas = lambda_grid(lmax, cfg.tuning.grid_size, cfg.tuning.decades);
    let scale = cfg.mbic_scale(cfg.synth.n_total());
    let path = warm_path_fit(&pooled, loss, cfg.admm.lambda0, &lambdas)?;
    let crit: Vec<f64> = path
        .iter()
        .map(|b| mbic(std::slice::from_ref(&pooled), std::slice::from_ref(b), scale))
        .collect::<Result<_>>()?;
    let pick = select_lambda(&lambdas, &crit)?;
    Ok((lambdas, crit, pick))
}

/// Penalty sweep report; writes `tuning.csv`.
pub fn run_tune(cfg: &ExperimentConfig) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    let shards = sample_shards(&cfg.synth, cfg.base_seed)?;
    let loss = cfg.loss(cfg.synth.n_total(), cfg.synth.p)?;
    let (lambdas, crit, pick) = tune_once(&shards, loss, cfg)?;
    let mut w = csv::Writer::from_path(cfg.output_dir.join("tuning.csv"))?;
    w.write_record(["config", "lambda", "mbic", "selected"])?;
    let hash = cfg.hash();
    for (i, (&l, &c)) in lambdas.iter().zip(crit.iter()).enumerate() {
        w.write_record([
            hash.clone(),
            l.to_string(),
            c.to_string(),
            (i == pick).to_string(),
        ])?;
    }
    w.flush()?;
    Ok((lambdas, crit, pick))
}

/// Convergence traces toward the pooled reference, one per kernel; writes
/// `trace_<kernel>.csv` files.
pub fn run_converge(cfg: &ExperimentConfig) -> Result<BTreeMap<KernelKind, IterationTrace>> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    let seed = cfg.base_seed;
    let topology = topology_for(cfg, seed)?;
    let shards = sample_shards(&cfg.synth, seed)?;
    let pooled = pool_shards(&shards)?;
    let n_total = cfg.synth.n_total();
    let h = cfg
        .bandwidth
        .unwrap_or_else(|| bandwidth_default(n_total, cfg.synth.p));

    // penalty tuned once with the default kernel
    let tune_loss = SmoothedHingeLoss::new(KernelKind::Epanechnikov, h)?;
    let (lambdas, _, pick) = tune_once(&shards, tune_loss, cfg)?;
    let lambda = lambdas[pick];
    let pen = PenaltySpec { lambda, lambda0: cfg.admm.lambda0 };

    let mut traces = BTreeMap::new();
    for &kernel in &cfg.kernels {
        let loss = SmoothedHingeLoss::new(kernel, h)?;
        let mut opts = SolveOptions::new(loss, pen);
        opts.tol = 1e-10;
        opts.max_iter = 50_000;
        let reference = solve_csvm(pooled.x.view(), pooled.y.view(), &opts)?;

        let init = if cfg.admm.zero_init {
            None
        } else {
            Some(
                shards
                    .iter()
                    .map(|s| {
                        let mut o = SolveOptions::new(loss, pen);
                        o.max_iter = 2000;
                        o.tol = 1e-7;
                        solve_csvm(s.x.view(), s.y.view(), &o)
                    })
                    .collect::<Result<Vec<_>>>()?,
            )
        };

        let mut acfg = AdmmConfig::new(loss, pen, cfg.admm.converge_rounds);
        acfg.tau = cfg.admm.tau;
        acfg.trace_every = cfg.admm.trace_every;
        acfg.reference = Some(reference);
        let out = run_decsvm(&shards, &topology, &acfg, init.as_deref())?;
        out.trace
            .write_csv(&cfg.output_dir.join(format!("trace_{}.csv", kernel.name())))?;
        traces.insert(kernel, out.trace);
    }
    Ok(traces)
}

/// One real-data table row.
#[derive(Debug, Clone, Serialize)]
pub struct RealRow {
    pub split: usize,
    pub p_flip: f64,
    pub method: String,
    pub lambda: f64,
    pub accuracy: f64,
    pub support_size: f64,
}

pub struct RealdataOutcome {
    pub rows: Vec<RealRow>,
    /// Mean accuracy/support per `(p_flip, method)`.
    pub summary: BTreeMap<(String, String), (f64, f64)>,
}

/// Real-data comparison of the decentralized solvers; writes
/// `realdata.csv` and `realdata_summary.csv`.
pub fn run_realdata(cfg: &ExperimentConfig) -> Result<RealdataOutcome> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    let table = load_and_clean(&cfg.realdata.data_path)?;
    let topology = Topology::from_edge_list_file(9, &cfg.realdata.edge_list)?;
    let hash = cfg.hash();

    let mut w = csv::Writer::from_path(cfg.output_dir.join("realdata.csv"))?;
    w.write_record(["config", "split", "p_flip", "method", "lambda", "accuracy", "support_size"])?;

    let mut rows = Vec::new();
    for split in 0..cfg.realdata.splits {
        for &p_flip in &cfg.realdata.flip_levels {
            let rcfg = RealDataConfig {
                path: cfg.realdata.data_path.clone(),
                rate_threshold: cfg.realdata.rate_threshold,
                test_fraction: cfg.realdata.test_fraction,
                p_flip,
                seed: cfg.base_seed + split as u64,
            };
            let (train, test) = binarize_and_partition(&table, &rcfg)?;
            let n_total: usize = train.iter().map(|s| s.n()).sum();
            let p = train[0].p();
            let h = cfg.bandwidth.unwrap_or_else(|| bandwidth_default(n_total, p));
            let loss = SmoothedHingeLoss::new(cfg.kernel, h)?;
            let scale = cfg.mbic_scale(n_total);
            let lmax = lambda_max_bound(&train, &loss)?;
            let lambdas = lambda_grid(lmax, cfg.tuning.grid_size, cfg.tuning.decades);

            let score = |betas: &[Array1<f64>]| -> Result<(f64, f64)> {
                let mut acc = 0.0;
                let mut supp = 0.0;
                for (b, te) in betas.iter().zip(test.iter()) {
                    acc += classification_accuracy(te.x.view(), te.y.view(), b.view())?;
                    supp += support_of(b.view()).len() as f64;
                }
                Ok((acc / betas.len() as f64, supp / betas.len() as f64))
            };

            let locals_path = local_path_fits(&train, loss, cfg.admm.lambda0, &lambdas)?;
            let (pick, dec) =
                tune_decsvm(&train, &topology, loss, cfg, &lambdas, &locals_path, scale)?;
            let (acc, supp) = score(&dec)?;
            rows.push(RealRow {
                split,
                p_flip,
                method: "decsvm".into(),
                lambda: lambdas[pick],
                accuracy: acc,
                support_size: supp,
            });

            let (pick, ds) = tune_dsubgd(&train, &topology, cfg, &lambdas, scale)?;
            let (acc, supp) = score(&ds)?;
            rows.push(RealRow {
                split,
                p_flip,
                method: "dsubgd".into(),
                lambda: lambdas[pick],
                accuracy: acc,
                support_size: supp,
            });

            for row in rows.iter().rev().take(2) {
                w.write_record([
                    hash.clone(),
                    row.split.to_string(),
                    row.p_flip.to_string(),
                    row.method.clone(),
                    row.lambda.to_string(),
                    row.accuracy.to_string(),
                    row.support_size.to_string(),
                ])?;
            }
            w.flush()?;
        }
    }

    let mut acc: BTreeMap<(String, String), (f64, f64, usize)> = BTreeMap::new();
    for r in &rows {
        let e = acc
            .entry((format!("{}", r.p_flip), r.method.clone()))
            .or_insert((0.0, 0.0, 0));
        e.0 += r.accuracy;
        e.1 += r.support_size;
        e.2 += 1;
    }
    let summary: BTreeMap<(String, String), (f64, f64)> = acc
        .into_iter()
        .map(|(k, (a, s, n))| (k, (a / n as f64, s / n as f64)))
        .collect();

    let mut ws = csv::Writer::from_path(cfg.output_dir.join("realdata_summary.csv"))?;
    ws.write_record(["config", "p_flip", "method", "mean_accuracy", "mean_support"])?;
    for ((flip, method), (a, s)) in &summary {
        ws.write_record([hash.clone(), flip.clone(), method.clone(), a.to_string(), s.to_string()])?;
    }
    ws.flush()?;
    Ok(RealdataOutcome { rows, summary })
}

/// Least-squares line through `(x, y)` pairs; returns (slope, intercept, R²).
pub fn linear_fit_r2(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert!(xs.len() == ys.len() && xs.len() >= 2);
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    (slope, intercept, r2)
}

/// Mean of the last tenth of a series (the settled value of a trace).
pub fn plateau_value(series: &[f64]) -> f64 {
    assert!(!series.is_empty());
    let k = (series.len() / 10).max(1);
    series[series.len() - k..].iter().sum::<f64>() / k as f64
}
