//! End-to-end acceptance gate. Each test prints one PASS/FAIL line; the
//! suite doubles as the reproduction script for the headline results.

use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use decsvm::admm::{run_decsvm, AdmmConfig};
use decsvm::baselines::average_consensus;
use decsvm::evaluate::mbic;
use decsvm::harness::{
    linear_fit_r2, plateau_value, run_converge, run_realdata, run_simulate, tune_once,
    ExperimentConfig,
};
use decsvm::netgraph::Topology;
use decsvm::refsolver::{
    objective, solve_csvm, soft_threshold_scalar, PenaltySpec, SolveOptions,
};
use decsvm::smoothing::{bandwidth_default, KernelKind, SmoothedHingeLoss};
use decsvm::synthgen::{sample_shards, true_parameter, LabeledShard, SynthConfig};

fn verdict(id: usize, name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("acceptance {id} [{name}]: {tag} — {detail}");
    assert!(pass, "acceptance {id} [{name}] failed: {detail}");
}

#[test]
fn criterion_1_single_node_matches_reference_solver() {
    let mut rng = ChaCha12Rng::seed_from_u64(101);
    let mut worst = 0.0_f64;
    for trial in 0..10 {
        let p = 2 + (rng.random::<u32>() % 19) as usize; // <= 20
        let n = 20 + (rng.random::<u32>() % 181) as usize; // <= 200
        let cfg = SynthConfig {
            p,
            s: p.min(3),
            mu: 0.5,
            rho: 0.3,
            m: 1,
            n,
            p_flip: 0.0,
        };
        let shards = sample_shards(&cfg, 500 + trial).unwrap();
        let loss =
            SmoothedHingeLoss::new(KernelKind::Gaussian, bandwidth_default(n, p)).unwrap();
        let pen = PenaltySpec::l1(0.05);

        let topo = Topology::erdos_renyi_connected(1, 1.0, 0).unwrap();
        let mut acfg = AdmmConfig::new(loss, pen, 200_000);
        acfg.early_stop_tol = Some(1e-10);
        acfg.trace_every = 1000;
        let out = run_decsvm(&shards, &topo, &acfg, None).unwrap();

        let mut opts = SolveOptions::new(loss, pen);
        opts.tol = 1e-10;
        opts.max_iter = 200_000;
        let reference = solve_csvm(shards[0].x.view(), shards[0].y.view(), &opts).unwrap();

        let dist: f64 = out.estimates[0]
            .iter()
            .zip(reference.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        worst = worst.max(dist);
    }
    verdict(
        1,
        "single-node oracle equivalence",
        worst < 1e-4,
        &format!("max distance over 10 instances = {worst:.3e} (tolerance 1e-4)"),
    );
}

#[test]
fn criterion_2_reference_solver_matches_grid_search() {
    // deterministic 20-row, two-feature + intercept design
    let n = 20;
    let mut x = ndarray::Array2::zeros((n, 3));
    let mut y = Array1::zeros(n);
    for i in 0..n {
        let a = ((i * 7 + 3) % 11) as f64 / 5.0 - 1.0;
        let b = ((i * 5 + 1) % 13) as f64 / 6.0 - 1.0;
        x[[i, 0]] = 1.0;
        x[[i, 1]] = a;
        x[[i, 2]] = b;
        y[i] = if a + 0.5 * b + if i % 7 == 0 { -1.5 } else { 0.0 } > 0.0 { 1.0 } else { -1.0 };
    }
    let loss = SmoothedHingeLoss::new(KernelKind::Gaussian, 0.4).unwrap();
    let mut worst_gap = f64::NEG_INFINITY;
    for &lambda in &[0.05, 0.2] {
        let opts = SolveOptions::new(loss, PenaltySpec::l1(lambda));
        let beta = solve_csvm(x.view(), y.view(), &opts).unwrap();
        let solver_obj = objective(x.view(), y.view(), beta.view(), &opts).unwrap();

        // coarse-to-fine box search over [-2, 2]^3
        let mut center = [0.0_f64; 3];
        let mut radius = 2.0_f64;
        let mut best = f64::INFINITY;
        for _ in 0..8 {
            let steps = 10i32;
            let mut best_pt = center;
            for a in -steps..=steps {
                for b in -steps..=steps {
                    for c in -steps..=steps {
                        let pt = [
                            center[0] + radius * a as f64 / steps as f64,
                            center[1] + radius * b as f64 / steps as f64,
                            center[2] + radius * c as f64 / steps as f64,
                        ];
                        let cand = ndarray::array![pt[0], pt[1], pt[2]];
                        let obj = objective(x.view(), y.view(), cand.view(), &opts).unwrap();
                        if obj < best {
                            best = obj;
                            best_pt = pt;
                        }
                    }
                }
            }
            center = best_pt;
            radius /= 5.0;
        }
        worst_gap = worst_gap.max(solver_obj - best);
    }
    verdict(
        2,
        "grid-search equivalence",
        worst_gap <= 1e-3,
        &format!("max objective excess over brute force = {worst_gap:.3e} (tolerance 1e-3)"),
    );
}

fn figure_setting(dir: &std::path::Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.synth = SynthConfig { p: 50, s: 10, mu: 0.4, rho: 0.5, m: 10, n: 100, p_flip: 0.01 };
    cfg.admm.converge_rounds = 300;
    cfg.output_dir = dir.to_path_buf();
    cfg
}

#[test]
fn criterion_3_linear_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = figure_setting(dir.path());
    cfg.kernels = vec![KernelKind::Gaussian];
    let traces = run_converge(&cfg).unwrap();
    let dist = &traces[&KernelKind::Gaussian].dist_to_ref;

    // log-linear decline toward the pooled reference
    let start = 5; // skip the initial transient
    let xs: Vec<f64> = (start..dist.len()).map(|t| t as f64).collect();
    let ys: Vec<f64> = dist[start..].iter().map(|d| d.log10()).collect();
    let (slope, _, r2) = linear_fit_r2(&xs, &ys);

    // the estimation error against the true parameter settles by ~200
    let shards = sample_shards(&cfg.synth, cfg.base_seed).unwrap();
    let truth = true_parameter(&cfg.synth).unwrap();
    let topo = Topology::erdos_renyi_connected(cfg.synth.m, cfg.graph.p_c, cfg.base_seed).unwrap();
    let h = bandwidth_default(cfg.synth.n_total(), cfg.synth.p);
    let tune_loss = SmoothedHingeLoss::new(KernelKind::Epanechnikov, h).unwrap();
    let (lambdas, _, pick) = tune_once(&shards, tune_loss, &cfg).unwrap();
    let loss = SmoothedHingeLoss::new(KernelKind::Gaussian, h).unwrap();
    let mut acfg = AdmmConfig::new(loss, PenaltySpec::l1(lambdas[pick]), 300);
    acfg.reference = Some(truth.beta.clone());
    let out = run_decsvm(&shards, &topo, &acfg, None).unwrap();
    let err = &out.trace.dist_to_ref;
    let settled = plateau_value(err);
    let at_200 = err[199];

    let pass = r2 >= 0.9 && slope < 0.0 && (at_200 - settled).abs() <= 0.10 * settled;
    verdict(
        3,
        "linear convergence",
        pass,
        &format!(
            "log-linear fit R^2 = {r2:.4} (>= 0.9), slope {slope:.4}/round; \
             estimation error at round 200 = {at_200:.4} vs settled {settled:.4}"
        ),
    );
}

#[test]
fn criterion_4_kernel_robustness() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = figure_setting(dir.path());
    let shards = sample_shards(&cfg.synth, cfg.base_seed).unwrap();
    let truth = true_parameter(&cfg.synth).unwrap();
    let topo = Topology::erdos_renyi_connected(cfg.synth.m, cfg.graph.p_c, cfg.base_seed).unwrap();
    let h = bandwidth_default(cfg.synth.n_total(), cfg.synth.p);
    let tune_loss = SmoothedHingeLoss::new(KernelKind::Epanechnikov, h).unwrap();
    let (lambdas, _, pick) = tune_once(&shards, tune_loss, &cfg).unwrap();
    let pen = PenaltySpec::l1(lambdas[pick]);

    let mut plateaus = Vec::new();
    for &kernel in &KernelKind::ALL {
        let loss = SmoothedHingeLoss::new(kernel, h).unwrap();
        let mut acfg = AdmmConfig::new(loss, pen, cfg.admm.converge_rounds);
        acfg.reference = Some(truth.beta.clone());
        let out = run_decsvm(&shards, &topo, &acfg, None).unwrap();
        plateaus.push(plateau_value(&out.trace.dist_to_ref));
    }
    let max = plateaus.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = plateaus.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean = plateaus.iter().sum::<f64>() / plateaus.len() as f64;
    let spread = (max - min) / mean;
    verdict(
        4,
        "kernel robustness",
        spread <= 0.15,
        &format!("plateau errors {plateaus:?}, relative spread {spread:.4} (<= 0.15)"),
    );
}

#[test]
fn criterion_5_estimation_error_table_cell() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::default();
    cfg.synth = SynthConfig { p: 100, s: 10, mu: 0.4, rho: 0.5, m: 10, n: 200, p_flip: 0.01 };
    cfg.replications = 20;
    cfg.output_dir = dir.path().to_path_buf();
    let out = run_simulate(&cfg).unwrap();
    let cell = |m: &str| out.summary.iter().find(|s| s.method == m).unwrap().mean_error;
    let (pooled, local, avg, dec) = (cell("pooled"), cell("local"), cell("avg"), cell("decsvm"));
    let target = 0.3239;
    let in_band = (dec - target).abs() <= 0.25 * target;
    let ordered = pooled <= dec && dec < avg && avg < local;
    verdict(
        5,
        "estimation error table cell",
        in_band && ordered,
        &format!(
            "decsvm {dec:.4} vs target {target} +/-25% [{:.4}, {:.4}]; \
             ordering pooled {pooled:.4} <= decsvm {dec:.4} < avg {avg:.4} < local {local:.4}",
            0.75 * target,
            1.25 * target
        ),
    );
}

#[test]
fn criterion_6_support_recovery() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::default();
    cfg.synth = SynthConfig { p: 100, s: 10, mu: 0.4, rho: 0.5, m: 10, n: 100, p_flip: 0.01 };
    cfg.replications = 20;
    cfg.output_dir = dir.path().join("rho05");
    let moderate = run_simulate(&cfg).unwrap();
    let f1_mid = moderate.summary.iter().find(|s| s.method == "decsvm").unwrap().mean_f1;

    cfg.synth.rho = 0.9;
    cfg.output_dir = dir.path().join("rho09");
    let high = run_simulate(&cfg).unwrap();
    let f1 = |m: &str| high.summary.iter().find(|s| s.method == m).unwrap().mean_f1;
    let (dec_hi, pooled_hi) = (f1("decsvm"), f1("pooled"));

    let pass = f1_mid >= 0.75 && dec_hi > pooled_hi;
    verdict(
        6,
        "support recovery",
        pass,
        &format!(
            "decsvm F1 = {f1_mid:.4} at rho 0.5 (>= 0.75); \
             at rho 0.9 decsvm {dec_hi:.4} vs pooled {pooled_hi:.4} (inversion)"
        ),
    );
}

#[test]
fn criterion_7_smoothing_bias_scaling() {
    // one-dimensional mixture with a known population separator
    let cfg = SynthConfig { p: 1, s: 1, mu: 0.4, rho: 0.3, m: 1, n: 1_000_000, p_flip: 0.0 };
    let truth = true_parameter(&cfg).unwrap();

    // quadrature oracle: the claimed optimum minimizes the population hinge
    // risk E(1 - b Z)_+ with Z ~ N(0.4, 1) (margin distribution; the
    // intercept vanishes by symmetry)
    let b_star = truth.beta[1];
    assert!(truth.beta[0].abs() < 1e-10);
    let risk = |b: f64| -> f64 {
        // Simpson panels over z in [-10, 12]
        let f = |z: f64| {
            let pdf = (-0.5 * (z - 0.4) * (z - 0.4)).exp()
                / (2.0 * std::f64::consts::PI).sqrt();
            (1.0 - b * z).max(0.0) * pdf
        };
        let (a, c) = (-10.0_f64, 12.0_f64);
        let n = 4000;
        let step = (c - a) / n as f64;
        let mut total = f(a) + f(c);
        for i in 1..n {
            total += f(a + i as f64 * step) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        total * step / 3.0
    };
    let r0 = risk(b_star);
    let oracle_ok = risk(b_star * 0.98) > r0 && risk(b_star * 1.02) > r0;

    let shards = sample_shards(&cfg, 7001).unwrap();
    let fit = |h: f64| -> f64 {
        let loss = SmoothedHingeLoss::new(KernelKind::Gaussian, h).unwrap();
        let mut opts = SolveOptions::new(loss, PenaltySpec::l1(0.0));
        opts.tol = 1e-9;
        let beta = solve_csvm(shards[0].x.view(), shards[0].y.view(), &opts).unwrap();
        beta.iter()
            .zip(truth.beta.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };
    let bias_h = fit(1.0);
    let bias_half = fit(0.5);
    let ratio = bias_h / bias_half;
    let pass = oracle_ok && (2.5..=6.0).contains(&ratio);
    verdict(
        7,
        "smoothing bias scaling",
        pass,
        &format!(
            "bias {bias_h:.5} at h=1.0 vs {bias_half:.5} at h=0.5, ratio {ratio:.2} \
             (target ~4, band [2.5, 6]); population oracle stationarity {oracle_ok}"
        ),
    );
}

#[test]
fn criterion_8_property_suite() {
    let mut failures: Vec<String> = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            failures.push(name.to_string());
        }
    };
    let mut rng = ChaCha12Rng::seed_from_u64(88);

    // convexity, gradient bounds, Lipschitz gradient, hinge majorization
    for &kernel in &KernelKind::ALL {
        for _ in 0..200 {
            let h = 0.05 + rng.random::<f64>() * 0.95;
            let l = SmoothedHingeLoss::new(kernel, h).unwrap();
            let a = rng.random::<f64>() * 8.0 - 4.0;
            let b = rng.random::<f64>() * 8.0 - 4.0;
            let t = rng.random::<f64>();
            let mid = t * a + (1.0 - t) * b;
            check(
                "loss convexity",
                l.value(mid) <= t * l.value(a) + (1.0 - t) * l.value(b) + 1e-12,
            );
            check("gradient in [-1, 0]", (-1.0..=0.0).contains(&l.grad(a)));
            check(
                "gradient Lipschitz",
                (l.grad(a) - l.grad(b)).abs() <= l.lipschitz_constant() * (a - b).abs() + 1e-12,
            );
            check(
                "hinge majorization",
                l.value(a) + 1e-12 >= SmoothedHingeLoss::hinge(a),
            );
        }
    }

    // topology invariants
    for seed in 0..20u64 {
        let m = 2 + (seed as usize % 10);
        let t = Topology::erdos_renyi_connected(m, 0.6, seed).unwrap();
        check("topology connected", t.is_connected());
        let mut symmetric = true;
        let mut no_self = true;
        for i in 0..m {
            no_self &= !t.has_edge(i, i);
            for j in 0..m {
                symmetric &= t.has_edge(i, j) == t.has_edge(j, i);
            }
        }
        check("topology symmetric", symmetric);
        check("topology self-loop free", no_self);
    }

    // dual-sum conservation and consensus on the small instance
    let data_cfg = SynthConfig { p: 10, s: 3, mu: 0.4, rho: 0.3, m: 5, n: 50, p_flip: 0.0 };
    let shards = sample_shards(&data_cfg, 7).unwrap();
    let topo = Topology::erdos_renyi_connected(5, 0.6, 7).unwrap();
    let loss = SmoothedHingeLoss::new(KernelKind::Gaussian, 0.4).unwrap();
    let acfg = AdmmConfig::new(loss, PenaltySpec::l1(0.05), 500);
    let out = run_decsvm(&shards, &topo, &acfg, None).unwrap();
    let resid = *out.trace.consensus_residual.last().unwrap();
    check("consensus residual <= 1e-5", resid <= 1e-5);
    // duals sum to zero by antisymmetry: verify via gossip mean preservation
    let mean_before: f64 = out.estimates.iter().map(|b| b.sum()).sum();
    let mixed = average_consensus(&out.estimates, &topo, 13).unwrap();
    let mean_after: f64 = mixed.iter().map(|b| b.sum()).sum();
    check("gossip mean preserved", (mean_before - mean_after).abs() < 1e-9);

    // soft-threshold prox oracle
    for _ in 0..100 {
        let v = rng.random::<f64>() * 6.0 - 3.0;
        let t = rng.random::<f64>() * 1.5;
        let st = soft_threshold_scalar(v, t);
        let obj = |z: f64| 0.5 * (z - v) * (z - v) + t * z.abs();
        let mut ok = true;
        for k in -40..=40 {
            ok &= obj(st) <= obj(st + k as f64 * 0.05) + 1e-12;
        }
        check("soft threshold is the l1 prox", ok);
    }

    // trivial tuning-criterion values
    let x = ndarray::Array2::from_shape_vec((2, 2), vec![1.0, 1.0, 1.0, -1.0]).unwrap();
    let shard = LabeledShard::new(x, ndarray::array![1.0, -1.0]).unwrap();
    let zero = vec![Array1::zeros(2)];
    check(
        "mbic of the zero fit is 1",
        (mbic(std::slice::from_ref(&shard), &zero, 1.0).unwrap() - 1.0).abs() < 1e-12,
    );
    let perfect = vec![ndarray::array![0.0, 5.0]];
    let expect = (2.0_f64).ln().sqrt() * (1.0_f64).ln(); // p = 1 slope
    check(
        "mbic of a wide-margin fit is the complexity term",
        (mbic(std::slice::from_ref(&shard), &perfect, 1.0).unwrap() - expect).abs() < 1e-12,
    );

    // dual update antisymmetry at the engine level: symmetric two-node
    // problem keeps estimates identical every round
    let pair = vec![shards[0].clone(), shards[0].clone()];
    let topo2 = Topology::from_edge_list(2, &[(1, 2)]).unwrap();
    let out2 = run_decsvm(&pair, &topo2, &AdmmConfig::new(loss, PenaltySpec::l1(0.05), 50), None)
        .unwrap();
    check(
        "symmetric nodes stay identical",
        out2.estimates[0]
            .iter()
            .zip(out2.estimates[1].iter())
            .all(|(a, b)| (a - b).abs() < 1e-12),
    );

    verdict(
        8,
        "property suite",
        failures.is_empty(),
        &format!(
            "{} checks failed{}",
            failures.len(),
            if failures.is_empty() { String::new() } else { format!(": {failures:?}") }
        ),
    );
}

#[test]
fn criterion_9_real_data_reproduction() {
    let data_path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/communities.data");
    if !data_path.exists() {
        verdict(
            9,
            "real-data reproduction",
            false,
            "data/communities.data is absent: this environment has no route to the UCI \
             archive (only the package mirrors are reachable), so the communities-and-crime \
             table could not be fetched. Place the raw UCI file at data/communities.data \
             and rerun; the pipeline itself is exercised on synthetic fixtures.",
        );
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::default();
    cfg.realdata.data_path = data_path;
    cfg.realdata.edge_list = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/division_edges.txt");
    cfg.realdata.splits = 20;
    cfg.realdata.flip_levels = vec![0.0, 0.01, 0.05];
    cfg.output_dir = dir.path().to_path_buf();
    let out = run_realdata(&cfg).unwrap();

    let get = |flip: &str, method: &str| out.summary[&(flip.to_string(), method.to_string())];
    let (acc0, supp0) = get("0", "decsvm");
    let acc_band = (acc0 - 0.8287).abs() <= 0.03;
    let supp_band = (supp0 - 30.47).abs() <= 10.0;
    let mut dominates = true;
    let mut detail = String::new();
    for flip in ["0", "0.01", "0.05"] {
        let (dec, _) = get(flip, "decsvm");
        let (ds, _) = get(flip, "dsubgd");
        dominates &= dec > ds;
        detail.push_str(&format!("flip {flip}: decsvm {dec:.4} vs dsubgd {ds:.4}; "));
    }
    verdict(
        9,
        "real-data reproduction",
        acc_band && supp_band && dominates,
        &format!(
            "accuracy {acc0:.4} (target 0.8287 +/-0.03), support {supp0:.2} \
             (target 30.47 +/-10); {detail}"
        ),
    );
}
