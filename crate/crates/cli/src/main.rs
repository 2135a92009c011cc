//! Configuration-driven experiment runner.
//!
//! Subcommands: `simulate` (path bundles), `dependence` (projection-norm
//! profiles, assumption reports, maximal-inequality check), `characteristics`
//! (empirical/composed characteristic paths and gap diagnostics), `limit`
//! (limit-law oracle ensembles), `theorem1` (full convergence experiment),
//! `unitroot` (unit-root limit experiment).
//!
//! Progress goes to stderr, data to files under the output directory, and
//! standard output carries exactly one machine-parseable verdict line.
//! Exit codes: 0 = pass, 1 = error, 2 = verdict failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use stochlab_core::characteristics::{
    composed_characteristics, empirical_characteristics, gap_diagnostics, pair_process, GapReport,
};
use stochlab_core::config::ExperimentConfig;
use stochlab_core::dependence::{
    conditional_variance_check, cross_moment_bound_linear, long_run_params,
    maximal_inequality_check, projection_norm_mc, tail_decay_check, DependenceProfile, Verdict,
};
use stochlab_core::export;
use stochlab_core::limit_law::limit_functional;
use stochlab_core::processes::simulate_path;
use stochlab_core::stats::{
    convergence_experiment, median_of, EnsembleDistribution, ExperimentKind, Manifest,
};
use stochlab_core::{Error, SeedLineage};

#[derive(Parser)]
#[command(
    name = "stochlab",
    version,
    about = "Causal-process partial-sum simulation laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Experiment configuration file (flat TOML).
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides the config's `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (falls back to the config's `workers`, then all
    /// cores). Numeric outputs do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory for artifacts (falls back to the config's
    /// `out_dir`, then `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run even when the model fails (or cannot run) the assumption checks.
    #[arg(long)]
    override_assumptions: bool,
    /// Admit exponential-growth functionals (outside the polynomial-growth
    /// hypotheses; reports are labeled accordingly).
    #[arg(long)]
    allow_exp_growth: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate path bundles and export them as CSV.
    Simulate(CommonArgs),
    /// Dependence profiles, assumption reports and the maximal-inequality check.
    Dependence(CommonArgs),
    /// Characteristic paths and gap diagnostics over the n-grid.
    Characteristics(CommonArgs),
    /// Limit-law oracle ensembles.
    Limit(CommonArgs),
    /// Full convergence experiment for the partial-sum functional.
    Theorem1(CommonArgs),
    /// Unit-root coefficient and t-statistic experiment.
    Unitroot(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::Simulate(a) => ("simulate", a),
        Command::Dependence(a) => ("dependence", a),
        Command::Characteristics(a) => ("characteristics", a),
        Command::Limit(a) => ("limit", a),
        Command::Theorem1(a) => ("theorem1", a),
        Command::Unitroot(a) => ("unitroot", a),
    };
    match run(name, args) {
        Ok(verdict) => {
            let word = match verdict {
                Verdict::Pass => "PASS",
                Verdict::Fail => "FAIL",
            };
            println!("verdict={word} kind={name}");
            if verdict == Verdict::Pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(name: &str, args: &CommonArgs) -> Result<Verdict, Error> {
    let cfg = ExperimentConfig::load(&args.config)?;
    let seed = cfg.master_seed(args.seed)?;
    let workers = args.workers.or(cfg.workers).unwrap_or(0);
    if workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .ok();
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let out = out.as_path();
    std::fs::create_dir_all(out)?;

    let manifest = serde_json::json!({
        "subcommand": name,
        "master_seed": seed,
        "config": &cfg,
        "rerun": format!("stochlab {name} --config <this config> --seed {seed} --out <dir>"),
    });
    export::write_json(&out.join("manifest.json"), &manifest)?;

    match name {
        "simulate" => cmd_simulate(&cfg, seed, out),
        "dependence" => cmd_dependence(&cfg, seed, out),
        "characteristics" => cmd_characteristics(&cfg, seed, out, args),
        "limit" => cmd_limit(&cfg, seed, out, args),
        "theorem1" => cmd_experiment(ExperimentKind::Theorem1, &cfg, seed, out, args),
        "unitroot" => cmd_experiment(ExperimentKind::UnitRoot, &cfg, seed, out, args),
        _ => unreachable!(),
    }
}

fn cmd_simulate(
    cfg: &ExperimentConfig,
    seed: u64,
    out: &std::path::Path,
) -> Result<Verdict, Error> {
    let model = cfg.model()?;
    let n = cfg
        .n_grid
        .as_ref()
        .and_then(|g| g.last().copied())
        .unwrap_or(1000);
    let horizon = cfg.horizon.unwrap_or(1.0);
    let len = ((n as f64) * horizon).ceil() as usize;
    let count = cfg.path_count.unwrap_or(3);
    eprintln!(
        "simulate: {count} bundles of length {len} from {}",
        model.label()
    );
    for rep in 0..count as u64 {
        let bundle = simulate_path(&model, len, SeedLineage::new(seed, rep))?;
        if bundle.window_warning {
            eprintln!("warning: replication {rep}: burn-in shorter than the coefficient window");
        }
        export::write_path_bundle_csv(&out.join(format!("bundle_{rep}.csv")), &bundle)?;
    }
    Ok(Verdict::Pass)
}

fn cmd_dependence(
    cfg: &ExperimentConfig,
    seed: u64,
    out: &std::path::Path,
) -> Result<Verdict, Error> {
    let model = cfg.model()?;
    let q = cfg.q.unwrap_or(4.0);
    let lineage = SeedLineage::new(seed, 0);
    eprintln!("dependence: profiling {} at q = {q}", model.label());

    let profile = if model.is_linear() {
        DependenceProfile::linear(&model, q.min(4.0), lineage)?
    } else {
        let n_max = cfg.proj_n_max.unwrap_or(6);
        let outer = cfg.proj_outer.unwrap_or(400);
        let inner = cfg.proj_inner.unwrap_or(60);
        let theta: Result<Vec<f64>, Error> = (0..=n_max)
            .map(|n| {
                projection_norm_mc(
                    &model,
                    n,
                    q.min(4.0),
                    outer,
                    inner,
                    lineage.subexperiment(0xDE11).replication(n as u64),
                )
                .map(|e| e.estimate)
            })
            .collect();
        DependenceProfile::from_theta(theta?, 0.0, q.min(4.0))?
    };

    let rate = tail_decay_check(&profile, q);
    let variance =
        conditional_variance_check(&model, q, 5, 20_000, lineage.subexperiment(0xA2C4)).ok();
    let third = model
        .coefficients()
        .map(cross_moment_bound_linear)
        .transpose()
        .ok()
        .flatten();
    let long_run = long_run_params(&model, 2000, 2000, lineage.subexperiment(0x10E6)).ok();

    let max_ineq_n = cfg
        .n_grid
        .as_ref()
        .and_then(|g| g.first().copied())
        .unwrap_or(100);
    let max_ineq_reps = cfg.reps.unwrap_or(2000).min(4000);
    let max_ineq = if model.is_linear() && profile.total().is_finite() {
        let l2_profile = DependenceProfile::linear(&model, 2.0, lineage)?;
        Some(maximal_inequality_check(
            &model,
            &l2_profile,
            2.0,
            max_ineq_n,
            max_ineq_reps,
            lineage.subexperiment(0x1E44),
        )?)
    } else {
        None
    };

    let mut verdict = rate.verdict;
    if let Some(v) = &variance {
        if v.verdict == Verdict::Fail {
            verdict = Verdict::Fail;
        }
    }
    if let Some(l) = &max_ineq {
        if !l.holds {
            verdict = Verdict::Fail;
        }
    }

    let report = serde_json::json!({
        "model": model.label(),
        "q": q,
        "n_grid": cfg.n_grid,
        "theta": profile.theta,
        "Theta_tails": profile.tails,
        "cumulative": profile.cumulative,
        "tail_decay": rate,
        "variance_stability": variance,
        "third_moment_bound": third,
        "long_run": long_run,
        "maximal_inequality": max_ineq,
        "verdict": verdict,
    });
    export::write_json(&out.join("dependence.json"), &report)?;
    Ok(verdict)
}

fn cmd_characteristics(
    cfg: &ExperimentConfig,
    seed: u64,
    out: &std::path::Path,
    args: &CommonArgs,
) -> Result<Verdict, Error> {
    let model = cfg.model()?;
    let f = cfg.functional(args.allow_exp_growth)?;
    let horizon = cfg.horizon.unwrap_or(1.0);
    let n_grid = cfg.n_grid.clone().unwrap_or_else(|| vec![200, 800]);
    let gap_reps = cfg.gap_reps.unwrap_or(200);
    let b_grid = cfg.b_grid.clone().unwrap_or_else(|| vec![1.0, 2.0, 4.0]);
    let lineage = SeedLineage::new(seed, 0);

    let params = long_run_params(&model, 2000, 2000, lineage.subexperiment(0x10E6))?;
    eprintln!(
        "characteristics: {} with {} (lambda = {:.4}, sigma = {:.4})",
        model.label(),
        f.label(),
        params.lambda,
        params.sigma
    );

    let mut medians = Vec::new();
    for &n in &n_grid {
        let len = ((n as f64) * horizon).ceil() as usize;
        // One exemplar path's characteristic curves.
        let bundle = simulate_path(&model, len, lineage.replication(0))?;
        let emp = empirical_characteristics(&bundle, &model, &f, n, horizon)?;
        let pair = pair_process(&bundle, &f, n, horizon)?;
        let comp = composed_characteristics(&pair, &f, params.lambda, params.sigma);
        export::write_characteristics_csv(
            &out.join(format!("characteristics_n{n}.csv")),
            &emp,
            Some(&comp),
        )?;

        let gaps: Result<Vec<GapReport>, Error> = (0..gap_reps as u64)
            .into_par_iter()
            .map(|rep| {
                let b = simulate_path(&model, len, lineage.subexperiment(0x6A75).replication(rep))?;
                gap_diagnostics(
                    &b,
                    &model,
                    &f,
                    params.lambda,
                    params.sigma,
                    n,
                    horizon,
                    &b_grid,
                    cfg.threshold_a,
                )
            })
            .collect();
        let gaps = gaps?;
        export::write_gap_reports_csv(&out.join(format!("gaps_n{n}.csv")), &gaps)?;
        let med = |get: &dyn Fn(&GapReport) -> f64| {
            let v: Vec<f64> = gaps.iter().map(get).collect();
            median_of(&v)
        };
        medians.push(serde_json::json!({
            "n": n,
            "reps": gap_reps,
            "sup_jump": med(&|g| g.sup_jump),
            "sup_c_gap": med(&|g| g.max_c_gap()),
            "sup_b_gap": med(&|g| g.max_b_gap()),
            "big_jump_mass": b_grid.iter().enumerate().map(|(i, &b)| {
                let v: Vec<f64> = gaps.iter().map(|g| g.big_jump_mass[i].1).collect();
                (b, median_of(&v))
            }).collect::<Vec<_>>(),
        }));
    }

    // Trend verdict: the gap medians must not grow along the n-grid.
    let mut verdict = Verdict::Pass;
    if medians.len() >= 2 {
        for key in ["sup_jump", "sup_c_gap", "sup_b_gap"] {
            let first = medians.first().unwrap()[key].as_f64().unwrap();
            let last = medians.last().unwrap()[key].as_f64().unwrap();
            if last >= first {
                verdict = Verdict::Fail;
            }
        }
    }
    let report = serde_json::json!({
        "model": model.label(),
        "functional": f.label(),
        "lambda": params.lambda,
        "sigma": params.sigma,
        "gap_medians": medians,
        "verdict": verdict,
    });
    export::write_json(&out.join("gaps.json"), &report)?;
    Ok(verdict)
}

fn cmd_limit(
    cfg: &ExperimentConfig,
    seed: u64,
    out: &std::path::Path,
    args: &CommonArgs,
) -> Result<Verdict, Error> {
    let model = cfg.model()?;
    let f = cfg.functional(args.allow_exp_growth)?;
    let reps = cfg.reps.unwrap_or(4000);
    let r = cfg.r.unwrap_or(1.0);
    let lineage = SeedLineage::new(seed, 0);
    let params = long_run_params(&model, 2000, 2000, lineage.subexperiment(0x10E6))?;
    let n_grid = cfg.n_grid.clone().unwrap_or_else(|| vec![1000]);
    eprintln!(
        "limit: {} samples of the {} limit law at each M in {:?}",
        reps,
        f.label(),
        n_grid
    );

    for &steps in &n_grid {
        let results: Vec<_> = (0..reps as u64)
            .into_par_iter()
            .map(|rep| {
                limit_functional(
                    &f,
                    params.lambda,
                    params.sigma,
                    r,
                    steps,
                    lineage.replication(rep),
                )
                .map(|s| s.value)
            })
            .collect();
        let mut samples = Vec::with_capacity(reps);
        let mut flagged = 0usize;
        for res in results {
            match res {
                Ok(v) => samples.push(v),
                Err(Error::Flagged(_)) => flagged += 1,
                Err(e) => return Err(e),
            }
        }
        let manifest = Manifest {
            statistic: "limit".into(),
            model: model.label(),
            functional: f.label(),
            lambda: params.lambda,
            sigma: params.sigma,
            n: steps,
            steps,
            r,
            reps,
            master_seed: seed,
            note: (!f.polynomial_growth)
                .then(|| "outside polynomial-growth hypotheses".to_string()),
        };
        let ens = EnsembleDistribution::new(samples, flagged, manifest)?;
        export::write_ensemble(out, &format!("limit_M{steps}"), &ens)?;
    }
    Ok(Verdict::Pass)
}

fn cmd_experiment(
    kind: ExperimentKind,
    cfg: &ExperimentConfig,
    seed: u64,
    out: &std::path::Path,
    args: &CommonArgs,
) -> Result<Verdict, Error> {
    let plan = cfg.plan(
        kind,
        Some(seed),
        args.override_assumptions,
        args.allow_exp_growth,
    )?;
    eprintln!(
        "{:?}: model {} functional {} over n-grid {:?} with {} reps",
        kind,
        plan.model.label(),
        plan.functional.label(),
        plan.n_grid,
        plan.reps
    );
    let output = convergence_experiment(&plan)?;
    export::write_json(&out.join("report.json"), &output.report)?;
    for (name, ens) in &output.ensembles {
        export::write_ensemble(out, name, ens)?;
    }
    eprintln!(
        "verdict: {:?} ({})",
        output.report.verdict, output.report.verdict_reason
    );
    Ok(output.report.verdict)
}
