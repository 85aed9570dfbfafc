//! Thin command-line front end; all logic lives in the library.
//!
//! Exit codes: 0 success, 1 usage/configuration error, 2 verification
//! gate failure (`report`).

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use buffet_lab::cltpipe::{clt_pipeline_dish, clt_pipeline_mean, CltConfig};
use buffet_lab::config::{resolve, ConfigDraft, RunConfig};
use buffet_lab::ensemble::{par_replicas, run_ensemble, EnsembleConfig};
use buffet_lab::error::Result;
use buffet_lab::estimate::{averaged_series, estimate_parameters};
use buffet_lab::export::{
    estimation_to_text, export_estimation, export_summary, summary_to_text, trajectory_to_csv,
};
use buffet_lab::observables::LambdaTable;
use buffet_lab::recursion::{
    clt_residuals, concentration_statistic, positivity_fraction, run_recursion, run_sa, Attractor,
    DynamicsForm, Innovation, LimitVariance, MartingaleNoise, RecursionSpec, Remainder, SAProblem,
    StepSize,
};
use buffet_lab::regime::boundary_proximity;
use buffet_lab::report::run_report;
use buffet_lab::rng::replica_seed;
use buffet_lab::stats::{mean, normality_check, variance};
use buffet_lab::trajectory::simulate_with;

#[derive(Parser)]
#[command(name = "buffet-lab", version, about = "Monte Carlo laboratory for an interacting multi-factorial innovation process")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags mirroring the configuration keys (kebab-case); any flag
/// overrides the same key from `--config`.
#[derive(Args, Debug)]
struct CommonFlags {
    /// Flat key=value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    w: Option<f64>,
    #[arg(long)]
    iota: Option<f64>,
    #[arg(long)]
    horizon: Option<u64>,
    /// Master seed (required; no silent nondeterminism).
    #[arg(long = "master-seed", alias = "seed")]
    master_seed: Option<u64>,
    #[arg(long = "n-tagged")]
    n_tagged: Option<usize>,
    /// histogram | naive
    #[arg(long)]
    mode: Option<String>,
    #[arg(long = "points-per-decade")]
    points_per_decade: Option<u32>,
    /// Explicit comma-separated checkpoint list (overrides the grid).
    #[arg(long)]
    checkpoints: Option<String>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    quantities: Option<String>,
    #[arg(long = "lil-c")]
    lil_c: Option<f64>,
    #[arg(long = "t-check")]
    t_check: Option<u64>,
    #[arg(long = "t-max")]
    t_max: Option<u64>,
    #[arg(long = "fit-decades")]
    fit_decades: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long = "gap-fraction")]
    gap_fraction: Option<f64>,
}

impl CommonFlags {
    fn draft(&self) -> ConfigDraft {
        let mut d = ConfigDraft::default();
        macro_rules! put {
            ($key:literal, $field:expr) => {
                if let Some(v) = &$field {
                    d.set($key, v);
                }
            };
        }
        put!("alpha", self.alpha);
        put!("beta", self.beta);
        put!("theta", self.theta);
        put!("w", self.w);
        put!("iota", self.iota);
        put!("horizon", self.horizon);
        put!("master-seed", self.master_seed);
        put!("n-tagged", self.n_tagged);
        put!("mode", self.mode);
        put!("points-per-decade", self.points_per_decade);
        put!("checkpoints", self.checkpoints);
        put!("replicas", self.replicas);
        put!("quantities", self.quantities);
        put!("lil-c", self.lil_c);
        put!("t-check", self.t_check);
        put!("t-max", self.t_max);
        put!("fit-decades", self.fit_decades);
        put!("epsilon", self.epsilon);
        put!("gap-fraction", self.gap_fraction);
        if let Some(o) = &self.output {
            d.set("output", o.display());
        }
        d
    }

    fn resolve(&self, subcommand: &str) -> Result<RunConfig> {
        let draft = match &self.config {
            Some(path) => ConfigDraft::from_file(path)?.merged_with(&self.draft()),
            None => self.draft(),
        };
        let cfg = resolve(&draft, subcommand)?;
        for warning in boundary_proximity(&cfg.params, 1e-9) {
            eprintln!("warning: {warning}");
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one replica and write the trajectory CSV.
    Simulate(CommonFlags),
    /// Run an ensemble and write the rescaled-terminal summary.
    Ensemble(CommonFlags),
    /// Recover (alpha, beta, w, iota) from an ensemble by log-log fits.
    Estimate(CommonFlags),
    /// Second-order verification pipelines.
    Clt {
        /// mean | dish
        target: String,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Built-in recursive-dynamics harness scenarios.
    RecursionLab(CommonFlags),
    /// Regime classification, scaling table and fast checks (exit 2 on
    /// a failed check).
    Report(CommonFlags),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Simulate(flags) => {
            let cfg = flags.resolve("simulate")?;
            let table = Arc::new(LambdaTable::new(&cfg.params, cfg.horizon));
            let tr = simulate_with(
                &cfg.params,
                cfg.horizon,
                &cfg.checkpoints(),
                cfg.n_tagged,
                cfg.master_seed,
                cfg.mode,
                Some(table),
            )?;
            let text = trajectory_to_csv(&tr, &cfg.echo());
            emit(&cfg, &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Ensemble(flags) => {
            let cfg = flags.resolve("ensemble")?;
            let summary = run_ensemble(
                &cfg.params,
                &EnsembleConfig {
                    horizon: cfg.horizon,
                    replicas: cfg.replicas,
                    master_seed: cfg.master_seed,
                    n_tagged: cfg.n_tagged,
                    checkpoints: cfg.checkpoints(),
                    mode: cfg.mode,
                    lil_c: Some(cfg.lil_c),
                },
                &cfg.quantities,
            )?;
            match &cfg.output {
                Some(path) => export_summary(&summary, &cfg.echo(), Path::new(path))?,
                None => print!("{}", summary_to_text(&summary, &cfg.echo())),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Estimate(flags) => {
            let cfg = flags.resolve("estimate")?;
            let table = Arc::new(LambdaTable::new(&cfg.params, cfg.horizon));
            let cps = cfg.checkpoints();
            let trajectories: Vec<_> = par_replicas(cfg.replicas, |i| {
                simulate_with(
                    &cfg.params,
                    cfg.horizon,
                    &cps,
                    cfg.n_tagged,
                    replica_seed(cfg.master_seed, i as u64),
                    cfg.mode,
                    Some(Arc::clone(&table)),
                )
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
            let series = averaged_series(&trajectories)?;
            let report = estimate_parameters(&series, cfg.fit_decades)?;
            match &cfg.output {
                Some(path) => export_estimation(&report, &cfg.echo(), Path::new(path))?,
                None => print!("{}", estimation_to_text(&report, &cfg.echo())),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Clt { target, flags } => {
            let cfg = flags.resolve("clt")?;
            let pipe_cfg = CltConfig {
                replicas: cfg.replicas,
                t_check: cfg.t_check,
                t_max: cfg.t_max,
                master_seed: cfg.master_seed,
                n_tagged: cfg.n_tagged,
            };
            let mut out = String::new();
            use std::fmt::Write as _;
            for (k, v) in cfg.echo() {
                writeln!(out, "# {k} = {v}").unwrap();
            }
            match target.as_str() {
                "mean" => {
                    let sample = clt_pipeline_mean(&cfg.params, &pipe_cfg)?;
                    let gate = normality_check(&sample.standardized);
                    writeln!(out, "replicas = {}", sample.standardized.len()).unwrap();
                    writeln!(out, "residual-mean = {}", mean(&sample.standardized)).unwrap();
                    writeln!(out, "residual-variance = {}", variance(&sample.standardized)).unwrap();
                    match gate {
                        Ok(rep) => writeln!(
                            out,
                            "normality = {} (skewness {:.4}, excess kurtosis {:.4}, cdf dev {:.4} / band {:.4})",
                            if rep.pass { "pass" } else { "fail" },
                            rep.skewness,
                            rep.excess_kurtosis,
                            rep.cdf_max_deviation,
                            rep.cdf_band
                        )
                        .unwrap(),
                        Err(e) => writeln!(out, "normality = unavailable ({e})").unwrap(),
                    }
                    writeln!(out, "uncorrected-z-residual-mean = {}", mean(&sample.uncorrected_z_residual)).unwrap();
                    writeln!(out, "tbar-concentration-mean = {}", mean(&sample.tbar_concentration)).unwrap();
                }
                "dish" => {
                    let sample = clt_pipeline_dish(&cfg.params, &pipe_cfg)?;
                    writeln!(out, "case = {:?}", sample.case).unwrap();
                    writeln!(out, "replicas = {} (dropped {})", sample.standardized.len(), sample.dropped).unwrap();
                    writeln!(out, "residual-mean = {}", mean(&sample.standardized)).unwrap();
                    writeln!(out, "residual-variance = {}", variance(&sample.standardized)).unwrap();
                    match normality_check(&sample.standardized) {
                        Ok(rep) => writeln!(out, "normality = {}", if rep.pass { "pass" } else { "fail" }).unwrap(),
                        Err(e) => writeln!(out, "normality = unavailable ({e})").unwrap(),
                    }
                    if !sample.concentration_ratio.is_empty() {
                        writeln!(out, "concentration-ratio-mean = {}", mean(&sample.concentration_ratio)).unwrap();
                    }
                }
                other => {
                    return Err(buffet_lab::Error::InvalidConfig(format!(
                        "clt target must be `mean` or `dish`, got `{other}`"
                    )))
                }
            }
            emit(&cfg, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::RecursionLab(flags) => {
            let cfg = flags.resolve("recursion-lab")?;
            let out = recursion_lab(&cfg)?;
            emit(&cfg, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Report(flags) => {
            let cfg = flags.resolve("report")?;
            let outcome = run_report(&cfg)?;
            print!("{}", outcome.text);
            if outcome.all_passed {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(2))
            }
        }
    }
}

fn emit(cfg: &RunConfig, text: &str) -> Result<()> {
    match &cfg.output {
        Some(path) => std::fs::write(path, text).map_err(|source| buffet_lab::Error::Io {
            path: path.clone(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// The built-in appendix-harness scenarios, desk-scale.
fn recursion_lab(cfg: &RunConfig) -> Result<String> {
    use std::fmt::Write as _;
    let mut out = String::new();
    for (k, v) in cfg.echo() {
        writeln!(out, "# {k} = {v}").unwrap();
    }
    let seed = cfg.master_seed;
    let replicas = cfg.replicas.max(2);

    // Noiseless stochastic approximation: X -> a/b.
    let problem = SAProblem {
        eta: StepSize::Harmonic { theta: 1.0 },
        b: 0.5,
        attractor: Attractor::Constant(2.0),
        noise: MartingaleNoise::None,
        remainder: Remainder::Zero,
        x1: 3.5,
    };
    let horizon = cfg.horizon.max(10_000);
    let (path, _) = run_sa(&problem, horizon, &[horizon], seed)?;
    writeln!(
        out,
        "noiseless-sa: terminal {} (target 4, error {:.3e})",
        path.terminal().1,
        (path.terminal().1 - 4.0).abs()
    )
    .unwrap();

    // Random attractor: ensemble mean -> E[A_inf]/b.
    let problem = SAProblem {
        attractor: Attractor::RandomShifted { lo: 1.0, hi: 3.0, shift: 1.0 },
        noise: MartingaleNoise::Rademacher { scale: 1.0 },
        ..problem
    };
    let terminals: Vec<f64> = par_replicas(replicas, |i| {
        run_sa(&problem, horizon, &[horizon], replica_seed(seed, i as u64))
            .map(|(p, _)| p.terminal().1)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    writeln!(
        out,
        "random-attractor-sa: ensemble mean {} (target E[A]/b = 4)",
        mean(&terminals)
    )
    .unwrap();

    // Bernoulli innovation: strict positivity of t^{1-delta} X_t.
    let spec = RecursionSpec {
        theta: 1.0,
        delta: 0.5,
        form: DynamicsForm::NonNegative(Innovation::Bernoulli),
        remainder: Remainder::Zero,
        limit_variance: LimitVariance::DeltaTimesLimit,
        x1: 0.5,
    };
    let rescaled: Vec<f64> = par_replicas(replicas, |i| {
        run_recursion(&spec, horizon, &[horizon], replica_seed(seed ^ 0xA5, i as u64)).map(|p| {
            let (t, x) = p.terminal();
            (t as f64).powf(1.0 - spec.delta) * x
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    writeln!(
        out,
        "positivity: fraction below {} = {}",
        cfg.epsilon,
        positivity_fraction(&rescaled, cfg.epsilon)?
    )
    .unwrap();

    // Rademacher CLT at delta = 1.
    let spec_clt = RecursionSpec {
        theta: 1.0,
        delta: 1.0,
        form: DynamicsForm::Signed(MartingaleNoise::Rademacher { scale: 1.0 }),
        remainder: Remainder::Zero,
        limit_variance: LimitVariance::Constant(1.0),
        x1: 0.0,
    };
    let t_max = cfg.t_max.max(100_000);
    let t_check = cfg.t_check.clamp(10, t_max / 10);
    let paths: Vec<_> = par_replicas(replicas, |i| {
        run_recursion(&spec_clt, t_max, &[t_check, t_max], replica_seed(seed ^ 0x5A, i as u64))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let residuals = clt_residuals(&paths, &spec_clt, t_check, t_max)?;
    match normality_check(&residuals) {
        Ok(rep) => writeln!(
            out,
            "rademacher-clt: normality {} (variance {:.4})",
            if rep.pass { "pass" } else { "fail" },
            rep.variance
        )
        .unwrap(),
        Err(e) => writeln!(
            out,
            "rademacher-clt: residual mean {:.4}, variance {:.4} (gate unavailable: {e})",
            mean(&residuals),
            variance(&residuals)
        )
        .unwrap(),
    }

    // Slow remainder: concentration at -rho_inf/(delta-rho).
    let spec_conc = RecursionSpec {
        remainder: Remainder::Power { rho_inf: 2.0, rho: 0.75 },
        ..spec_clt
    };
    let paths: Vec<_> = par_replicas(replicas, |i| {
        run_recursion(&spec_conc, t_max, &[t_check, t_max], replica_seed(seed ^ 0xC3, i as u64))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let stat = concentration_statistic(&paths, &spec_conc, t_check, t_max)?;
    writeln!(out, "slow-remainder concentration: {stat:.4} (target -8)").unwrap();

    Ok(out)
}
