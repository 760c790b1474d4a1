use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use bandit_core::concentration as ci;
use bandit_core::harness::bounds::bound_check;
use bandit_core::harness::config::BetaSetting;
use bandit_core::harness::figures::{self, Fig2Params, Fig3Params, Fig4Params, Overrides};
use bandit_core::harness::{write_all, EnvSpec, ExperimentConfig, ExperimentResult};
use bandit_core::{run_experiment, KArmedEnv};

#[derive(Parser)]
#[command(
    name = "bandit-bench",
    version,
    about = "Bandit simulations and regret experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config file
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Worker threads; 0 uses every core
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Three-armed Gaussian bandit: ETC, UCB, MOSS, TS, MOTS
    Fig2 {
        #[command(flatten)]
        common: Common,
        /// ETC exploration length per arm
        #[arg(long, default_value_t = 210)]
        m: u64,
        #[arg(long, default_value_t = 0.8)]
        rho: f64,
        #[arg(long, default_value_t = 1.5)]
        alpha: f64,
    },
    /// Linear contextual bandit: LinUCB and LinTS
    Fig3 {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// LinTS posterior scale
        #[arg(long, default_value_t = 1.0)]
        v: f64,
        /// LinUCB confidence level
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 0.1)]
        noise_variance: f64,
        /// Draw a new parameter vector for every replication
        #[arg(long)]
        resample_theta: bool,
        /// Also run per-arm LinUCB with this alpha
        #[arg(long)]
        disjoint_alpha: Option<f64>,
    },
    /// GP-UCB vs GP-TS on sin(5x)(1 - tanh(x^2))
    Fig4 {
        #[command(flatten)]
        common: Common,
        /// Fixed GP-UCB beta, or "auto" for the log schedule
        #[arg(long, default_value = "2.0")]
        beta: String,
        #[arg(long, default_value_t = 200)]
        grid: usize,
        #[arg(long, default_value_t = 5)]
        initial_points: usize,
        #[arg(long, default_value_t = 0.1)]
        noise_variance: f64,
        #[arg(long, default_value_t = 1.0)]
        lengthscale: f64,
    },
    /// Confidence-interval and tail-bound calculators
    Ci(CiArgs),
    /// Run a K-armed config and compare regret against theoretical bounds
    CheckBounds {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replications: Option<u64>,
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            replications: self.replications,
            horizon: self.horizon,
            jobs: self.jobs,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Calculator {
    Hoeffding,
    Subgaussian,
    TreatmentEffect,
    Subexp,
    Dkw,
    Mills,
    Markov,
    Chebyshev,
    Chernoff,
}

#[derive(Args)]
struct CiArgs {
    calculator: Calculator,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Width of the support for Hoeffding
    #[arg(long, default_value_t = 1.0)]
    range: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Deviation or threshold
    #[arg(long)]
    t: Option<f64>,
    /// Sub-exponential variance parameter
    #[arg(long)]
    lambda_bar: Option<f64>,
    /// Sub-exponential scale parameter
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    variance: Option<f64>,
    /// E[phi(X)] for Markov
    #[arg(long)]
    expected: Option<f64>,
}

fn need<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.with_context(|| format!("--{flag} is required for this calculator"))
}

fn run_ci(a: &CiArgs) -> Result<()> {
    let (label, value) = match a.calculator {
        Calculator::Hoeffding => (
            "half-width",
            ci::hoeffding_halfwidth(need(a.n, "n")?, a.range, need(a.delta, "delta")?)?,
        ),
        Calculator::Subgaussian => (
            "half-width",
            ci::subgaussian_halfwidth(need(a.n, "n")?, a.sigma, need(a.delta, "delta")?)?,
        ),
        Calculator::TreatmentEffect => (
            "half-width",
            ci::treatment_effect_halfwidth(need(a.n, "n")?, a.sigma, need(a.delta, "delta")?)?,
        ),
        Calculator::Subexp => (
            "tail",
            ci::subexp_tail(
                need(a.n, "n")?,
                need(a.lambda_bar, "lambda-bar")?,
                need(a.alpha, "alpha")?,
                need(a.t, "t")?,
            )?,
        ),
        Calculator::Dkw => (
            "epsilon",
            ci::dkw_epsilon(need(a.n, "n")?, need(a.delta, "delta")?)?,
        ),
        Calculator::Mills => ("tail", ci::mills_tail(a.sigma, need(a.t, "t")?)?),
        Calculator::Markov => (
            "tail",
            ci::markov_tail(need(a.expected, "expected")?, need(a.t, "t")?)?,
        ),
        Calculator::Chebyshev => (
            "tail",
            ci::chebyshev_tail(need(a.variance, "variance")?, need(a.t, "t")?)?,
        ),
        Calculator::Chernoff => (
            "tail",
            ci::chernoff_subgaussian_tail(a.sigma, need(a.t, "t")?)?,
        ),
    };
    println!("{label} = {value}");
    Ok(())
}

fn run_and_write(cfg: &ExperimentConfig, out: &Path) -> Result<ExperimentResult> {
    let result = run_experiment(cfg)?;
    let paths = write_all(&result, out, &cfg.experiment.name)?;
    print_summary(&result);
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(result)
}

fn print_summary(result: &ExperimentResult) {
    let ex = &result.config.experiment;
    println!(
        "{}: T = {}, R = {}, seed = {}",
        ex.name, ex.horizon, ex.replications, ex.seed
    );
    for p in &result.policies {
        println!(
            "  {:<16} final regret {:>10.3} ± {:.3}",
            p.name,
            p.final_mean(),
            p.final_stderr()
        );
    }
}

fn check_bounds(path: &Path, jobs: Option<usize>) -> Result<bool> {
    let mut cfg = ExperimentConfig::from_file(path)?;
    if let Some(j) = jobs {
        cfg.experiment.jobs = j;
    }
    let EnvSpec::KArmed { arms } = &cfg.environment else {
        bail!("check-bounds needs a k-armed environment");
    };
    let env = KArmedEnv::new(arms.clone())?;
    let result = run_experiment(&cfg)?;
    let mut ok = true;
    for (spec, summary) in cfg.policies.iter().zip(&result.policies) {
        let checks = bound_check(spec, &env, cfg.experiment.horizon, summary.final_mean());
        match checks {
            Ok(list) if list.is_empty() => println!("{:<12} no bound", spec.name()),
            Ok(list) => {
                for c in list {
                    let verdict = match (c.pass, c.qualitative) {
                        (true, _) => "pass",
                        (false, true) => "above (indicative only)",
                        (false, false) => "FAIL",
                    };
                    ok &= c.pass || c.qualitative;
                    println!(
                        "{:<12} {:<26} empirical {:>10.3}  bound {:>10.3}  {verdict}",
                        c.policy,
                        format!("{:?}", c.kind),
                        c.empirical,
                        c.bound
                    );
                }
            }
            Err(e) => println!("{:<12} {e}", spec.name()),
        }
        if summary.decomposition_ok == Some(false) {
            ok = false;
            println!("{:<12} regret decomposition FAILED", spec.name());
        }
    }
    Ok(ok)
}

fn parse_beta(s: &str) -> Result<BetaSetting> {
    if s == "auto" {
        return Ok(BetaSetting::default());
    }
    let b: f64 = s.parse().with_context(|| format!("bad --beta `{s}`"))?;
    Ok(BetaSetting::Fixed(b))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate {
            config,
            seed,
            out,
            jobs,
        } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(s) = seed {
                cfg.experiment.seed = s;
            }
            if let Some(j) = jobs {
                cfg.experiment.jobs = j;
            }
            run_and_write(&cfg, &out)?;
        }
        Command::Fig2 {
            common,
            m,
            rho,
            alpha,
        } => {
            let p = Fig2Params {
                etc_m: m,
                mots_rho: rho,
                mots_alpha: alpha,
                ..Default::default()
            };
            run_and_write(&figures::fig2(&common.overrides(), &p), &common.out)?;
        }
        Command::Fig3 {
            common,
            lambda,
            v,
            delta,
            noise_variance,
            resample_theta,
            disjoint_alpha,
        } => {
            let p = Fig3Params {
                lambda,
                v,
                delta,
                noise_variance,
                resample_theta,
                disjoint_alpha,
                ..Default::default()
            };
            run_and_write(&figures::fig3(&common.overrides(), &p), &common.out)?;
        }
        Command::Fig4 {
            common,
            beta,
            grid,
            initial_points,
            noise_variance,
            lengthscale,
        } => {
            let p = Fig4Params {
                beta: parse_beta(&beta)?,
                grid,
                initial_points,
                noise_variance,
                lengthscale,
                ..Default::default()
            };
            run_and_write(&figures::fig4(&common.overrides(), &p), &common.out)?;
        }
        Command::Ci(args) => run_ci(&args)?,
        Command::CheckBounds { config, jobs } => return check_bounds(&config, jobs),
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
