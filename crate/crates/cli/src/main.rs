//! Experiment runner for the photal classifier simulator.
//!
//! Exit codes: 0 on success, 2 on configuration errors, 1 on runtime errors.

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use photal::classifier::Backend;
use photal::datasets::{self, PoolScheme};
use photal::harness::{
    self, compare_to_analytic, cost_ratios, emit_outputs, run_suite, BackendChoice,
    ClassifierKind, ExperimentConfig, NamedCurve, RatioLine, StrategyChoice, SuiteResult,
};
use photal::route_planner::{naive_route, plan_route, CircuitRoute, Metric};
use photal::theory;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "photal", version, about = "Polarization-photonics classifier experiments")]
struct Cli {
    /// Worker threads for the seed fan-out (defaults to the core count).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassifierArg {
    Vqc,
    Nevqc,
    NevqcStar,
}

impl From<ClassifierArg> for ClassifierKind {
    fn from(c: ClassifierArg) -> Self {
        match c {
            ClassifierArg::Vqc => ClassifierKind::Vqc,
            ClassifierArg::Nevqc => ClassifierKind::Nevqc,
            ClassifierArg::NevqcStar => ClassifierKind::NevqcStar,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Analytic,
    Sampled,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Random,
    Even,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Sum,
    Max,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Usamp,
    Qbc,
}

/// Flags shared by the suite-running subcommands; each overrides the config
/// file when both are given.
#[derive(Args)]
struct SuiteArgs {
    /// Config file in `key = value` form.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    classifier: Option<ClassifierArg>,
    /// Pattern id (1, 2, or 3).
    #[arg(long)]
    pattern: Option<u8>,
    #[arg(long)]
    backend: Option<BackendArg>,
    /// Shots per evaluation for the sampled backend.
    #[arg(long)]
    shots: Option<u32>,
    /// Master seed; per-run seeds derive from it unless the config lists
    /// explicit seeds.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a data pool (or labeled test grid) as CSV.
    GenData {
        #[arg(long)]
        pattern: u8,
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, value_enum, default_value_t = SchemeArg::Random)]
        scheme: SchemeArg,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Emit the labeled midpoint test grid instead of an unlabeled pool.
        #[arg(long)]
        grid: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the per-pattern maximum-accuracy bound table.
    Theory,
    /// Plan one epoch's wave-plate rotation schedule and report its cost.
    Route {
        #[arg(long, value_enum, default_value_t = ClassifierArg::Vqc)]
        classifier: ClassifierArg,
        /// Trainable plate parameter of the single-stage circuit.
        #[arg(long, default_value_t = 0.9)]
        theta: f64,
        #[arg(long, default_value_t = 0.9)]
        rho1: f64,
        #[arg(long, default_value_t = 0.4)]
        rho2: f64,
        /// Comma-separated data angles; defaults to an even grid.
        #[arg(long)]
        xs: Option<String>,
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, value_enum, default_value_t = MetricArg::Sum)]
        metric: MetricArg,
        /// Write the schedule as `step,x,theta1,theta2,leg_cost` CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train without selection on a fully labeled pool.
    Train(SuiteArgs),
    /// Train with pool-based selection.
    AlTrain {
        #[command(flatten)]
        suite: SuiteArgs,
        /// Selection strategy; falls back to the config file, then to usamp.
        #[arg(long, value_enum)]
        strategy: Option<StrategyArg>,
    },
    /// Run the full 3-pattern x 3-strategy x {VQC, NEVQC} comparison matrix.
    Reproduce(SuiteArgs),
    /// Compare a sampled run against its analytic twin.
    Compare(SuiteArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        // A second initialization (e.g. in tests) is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let config_error = err
                .downcast_ref::<photal::Error>()
                .is_some_and(|e| matches!(e, photal::Error::Config(_) | photal::Error::Parse { .. }));
            if config_error {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::GenData { pattern, n, scheme, seed, grid, out } => {
            let p = datasets::Pattern::built_in(pattern)?;
            let points = if grid {
                datasets::generate_test_grid(&p, n)
            } else {
                let scheme = match scheme {
                    SchemeArg::Random => PoolScheme::UniformRandom,
                    SchemeArg::Even => PoolScheme::EvenlySpaced,
                };
                datasets::generate_pool(&p, n, scheme, seed)?
            };
            datasets::write_points_csv(&out, &points)?;
            println!("wrote {} points to {}", points.len(), out.display());
            Ok(())
        }
        Command::Theory => {
            println!("pattern  delta_beta  vqc_bound  nevqc_bound");
            for (id, delta, vqc, nevqc) in theory::bound_table() {
                println!("{id:>7}  {delta:>10.6}  {vqc:>9.4}  {nevqc:>11.4}");
            }
            Ok(())
        }
        Command::Route { classifier, theta, rho1, rho2, xs, n, metric, out } => {
            let circuit = match ClassifierKind::from(classifier) {
                ClassifierKind::Vqc => CircuitRoute::Vqc { theta },
                _ => CircuitRoute::Nevqc { rho1, rho2 },
            };
            let metric = match metric {
                MetricArg::Sum => Metric::Sum,
                MetricArg::Max => Metric::Max,
            };
            let mut angles: Vec<f64> = match xs {
                Some(list) => list
                    .split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .map_err(|_| photal::Error::Config(format!("bad angle {s:?}")))
                    })
                    .collect::<Result<_, _>>()?,
                None => (0..n).map(|j| (j as f64 + 0.5) * std::f64::consts::PI / n as f64).collect(),
            };
            if angles.is_empty() {
                return Err(photal::Error::Config("route needs at least one angle".into()).into());
            }
            angles.sort_by(f64::total_cmp);
            let planned = plan_route(&angles, &circuit, metric);
            let naive = naive_route(&angles, &circuit, metric);
            println!(
                "planned route: {} visits, cost {:.6} rad (parameter space; physical plate travel is half)",
                planned.points.len(),
                planned.total_cost
            );
            println!("naive per-angle route cost: {:.6} rad", naive.total_cost);
            if let Some(path) = out {
                harness::write_schedule_csv(&path, &planned)?;
                println!("schedule written to {}", path.display());
            }
            Ok(())
        }
        Command::Train(args) => {
            let cfg = resolve_config(&args, StrategyChoice::NoAl, None)?;
            let suite = run_suite(&cfg, args.seed)?;
            emit_and_summarize(&suite, &args.out)
        }
        Command::AlTrain { suite: args, strategy } => {
            let from_file = args
                .config
                .as_deref()
                .map(ExperimentConfig::from_file)
                .transpose()?
                .map(|c| c.strategy)
                .filter(|s| *s != StrategyChoice::NoAl);
            let strategy = match strategy {
                Some(StrategyArg::Usamp) => StrategyChoice::Usamp,
                Some(StrategyArg::Qbc) => StrategyChoice::Qbc,
                None => from_file.unwrap_or(StrategyChoice::Usamp),
            };
            let cfg = resolve_config(&args, strategy, None)?;
            let suite = run_suite(&cfg, args.seed)?;
            emit_and_summarize(&suite, &args.out)
        }
        Command::Reproduce(args) => reproduce(&args),
        Command::Compare(args) => compare(&args),
    }
}

/// Builds the experiment config from the optional file plus flag overrides.
fn resolve_config(
    args: &SuiteArgs,
    strategy: StrategyChoice,
    classifier_default: Option<ClassifierKind>,
) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::new(
            classifier_default.unwrap_or(ClassifierKind::Vqc),
            1,
            strategy,
        ),
    };
    cfg.strategy = strategy;
    if let Some(c) = args.classifier {
        cfg.classifier = c.into();
    }
    if let Some(p) = args.pattern {
        cfg.pattern = p;
    }
    if let Some(b) = args.backend {
        cfg.backend = match b {
            BackendArg::Analytic => BackendChoice::Analytic,
            BackendArg::Sampled => BackendChoice::Sampled,
        };
    }
    if let Some(s) = args.shots {
        cfg.shots = Some(s);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit_and_summarize(suite: &SuiteResult, out: &Path) -> anyhow::Result<()> {
    let files = emit_outputs(suite, out)?;
    summarize(suite);
    println!("{} files under {}", files.len(), out.display());
    Ok(())
}

fn summarize(suite: &SuiteResult) {
    let acc = suite.curve.final_mean();
    let std = suite.curve.std_accuracy.last().copied().unwrap_or(0.0);
    let rotation: f64 = suite
        .runs
        .iter()
        .map(|r| r.trace.rows.last().map_or(0.0, |row| row.rotation_distance))
        .sum::<f64>()
        / suite.runs.len() as f64;
    let chained: f64 =
        suite.runs.iter().map(|r| r.chained_rotation).sum::<f64>() / suite.runs.len() as f64;
    println!(
        "{}: final accuracy {:.4} +- {:.4} over {} seeds, {} evaluations, \
         rotation {:.2} rad within epochs + {:.2} rad between epochs",
        suite.config.label(),
        acc,
        std,
        suite.runs.len(),
        suite.total_evaluations(),
        rotation,
        chained,
    );
}

fn reproduce(args: &SuiteArgs) -> anyhow::Result<()> {
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let strategies = [StrategyChoice::NoAl, StrategyChoice::Usamp, StrategyChoice::Qbc];
    let mut ratio_lines = Vec::new();

    for classifier in [ClassifierKind::Vqc, ClassifierKind::Nevqc] {
        for pattern in 1..=3u8 {
            let mut suites: Vec<SuiteResult> = Vec::new();
            for strategy in strategies {
                let mut sub = SuiteArgs {
                    config: args.config.clone(),
                    classifier: None,
                    pattern: Some(pattern),
                    backend: args.backend,
                    shots: args.shots,
                    seed: args.seed,
                    out: args.out.clone(),
                };
                // Flag overrides still apply; the matrix pins classifier and
                // pattern per cell.
                sub.classifier = None;
                let mut cfg = resolve_config(&sub, strategy, Some(classifier))?;
                cfg.classifier = classifier;
                cfg.validate()?;
                let suite = run_suite(&cfg, args.seed)?;
                emit_outputs(&suite, &args.out.join(suite.config.label()))?;
                summarize(&suite);
                suites.push(suite);
            }
            let non_al = &suites[0];
            for suite in &suites[1..] {
                let row = cost_ratios(suite, non_al)?;
                ratio_lines.push(RatioLine {
                    classifier: classifier.name().to_string(),
                    pattern,
                    strategy: suite.config.strategy.name().to_string(),
                    row,
                });
            }
            let curves: Vec<NamedCurve> = suites
                .iter()
                .map(|s| NamedCurve {
                    label: s.config.strategy.name().to_string(),
                    evaluations: &s.curve.evaluations,
                    mean: &s.curve.mean_accuracy,
                    std: &s.curve.std_accuracy,
                })
                .collect();
            let title = format!("{} pattern {}", classifier.name(), pattern);
            let svg = harness::render_curves_svg(&title, &curves);
            let path = args
                .out
                .join(format!("curves_{}_p{}.svg", classifier.name().to_lowercase(), pattern));
            std::fs::write(&path, svg).with_context(|| format!("writing {}", path.display()))?;
        }
    }

    let ratios_path = args.out.join("ratios.csv");
    harness::write_ratios_csv(&ratios_path, &ratio_lines)?;
    println!("cost ratios written to {}", ratios_path.display());
    Ok(())
}

fn compare(args: &SuiteArgs) -> anyhow::Result<()> {
    let mut sampled_cfg = resolve_config(args, StrategyChoice::NoAl, None)?;
    sampled_cfg.backend = BackendChoice::Sampled;
    if let Some(shots) = args.shots {
        sampled_cfg.shots = Some(shots);
    }
    let mut analytic_cfg = sampled_cfg.clone();
    analytic_cfg.backend = BackendChoice::Analytic;
    analytic_cfg.shots = None;

    let sampled = run_suite(&sampled_cfg, args.seed)?;
    let analytic = run_suite(&analytic_cfg, args.seed)?;
    let report = compare_to_analytic(&sampled, &analytic)?;
    let shots = match sampled_cfg.resolved_backend() {
        Backend::Sampled { shots } => shots,
        Backend::Analytic => unreachable!("compare forces the sampled backend"),
    };
    println!(
        "{} at {} shots vs analytic: mean |loss error| {:.6}, mean |accuracy error| {:.6}",
        sampled_cfg.label(),
        shots,
        report.loss_error,
        report.accuracy_error
    );
    for (seed_index, loss_mae, acc_mae) in &report.per_run {
        println!("  seed {seed_index}: loss {loss_mae:.6}, accuracy {acc_mae:.6}");
    }
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    emit_outputs(&sampled, &args.out.join(format!("{}_sampled", sampled_cfg.label())))?;
    emit_outputs(&analytic, &args.out.join(format!("{}_analytic", analytic_cfg.label())))?;
    Ok(())
}
