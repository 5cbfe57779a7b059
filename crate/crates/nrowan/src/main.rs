use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nrowan::agent::{Algorithm, KSchedule};
use nrowan::envs::EnvKind;
use nrowan::harness::{self, ExperimentConfig};

/// Experiment runner for NROWAN-DQN and its baselines on classic-control
/// tasks. Training, evaluation, and all metric files are deterministic
/// functions of the seeds.
#[derive(Parser)]
#[command(name = "nrowan", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Algorithm to train.
    #[arg(long, value_enum, default_value = "nrowan")]
    algo: Algorithm,
    /// Environment to train on.
    #[arg(long, value_enum, default_value = "cartpole")]
    env: EnvKind,
    /// Training seeds, one run per seed.
    #[arg(long, value_delimiter = ',', default_values_t = [1u64, 2, 3, 4, 5])]
    seeds: Vec<u64>,
    /// Training frames per run.
    #[arg(long, default_value_t = 30_000)]
    frames: usize,
    /// Final value of the noise-reduction weight k.
    #[arg(long = "k-final")]
    k_final: Option<f64>,
    /// Learning rate (defaults to the per-environment setting).
    #[arg(long)]
    lr: Option<f64>,
    /// How k evolves during training (nrowan defaults to reward).
    #[arg(long, value_enum)]
    schedule: Option<KSchedule>,
    /// Output directory (falls back to $NROWAN_OUT, then ./runs).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed fan-out parallelism; 1 keeps log ordering exact.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Train and evaluate one algorithm over a list of seeds.
    Run(RunArgs),
    /// Tabulate dqn/noisynet/nrowan aggregates for one environment.
    Compare {
        #[arg(long, value_enum, default_value = "cartpole")]
        env: EnvKind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grid of runs over k-final × learning-rate values.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// k-final values of the grid.
        #[arg(long = "k-grid", value_delimiter = ',',
              default_values_t = [2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0])]
        k_grid: Vec<f64>,
        /// Learning rates of the grid.
        #[arg(long = "lr-grid", value_delimiter = ',',
              default_values_t = [0.0001, 0.000075, 0.00005, 0.000025])]
        lr_grid: Vec<f64>,
    },
    /// Smooth per-seed episode files into plot-ready learning curves.
    Curves {
        /// Episode CSV files to smooth.
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Trailing-mean window in episodes.
        #[arg(long, default_value_t = 10)]
        window: usize,
    },
}

fn output_root(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("NROWAN_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("runs"))
}

fn experiment_from(args: &RunArgs) -> ExperimentConfig {
    let mut config = ExperimentConfig::new(
        args.algo,
        args.env,
        args.seeds.clone(),
        output_root(args.out.clone()),
    );
    config.agent.budget = args.frames;
    config.jobs = args.jobs;
    if let Some(k) = args.k_final {
        config.agent.k_final = k;
    }
    if let Some(lr) = args.lr {
        config.agent.alpha = lr;
    }
    if let Some(schedule) = args.schedule {
        config.agent.schedule = schedule;
    }
    config
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> nrowan::Result<()> {
    match cli.command {
        Command::Run(args) => {
            let config = experiment_from(&args);
            let outcome = harness::run_experiment(&config)?;
            for seed in &outcome.per_seed {
                println!(
                    "{} {} seed {:>3}: eval mean {:.2} std {:.2} (output σ {:.4} -> {:.4})",
                    config.agent.algorithm.name(),
                    config.environment.name(),
                    seed.seed,
                    seed.eval.mean,
                    seed.eval.std,
                    seed.initial_output_sigma,
                    seed.final_output_sigma,
                );
            }
            let agg = &outcome.aggregate;
            println!(
                "aggregate over {} seeds: {:.2}±{:.2} -> {}",
                agg.seeds,
                agg.mean,
                agg.std,
                config.aggregate_path().display()
            );
            Ok(())
        }
        Command::Compare { env, out } => {
            let dir = output_root(out);
            let table = harness::compare(&dir, env)?;
            print!("{table}");
            let path = dir.join(format!("compare_{}.csv", env.name()));
            std::fs::write(&path, table.to_csv())?;
            println!("written to {}", path.display());
            Ok(())
        }
        Command::Sweep { run, k_grid, lr_grid } => {
            let mut base = experiment_from(&run);
            base.agent.algorithm = Algorithm::Nrowan;
            base.agent.schedule = KSchedule::Reward;
            let cells = harness::sweep(&base, &k_grid, &lr_grid)?;
            for cell in &cells {
                println!(
                    "k_final {:>4} lr {:>9}: {:.2}±{:.2}",
                    cell.k_final, cell.learning_rate, cell.aggregate.mean, cell.aggregate.std
                );
            }
            println!(
                "grid written to {}",
                base.out_dir
                    .join(format!("sweep_{}.csv", base.environment.name()))
                    .display()
            );
            Ok(())
        }
        Command::Curves { files, window } => {
            let written = harness::emit_curves(&files, window)?;
            for path in written {
                println!("{}", path.display());
            }
            Ok(())
        }
    }
}
