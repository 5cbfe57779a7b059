//! Experiment harness: seeded multi-run execution, plain-text metric files,
//! score comparison, k/learning-rate sweeps, and plot-ready learning curves.
//!
//! All metric files are comma-separated with a one-line header and full
//! `f64` round-trip formatting, so re-running a configuration with the same
//! seeds reproduces the files byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::agent::{
    eval_mode, evaluate, train, AgentConfig, Algorithm, EpisodeRow, EvalStats, KSchedule,
    RunMetrics,
};
use crate::envs::EnvKind;
use crate::error::{Error, Result};

pub const EPISODES_HEADER: &str = "episode,frame,return,length";
pub const FRAMES_HEADER: &str = "frame,k,D,loss";
pub const AGGREGATE_HEADER: &str = "algo,env,mean,std,seeds";
pub const EVAL_HEADER: &str = "episodes,mean,std";
pub const SWEEP_HEADER: &str = "k_final,lr,mean,std,seeds";
pub const CURVE_HEADER: &str = "frame,return";

/// One experiment: an algorithm/environment pair trained on a list of seeds.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub environment: EnvKind,
    pub agent: AgentConfig,
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
    /// Seed fan-out parallelism; 1 keeps logs strictly ordered.
    pub jobs: usize,
}

impl ExperimentConfig {
    pub fn new(
        algorithm: Algorithm,
        environment: EnvKind,
        seeds: Vec<u64>,
        out_dir: PathBuf,
    ) -> Self {
        Self {
            environment,
            agent: AgentConfig::for_env(algorithm, environment),
            seeds,
            out_dir,
            jobs: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds: at least one seed is required".into()));
        }
        self.agent.validate()
    }

    fn stem(&self) -> String {
        format!("{}_{}", self.agent.algorithm.name(), self.environment.name())
    }

    pub fn episodes_path(&self, seed: u64) -> PathBuf {
        self.out_dir.join(format!("{}_seed{seed}.csv", self.stem()))
    }

    pub fn frames_path(&self, seed: u64) -> PathBuf {
        self.out_dir.join(format!("{}_seed{seed}_frames.csv", self.stem()))
    }

    pub fn eval_path(&self, seed: u64) -> PathBuf {
        self.out_dir.join(format!("{}_seed{seed}_eval.csv", self.stem()))
    }

    pub fn aggregate_path(&self) -> PathBuf {
        self.out_dir.join(format!("{}_aggregate.csv", self.stem()))
    }

    pub fn config_path(&self) -> PathBuf {
        self.out_dir.join(format!("{}_config.txt", self.stem()))
    }
}

/// Result of one seed's train + evaluate.
#[derive(Debug, Clone)]
pub struct SeedResult {
    pub seed: u64,
    pub eval: EvalStats,
    pub final_output_sigma: f64,
    pub initial_output_sigma: f64,
}

/// Aggregate over an experiment's seeds: mean of the per-seed means and
/// mean of the per-seed standard deviations.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub algorithm: String,
    pub environment: String,
    pub mean: f64,
    pub std: f64,
    pub seeds: usize,
}

#[derive(Debug)]
pub struct ExperimentOutcome {
    pub per_seed: Vec<SeedResult>,
    pub aggregate: AggregateRow,
}

fn run_one_seed(config: &ExperimentConfig, seed: u64) -> Result<SeedResult> {
    let mut env = config.environment.build();
    let outcome = train(env.as_mut(), &config.agent, seed)?;
    let mut network = outcome.network;
    let mut metrics = outcome.metrics;
    let stats = evaluate(
        &mut network,
        env.as_mut(),
        config.agent.eval_episodes,
        eval_mode(&config.agent),
        seed,
    )?;
    metrics.eval = Some(stats);
    write_episodes(&config.episodes_path(seed), &metrics)?;
    write_frames(&config.frames_path(seed), &metrics)?;
    write_eval(&config.eval_path(seed), &stats)?;
    Ok(SeedResult {
        seed,
        eval: stats,
        final_output_sigma: metrics.final_output_sigma,
        initial_output_sigma: metrics.initial_output_sigma,
    })
}

/// Train and evaluate every seed, write per-seed metric files and one
/// aggregate file.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    fs::create_dir_all(&config.out_dir)?;
    write_config_file(&config.config_path(), config)?;

    let jobs = config.jobs.max(1);
    let mut per_seed: Vec<SeedResult> = Vec::with_capacity(config.seeds.len());
    for chunk in config.seeds.chunks(jobs) {
        if jobs == 1 {
            for &seed in chunk {
                per_seed.push(run_one_seed(config, seed)?);
            }
        } else {
            let results: Vec<Result<SeedResult>> = std::thread::scope(|scope| {
                let handles: Vec<_> = chunk
                    .iter()
                    .map(|&seed| scope.spawn(move || run_one_seed(config, seed)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("seed worker panicked"))
                    .collect()
            });
            for r in results {
                per_seed.push(r?);
            }
        }
    }

    let n = per_seed.len() as f64;
    let aggregate = AggregateRow {
        algorithm: config.agent.algorithm.name().into(),
        environment: config.environment.name().into(),
        mean: per_seed.iter().map(|s| s.eval.mean).sum::<f64>() / n,
        std: per_seed.iter().map(|s| s.eval.std).sum::<f64>() / n,
        seeds: per_seed.len(),
    };
    write_aggregate(&config.aggregate_path(), &aggregate)?;
    Ok(ExperimentOutcome { per_seed, aggregate })
}

fn write_config_file(path: &Path, config: &ExperimentConfig) -> Result<()> {
    let a = &config.agent;
    let mut text = String::new();
    let seeds = config
        .seeds
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(" ");
    for (key, value) in [
        ("algorithm", a.algorithm.name().to_string()),
        ("environment", config.environment.name().to_string()),
        ("seeds", seeds),
        ("gamma", a.gamma.to_string()),
        ("alpha", a.alpha.to_string()),
        ("adam_beta1", a.adam_beta1.to_string()),
        ("adam_beta2", a.adam_beta2.to_string()),
        ("adam_epsilon", a.adam_epsilon.to_string()),
        ("target_sync_interval", a.target_sync_interval.to_string()),
        ("learn_start", a.learn_start.to_string()),
        ("replay_capacity", a.replay_capacity.to_string()),
        ("budget", a.budget.to_string()),
        ("batch_size", a.batch_size.to_string()),
        ("hidden_dim", a.hidden_dim.to_string()),
        ("sigma_0", a.sigma_0.to_string()),
        ("k_final", a.k_final.to_string()),
        ("growth_factor", a.growth_factor.to_string()),
        ("reward_floor", a.reward_floor.to_string()),
        ("reward_ceiling", a.reward_ceiling.to_string()),
        (
            "schedule",
            match a.schedule {
                KSchedule::Reward => "reward".to_string(),
                KSchedule::Frame => "frame".to_string(),
                KSchedule::None => "none".to_string(),
            },
        ),
        ("epsilon_decay_frames", a.epsilon_decay_frames.to_string()),
        ("epsilon_floor", a.epsilon_floor.to_string()),
        ("eval_episodes", a.eval_episodes.to_string()),
    ] {
        writeln!(text, "{key}={value}").expect("string write");
    }
    atomic_write(path, &text)
}

fn atomic_write(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_episodes(path: &Path, metrics: &RunMetrics) -> Result<()> {
    let mut text = String::with_capacity(metrics.episodes.len() * 24 + 32);
    writeln!(text, "{EPISODES_HEADER}").expect("string write");
    for row in &metrics.episodes {
        writeln!(text, "{},{},{},{}", row.episode, row.frame, row.ret, row.length)
            .expect("string write");
    }
    atomic_write(path, &text)
}

pub fn write_frames(path: &Path, metrics: &RunMetrics) -> Result<()> {
    let mut text = String::with_capacity(metrics.frames.len() * 32 + 32);
    writeln!(text, "{FRAMES_HEADER}").expect("string write");
    for row in &metrics.frames {
        writeln!(text, "{},{},{},{}", row.frame, row.k, row.noise_level, row.loss)
            .expect("string write");
    }
    atomic_write(path, &text)
}

pub fn write_eval(path: &Path, stats: &EvalStats) -> Result<()> {
    let text = format!(
        "{EVAL_HEADER}\n{},{},{}\n",
        stats.episodes, stats.mean, stats.std
    );
    atomic_write(path, &text)
}

pub fn write_aggregate(path: &Path, row: &AggregateRow) -> Result<()> {
    let text = format!(
        "{AGGREGATE_HEADER}\n{},{},{},{},{}\n",
        row.algorithm, row.environment, row.mean, row.std, row.seeds
    );
    atomic_write(path, &text)
}

fn read_lines(path: &Path, expected_header: &str) -> Result<Vec<String>> {
    let raw = fs::read_to_string(path)
        .map_err(|e| Error::NotReady(format!("{}: {e}", path.display())))?;
    let mut lines = raw.lines();
    match lines.next() {
        Some(h) if h == expected_header => {}
        other => {
            return Err(Error::NotReady(format!(
                "{}: expected header '{expected_header}', found {other:?}",
                path.display()
            )))
        }
    }
    Ok(lines.map(str::to_string).collect())
}

fn parse_err(path: &Path, what: &str) -> Error {
    Error::NotReady(format!("{}: malformed {what}", path.display()))
}

pub fn read_aggregate(path: &Path) -> Result<AggregateRow> {
    let lines = read_lines(path, AGGREGATE_HEADER)?;
    let line = lines.first().ok_or_else(|| parse_err(path, "aggregate row"))?;
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 5 {
        return Err(parse_err(path, "aggregate row"));
    }
    Ok(AggregateRow {
        algorithm: fields[0].into(),
        environment: fields[1].into(),
        mean: fields[2].parse().map_err(|_| parse_err(path, "mean"))?,
        std: fields[3].parse().map_err(|_| parse_err(path, "std"))?,
        seeds: fields[4].parse().map_err(|_| parse_err(path, "seed count"))?,
    })
}

pub fn read_episode_rows(path: &Path) -> Result<Vec<EpisodeRow>> {
    let lines = read_lines(path, EPISODES_HEADER)?;
    lines
        .iter()
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(parse_err(path, "episode row"));
            }
            Ok(EpisodeRow {
                episode: fields[0].parse().map_err(|_| parse_err(path, "episode"))?,
                frame: fields[1].parse().map_err(|_| parse_err(path, "frame"))?,
                ret: fields[2].parse().map_err(|_| parse_err(path, "return"))?,
                length: fields[3].parse().map_err(|_| parse_err(path, "length"))?,
            })
        })
        .collect()
}

/// One algorithm's entry in a comparison table.
#[derive(Debug, Clone)]
pub struct CompareEntry {
    pub algorithm: String,
    pub mean: f64,
    pub std: f64,
    pub best: bool,
}

/// Score comparison for one environment, one entry per algorithm.
#[derive(Debug, Clone)]
pub struct ComparisonTable {
    pub environment: String,
    pub entries: Vec<CompareEntry>,
}

impl ComparisonTable {
    pub fn to_csv(&self) -> String {
        let mut text = String::from("problem");
        for e in &self.entries {
            write!(text, ",{}", e.algorithm).expect("string write");
        }
        write!(text, "\n{}", self.environment).expect("string write");
        for e in &self.entries {
            write!(text, ",{}", format_entry(e)).expect("string write");
        }
        text.push('\n');
        text
    }
}

fn format_entry(e: &CompareEntry) -> String {
    let flag = if e.best { "*" } else { "" };
    format!("{flag}{:.2}±{:.2}", e.mean, e.std)
}

impl std::fmt::Display for ComparisonTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:<12}", "problem")?;
        for e in &self.entries {
            write!(f, " {:>18}", e.algorithm)?;
        }
        writeln!(f)?;
        write!(f, "{:<12}", self.environment)?;
        for e in &self.entries {
            write!(f, " {:>18}", format_entry(e))?;
        }
        writeln!(f)
    }
}

/// Build the Table-3-style comparison for one environment from the
/// aggregate files under `dir`. Requires all three algorithm runs.
pub fn compare(dir: &Path, environment: EnvKind) -> Result<ComparisonTable> {
    let mut entries = Vec::new();
    for algorithm in Algorithm::ALL {
        let path = dir.join(format!(
            "{}_{}_aggregate.csv",
            algorithm.name(),
            environment.name()
        ));
        let row = read_aggregate(&path)?;
        entries.push(CompareEntry {
            algorithm: algorithm.name().into(),
            mean: row.mean,
            std: row.std,
            best: false,
        });
    }
    let best = entries
        .iter()
        .map(|e| e.mean)
        .fold(f64::NEG_INFINITY, f64::max);
    for e in entries.iter_mut() {
        e.best = e.mean == best;
    }
    Ok(ComparisonTable {
        environment: environment.name().into(),
        entries,
    })
}

/// One cell of a k_final × learning-rate sweep.
#[derive(Debug, Clone)]
pub struct SweepCell {
    pub k_final: f64,
    pub learning_rate: f64,
    pub aggregate: AggregateRow,
}

/// Run one experiment per (k_final, learning-rate) cell and write a grid
/// file suitable for heat-map plotting. Cell runs live in subdirectories of
/// `base.out_dir`.
pub fn sweep(
    base: &ExperimentConfig,
    k_finals: &[f64],
    learning_rates: &[f64],
) -> Result<Vec<SweepCell>> {
    if k_finals.is_empty() || learning_rates.is_empty() {
        return Err(Error::Config("sweep: k_final and lr lists must be non-empty".into()));
    }
    base.validate()?;
    let mut cells = Vec::with_capacity(k_finals.len() * learning_rates.len());
    for &k_final in k_finals {
        for &lr in learning_rates {
            let mut cell_config = base.clone();
            cell_config.agent.k_final = k_final;
            cell_config.agent.alpha = lr;
            cell_config.out_dir = base.out_dir.join(format!("k{k_final}_lr{lr}"));
            let outcome = run_experiment(&cell_config)?;
            cells.push(SweepCell {
                k_final,
                learning_rate: lr,
                aggregate: outcome.aggregate,
            });
        }
    }
    let mut text = String::from(SWEEP_HEADER);
    text.push('\n');
    for cell in &cells {
        writeln!(
            text,
            "{},{},{},{},{}",
            cell.k_final,
            cell.learning_rate,
            cell.aggregate.mean,
            cell.aggregate.std,
            cell.aggregate.seeds
        )
        .expect("string write");
    }
    fs::create_dir_all(&base.out_dir)?;
    atomic_write(
        &base.out_dir.join(format!("sweep_{}.csv", base.environment.name())),
        &text,
    )?;
    Ok(cells)
}

/// Trailing mean over `window` episodes; output length is
/// `episodes − window + 1` and the x-coordinate is the frame at which the
/// window's last episode ended.
pub fn smooth_returns(rows: &[EpisodeRow], window: usize) -> Vec<(usize, f64)> {
    if window == 0 || rows.len() < window {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(rows.len() - window + 1);
    let mut acc: f64 = rows[..window].iter().map(|r| r.ret).sum();
    out.push((rows[window - 1].frame, acc / window as f64));
    for i in window..rows.len() {
        acc += rows[i].ret - rows[i - window].ret;
        out.push((rows[i].frame, acc / window as f64));
    }
    out
}

/// For every per-seed episode file, write `<stem>_curve.csv` with the
/// smoothed return-vs-frame series. Returns the written paths.
pub fn emit_curves(files: &[PathBuf], window: usize) -> Result<Vec<PathBuf>> {
    if window == 0 {
        return Err(Error::Config("curve window must be positive".into()));
    }
    let mut written = Vec::with_capacity(files.len());
    for file in files {
        let rows = read_episode_rows(file)?;
        if rows.is_empty() {
            return Err(Error::NotReady(format!(
                "{}: no episodes to smooth",
                file.display()
            )));
        }
        let series = smooth_returns(&rows, window);
        let mut text = String::from(CURVE_HEADER);
        text.push('\n');
        for (frame, ret) in &series {
            writeln!(text, "{frame},{ret}").expect("string write");
        }
        let stem = file
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Error::Config(format!("bad file name {}", file.display())))?;
        let out = file.with_file_name(format!("{stem}_curve.csv"));
        atomic_write(&out, &text)?;
        written.push(out);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::TempDir;

    fn tiny_experiment(algorithm: Algorithm, dir: &Path, seeds: Vec<u64>) -> ExperimentConfig {
        let mut config =
            ExperimentConfig::new(algorithm, EnvKind::Cartpole, seeds, dir.to_path_buf());
        config.agent.budget = 250;
        config.agent.hidden_dim = 16;
        config.agent.eval_episodes = 4;
        config
    }

    #[test]
    fn empty_seed_list_is_a_configuration_error() {
        let dir = TempDir::new().unwrap();
        let config = tiny_experiment(Algorithm::Nrowan, dir.path(), vec![]);
        assert!(matches!(run_experiment(&config), Err(Error::Config(_))));
    }

    #[test]
    fn five_seeds_produce_five_per_seed_files_and_one_aggregate() {
        let dir = TempDir::new().unwrap();
        let config = tiny_experiment(Algorithm::Nrowan, dir.path(), vec![1, 2, 3, 4, 5]);
        run_experiment(&config).unwrap();

        let per_seed: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .filter_map(|e| e.ok())
            .map(|e| e.file_name().to_string_lossy().into_owned())
            .filter(|name| {
                name.starts_with("nrowan_cartpole_seed")
                    && name.ends_with(".csv")
                    && !name.ends_with("_frames.csv")
                    && !name.ends_with("_eval.csv")
            })
            .collect();
        assert_eq!(per_seed.len(), 5, "per-seed metric files: {per_seed:?}");

        let aggregates: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .filter_map(|e| e.ok())
            .map(|e| e.file_name().to_string_lossy().into_owned())
            .filter(|name| name.ends_with("_aggregate.csv"))
            .collect();
        assert_eq!(aggregates.len(), 1);

        // the named schemas exist alongside
        for seed in 1..=5u64 {
            assert!(config.frames_path(seed).exists());
            assert!(config.eval_path(seed).exists());
        }
    }

    #[test]
    fn aggregate_mean_is_the_mean_of_per_seed_means() {
        let dir = TempDir::new().unwrap();
        let config = tiny_experiment(Algorithm::Noisynet, dir.path(), vec![7, 8, 9]);
        let outcome = run_experiment(&config).unwrap();
        let expected =
            outcome.per_seed.iter().map(|s| s.eval.mean).sum::<f64>() / outcome.per_seed.len() as f64;
        assert!((outcome.aggregate.mean - expected).abs() < 1e-12);
        let read_back = read_aggregate(&config.aggregate_path()).unwrap();
        assert_eq!(read_back, outcome.aggregate);
    }

    #[test]
    fn rerunning_reproduces_files_byte_for_byte() {
        let dir_a = TempDir::new().unwrap();
        let dir_b = TempDir::new().unwrap();
        let config_a = tiny_experiment(Algorithm::Nrowan, dir_a.path(), vec![3]);
        let config_b = tiny_experiment(Algorithm::Nrowan, dir_b.path(), vec![3]);
        run_experiment(&config_a).unwrap();
        run_experiment(&config_b).unwrap();
        for (pa, pb) in [
            (config_a.episodes_path(3), config_b.episodes_path(3)),
            (config_a.frames_path(3), config_b.frames_path(3)),
            (config_a.eval_path(3), config_b.eval_path(3)),
            (config_a.aggregate_path(), config_b.aggregate_path()),
        ] {
            assert_eq!(fs::read(&pa).unwrap(), fs::read(&pb).unwrap(), "{pa:?}");
        }
    }

    #[test]
    fn parallel_fanout_matches_serial_output() {
        let dir_serial = TempDir::new().unwrap();
        let dir_parallel = TempDir::new().unwrap();
        let serial = tiny_experiment(Algorithm::Noisynet, dir_serial.path(), vec![1, 2]);
        let mut parallel = tiny_experiment(Algorithm::Noisynet, dir_parallel.path(), vec![1, 2]);
        parallel.jobs = 2;
        run_experiment(&serial).unwrap();
        run_experiment(&parallel).unwrap();
        for seed in [1u64, 2] {
            assert_eq!(
                fs::read(serial.episodes_path(seed)).unwrap(),
                fs::read(parallel.episodes_path(seed)).unwrap()
            );
        }
    }

    #[test]
    fn compare_requires_all_three_runs() {
        let dir = TempDir::new().unwrap();
        let config = tiny_experiment(Algorithm::Nrowan, dir.path(), vec![1]);
        run_experiment(&config).unwrap();
        assert!(matches!(
            compare(dir.path(), EnvKind::Cartpole),
            Err(Error::NotReady(_))
        ));
    }

    #[test]
    fn compare_flags_the_best_mean_and_formats_entries() {
        let dir = TempDir::new().unwrap();
        for (algo, mean) in [
            (Algorithm::Dqn, 170.49),
            (Algorithm::Noisynet, 164.96),
            (Algorithm::Nrowan, 187.04),
        ] {
            let row = AggregateRow {
                algorithm: algo.name().into(),
                environment: "cartpole".into(),
                mean,
                std: 13.99,
                seeds: 5,
            };
            write_aggregate(
                &dir.path().join(format!("{}_cartpole_aggregate.csv", algo.name())),
                &row,
            )
            .unwrap();
        }
        let table = compare(dir.path(), EnvKind::Cartpole).unwrap();
        assert_eq!(table.entries.len(), 3);
        assert!(!table.entries[0].best);
        assert!(!table.entries[1].best);
        assert!(table.entries[2].best);
        let csv = table.to_csv();
        assert!(csv.contains("*187.04±13.99"), "{csv}");
        assert!(csv.contains("170.49±35.86") || csv.contains("170.49±13.99"));
    }

    #[test]
    fn compare_ties_flag_everyone() {
        let dir = TempDir::new().unwrap();
        for algo in Algorithm::ALL {
            let row = AggregateRow {
                algorithm: algo.name().into(),
                environment: "cartpole".into(),
                mean: 100.0,
                std: 1.0,
                seeds: 5,
            };
            write_aggregate(
                &dir.path().join(format!("{}_cartpole_aggregate.csv", algo.name())),
                &row,
            )
            .unwrap();
        }
        let table = compare(dir.path(), EnvKind::Cartpole).unwrap();
        assert!(table.entries.iter().all(|e| e.best));
    }

    #[test]
    fn one_by_one_sweep_matches_a_single_experiment() {
        let sweep_dir = TempDir::new().unwrap();
        let single_dir = TempDir::new().unwrap();
        let base = tiny_experiment(Algorithm::Nrowan, sweep_dir.path(), vec![4]);
        let cells = sweep(&base, &[4.0], &[0.0001]).unwrap();
        assert_eq!(cells.len(), 1);

        let mut single = tiny_experiment(Algorithm::Nrowan, single_dir.path(), vec![4]);
        single.agent.k_final = 4.0;
        single.agent.alpha = 0.0001;
        let outcome = run_experiment(&single).unwrap();
        assert_eq!(cells[0].aggregate.mean, outcome.aggregate.mean);
        assert_eq!(cells[0].aggregate.std, outcome.aggregate.std);
    }

    #[test]
    fn sweep_grid_has_one_entry_per_cell() {
        let dir = TempDir::new().unwrap();
        let mut base = tiny_experiment(Algorithm::Nrowan, dir.path(), vec![1]);
        base.agent.budget = 120;
        base.agent.eval_episodes = 2;
        let cells = sweep(&base, &[2.0, 3.0, 4.0], &[0.0001, 0.00005, 0.000025]).unwrap();
        assert_eq!(cells.len(), 9);
        let grid = fs::read_to_string(dir.path().join("sweep_cartpole.csv")).unwrap();
        assert_eq!(grid.lines().count(), 10); // header + 9 cells
        assert!(grid.starts_with(SWEEP_HEADER));
    }

    #[test]
    fn smoothing_a_constant_series_is_constant() {
        let rows: Vec<EpisodeRow> = (0..20)
            .map(|i| EpisodeRow { episode: i, frame: (i + 1) * 10, ret: 42.0, length: 10 })
            .collect();
        let series = smooth_returns(&rows, 10);
        assert_eq!(series.len(), 11);
        assert!(series.iter().all(|(_, r)| (*r - 42.0).abs() < 1e-12));
    }

    #[test]
    fn window_one_reproduces_the_raw_series() {
        let rows: Vec<EpisodeRow> = (0..5)
            .map(|i| EpisodeRow { episode: i, frame: i + 1, ret: i as f64, length: 1 })
            .collect();
        let series = smooth_returns(&rows, 1);
        assert_eq!(series.len(), 5);
        for (i, (frame, ret)) in series.iter().enumerate() {
            assert_eq!(*frame, i + 1);
            assert_eq!(*ret, i as f64);
        }
    }

    #[test]
    fn smoothed_length_is_episode_count_minus_window_plus_one() {
        let rows: Vec<EpisodeRow> = (0..37)
            .map(|i| EpisodeRow { episode: i, frame: i + 1, ret: (i % 7) as f64, length: 1 })
            .collect();
        assert_eq!(smooth_returns(&rows, 10).len(), 28);
    }

    #[test]
    fn emit_curves_writes_next_to_the_input() {
        let dir = TempDir::new().unwrap();
        let config = tiny_experiment(Algorithm::Noisynet, dir.path(), vec![6]);
        run_experiment(&config).unwrap();
        let input = config.episodes_path(6);
        let written = emit_curves(&[input.clone()], 3).unwrap();
        assert_eq!(written.len(), 1);
        let text = fs::read_to_string(&written[0]).unwrap();
        assert!(text.starts_with(CURVE_HEADER));
        let rows = read_episode_rows(&input).unwrap();
        assert_eq!(text.lines().count(), 1 + rows.len().saturating_sub(2));
    }

    #[test]
    fn emit_curves_rejects_empty_metrics() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("empty.csv");
        fs::write(&path, format!("{EPISODES_HEADER}\n")).unwrap();
        assert!(matches!(
            emit_curves(&[path], 10),
            Err(Error::NotReady(_))
        ));
    }
}
