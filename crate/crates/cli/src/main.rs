mod config;
mod report;
mod summary;

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use graphbo::benchmarks::{
    generate_pool, scaling_harness, situation_objective, ScalingConfig, Sidecar, Situation, SyntheticObjective,
    SyntheticSpec,
};
use graphbo::bo::{random_baseline, run, ExperimentConfig, RunRecord, SeedBundle};
use graphbo::graph::{read_pool, write_pool, GraphPool};

use config::Overrides;
use summary::{write_json, Aggregate, Method, RunSummary};

#[derive(Parser)]
#[command(name = "graphbo", version, about = "Bayesian optimization over pools of attributed graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic benchmark pool and its sidecar JSON.
    GenPool {
        #[arg(long, default_value_t = 500)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Pool file (JSON lines); the sidecar goes to `<out>.sidecar.json`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the optimizer on a pool, once per repeat.
    Run {
        #[arg(long)]
        pool: PathBuf,
        /// Exposed global attributes: a, b, c or d.
        #[arg(long, default_value = "a")]
        situation: Situation,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        /// Master seed; repeat `r` derives its seed bundle from `seed + r`.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Flat key=value config file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Extra key=value assignments, applied after the config file.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Stop each repeat once it reaches the pool optimum.
        #[arg(long)]
        stop_at_optimum: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Random search without replacement, in the same output schema.
    Baseline {
        #[arg(long)]
        pool: PathBuf,
        #[arg(long, default_value = "a")]
        situation: Situation,
        #[arg(long)]
        budget: usize,
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time the loop at several observation counts.
    Scaling {
        #[arg(long, value_delimiter = ',', default_values_t = vec![100, 200, 400, 800])]
        sizes: Vec<usize>,
        /// Pool size; defaults to 1000.
        #[arg(long)]
        pool_size: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarize a directory of run CSVs.
    Report {
        #[arg(long)]
        runs: PathBuf,
        /// Where report files go; defaults to the runs directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run one repeat from its summary JSON.
    Replay {
        #[arg(long)]
        summary: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn sidecar_path(pool: &Path) -> PathBuf {
    let mut name = pool.as_os_str().to_owned();
    name.push(".sidecar.json");
    PathBuf::from(name)
}

fn load_benchmark(path: &Path, situation: Situation) -> Result<(GraphPool, SyntheticObjective)> {
    let full = read_pool(path, None).with_context(|| format!("reading pool {}", path.display()))?;
    Ok(situation_objective(&full, situation)?)
}

fn gen_pool(size: usize, seed: u64, out: &Path) -> Result<()> {
    let generated = generate_pool(&SyntheticSpec {
        pool_size: size,
        seed,
        ..SyntheticSpec::default()
    })?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_pool(&generated.pool, out)?;
    let sidecar = Sidecar::for_pool(&generated)?;
    sidecar.save(sidecar_path(out))?;
    println!(
        "pool {}: {size} graphs, mean |V| {:.2}, mean |E| {:.2}, optimum graph {} with y = {}",
        out.display(),
        sidecar.mean_nodes,
        sidecar.mean_edges,
        sidecar.optimum_id,
        sidecar.optimum_y
    );
    let m = ExperimentConfig::default().init_evaluations;
    if size < m + 1 {
        eprintln!("warning: a pool of {size} graphs is smaller than M + 1 = {} needed by default runs", m + 1);
    }
    Ok(())
}

fn write_record(dir: &Path, stem: &str, record: &RunRecord) -> Result<String> {
    let name = format!("{stem}.csv");
    let file = File::create(dir.join(&name)).with_context(|| format!("creating {name}"))?;
    record.write_csv(BufWriter::new(file))?;
    Ok(name)
}

struct Batch {
    summaries: Vec<RunSummary>,
    records: Vec<RunRecord>,
    failures: usize,
}

fn finish_batch(out: &Path, batch: Batch) -> Result<bool> {
    if !batch.summaries.is_empty() {
        let aggregate = Aggregate::new(batch.summaries, &batch.records);
        let name = format!("{}_summary.json", aggregate.method.file_prefix());
        write_json(&out.join(name), &aggregate)?;
        if let Some(s) = &aggregate.evaluations_to_optimum_stat {
            println!("evaluations to optimum: {:.1} ± {:.1} over reaching runs", s.mean, s.std);
        }
    }
    Ok(batch.failures == 0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    pool_path: &Path,
    situation: Situation,
    max_iter: Option<usize>,
    repeats: usize,
    seed: u64,
    config_file: Option<&Path>,
    set: &[String],
    stop_at_optimum: bool,
    out: &Path,
) -> Result<bool> {
    let (pool, objective) = load_benchmark(pool_path, situation)?;
    let (optimum_id, optimum_y) = objective.optimum();
    fs::create_dir_all(out)?;
    let mut batch = Batch {
        summaries: Vec::new(),
        records: Vec::new(),
        failures: 0,
    };
    for r in 0..repeats {
        let mut overrides = config_file.map(Overrides::load).transpose()?.unwrap_or_default();
        let base = ExperimentConfig {
            seeds: SeedBundle::from_master(seed + r as u64),
            target_value: stop_at_optimum.then_some(optimum_y),
            ..ExperimentConfig::default()
        };
        for s in set {
            overrides.push_assignment(s)?;
        }
        if let Some(k) = max_iter {
            overrides.push("max_iter", k);
        }
        let config = overrides.apply(&base)?;
        match run(&objective, &pool, &config) {
            Ok(record) => {
                let stem = format!("run_{r}");
                let csv = write_record(out, &stem, &record)?;
                let summary = RunSummary {
                    method: Method::Optimizer,
                    repeat: r,
                    pool: pool_path.to_path_buf(),
                    situation: situation.to_string(),
                    config: Some(config),
                    budget: None,
                    seed: None,
                    csv,
                    optimum_id,
                    optimum_y,
                    evaluations: record.len(),
                    best_id: record.best_id,
                    best_y: record.best_y,
                    evaluations_to_optimum: record.evaluations_to(optimum_y),
                };
                summary.save(&out.join(format!("{stem}.json")))?;
                println!(
                    "repeat {r}: {} evaluations, best {:?}, optimum reached at {:?}",
                    record.len(),
                    record.best_y,
                    summary.evaluations_to_optimum
                );
                batch.summaries.push(summary);
                batch.records.push(record);
            }
            Err(e) => {
                eprintln!("repeat {r} failed: {e}");
                batch.failures += 1;
            }
        }
    }
    finish_batch(out, batch)
}

fn cmd_baseline(pool_path: &Path, situation: Situation, budget: usize, repeats: usize, seed: u64, out: &Path) -> Result<bool> {
    let (pool, objective) = load_benchmark(pool_path, situation)?;
    let (optimum_id, optimum_y) = objective.optimum();
    fs::create_dir_all(out)?;
    let mut batch = Batch {
        summaries: Vec::new(),
        records: Vec::new(),
        failures: 0,
    };
    for r in 0..repeats {
        let s = seed + r as u64;
        match random_baseline(&objective, &pool, budget, s) {
            Ok(record) => {
                let stem = format!("baseline_{r}");
                let csv = write_record(out, &stem, &record)?;
                let summary = RunSummary {
                    method: Method::Random,
                    repeat: r,
                    pool: pool_path.to_path_buf(),
                    situation: situation.to_string(),
                    config: None,
                    budget: Some(budget),
                    seed: Some(s),
                    csv,
                    optimum_id,
                    optimum_y,
                    evaluations: record.len(),
                    best_id: record.best_id,
                    best_y: record.best_y,
                    evaluations_to_optimum: record.evaluations_to(optimum_y),
                };
                summary.save(&out.join(format!("{stem}.json")))?;
                println!("repeat {r}: best {:?}, optimum reached at {:?}", record.best_y, summary.evaluations_to_optimum);
                batch.summaries.push(summary);
                batch.records.push(record);
            }
            Err(e) => {
                eprintln!("repeat {r} failed: {e}");
                batch.failures += 1;
            }
        }
    }
    finish_batch(out, batch)
}

fn cmd_scaling(
    sizes: Vec<usize>,
    pool_size: Option<usize>,
    seed: u64,
    config_file: Option<&Path>,
    set: &[String],
    out: &Path,
) -> Result<()> {
    let mut overrides = config_file.map(Overrides::load).transpose()?.unwrap_or_default();
    for s in set {
        overrides.push_assignment(s)?;
    }
    let defaults = ScalingConfig::default();
    let experiment = overrides.apply(&ExperimentConfig {
        seeds: SeedBundle::from_master(seed),
        ..defaults.experiment.clone()
    })?;
    let config = ScalingConfig {
        sizes,
        pool: SyntheticSpec {
            pool_size: pool_size.unwrap_or(defaults.pool.pool_size),
            seed,
            ..defaults.pool.clone()
        },
        iterations: experiment.retrain_period,
        experiment,
        ..defaults
    };
    let report = scaling_harness(&config)?;
    fs::create_dir_all(out)?;
    report.write_csv(BufWriter::new(File::create(out.join("scaling.csv"))?))?;
    #[derive(serde::Serialize)]
    struct Doc<'a> {
        config: &'a ScalingConfig,
        report: &'a graphbo::benchmarks::ScalingReport,
    }
    write_json(&out.join("scaling.json"), &Doc { config: &config, report: &report })?;
    for (n, t) in &report.per_iteration {
        println!("N = {n}: {t:.1} ms per iteration");
    }
    println!("log-log slope {:.3} (dense GP reference {:.3})", report.slope, report.gp_slope);
    Ok(())
}

fn cmd_replay(summary_path: &Path, out: &Path) -> Result<()> {
    let summary = RunSummary::load(summary_path)?;
    let situation: Situation = summary.situation.parse()?;
    let (pool, objective) = load_benchmark(&summary.pool, situation)?;
    let record = match summary.method {
        Method::Optimizer => {
            let Some(config) = &summary.config else {
                bail!("summary has no experiment config");
            };
            run(&objective, &pool, config)?
        }
        Method::Random => {
            let (Some(budget), Some(seed)) = (summary.budget, summary.seed) else {
                bail!("summary has no baseline budget or seed");
            };
            random_baseline(&objective, &pool, budget, seed)?
        }
    };
    fs::create_dir_all(out)?;
    let stem = format!("{}_{}", summary.method.file_prefix(), summary.repeat);
    let csv = write_record(out, &stem, &record)?;
    RunSummary {
        csv,
        evaluations: record.len(),
        best_id: record.best_id,
        best_y: record.best_y,
        evaluations_to_optimum: record.evaluations_to(summary.optimum_y),
        ..summary
    }
    .save(&out.join(format!("{stem}.json")))?;
    println!("replayed {} evaluations into {}", record.len(), out.display());
    Ok(())
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("GRAPHBO_THREADS") {
        let n: usize = v.parse().with_context(|| format!("GRAPHBO_THREADS must be a positive integer, got `{v}`"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<bool> {
    init_threads()?;
    match cli.command {
        Command::GenPool { size, seed, out } => gen_pool(size, seed, &out).map(|_| true),
        Command::Run {
            pool,
            situation,
            max_iter,
            repeats,
            seed,
            config,
            set,
            stop_at_optimum,
            out,
        } => cmd_run(&pool, situation, max_iter, repeats, seed, config.as_deref(), &set, stop_at_optimum, &out),
        Command::Baseline {
            pool,
            situation,
            budget,
            repeats,
            seed,
            out,
        } => cmd_baseline(&pool, situation, budget, repeats, seed, &out),
        Command::Scaling {
            sizes,
            pool_size,
            seed,
            config,
            set,
            out,
        } => cmd_scaling(sizes, pool_size, seed, config.as_deref(), &set, &out).map(|_| true),
        Command::Report { runs, out } => {
            let report = report::build_report(&runs)?;
            print!("{}", report.tables());
            report.write(out.as_deref().unwrap_or(&runs))?;
            Ok(true)
        }
        Command::Replay { summary, out } => cmd_replay(&summary, &out).map(|_| true),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
