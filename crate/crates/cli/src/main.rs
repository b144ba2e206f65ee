mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pursuit_core::allocation::AllocationMode;
use pursuit_core::config::ScenarioConfig;
use pursuit_core::error::Error;
use pursuit_core::physics::KinematicAction;
use pursuit_core::runner::batch::{run_batch, BatchReport, Job, TimingReport};
use pursuit_core::runner::log::{actions_from_log, parse_log, LogRecord};
use pursuit_core::runner::{run_episode, MapChoice, Policy, RunOptions};

#[derive(Parser)]
#[command(name = "pursuit", version, about = "Multi-pursuer search-and-capture simulator")]
struct Cli {
    /// Scenario TOML used instead of a built-in map.
    #[arg(long, global = true, env = "PURSUIT_CONFIG")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode.
    Run(RunArgs),
    /// Run consecutive seeds and aggregate.
    Batch(BatchArgs),
    /// Generate a map and write it as a scenario TOML.
    GenMap(GenMapArgs),
    /// Re-render a trajectory log as CSV series.
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MapArg {
    Train10,
    Rand15,
    Rand20,
}

impl From<MapArg> for MapChoice {
    fn from(m: MapArg) -> Self {
        match m {
            MapArg::Train10 => MapChoice::Train10,
            MapArg::Rand15 => MapChoice::Rand15,
            MapArg::Rand20 => MapChoice::Rand20,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AllocArg {
    Directional,
    Greedy,
    Random,
    NoSuppress,
}

impl From<AllocArg> for AllocationMode {
    fn from(a: AllocArg) -> Self {
        match a {
            AllocArg::Directional => AllocationMode::Directional,
            AllocArg::Greedy => AllocationMode::Greedy,
            AllocArg::Random => AllocationMode::Random,
            AllocArg::NoSuppress => AllocationMode::NoSuppress,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum PolicyArg {
    Pid,
    /// Actions from `--actions` (CSV `step,agent,dtheta,dv` or a JSONL log).
    Scripted,
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long, value_enum, default_value = "train10")]
    map: MapArg,
    /// Curriculum stage override.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
    stage: Option<u8>,
    #[arg(long, value_enum, default_value = "directional")]
    alloc: AllocArg,
    #[arg(long, value_enum, default_value = "pid")]
    policy: PolicyArg,
    #[arg(long)]
    actions: Option<PathBuf>,
    /// Mapping only: idle, undetectable evader.
    #[arg(long)]
    explore_only: bool,
    /// End episodes once coverage reaches this fraction.
    #[arg(long)]
    stop_at_coverage: Option<f64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BatchArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// First seed; episodes use `seed..seed + episodes`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    episodes: u64,
    #[arg(long, default_value_t = 1)]
    parallelism: usize,
    /// Also write one JSONL log per episode.
    #[arg(long)]
    logs: bool,
}

#[derive(Args)]
struct GenMapArgs {
    #[arg(long, value_enum, default_value = "rand20")]
    map: MapArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    /// JSONL trajectory log.
    log: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Re-simulate the logged actions and require an identical log.
    #[arg(long)]
    verify: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let config_error = e.chain().any(|c| {
                matches!(
                    c.downcast_ref::<Error>(),
                    Some(Error::Config(_) | Error::GenerationFailed { .. })
                )
            });
            ExitCode::from(if config_error { 2 } else { 1 })
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let config = cli.config.as_deref();
    match cli.command {
        Command::Run(a) => run(config, a),
        Command::Batch(a) => batch(config, a),
        Command::GenMap(a) => gen_map(config, a),
        Command::Replay(a) => replay(a),
    }
}

fn scenario(config: Option<&Path>, map: MapArg, seed: u64, stage: Option<u8>) -> Result<ScenarioConfig<f64>> {
    let mut cfg = match config {
        Some(path) => {
            // Unreadable or undecodable files count as configuration errors too.
            let mut c = ScenarioConfig::load(path).map_err(|e| match e {
                e @ (Error::Config(_) | Error::GenerationFailed { .. }) => e,
                e => Error::Config(format!("{}: {e}", path.display())),
            })?;
            c.sim.rng_seed = seed;
            c
        }
        None => MapChoice::from(map).build(seed)?,
    };
    if let Some(s) = stage {
        cfg = cfg.with_stage(s)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn policy(args: &ScenarioArgs, n_pursuers: usize) -> Result<Policy<f64>> {
    match (args.policy, &args.actions) {
        (PolicyArg::Pid, None) => Ok(Policy::Pid),
        (PolicyArg::Pid, Some(_)) => bail!("--actions needs --policy scripted"),
        (PolicyArg::Scripted, None) => bail!("--policy scripted needs --actions <file>"),
        (PolicyArg::Scripted, Some(path)) => Ok(Policy::Scripted(read_actions(path, n_pursuers)?)),
    }
}

fn read_actions(path: &Path, n_pursuers: usize) -> Result<Vec<Vec<KinematicAction<f64>>>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if path.extension().is_some_and(|e| e == "csv") {
        return output::actions_from_csv(&text, n_pursuers);
    }
    Ok(actions_from_log(&parse_log::<f64>(&text)?)?)
}

fn options(args: &ScenarioArgs, record_log: bool) -> RunOptions {
    RunOptions {
        alloc: args.alloc.into(),
        explore_only: args.explore_only,
        stop_at_coverage: args.stop_at_coverage,
        record_log,
    }
}

fn run(config: Option<&Path>, a: RunArgs) -> Result<()> {
    let s = &a.scenario;
    let cfg = scenario(config, s.map, a.seed, s.stage)?;
    let (result, log) = run_episode(&cfg, a.seed, &policy(s, cfg.agents.n_pursuers)?, &options(s, true))?;
    std::fs::create_dir_all(&s.out)?;
    output::write_episodes(&s.out.join("episodes.csv"), std::slice::from_ref(&result))?;
    output::write_coverage(&s.out.join("coverage.csv"), std::slice::from_ref(&result))?;
    output::write_log(&s.out.join(format!("episode-{}.jsonl", a.seed)), &log)?;
    println!("{}", serde_json::to_string(&result_summary(&result))?);
    Ok(())
}

fn result_summary(r: &pursuit_core::runner::EpisodeResult) -> serde_json::Value {
    serde_json::json!({
        "seed": r.seed,
        "success": r.success,
        "capture_steps": r.capture_steps,
        "clean": r.clean,
        "steps": r.steps,
        "final_coverage": r.coverage_curve.last(),
    })
}

fn batch(config: Option<&Path>, a: BatchArgs) -> Result<()> {
    let s = &a.scenario;
    if a.episodes == 0 {
        bail!("--episodes must be at least 1");
    }
    let jobs: Vec<Job<f64>> = (a.seed..a.seed + a.episodes)
        .map(|seed| Ok(Job { config: scenario(config, s.map, seed, s.stage)?, seed }))
        .collect::<Result<_>>()?;
    let runs = run_batch(&jobs, &policy(s, jobs[0].config.agents.n_pursuers)?, &options(s, a.logs), a.parallelism)?;
    let results: Vec<_> = runs.iter().map(|(r, _)| r.clone()).collect();
    std::fs::create_dir_all(&s.out)?;
    output::write_episodes(&s.out.join("episodes.csv"), &results)?;
    output::write_coverage(&s.out.join("coverage.csv"), &results)?;
    if a.logs {
        for (r, log) in &runs {
            output::write_log(&s.out.join(format!("episode-{}.jsonl", r.seed)), log)?;
        }
    }
    let report = BatchReport::from_results(&results, s.stop_at_coverage.unwrap_or(0.8));
    let timing = TimingReport::from_results(&results);
    let json = serde_json::json!({ "report": report, "timing": timing });
    std::fs::write(s.out.join("report.json"), serde_json::to_string_pretty(&json)?)?;
    println!("{}", serde_json::to_string(&report)?);
    Ok(())
}

fn gen_map(config: Option<&Path>, a: GenMapArgs) -> Result<()> {
    let cfg = scenario(config, a.map, a.seed, None)?;
    let text = cfg.to_toml_string()?;
    match a.out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(&path, text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn replay(a: ReplayArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.log).with_context(|| format!("reading {}", a.log.display()))?;
    let records: Vec<LogRecord<f64>> = parse_log(&text)?;
    std::fs::create_dir_all(&a.out)?;
    output::write_agent_series(&a.out.join("agents.csv"), &records)?;
    output::write_world_series(&a.out.join("world.csv"), &records)?;
    if a.verify {
        let Some(LogRecord::Header(h)) = records.first() else { bail!("log does not start with a header record") };
        let cfg: ScenarioConfig<f64> = serde_json::from_value(h.config.clone())?;
        let alloc = AllocationMode::parse(&h.alloc).with_context(|| format!("unknown allocation mode {:?}", h.alloc))?;
        let opts = RunOptions { alloc, explore_only: h.explore_only, stop_at_coverage: h.stop_at_coverage, record_log: true };
        let script = Policy::Scripted(actions_from_log(&records)?);
        let (_, again) = run_episode(&cfg, h.seed, &script, &opts)?;
        let original: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        if again.iter().map(String::as_str).ne(original.iter().copied()) {
            bail!("re-simulated log differs from {}", a.log.display());
        }
        println!("verified {} records", original.len());
    }
    Ok(())
}
