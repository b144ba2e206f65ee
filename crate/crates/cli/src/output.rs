//! CSV and JSONL writers, plus the scripted-action CSV reader.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use pursuit_core::physics::KinematicAction;
use pursuit_core::runner::log::LogRecord;
use pursuit_core::runner::EpisodeResult;

/// Reads `step,agent,dtheta,dv` rows for `n_pursuers` agents. Pairs missing
/// from the file idle.
pub fn actions_from_csv(text: &str, n_pursuers: usize) -> Result<Vec<Vec<KinematicAction<f64>>>> {
    let mut rows = Vec::new();
    for (i, row) in csv::Reader::from_reader(text.as_bytes()).deserialize::<(usize, usize, f64, f64)>().enumerate() {
        rows.push(row.with_context(|| format!("action row {}", i + 1))?);
    }
    let Some(steps) = rows.iter().map(|r| r.0 + 1).max() else { bail!("action file has no rows") };
    let mut script = vec![vec![None; n_pursuers]; steps];
    for (step, agent, dtheta, dv) in rows {
        if agent >= n_pursuers {
            bail!("action for agent {agent}, but the scenario has {n_pursuers} pursuers");
        }
        if script[step][agent].replace(KinematicAction::new(dtheta, dv)).is_some() {
            bail!("duplicate action for step {step}, agent {agent}");
        }
    }
    Ok(script.into_iter().map(|s| s.into_iter().map(|a| a.unwrap_or_else(KinematicAction::idle)).collect()).collect())
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_episodes(path: &Path, results: &[EpisodeResult]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["seed", "success", "capture_steps", "clean", "steps", "final_coverage", "steps_to_80"])?;
    for r in results {
        w.write_record([
            r.seed.to_string(),
            r.success.to_string(),
            opt(r.capture_steps),
            r.clean.to_string(),
            r.steps.to_string(),
            opt(r.coverage_curve.last()),
            opt(r.steps_to_coverage(0.8)),
        ])?;
    }
    Ok(w.flush()?)
}

/// Long format: one row per (seed, step).
pub fn write_coverage(path: &Path, results: &[EpisodeResult]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["seed", "step", "coverage"])?;
    for r in results {
        for (step, c) in r.coverage_curve.iter().enumerate() {
            w.write_record([r.seed.to_string(), step.to_string(), c.to_string()])?;
        }
    }
    Ok(w.flush()?)
}

pub fn write_log(path: &Path, lines: &[String]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    for line in lines {
        writeln!(w, "{line}")?;
    }
    Ok(w.flush()?)
}

pub fn write_agent_series(path: &Path, records: &[LogRecord<f64>]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "step", "agent", "x", "y", "heading", "speed", "mode", "goal_x", "goal_y", "dtheta", "dv", "reward", "mission",
        "safety", "guide", "explore", "r_pot", "collided", "new_cells",
    ])?;
    for r in records {
        let LogRecord::Agent(a) = r else { continue };
        let f = a.flags;
        w.write_record([
            a.step.to_string(),
            a.agent.to_string(),
            a.position.x.to_string(),
            a.position.y.to_string(),
            a.heading.to_string(),
            a.speed.to_string(),
            a.mode.clone(),
            opt(a.goal.map(|g| g.x)),
            opt(a.goal.map(|g| g.y)),
            a.action[0].to_string(),
            a.action[1].to_string(),
            a.reward.total.to_string(),
            a.reward.mission.to_string(),
            a.reward.safety.to_string(),
            a.reward.guide.to_string(),
            a.reward.explore.to_string(),
            a.r_pot.to_string(),
            (f.obstacle || f.wall || f.teammate).to_string(),
            a.new_cells.to_string(),
        ])?;
    }
    Ok(w.flush()?)
}

pub fn write_world_series(path: &Path, records: &[LogRecord<f64>]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["step", "evader_x", "evader_y", "evader_heading", "visible", "lkp_x", "lkp_y", "coverage", "captured"])?;
    for r in records {
        let LogRecord::World(s) = r else { continue };
        w.write_record([
            s.step.to_string(),
            s.evader_position.x.to_string(),
            s.evader_position.y.to_string(),
            s.evader_heading.to_string(),
            s.visible.to_string(),
            opt(s.lkp.map(|p| p.x)),
            opt(s.lkp.map(|p| p.y)),
            s.coverage.to_string(),
            s.captured.to_string(),
        ])?;
    }
    Ok(w.flush()?)
}
