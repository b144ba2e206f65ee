use pursuit_core::allocation::AllocationMode;
use pursuit_core::runner::batch::{run_batch, BatchReport, Job};
use pursuit_core::runner::{run_episode, MapChoice, Policy, RunOptions};

fn jobs(map: MapChoice, n: u64) -> Vec<Job<f64>> {
    (0..n).map(|s| Job { config: map.build(s).unwrap(), seed: s }).collect()
}

#[test]
fn same_seed_same_log() {
    for map in [MapChoice::Train10, MapChoice::Rand15] {
        let cfg = map.build::<f64>(7).unwrap();
        let (_, a) = run_episode(&cfg, 7, &Policy::Pid, &RunOptions::default()).unwrap();
        let (_, b) = run_episode(&cfg, 7, &Policy::Pid, &RunOptions::default()).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn parallelism_does_not_change_results() {
    let opts = RunOptions { alloc: AllocationMode::Random, ..RunOptions::default() };
    let jobs = jobs(MapChoice::Rand15, 8);
    let one = run_batch(&jobs, &Policy::Pid, &opts, 1).unwrap();
    let many = run_batch(&jobs, &Policy::Pid, &opts, 4).unwrap();
    assert_eq!(one.iter().map(|(_, l)| l).collect::<Vec<_>>(), many.iter().map(|(_, l)| l).collect::<Vec<_>>());
    let r1: Vec<_> = one.into_iter().map(|(r, _)| r).collect();
    let r2: Vec<_> = many.into_iter().map(|(r, _)| r).collect();
    assert_eq!(BatchReport::from_results(&r1, 0.8), BatchReport::from_results(&r2, 0.8));
}

#[test]
fn f32_episodes_run_to_completion() {
    let cfg = MapChoice::Train10.build::<f32>(3).unwrap();
    let (r, log) = run_episode(&cfg, 3, &Policy::Pid, &RunOptions::default()).unwrap();
    assert!(r.steps > 0);
    assert!(log[0].contains("f32"));
}

#[test]
fn different_seeds_differ() {
    let cfg = MapChoice::Train10.build::<f64>(0).unwrap();
    let (_, a) = run_episode(&cfg, 1, &Policy::Pid, &RunOptions::default()).unwrap();
    let (_, b) = run_episode(&cfg, 2, &Policy::Pid, &RunOptions::default()).unwrap();
    assert_ne!(a, b);
}
