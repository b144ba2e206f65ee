mod common;

use proptest::prelude::*;
use pursuit_core::allocation::{directional_fps, hungarian, FpsParams};
use pursuit_core::belief::{BeliefMap, CellState};
use pursuit_core::config::CircularObstacle;
use pursuit_core::geometry::{angle_between, point_segment_distance, Vec2};
use pursuit_core::grid::{occupancy_raster, GridSpec};
use pursuit_core::reward::observation_bounds;
use pursuit_core::runner::{Episode, MapChoice, RunOptions};
use pursuit_core::sensing::{cast_rays, detect_target};
use pursuit_core::world::{build_training_map, AgentState, Role, WorldState};

use common::{brute_force_assignment, physics_trial};

fn map_for(which: u8, seed: u64) -> pursuit_core::config::ScenarioConfig<f64> {
    match which % 3 {
        0 => MapChoice::Train10.build(seed).unwrap(),
        1 => MapChoice::Rand15.build(seed).unwrap(),
        _ => MapChoice::Rand20.build(seed).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn physics_keeps_agents_out_of_obstacles(which in 0u8..3, seed in 0u64..10_000) {
        let cfg = map_for(which, seed);
        let s = physics_trial(&cfg, seed, 150);
        prop_assert!(s.max_penetration <= 1e-6, "penetration {}", s.max_penetration);
        prop_assert!(s.max_speed_violation <= 0.0, "speed outside [0, v_max] by {}", s.max_speed_violation);
        prop_assert!(s.max_collision_speedup <= 0.0, "collision sped an agent up by {}", s.max_collision_speedup);
    }

    #[test]
    fn episodes_keep_observations_in_bounds_and_belief_sound(seed in 0u64..1_000, which in 0u8..2) {
        let cfg = map_for(which, seed);
        let spec = GridSpec::for_scenario(&cfg);
        let truth = occupancy_raster(&spec, &cfg.map.obstacles);
        let bounds = observation_bounds(cfg.agents.n_pursuers);
        let options = RunOptions { record_log: false, ..RunOptions::default() };
        let mut ep = Episode::reset(cfg, seed, options).unwrap();
        let mut known: Vec<bool> = ep.belief().cells().iter().map(|c| *c != CellState::Unknown).collect();
        for _ in 0..120 {
            if ep.is_done() {
                break;
            }
            for obs in &ep.view().observations {
                prop_assert_eq!(obs.values.len(), bounds.len());
                for (v, (lo, hi)) in obs.values.iter().zip(&bounds) {
                    prop_assert!(*v >= *lo && *v <= *hi, "{v} outside [{lo}, {hi}]");
                }
            }
            let actions = ep.pid_actions();
            ep.advance(&actions).unwrap();
            for (i, c) in ep.belief().cells().iter().enumerate() {
                let now = *c != CellState::Unknown;
                prop_assert!(now || !known[i], "cell {i} forgot its state");
                known[i] = now;
                if *c == CellState::Occupied {
                    prop_assert!(truth[i], "cell {i} believed occupied but free");
                }
            }
        }
    }

    #[test]
    fn occlusion_is_sound(
        ox in 1.0f64..9.0, oy in 1.0f64..9.0, r in 0.3f64..1.5,
        ax in 0.0f64..10.0, ay in 0.0f64..10.0, tx in 0.0f64..10.0, ty in 0.0f64..10.0,
    ) {
        let obstacles = [CircularObstacle::new(Vec2::new(ox, oy), r)];
        let (a, t) = (Vec2::new(ax, ay), Vec2::new(tx, ty));
        let d = detect_target(a, 0.0, t, &obstacles, 2.0, 360.0);
        if d.visible {
            prop_assert!(a.distance(t) <= 2.0);
            // dense sampling of the sight segment never enters the disc
            for k in 0..=1000 {
                let s = a + (t - a) * (k as f64 / 1000.0);
                prop_assert!(s.distance(obstacles[0].center) >= r - 1e-9);
            }
        } else if a.distance(t) <= 2.0 {
            prop_assert!(point_segment_distance(obstacles[0].center, a, t) <= r + 1e-9);
        }
    }

    #[test]
    fn lidar_rays_rotate_with_heading(x in 1.0f64..9.0, y in 1.0f64..9.0, heading in -3.0f64..3.0) {
        let mut cfg = build_training_map::<f64>();
        cfg.map.obstacles.clear();
        let world = |h: f64| WorldState::new(vec![
            AgentState::new(Vec2::new(x, y), h, 0.0, Role::Pursuer(0)),
            AgentState::new(Vec2::new(0.5, 0.5), 0.0, 0.0, Role::Evader),
        ]);
        let a = cast_rays(&world(heading), 0, &cfg);
        let b = cast_rays(&world(heading + std::f64::consts::FRAC_PI_4), 0, &cfg);
        for k in 0..8 {
            prop_assert!((a.wall_ranges[(k + 1) % 8] - b.wall_ranges[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn hungarian_is_optimal_and_injective(
        cost in (1usize..6).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(0u32..1000, n), n)),
    ) {
        let cost: Vec<Vec<f64>> = cost.into_iter().map(|r| r.into_iter().map(f64::from).collect()).collect();
        let a = hungarian(&cost).unwrap();
        prop_assert_eq!(a.total, brute_force_assignment(&cost));
        let mut cols: Vec<usize> = a.columns.iter().map(|c| c.unwrap()).collect();
        cols.sort();
        cols.dedup();
        prop_assert_eq!(cols.len(), cost.len());
    }

    #[test]
    fn fps_respects_suppression(
        pts in prop::collection::vec((0.0f64..20.0, 0.0f64..20.0), 1..40),
        k in 1usize..10,
        min_selected in 0usize..4,
    ) {
        let v: Vec<Vec2<f64>> = pts.iter().map(|&(x, y)| Vec2::new(x, y)).collect();
        let center = Vec2::new(10.0, 10.0);
        let phi = 45f64.to_radians();
        let r = directional_fps(&v, &[Vec2::new(1.0, 1.0)], &[], center, &FpsParams { k, phi_suppress: Some(phi), min_selected });
        prop_assert!(r.selected.len() <= k);
        prop_assert!(r.selected.len() >= min_selected.min(k).min(pts.len()));
        let firm: Vec<Vec2<f64>> = r.selected.iter().zip(&r.relaxed).filter(|(_, relaxed)| !**relaxed).map(|(i, _)| v[*i]).collect();
        for (i, a) in firm.iter().enumerate() {
            for b in &firm[i + 1..] {
                if a.distance(center) > 1e-9 && b.distance(center) > 1e-9 {
                    prop_assert!(angle_between((*a - center).angle(), (*b - center).angle()) >= phi);
                }
            }
        }
    }

    #[test]
    fn belief_dump_round_trips(codes in prop::collection::vec(0u8..3, 48)) {
        let spec = GridSpec::new(8, 6, 0.5);
        let mut b = BeliefMap::<f64>::new(spec);
        for (i, c) in codes.iter().enumerate() {
            let s = [CellState::Unknown, CellState::Free, CellState::Occupied][*c as usize];
            b.observe(spec.cell(i), s);
        }
        let back = BeliefMap::<f64>::from_dump(&b.to_dump()).unwrap();
        prop_assert_eq!(back.cells(), b.cells());
    }
}

#[test]
fn repeated_scan_is_a_fixed_point() {
    let cfg = MapChoice::Train10.build::<f64>(3).unwrap();
    let world = pursuit_core::world::spawn_agents(&cfg, 3).unwrap();
    let spec = GridSpec::for_scenario(&cfg);
    let mut b = BeliefMap::new(spec);
    let scan = cast_rays(&world, 0, &cfg);
    b.update_from_scan(&world.agents[0], &scan, 10.0);
    let once = b.cells().to_vec();
    assert_eq!(b.update_from_scan(&world.agents[0], &scan, 10.0), 0);
    assert_eq!(b.cells(), &once[..]);
}

#[test]
fn scenario_config_round_trips_through_toml() {
    let cfg = MapChoice::Rand20.build::<f64>(5).unwrap();
    let text = cfg.to_toml_string().unwrap();
    let back = pursuit_core::config::ScenarioConfig::<f64>::from_toml_str(&text).unwrap();
    assert_eq!(back, cfg);
}
