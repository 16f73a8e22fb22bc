use std::f64::consts::TAU;

use convoy_core::cooperation::CoopParams;
use convoy_core::geometry::{orbit_coords, rotate_to_frame};
use convoy_core::planner::{ConvoySnapshot, OrbitPlanner};
use convoy_core::scenario::bundled;
use convoy_core::sim::{ConvoyModel, PathShape, SpeedProfile, World};
use convoy_core::speed::parametric_rate;
use convoy_core::{run_scenario, RunOptions, Vec2};

fn stationary_world(n_agents: usize, poses: Option<Vec<(f64, f64, f64)>>) -> World {
    let mut cfg = bundled("matlab_sim_1").unwrap();
    cfg.n_a = n_agents;
    let mut params = cfg.sim_params().unwrap();
    params.coop = CoopParams { n_agents, ..params.coop };
    let convoy = cfg.convoy().unwrap();
    let poses = poses.unwrap_or_else(|| cfg.initial_poses(&convoy));
    World::new(params, convoy, &poses).unwrap()
}

/// Evenly spaced on-orbit poses with tangent headings for the matlab_sim_1 convoy.
fn on_orbit_poses(n: usize) -> Vec<(f64, f64, f64)> {
    let cfg = bundled("matlab_sim_1").unwrap();
    let convoy = cfg.convoy().unwrap();
    let mut planner = OrbitPlanner::new(cfg.sim_params().unwrap().planner, cfg.envelope().unwrap()).unwrap();
    let orbit = planner.plan(&ConvoySnapshot::new(convoy.positions(0.0), 0, cfg.dt).unwrap());
    (0..n)
        .map(|k| {
            let s = TAU * k as f64 / n as f64;
            let p = orbit.to_global(orbit.axes.point(s, 1.0));
            let tangent = rotate_to_frame(
                Vec2::new(-orbit.axes.a() * s.sin(), orbit.axes.b() * s.cos()),
                -orbit.tilt,
            );
            (p.x, p.y, tangent.y.atan2(tangent.x))
        })
        .collect()
}

#[test]
fn identical_configs_give_identical_logs() {
    let mut cfg = bundled("hardware_exp_1").unwrap();
    cfg.duration = 20.0;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = run_scenario(&cfg, a.path(), &RunOptions::default()).unwrap();
    let rb = run_scenario(&cfg, b.path(), &RunOptions::default()).unwrap();
    assert_eq!(std::fs::read(ra.metrics_path).unwrap(), std::fs::read(rb.metrics_path).unwrap());
}

#[test]
fn zero_agents_advance_the_convoy_only() {
    let mut cfg = bundled("matlab_sim_2").unwrap();
    let params = cfg.sim_params().unwrap();
    let params = convoy_core::sim::SimParams {
        coop: CoopParams { n_agents: 0, ..params.coop },
        ..params
    };
    cfg.n_a = 0;
    let mut world = World::new(params, cfg.convoy().unwrap(), &[]).unwrap();
    let first = world.step();
    for _ in 0..99 {
        world.step();
    }
    let last = world.step();
    assert!(first.agents.is_empty() && last.agents.is_empty());
    assert_ne!(first.convoy, last.convoy);
    assert!((last.t - 100.0 * cfg.dt).abs() < 1e-12);
}

#[test]
fn one_tick_on_orbit_keeps_gamma() {
    let poses = on_orbit_poses(1);
    let mut world = stationary_world(1, Some(poses));
    let r0 = world.step();
    let r1 = world.step();
    let p = world.params();
    let s_v = parametric_rate(&p.envelope, &r0.orbit.axes, 1.0);
    assert!((r0.agents[0].gamma - 1.0).abs() < 1e-12);
    let drift = (r1.agents[0].gamma - r0.agents[0].gamma).abs();
    assert!(drift < s_v * p.dt * 1e-2, "drift {drift}");
}

#[test]
fn altitudes_are_stacked_until_the_height_flag() {
    let mut world = stationary_world(5, None);
    let p = *world.params();
    let first = world.step();
    for (k, a) in first.agents.iter().enumerate() {
        assert!((a.z - (p.z_mission + p.z_separation * k as f64)).abs() < 1e-12);
    }
    let mut last = first;
    for _ in 0..(200.0 / p.dt) as usize {
        last = world.step();
    }
    assert!(last.agents.iter().all(|a| a.flags.height));
    for a in &last.agents {
        assert!((a.z - p.z_mission).abs() < 1e-3, "z {}", a.z);
    }
}

#[test]
fn equally_spaced_team_stays_spaced() {
    let n = 5;
    let mut world = stationary_world(n, Some(on_orbit_poses(n)));
    let p = *world.params();
    let mut worst: f64 = 0.0;
    for k in 0..(60.0 / p.dt) as usize {
        let r = world.step();
        if k > 2 {
            worst = r.agents.iter().map(|a| a.ds.abs()).fold(worst, f64::max);
        }
    }
    assert!(worst < 0.02, "spacing error {worst}");
}

#[test]
fn recorded_coordinates_match_recomputed_ones() {
    let mut world = stationary_world(3, None);
    let dir = world.params().direction;
    for _ in 0..10 {
        let r = world.step();
        for a in &r.agents {
            let c = orbit_coords(Vec2::new(a.x, a.y), &r.orbit, dir);
            assert_eq!((c.gamma, c.s), (a.gamma, a.s));
        }
    }
}

#[test]
fn convoy_path_kinds_build() {
    for shape in [
        PathShape::Arc {
            radius: 5.0,
            center: [1.0, 2.0],
        },
        PathShape::Waypoints {
            points: vec![[0.0, 0.0], [3.0, 0.0], [3.0, 3.0]],
            closed: false,
        },
    ] {
        let m = ConvoyModel::new(shape, SpeedProfile::Constant { speed: 0.1 }, 3, 0.5, 2.0, 0.1).unwrap();
        assert_eq!(m.positions(1.0).len(), 3);
    }
}
