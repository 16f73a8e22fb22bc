//! Single-agent constant-speed tracking of a fixed orbit, used to compare the
//! two offset laws.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_8, PI};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{coords_in_frame, normalize_angle, Direction, EllipseAxes, Vec2};
use crate::guidance::{angular_rate_command, heading_command, GuidanceGains, GuidanceLaw};
use crate::plot::{Chart, Series};
use crate::sim::{unicycle_step, AgentState, Integrator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingSetup {
    pub axes: EllipseAxes,
    pub direction: Direction,
    pub gains: GuidanceGains,
    pub law: GuidanceLaw,
    pub speed: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub gamma: f64,
    pub s: f64,
    pub psi_o: f64,
    pub omega: f64,
}

/// Flies one agent at constant speed around a stationary orbit centered at
/// the origin with zero tilt. Returns one sample per tick, taken before the
/// integration step.
pub fn track_orbit(setup: &TrackingSetup, start: (f64, f64, f64), duration: f64) -> Vec<TrackSample> {
    let steps = (duration / setup.dt).round() as usize;
    let mut st = AgentState::at_pose(start.0, start.1, start.2, 0.0);
    let mut out = Vec::with_capacity(steps);
    for k in 0..steps {
        let c = coords_in_frame(Vec2::new(st.x, st.y), &setup.axes, setup.direction);
        let h = heading_command(&c, &setup.axes, setup.direction, &setup.gains, setup.law);
        let omega = angular_rate_command(h.psi_d, st.psi, 0.0, &setup.gains);
        out.push(TrackSample {
            t: k as f64 * setup.dt,
            x: st.x,
            y: st.y,
            gamma: c.gamma,
            s: c.s,
            psi_o: h.psi_o,
            omega,
        });
        st = unicycle_step(&st, setup.speed, omega, setup.dt, Integrator::Rk4);
    }
    out
}

/// First time after which `|γ − 1| < tol` holds for at least `hold` seconds
/// without interruption.
pub fn settling_time(samples: &[TrackSample], tol: f64, hold: f64) -> Option<f64> {
    let mut since: Option<f64> = None;
    for s in samples {
        if (s.gamma - 1.0).abs() < tol {
            let t0 = *since.get_or_insert(s.t);
            if s.t - t0 >= hold {
                return Some(t0);
            }
        } else {
            since = None;
        }
    }
    None
}

/// Whether `s` lies within `±π/8` of either major-axis vertex.
pub fn near_vertex(s: f64) -> bool {
    normalize_angle(s).abs() <= FRAC_PI_8 || normalize_angle(s - PI).abs() <= FRAC_PI_8
}

/// Largest `|γ − 1|` at or after `from` among samples near the vertices.
pub fn vertex_error(samples: &[TrackSample], from: f64) -> f64 {
    samples
        .iter()
        .filter(|s| s.t >= from && near_vertex(s.s))
        .map(|s| (s.gamma - 1.0).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LawResult {
    pub law: GuidanceLaw,
    pub k_gamma: f64,
    pub settling_time: Option<f64>,
    /// Vertex-window error once both laws have settled; `None` if either never does.
    pub max_vertex_gamma_error: Option<f64>,
    /// Vertex-window error over the second half of the run, settled or not.
    pub steady_vertex_gamma_error: f64,
    pub max_gamma_error_after_settling: Option<f64>,
    pub max_abs_omega: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub a: f64,
    pub b: f64,
    pub speed: f64,
    pub kappa_min: f64,
    pub orbit_time: f64,
    pub duration: f64,
    pub start: [f64; 3],
    /// Time after which both laws are settled; vertex errors are taken from here.
    pub compare_from: Option<f64>,
    pub constant_gain: LawResult,
    pub curvature_weighted: LawResult,
}

impl ComparisonReport {
    /// Both laws settled and the weighted one has the smaller vertex error.
    pub fn weighted_is_tighter(&self) -> bool {
        match (self.curvature_weighted.max_vertex_gamma_error, self.constant_gain.max_vertex_gamma_error) {
            (Some(w), Some(c)) => w < c,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonSetup {
    pub axes: EllipseAxes,
    pub speed: f64,
    pub omega_max: f64,
    pub k_psi: f64,
    /// Gain of the constant law; the weighted law uses `k_gamma / κ_min` so
    /// both agree on the flattest part of the orbit.
    pub k_gamma_constant: f64,
    pub dt: f64,
    pub orbits: f64,
    pub start: (f64, f64, f64),
    /// `|γ − 1|` band that counts as settled.
    pub settle_tol: f64,
}

impl Default for ComparisonSetup {
    fn default() -> Self {
        Self {
            axes: EllipseAxes::new(2.5, 1.0).expect("valid axes"),
            speed: 0.4,
            omega_max: 1.5,
            k_psi: 1.0,
            k_gamma_constant: 2.0,
            dt: 0.02,
            orbits: 20.0,
            start: (4.0, 3.0, FRAC_PI_2),
            settle_tol: 0.05,
        }
    }
}

pub struct Comparison {
    pub report: ComparisonReport,
    pub constant: Vec<TrackSample>,
    pub weighted: Vec<TrackSample>,
}

pub fn compare_guidance(setup: &ComparisonSetup) -> Comparison {
    let axes = setup.axes;
    let kappa_min = axes.b() / (axes.a() * axes.a());
    let orbit_time = axes.perimeter() / setup.speed;
    let duration = setup.orbits * orbit_time;
    let run = |law: GuidanceLaw, k_gamma: f64| {
        let ts = TrackingSetup {
            axes,
            direction: Direction::CounterClockwise,
            gains: GuidanceGains {
                k_gamma,
                k_psi: setup.k_psi,
                omega_max: setup.omega_max,
            },
            law,
            speed: setup.speed,
            dt: setup.dt,
        };
        track_orbit(&ts, setup.start, duration)
    };
    let k_weighted = setup.k_gamma_constant / kappa_min;
    let constant = run(GuidanceLaw::ConstantGain, setup.k_gamma_constant);
    let weighted = run(GuidanceLaw::CurvatureWeighted, k_weighted);

    let settle_c = settling_time(&constant, setup.settle_tol, orbit_time);
    let settle_w = settling_time(&weighted, setup.settle_tol, orbit_time);
    let compare_from = settle_c.zip(settle_w).map(|(a, b)| a.max(b));
    let summarize = |law, k_gamma, samples: &[TrackSample], settle: Option<f64>| LawResult {
        law,
        k_gamma,
        settling_time: settle,
        max_vertex_gamma_error: compare_from.map(|t0| vertex_error(samples, t0)),
        steady_vertex_gamma_error: vertex_error(samples, duration / 2.0),
        max_gamma_error_after_settling: settle.map(|t0| {
            samples
                .iter()
                .filter(|s| s.t >= t0)
                .map(|s| (s.gamma - 1.0).abs())
                .fold(0.0, f64::max)
        }),
        max_abs_omega: samples.iter().map(|s| s.omega.abs()).fold(0.0, f64::max),
    };
    let report = ComparisonReport {
        a: axes.a(),
        b: axes.b(),
        speed: setup.speed,
        kappa_min,
        orbit_time,
        duration,
        start: [setup.start.0, setup.start.1, setup.start.2],
        compare_from,
        constant_gain: summarize(GuidanceLaw::ConstantGain, setup.k_gamma_constant, &constant, settle_c),
        curvature_weighted: summarize(GuidanceLaw::CurvatureWeighted, k_weighted, &weighted, settle_w),
    };
    Comparison {
        report,
        constant,
        weighted,
    }
}

/// Runs the default comparison and writes `comparison.csv`,
/// `comparison.json`, `comparison_gamma.svg` and `comparison_paths.svg`.
pub fn write_comparison(setup: &ComparisonSetup, out_dir: &Path) -> Result<ComparisonReport> {
    let cmp = compare_guidance(setup);
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let csv_path = out_dir.join("comparison.csv");
    let file = File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(&csv_path, e);
    writeln!(w, "t,constant_x,constant_y,constant_gamma,constant_s,weighted_x,weighted_y,weighted_gamma,weighted_s").map_err(io)?;
    for (c, g) in cmp.constant.iter().zip(&cmp.weighted) {
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            c.t, c.x, c.y, c.gamma, c.s, g.x, g.y, g.gamma, g.s
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)?;

    let json_path = out_dir.join("comparison.json");
    let json = serde_json::to_string_pretty(&cmp.report).expect("report serializes");
    std::fs::write(&json_path, json + "\n").map_err(|e| Error::io(&json_path, e))?;

    let gamma_series = |name: &str, s: &[TrackSample]| Series::new(name, s.iter().map(|p| (p.t, p.gamma)).collect());
    Chart {
        title: "Level-set value by offset law".into(),
        x_label: "t (s)".into(),
        y_label: "gamma".into(),
        equal_aspect: false,
        series: vec![gamma_series("constant gain", &cmp.constant), gamma_series("curvature weighted", &cmp.weighted)],
    }
    .write(&out_dir.join("comparison_gamma.svg"))?;

    let path_series = |name: &str, s: &[TrackSample]| Series::new(name, s.iter().map(|p| (p.x, p.y)).collect());
    let orbit = (0..=360)
        .map(|k| {
            let u = (k as f64).to_radians();
            (setup.axes.a() * u.cos(), setup.axes.b() * u.sin())
        })
        .collect();
    let mut orbit = Series::new("orbit", orbit);
    orbit.color = Some("black");
    orbit.dashed = true;
    Chart {
        title: "Paths by offset law".into(),
        x_label: "x (m)".into(),
        y_label: "y (m)".into(),
        equal_aspect: true,
        series: vec![path_series("constant gain", &cmp.constant), path_series("curvature weighted", &cmp.weighted), orbit],
    }
    .write(&out_dir.join("comparison_paths.svg"))?;

    Ok(cmp.report)
}
