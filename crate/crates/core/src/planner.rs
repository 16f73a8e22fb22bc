//! Per-tick orbit computation from convoy positions.
//!
//! The orbit is centered on the convoy centroid and tilted along the line from
//! the last vehicle to the lead vehicle. Its axes are the minimum-area ellipse
//! around the convoy bounding box, enlarged where needed so that the agents'
//! turn-rate and speed-band constraints can be met.

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, rotate_to_frame, wrap_heading, EllipseAxes, OrbitSpec, Vec2};
use crate::speed::SpeedEnvelope;

#[derive(Debug, Clone)]
pub struct ConvoySnapshot {
    pub positions: Vec<Vec2>,
    pub tick: u64,
    pub dt: f64,
}

impl ConvoySnapshot {
    pub fn new(positions: Vec<Vec2>, tick: u64, dt: f64) -> Result<Self> {
        if positions.len() < 2 {
            return Err(Error::config("n_t", "convoy needs at least two vehicles"));
        }
        if !(dt > 0.0) {
            return Err(Error::config("dt", "must be positive"));
        }
        Ok(Self { positions, tick, dt })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    /// Extent along the tilt direction.
    pub l1: f64,
    /// Extent across it.
    pub l2: f64,
}

/// Centroid of the convoy and the heading from vehicle 1 to vehicle `N_T`.
///
/// Returns `None` for the tilt when the two end vehicles coincide.
pub fn centroid_and_tilt(positions: &[Vec2]) -> (Vec2, Option<f64>) {
    let n = positions.len() as f64;
    let centroid = positions.iter().fold(Vec2::zeros(), |acc, p| acc + p) / n;
    let first = positions[0];
    let last = positions[positions.len() - 1];
    let d = last - first;
    let tilt = if d.x == 0.0 && d.y == 0.0 {
        None
    } else {
        Some(d.y.atan2(d.x))
    };
    (centroid, tilt)
}

pub fn bounding_box(positions: &[Vec2], centroid: Vec2, tilt: f64) -> BoundingBox {
    let (mut x_min, mut x_max, mut d_max) = (0.0f64, 0.0f64, 0.0f64);
    for p in positions {
        let r = rotate_to_frame(p - centroid, tilt);
        if d_max <= r.y.abs() {
            d_max = r.y.abs();
        }
        if x_min >= r.x {
            x_min = r.x;
        }
        if x_max <= r.x {
            x_max = r.x;
        }
    }
    let p_max = x_max.max(x_min.abs());
    BoundingBox {
        l1: 2.0 * p_max,
        l2: 2.0 * d_max,
    }
}

/// Smallest-area ellipse through the corners of a centered `l1 × l2` box,
/// as `(l1/√2, l2/√2)`.
pub fn min_area_axes(bbox: BoundingBox) -> (f64, f64) {
    (bbox.l1 / SQRT_2, bbox.l2 / SQRT_2)
}

/// Axis selection with the minimum-area terms and the feasibility floors.
///
/// `literal_b_term` uses `l1/√2` in the minor-axis maximum instead of `l2/√2`.
pub fn select_axes(
    bbox: BoundingBox,
    env: &SpeedEnvelope,
    omega_max: f64,
    v_a_max: f64,
    literal_b_term: bool,
) -> EllipseAxes {
    let min_turn_radius = v_a_max / omega_max;
    let (a_box, b_box) = min_area_axes(bbox);
    let a = a_box.max(b_box).max(min_turn_radius);
    let box_term = if literal_b_term { a_box } else { b_box };
    let b = box_term
        .max(a * env.min_axis_ratio())
        .max((a * min_turn_radius).sqrt())
        .min(a);
    EllipseAxes::new(a, b).expect("selected axes satisfy a >= b > 0")
}

/// Exponentially smoothed centroid followed by a clamped discrete derivative.
#[derive(Debug, Clone)]
pub struct VelocityFilter {
    alpha: f64,
    smoothed: Option<Vec2>,
}

impl VelocityFilter {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::config("alpha", format!("smoothing factor {alpha} outside (0, 1]")));
        }
        Ok(Self { alpha, smoothed: None })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn update(&mut self, centroid: Vec2, dt: f64, v_t_max: f64) -> Vec2 {
        let Some(prev) = self.smoothed else {
            self.smoothed = Some(centroid);
            return Vec2::zeros();
        };
        // α·c + (1 − α)·prev, written so a still convoy gives exactly zero
        let next = prev + self.alpha * (centroid - prev);
        self.smoothed = Some(next);
        let v = (next - prev) / dt;
        let speed = v.norm();
        if speed > v_t_max {
            v * (v_t_max / speed)
        } else {
            v
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerConfig {
    pub omega_max: f64,
    pub alpha: f64,
    /// First-order smoothing factor for `(a, b, tilt)` between ticks; `None` passes raw values.
    pub shape_smoothing: Option<f64>,
    pub literal_b_term: bool,
}

/// Full per-tick planner pass with its filter state.
#[derive(Debug, Clone)]
pub struct OrbitPlanner {
    config: PlannerConfig,
    envelope: SpeedEnvelope,
    filter: VelocityFilter,
    last: Option<OrbitSpec>,
}

impl OrbitPlanner {
    pub fn new(config: PlannerConfig, envelope: SpeedEnvelope) -> Result<Self> {
        if !(config.omega_max > 0.0) {
            return Err(Error::config("omega_max", "must be positive"));
        }
        if let Some(beta) = config.shape_smoothing {
            if !(beta > 0.0 && beta <= 1.0) {
                return Err(Error::config("shape_smoothing", format!("{beta} outside (0, 1]")));
            }
        }
        Ok(Self {
            filter: VelocityFilter::new(config.alpha)?,
            config,
            envelope,
            last: None,
        })
    }

    pub fn envelope(&self) -> &SpeedEnvelope {
        &self.envelope
    }

    pub fn last(&self) -> Option<&OrbitSpec> {
        self.last.as_ref()
    }

    pub fn plan(&mut self, snapshot: &ConvoySnapshot) -> OrbitSpec {
        let (centroid, tilt) = centroid_and_tilt(&snapshot.positions);
        let tilt = tilt.unwrap_or_else(|| self.last.map_or(0.0, |o| o.tilt));
        let bbox = bounding_box(&snapshot.positions, centroid, tilt);
        let v_a_max = self.envelope.v_a_max;
        let mut axes = select_axes(bbox, &self.envelope, self.config.omega_max, v_a_max, self.config.literal_b_term);
        let mut tilt = wrap_heading(tilt);

        if let (Some(beta), Some(prev)) = (self.config.shape_smoothing, self.last) {
            tilt = wrap_heading(prev.tilt + beta * normalize_angle(tilt - prev.tilt));
            let a = prev.axes.a() + beta * (axes.a() - prev.axes.a());
            let b = prev.axes.b() + beta * (axes.b() - prev.axes.b());
            let min_turn_radius = v_a_max / self.config.omega_max;
            let b = b
                .max(a * self.envelope.min_axis_ratio())
                .max((a * min_turn_radius).sqrt())
                .min(a);
            axes = EllipseAxes::new(a, b).expect("smoothed axes stay ordered");
        }

        let center_velocity = self.filter.update(centroid, snapshot.dt, self.envelope.v_t_max);
        let orbit = OrbitSpec {
            center: centroid,
            tilt,
            axes,
            center_velocity,
        };
        self.last = Some(orbit);
        orbit
    }
}
