//! Scripted ground convoy: vehicles trail each other at a fixed arc-length
//! gap along a path, the lead vehicle (index `N_T`) in front.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PathShape {
    /// Circle of the given radius centered at `center`.
    Arc {
        radius: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    /// `(amp_x sin(freq_x u + phase), amp_y sin(freq_y u))`, `u ∈ [0, 2π)`.
    Lissajous {
        amp_x: f64,
        amp_y: f64,
        freq_x: u32,
        freq_y: u32,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    /// Piecewise-linear route; corners are taken as instantaneous turns.
    Waypoints {
        points: Vec<[f64; 2]>,
        #[serde(default)]
        closed: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpeedProfile {
    Stationary,
    Constant {
        speed: f64,
    },
    /// `v(t) = v_t_max (1 - (1 - min_fraction) sin²(π t / period))`.
    TimeVarying {
        min_fraction: f64,
        period: f64,
    },
}

/// Arc-length parametrized polyline.
#[derive(Debug, Clone)]
struct Polyline {
    points: Vec<Vec2>,
    cumulative: Vec<f64>,
    closed: bool,
}

impl Polyline {
    fn new(mut points: Vec<Vec2>, closed: bool) -> Result<Self> {
        points.dedup();
        if closed && points.len() > 1 && points.first() == points.last() {
            points.pop();
        }
        if points.len() < 2 {
            return Err(Error::config("convoy_path", "path needs at least two distinct points"));
        }
        if closed {
            points.push(points[0]);
        }
        let mut cumulative = Vec::with_capacity(points.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in points.windows(2) {
            acc += (w[1] - w[0]).norm();
            cumulative.push(acc);
        }
        Ok(Self {
            points,
            cumulative,
            closed,
        })
    }

    fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    fn point_at(&self, arc: f64) -> Vec2 {
        let len = self.length();
        let arc = if self.closed { arc.rem_euclid(len) } else { arc };
        if arc <= 0.0 {
            let dir = (self.points[1] - self.points[0]) / self.cumulative[1];
            return self.points[0] + dir * arc;
        }
        if arc >= len {
            return *self.points.last().unwrap();
        }
        let seg = match self.cumulative.binary_search_by(|c| c.partial_cmp(&arc).unwrap()) {
            Ok(i) => return self.points[i],
            Err(i) => i - 1,
        };
        let (s0, s1) = (self.cumulative[seg], self.cumulative[seg + 1]);
        let u = (arc - s0) / (s1 - s0);
        self.points[seg] + (self.points[seg + 1] - self.points[seg]) * u
    }
}

const CURVE_SAMPLES: usize = 20_000;

impl PathShape {
    fn to_polyline(&self) -> Result<Polyline> {
        match self {
            PathShape::Arc { radius, center } => {
                if !(*radius > 0.0) {
                    return Err(Error::config("convoy_path.radius", "must be positive"));
                }
                let c = Vec2::new(center[0], center[1]);
                let pts = (0..CURVE_SAMPLES)
                    .map(|k| {
                        let u = TAU * k as f64 / CURVE_SAMPLES as f64;
                        c + Vec2::new(radius * u.cos(), radius * u.sin())
                    })
                    .collect();
                Polyline::new(pts, true)
            }
            PathShape::Lissajous {
                amp_x,
                amp_y,
                freq_x,
                freq_y,
                phase,
                center,
            } => {
                if !(*amp_x > 0.0 && *amp_y > 0.0) || *freq_x == 0 || *freq_y == 0 {
                    return Err(Error::config("convoy_path", "lissajous needs positive amplitudes and frequencies"));
                }
                let c = Vec2::new(center[0], center[1]);
                let pts = (0..CURVE_SAMPLES)
                    .map(|k| {
                        let u = TAU * k as f64 / CURVE_SAMPLES as f64;
                        c + Vec2::new(
                            amp_x * (*freq_x as f64 * u + phase).sin(),
                            amp_y * (*freq_y as f64 * u).sin(),
                        )
                    })
                    .collect();
                Polyline::new(pts, true)
            }
            PathShape::Waypoints { points, closed } => {
                if points.is_empty() {
                    return Err(Error::config("convoy_path.points", "waypoint list is empty"));
                }
                Polyline::new(points.iter().map(|p| Vec2::new(p[0], p[1])).collect(), *closed)
            }
        }
    }
}

impl SpeedProfile {
    fn validate(&self, v_t_max: f64) -> Result<()> {
        match *self {
            SpeedProfile::Stationary => Ok(()),
            SpeedProfile::Constant { speed } => {
                if !(speed > 0.0 && speed <= v_t_max) {
                    return Err(Error::config("convoy_speed_profile.speed", format!("{speed} outside (0, v_t_max={v_t_max}]")));
                }
                Ok(())
            }
            SpeedProfile::TimeVarying { min_fraction, period } => {
                if !(v_t_max > 0.0) {
                    return Err(Error::config("v_t_max", "time-varying convoy needs v_t_max > 0"));
                }
                if !(0.0..=1.0).contains(&min_fraction) {
                    return Err(Error::config("convoy_speed_profile.min_fraction", "must lie in [0, 1]"));
                }
                if !(period > 0.0) {
                    return Err(Error::config("convoy_speed_profile.period", "must be positive"));
                }
                Ok(())
            }
        }
    }

    /// Distance travelled by the lead vehicle after `t` seconds.
    fn distance(&self, t: f64, v_t_max: f64) -> f64 {
        match *self {
            SpeedProfile::Stationary => 0.0,
            SpeedProfile::Constant { speed } => speed * t,
            SpeedProfile::TimeVarying { min_fraction, period } => {
                let depth = 1.0 - min_fraction;
                v_t_max * (t - depth * (t / 2.0 - period / (4.0 * PI) * (TAU * t / period).sin()))
            }
        }
    }

    pub fn speed(&self, t: f64, v_t_max: f64) -> f64 {
        match *self {
            SpeedProfile::Stationary => 0.0,
            SpeedProfile::Constant { speed } => speed,
            SpeedProfile::TimeVarying { min_fraction, period } => {
                let s = (PI * t / period).sin();
                v_t_max * (1.0 - (1.0 - min_fraction) * s * s)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConvoyModel {
    path: Polyline,
    shape: PathShape,
    profile: SpeedProfile,
    n_vehicles: usize,
    spacing: f64,
    start: f64,
    v_t_max: f64,
}

impl ConvoyModel {
    /// `start` is the lead vehicle's arc-length position at `t = 0`.
    pub fn new(
        shape: PathShape,
        profile: SpeedProfile,
        n_vehicles: usize,
        spacing: f64,
        start: f64,
        v_t_max: f64,
    ) -> Result<Self> {
        if n_vehicles < 2 {
            return Err(Error::config("n_t", "convoy needs at least two vehicles"));
        }
        if !(spacing > 0.0) {
            return Err(Error::config("convoy_spacing", "must be positive"));
        }
        profile.validate(v_t_max)?;
        Ok(Self {
            path: shape.to_polyline()?,
            shape,
            profile,
            n_vehicles,
            spacing,
            start,
            v_t_max,
        })
    }

    pub fn n_vehicles(&self) -> usize {
        self.n_vehicles
    }

    pub fn shape(&self) -> &PathShape {
        &self.shape
    }

    pub fn path_length(&self) -> f64 {
        self.path.length()
    }

    /// Vehicle positions in index order `1..=N_T`.
    pub fn positions(&self, t: f64) -> Vec<Vec2> {
        let lead = self.start + self.profile.distance(t, self.v_t_max);
        (1..=self.n_vehicles)
            .map(|i| self.path.point_at(lead - (self.n_vehicles - i) as f64 * self.spacing))
            .collect()
    }

    pub fn point_on_path(&self, arc: f64) -> Vec2 {
        self.path.point_at(arc)
    }
}
