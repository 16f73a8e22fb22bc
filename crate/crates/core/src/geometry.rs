//! Ellipse mathematics used by the planner, guidance and speed laws.
//!
//! Every orbit is described in its own frame: translated to the ellipse
//! center and rotated by the tilt angle. Points are located on the family of
//! concentric ellipses `x²/a² + y²/b² = γ` through the pair `(s, γ)`.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec2 = Vector2<f64>;

/// Wraps an angle into `[-π, π]`.
pub fn normalize_angle(x: f64) -> f64 {
    (x + PI).rem_euclid(TAU) - PI
}

/// Wraps an angle into `(-π, π]`, the convention used for headings and tilt.
pub fn wrap_heading(x: f64) -> f64 {
    let r = normalize_angle(x);
    if r <= -PI {
        PI
    } else {
        r
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_positive(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Expresses `p` in a frame rotated by `theta` (the transpose of the usual
/// active rotation).
pub fn rotate_to_frame(p: Vec2, theta: f64) -> Vec2 {
    let (sin, cos) = theta.sin_cos();
    Vec2::new(cos * p.x + sin * p.y, -sin * p.x + cos * p.y)
}

/// Semi-axes of an ellipse, `a ≥ b > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipseAxes {
    a: f64,
    b: f64,
}

impl EllipseAxes {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b <= 0.0 || a < b {
            return Err(Error::InvalidAxes { a, b });
        }
        Ok(Self { a, b })
    }

    pub fn circle(r: f64) -> Result<Self> {
        Self::new(r, r)
    }

    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }

    #[inline]
    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn area(&self) -> f64 {
        PI * self.a * self.b
    }

    /// Level of the concentric ellipse passing through `p` (orbit frame).
    pub fn level(&self, p: Vec2) -> f64 {
        p.x * p.x / (self.a * self.a) + p.y * p.y / (self.b * self.b)
    }

    /// Point on the concentric ellipse of level `gamma` at parameter `s`.
    pub fn point(&self, s: f64, gamma: f64) -> Vec2 {
        let r = gamma.sqrt();
        Vec2::new(self.a * r * s.cos(), self.b * r * s.sin())
    }

    /// `G(s) = √(a² sin²s + b² cos²s)`, the factor converting parametric
    /// rate into linear speed on the unit-level ellipse.
    pub fn speed_factor(&self, s: f64) -> f64 {
        let (sin, cos) = s.sin_cos();
        (self.a * self.a * sin * sin + self.b * self.b * cos * cos).sqrt()
    }

    /// `G(s)` and its derivative with respect to `s`.
    pub fn speed_factor_with_derivative(&self, s: f64) -> (f64, f64) {
        let g = self.speed_factor(s);
        let dg = (self.a * self.a - self.b * self.b) * (2.0 * s).sin() / (2.0 * g);
        (g, dg)
    }

    pub fn curvature(&self, s: f64) -> f64 {
        let g = self.speed_factor(s);
        self.a * self.b / (g * g * g)
    }

    pub fn radius_of_curvature(&self, s: f64) -> f64 {
        let g = self.speed_factor(s);
        g * g * g / (self.a * self.b)
    }

    pub fn extrema(&self, parametric_rate: f64) -> Extrema {
        let (a, b) = (self.a, self.b);
        Extrema {
            v_min: b * parametric_rate,
            v_max: a * parametric_rate,
            r_min: b * b / a,
            r_max: a * a / b,
            kappa_min: b / (a * a),
            kappa_max: a / (b * b),
        }
    }

    /// Perimeter of the unit-level ellipse by composite Simpson quadrature of `G`.
    pub fn perimeter(&self) -> f64 {
        const N: usize = 4096;
        let h = TAU / N as f64;
        let mut acc = self.speed_factor(0.0) + self.speed_factor(TAU);
        for k in 1..N {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * self.speed_factor(k as f64 * h);
        }
        acc * h / 3.0
    }
}

/// Closed-form extrema for a point moving at a constant parametric rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrema {
    pub v_min: f64,
    pub v_max: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub kappa_min: f64,
    pub kappa_max: f64,
}

/// Direction of travel along the orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Clockwise,
    CounterClockwise,
}

impl Direction {
    pub fn from_sign(d_c: i64) -> Result<Self> {
        match d_c {
            1 => Ok(Direction::CounterClockwise),
            -1 => Ok(Direction::Clockwise),
            other => Err(Error::InvalidDirection(other)),
        }
    }

    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Direction::Clockwise => -1.0,
            Direction::CounterClockwise => 1.0,
        }
    }
}

/// A (possibly moving) elliptical orbit in the global frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitSpec {
    pub center: Vec2,
    /// Tilt of the major axis, kept in `(-π, π]`.
    pub tilt: f64,
    pub axes: EllipseAxes,
    pub center_velocity: Vec2,
}

impl OrbitSpec {
    pub fn stationary(center: Vec2, tilt: f64, axes: EllipseAxes) -> Self {
        Self {
            center,
            tilt: wrap_heading(tilt),
            axes,
            center_velocity: Vec2::zeros(),
        }
    }

    /// Orbit-frame point to global coordinates.
    pub fn to_global(&self, p: Vec2) -> Vec2 {
        self.center + rotate_to_frame(p, -self.tilt)
    }

    pub fn to_frame(&self, p: Vec2) -> Vec2 {
        rotate_to_frame(p - self.center, self.tilt)
    }
}

/// An agent position re-expressed relative to an orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitCoords {
    pub x: f64,
    pub y: f64,
    /// Polar angle in the orbit frame.
    pub theta: f64,
    /// Ellipse parameter in `[0, 2π)`, increasing along the direction of travel.
    pub s: f64,
    /// Concentric level, 1 on the orbit.
    pub gamma: f64,
}

pub fn orbit_coords(p_global: Vec2, orbit: &OrbitSpec, dir: Direction) -> OrbitCoords {
    let local = orbit.to_frame(p_global);
    coords_in_frame(local, &orbit.axes, dir)
}

pub fn coords_in_frame(local: Vec2, axes: &EllipseAxes, dir: Direction) -> OrbitCoords {
    let theta = if local.x == 0.0 && local.y == 0.0 {
        0.0
    } else {
        local.y.atan2(local.x)
    };
    let s = wrap_positive(dir.sign() * (axes.a() * theta.sin()).atan2(axes.b() * theta.cos()));
    OrbitCoords {
        x: local.x,
        y: local.y,
        theta,
        s,
        gamma: axes.level(local),
    }
}
