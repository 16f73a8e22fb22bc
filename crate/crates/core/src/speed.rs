//! Linear speed command: nominal equi-parametric profile, cooperative
//! correction and orbit-motion compensation, saturated to the agent bounds.

use crate::error::{Error, Result};
use crate::geometry::{EllipseAxes, Vec2};

/// Speed bands derived from the agent and convoy limits.
///
/// `[v_r_min, v_r_max]` is what remains for the orbit-frame speed after the
/// worst-case compensation; the nominal profile lives in the centered
/// sub-band `[v_e_min, v_e_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedEnvelope {
    pub v_a_min: f64,
    pub v_a_max: f64,
    pub v_t_max: f64,
    pub delta: f64,
    pub v_r_min: f64,
    pub v_r_max: f64,
    pub v_e_min: f64,
    pub v_e_max: f64,
}

impl SpeedEnvelope {
    pub fn build(v_a_min: f64, v_a_max: f64, v_t_max: f64, delta: f64) -> Result<Self> {
        check_speed_assumption(v_a_min, v_a_max, v_t_max)?;
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::InvalidDelta(delta));
        }
        let v_r_max = v_a_max - v_t_max;
        let v_r_min = v_a_min + v_t_max;
        Ok(Self {
            v_a_min,
            v_a_max,
            v_t_max,
            delta,
            v_r_min,
            v_r_max,
            v_e_min: (1.0 - delta) * v_r_max / 2.0 + (1.0 + delta) * v_r_min / 2.0,
            v_e_max: (1.0 + delta) * v_r_max / 2.0 + (1.0 - delta) * v_r_min / 2.0,
        })
    }

    /// Smallest admissible `b/a` for the nominal profile to stay in band.
    pub fn min_axis_ratio(&self) -> f64 {
        self.v_e_min / self.v_e_max
    }
}

pub fn check_speed_assumption(v_a_min: f64, v_a_max: f64, v_t_max: f64) -> Result<()> {
    let ok = [v_a_min, v_a_max, v_t_max].iter().all(|v| v.is_finite())
        && v_t_max >= 0.0
        && v_t_max < v_a_min
        && v_a_min < v_a_max - 2.0 * v_t_max;
    if ok {
        Ok(())
    } else {
        Err(Error::SpeedAssumption {
            v_a_min,
            v_a_max,
            v_t_max,
        })
    }
}

/// Constant parametric rate whose induced speed range is centered in the
/// nominal band.
pub fn parametric_rate(env: &SpeedEnvelope, axes: &EllipseAxes, gamma: f64) -> f64 {
    (env.v_e_min + env.v_e_max) / ((axes.a() + axes.b()) * gamma.sqrt())
}

/// [`parametric_rate`] with the axis-ratio precondition enforced.
pub fn checked_parametric_rate(env: &SpeedEnvelope, axes: &EllipseAxes, gamma: f64) -> Result<f64> {
    let ratio = axes.b() / axes.a();
    let required = env.min_axis_ratio();
    // planner output sits exactly on the bound when that constraint is active
    if ratio < required * (1.0 - 1e-12) {
        return Err(Error::AxisRatio { ratio, required });
    }
    Ok(parametric_rate(env, axes, gamma))
}

/// Linear speed that realizes the parametric rate `s_v` at `(s, γ)`.
pub fn nominal_speed(s: f64, gamma: f64, axes: &EllipseAxes, s_v: f64) -> f64 {
    gamma.sqrt() * axes.speed_factor(s) * s_v
}

/// Adds the orbit-center velocity to the orbit-frame speed along the current
/// heading and saturates the magnitude.
///
/// A negative along-heading speed is floored at zero first. Taking the norm
/// of a reversed vector would turn a request to slow down into a speed-up.
pub fn compose_speed(v_nominal: f64, v_correction: f64, psi_global: f64, center_velocity: Vec2, env: &SpeedEnvelope) -> f64 {
    let v_frame = (v_nominal + v_correction).max(0.0);
    let (sin, cos) = psi_global.sin_cos();
    let vx = v_frame * cos + center_velocity.x;
    let vy = v_frame * sin + center_velocity.y;
    vx.hypot(vy).clamp(env.v_a_min, env.v_a_max)
}
