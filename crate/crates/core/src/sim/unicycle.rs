use serde::{Deserialize, Serialize};

use crate::geometry::wrap_heading;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    #[default]
    Rk4,
    Euler,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentState {
    pub x: f64,
    pub y: f64,
    /// Heading in `(-π, π]`.
    pub psi: f64,
    pub z: f64,
    pub z_cmd: f64,
    pub v_cmd: f64,
    pub omega_cmd: f64,
}

impl AgentState {
    pub fn at_pose(x: f64, y: f64, psi: f64, z: f64) -> Self {
        Self {
            x,
            y,
            psi: wrap_heading(psi),
            z,
            z_cmd: z,
            v_cmd: 0.0,
            omega_cmd: 0.0,
        }
    }
}

/// Velocity-level command for a quadrotor tracking the unicycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityCommand {
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
    pub omega_z: f64,
}

pub fn velocity_mapping(state: &AgentState, k_z: f64) -> VelocityCommand {
    let (sin, cos) = state.psi.sin_cos();
    VelocityCommand {
        vx: state.v_cmd * cos,
        vy: state.v_cmd * sin,
        vz: k_z * (state.z_cmd - state.z),
        omega_z: state.omega_cmd,
    }
}

/// Advances the planar pose with `(v, omega)` held over `dt`.
pub fn unicycle_step(state: &AgentState, v: f64, omega: f64, dt: f64, integrator: Integrator) -> AgentState {
    let deriv = |psi: f64| (v * psi.cos(), v * psi.sin(), omega);
    let (dx, dy, dpsi) = match integrator {
        Integrator::Euler => {
            let (a, b, c) = deriv(state.psi);
            (a * dt, b * dt, c * dt)
        }
        Integrator::Rk4 => {
            let k1 = deriv(state.psi);
            let k2 = deriv(state.psi + 0.5 * dt * k1.2);
            let k3 = deriv(state.psi + 0.5 * dt * k2.2);
            let k4 = deriv(state.psi + dt * k3.2);
            (
                dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
                dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
                dt * omega,
            )
        }
    };
    AgentState {
        x: state.x + dx,
        y: state.y + dy,
        psi: wrap_heading(state.psi + dpsi),
        v_cmd: v,
        omega_cmd: omega,
        ..*state
    }
}

/// First-order altitude response `ż = k_z (z_cmd − z)` over one step.
pub fn altitude_step(z: f64, z_cmd: f64, k_z: f64, dt: f64, integrator: Integrator) -> f64 {
    let f = |z: f64| k_z * (z_cmd - z);
    match integrator {
        Integrator::Euler => z + dt * f(z),
        Integrator::Rk4 => {
            let k1 = f(z);
            let k2 = f(z + 0.5 * dt * k1);
            let k3 = f(z + 0.5 * dt * k2);
            let k4 = f(z + dt * k3);
            z + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, TAU};

    #[test]
    fn straight_line() {
        let s = AgentState::at_pose(0.0, 0.0, 0.0, 1.0);
        for integ in [Integrator::Euler, Integrator::Rk4] {
            let n = unicycle_step(&s, 1.0, 0.0, 1.0, integ);
            assert_eq!((n.x, n.y, n.psi), (1.0, 0.0, 0.0));
        }
    }

    #[test]
    fn circle_closes_after_one_period() {
        let (v, omega, dt) = (0.8, TAU / 12.5, 0.02);
        let radius = v / omega;
        let mut s = AgentState::at_pose(1.0, 2.0, 0.3, 1.0);
        let start = s;
        let steps = (TAU / omega / dt).round() as usize;
        assert_abs_diff_eq!(steps as f64 * dt, TAU / omega, epsilon = 1e-9);
        let mut max_dev: f64 = 0.0;
        // center of the closed-form circular solution
        let cx = start.x - radius * start.psi.sin();
        let cy = start.y + radius * start.psi.cos();
        for _ in 0..steps {
            s = unicycle_step(&s, v, omega, dt, Integrator::Rk4);
            max_dev = max_dev.max((((s.x - cx).powi(2) + (s.y - cy).powi(2)).sqrt() - radius).abs());
        }
        assert!(((s.x - start.x).powi(2) + (s.y - start.y).powi(2)).sqrt() < 1e-6 * radius);
        assert!(max_dev < 1e-6 * radius);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let (v, w, psi0, t_end) = (1.0f64, 0.7f64, 0.2f64, 10.0f64);
        let run = |dt: f64| {
            let mut s = AgentState::at_pose(0.0, 0.0, psi0, 1.0);
            for _ in 0..(t_end / dt).round() as usize {
                s = unicycle_step(&s, v, w, dt, Integrator::Rk4);
            }
            (s.x, s.y)
        };
        let exact = (
            v / w * ((psi0 + w * t_end).sin() - psi0.sin()),
            -v / w * ((psi0 + w * t_end).cos() - psi0.cos()),
        );
        let err = |p: (f64, f64)| ((p.0 - exact.0).powi(2) + (p.1 - exact.1).powi(2)).sqrt();
        let order = (err(run(0.2)) / err(run(0.1))).log2();
        assert!((3.5..4.5).contains(&order), "observed order {order}");
    }

    #[test]
    fn altitude_first_order_response() {
        let (k_z, dt) = (1.0, 0.02);
        let mut z = 0.5;
        for k in 1..=500 {
            z = altitude_step(z, 1.0, k_z, dt, Integrator::Rk4);
            let t = k as f64 * dt;
            let exact = 1.0 - 0.5 * (-k_z * t).exp();
            assert_abs_diff_eq!(z, exact, epsilon = 1e-6);
        }
        assert_eq!(altitude_step(1.0, 1.0, 2.0, dt, Integrator::Rk4), 1.0);
    }

    #[test]
    fn velocity_mapping_examples() {
        let mut s = AgentState::at_pose(0.0, 0.0, FRAC_PI_2, 0.7);
        s.v_cmd = 1.0;
        s.omega_cmd = 0.3;
        let c = velocity_mapping(&s, 1.5);
        assert_abs_diff_eq!(c.vx, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.vy, 1.0, epsilon = 1e-15);
        assert_eq!(c.vz, 0.0);
        assert_eq!(c.omega_z, 0.3);
        s.z_cmd = 1.0;
        assert_abs_diff_eq!(velocity_mapping(&s, 2.0).vz, 0.6, epsilon = 1e-15);
    }
}
