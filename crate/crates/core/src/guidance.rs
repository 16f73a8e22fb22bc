//! Vector-field guidance: desired heading from the orbit-frame position, and
//! the saturated turn-rate command that tracks it.

use serde::{Deserialize, Serialize};

use crate::geometry::{normalize_angle, Direction, EllipseAxes, OrbitCoords};

/// Offset-term variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuidanceLaw {
    /// Offset gain scaled by the local curvature `κ(s_A)`.
    #[default]
    CurvatureWeighted,
    /// Legacy law with a constant offset gain.
    ConstantGain,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceGains {
    pub k_gamma: f64,
    pub k_psi: f64,
    pub omega_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadingCommand {
    /// Tangent to the concentric ellipse through the agent (orbit frame).
    pub psi_t: f64,
    /// Convergence offset, inside `(-π/2, π/2)`.
    pub psi_o: f64,
    /// `psi_t + psi_o`, not wrapped.
    pub psi_d: f64,
}

pub fn heading_command(
    coords: &OrbitCoords,
    axes: &EllipseAxes,
    dir: Direction,
    gains: &GuidanceGains,
    law: GuidanceLaw,
) -> HeadingCommand {
    let dc = dir.sign();
    let (a, b) = (axes.a(), axes.b());
    let psi_t = (dc * b * b * coords.x).atan2(-dc * a * a * coords.y);
    let weight = match law {
        GuidanceLaw::CurvatureWeighted => axes.curvature(coords.s),
        GuidanceLaw::ConstantGain => 1.0,
    };
    let psi_o = dc * (gains.k_gamma * weight * (coords.gamma - 1.0)).atan();
    HeadingCommand {
        psi_t,
        psi_o,
        psi_d: psi_t + psi_o,
    }
}

/// Proportional heading tracker; the heading error is wrapped before the gain
/// and the result is clamped to `±omega_max`.
pub fn angular_rate_command(psi_d: f64, psi_global: f64, orbit_tilt: f64, gains: &GuidanceGains) -> f64 {
    let psi_frame = psi_global - orbit_tilt;
    let err = normalize_angle(psi_d - psi_frame);
    (gains.k_psi * err).clamp(-gains.omega_max, gains.omega_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{coords_in_frame, Vec2};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    const CCW: Direction = Direction::CounterClockwise;
    const CW: Direction = Direction::Clockwise;

    fn gains(k_gamma: f64) -> GuidanceGains {
        GuidanceGains {
            k_gamma,
            k_psi: 1.0,
            omega_max: 1.5,
        }
    }

    #[test]
    fn tangent_at_major_vertex() {
        let ax = EllipseAxes::new(2.0, 1.0).unwrap();
        let c = coords_in_frame(Vec2::new(2.0, 0.0), &ax, CCW);
        let h = heading_command(&c, &ax, CCW, &gains(3.0), GuidanceLaw::CurvatureWeighted);
        assert_abs_diff_eq!(h.psi_t, FRAC_PI_2, epsilon = 1e-15);
        assert_eq!(h.psi_o, 0.0);
        assert_abs_diff_eq!(h.psi_d, FRAC_PI_2, epsilon = 1e-15);
    }

    #[test]
    fn offset_saturates_far_away() {
        let ax = EllipseAxes::new(2.0, 1.0).unwrap();
        let c = coords_in_frame(Vec2::new(1e9, 1e9), &ax, CCW);
        let h = heading_command(&c, &ax, CCW, &gains(1.0), GuidanceLaw::ConstantGain);
        assert_abs_diff_eq!(h.psi_o, FRAC_PI_2, epsilon = 1e-9);
        let c = coords_in_frame(Vec2::new(1e9, 1e9), &ax, CW);
        let h = heading_command(&c, &ax, CW, &gains(1.0), GuidanceLaw::ConstantGain);
        assert_abs_diff_eq!(h.psi_o, -FRAC_PI_2, epsilon = 1e-9);
    }

    #[test]
    fn curvature_weighted_offset_value() {
        let ax = EllipseAxes::new(2.5, 1.0).unwrap();
        let kappa = 2.5 * 1.0 / 2.5f64.powi(3);
        assert_abs_diff_eq!(kappa, 0.16, epsilon = 1e-15);
        let c = coords_in_frame(ax.point(FRAC_PI_2, 2.0), &ax, CCW);
        let h = heading_command(&c, &ax, CCW, &gains(12.5), GuidanceLaw::CurvatureWeighted);
        assert_abs_diff_eq!(h.psi_o, (12.5 * kappa * 1.0f64).atan(), epsilon = 1e-12);
        assert_abs_diff_eq!(h.psi_o, 2f64.atan(), epsilon = 1e-12);
    }

    #[test]
    fn rate_examples() {
        let g = GuidanceGains {
            k_gamma: 1.0,
            k_psi: 1.5,
            omega_max: 1.5,
        };
        assert_eq!(angular_rate_command(0.7 - 0.2, 0.7, 0.2, &g), 0.0);
        assert_eq!(angular_rate_command(3.0, 0.0, 0.0, &g), 1.5);

        let g = GuidanceGains {
            k_gamma: 1.0,
            k_psi: 1.0,
            omega_max: 10.0,
        };
        let w = angular_rate_command(3.0, -3.0, 0.0, &g);
        assert_abs_diff_eq!(w, 6.0 - TAU, epsilon = 1e-12);
        assert_abs_diff_eq!(w, -0.28318530717958623, epsilon = 1e-12);
    }

    #[test]
    fn weighted_and_constant_agree_at_low_curvature() {
        let ax = EllipseAxes::new(2.5, 1.0).unwrap();
        let kappa_min = ax.extrema(1.0).kappa_min;
        for gamma in [0.2, 0.9, 1.3, 4.0] {
            let c = coords_in_frame(ax.point(FRAC_PI_2, gamma), &ax, CCW);
            let constant = heading_command(&c, &ax, CCW, &gains(2.0), GuidanceLaw::ConstantGain);
            let weighted = heading_command(&c, &ax, CCW, &gains(2.0 / kappa_min), GuidanceLaw::CurvatureWeighted);
            assert_abs_diff_eq!(constant.psi_o, weighted.psi_o, epsilon = 1e-12);
        }
    }

    proptest! {
        #[test]
        fn on_orbit_has_no_offset(s in 0.0..TAU, a in 0.5..5.0f64, r in 0.2..1.0f64, cw in any::<bool>()) {
            let ax = EllipseAxes::new(a, a * r).unwrap();
            let dir = if cw { CW } else { CCW };
            let mut c = coords_in_frame(ax.point(s, 1.0), &ax, dir);
            c.gamma = 1.0;
            let h = heading_command(&c, &ax, dir, &gains(20.0), GuidanceLaw::CurvatureWeighted);
            prop_assert_eq!(h.psi_o, 0.0);
            prop_assert_eq!(h.psi_d, h.psi_t);
        }

        #[test]
        fn offset_sign(s in 0.0..TAU, g in 0.01..5.0f64, cw in any::<bool>()) {
            prop_assume!((g - 1.0).abs() > 1e-9);
            let ax = EllipseAxes::new(2.0, 1.2).unwrap();
            let dir = if cw { CW } else { CCW };
            let c = coords_in_frame(ax.point(s, g), &ax, dir);
            let h = heading_command(&c, &ax, dir, &gains(5.0), GuidanceLaw::CurvatureWeighted);
            prop_assert_eq!(h.psi_o.signum(), dir.sign() * (c.gamma - 1.0).signum());
            prop_assert!(h.psi_o.abs() < FRAC_PI_2);
        }

        #[test]
        fn rate_is_saturated(d in -50.0..50.0f64, p in -50.0..50.0f64, t in -PI..PI, k in 0.01..100.0f64, w in 0.01..5.0f64) {
            let g = GuidanceGains { k_gamma: 1.0, k_psi: k, omega_max: w };
            prop_assert!(angular_rate_command(d, p, t, &g).abs() <= w);
        }

        #[test]
        fn curvature_sharpens_offset(dg in prop_oneof![-0.9..-0.01f64, 0.01..3.0f64], a in 1.1..5.0f64) {
            let ax = EllipseAxes::new(a, 1.0).unwrap();
            let g = gains(2.0);
            let mut at_vertex = coords_in_frame(ax.point(0.0, 1.0 + dg), &ax, CCW);
            at_vertex.gamma = 1.0 + dg;
            let mut at_side = coords_in_frame(ax.point(FRAC_PI_2, 1.0 + dg), &ax, CCW);
            at_side.gamma = 1.0 + dg;
            let hv = heading_command(&at_vertex, &ax, CCW, &g, GuidanceLaw::CurvatureWeighted);
            let hs = heading_command(&at_side, &ax, CCW, &g, GuidanceLaw::CurvatureWeighted);
            prop_assert!(hv.psi_o.abs() > hs.psi_o.abs());
        }
    }
}
