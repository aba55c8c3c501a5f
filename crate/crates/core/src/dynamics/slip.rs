//! Spring-loaded inverted pendulum stepping map on the apex Poincare
//! section.
//!
//! The full planar state [x, y, vx, vy] is integrated through one step cycle
//! (flight, stance, flight), with touchdown, liftoff, fall, reversal, and
//! apex located as zero-crossing events. The apex state is the single scalar
//! s = E_pot / (E_pot + E_kin) in (0, 1]; the action is the landing angle of
//! the leg measured from vertical. Total energy is fixed per instance, which
//! makes the apex state a complete description.

use crate::error::DynamicsError;
use crate::ode::{integrate_until_event, AdaptiveOptions, Direction, Event, Stopped};

use super::{Dynamics, TransitionOutcome};

/// SLIP model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SlipParams {
    /// Gravitational acceleration [m/s^2].
    pub gravity: f64,
    /// Body mass [kg].
    pub mass: f64,
    /// Spring stiffness [N/m].
    pub stiffness: f64,
    /// Spring resting length [m].
    pub resting_length: f64,
}

impl Default for SlipParams {
    fn default() -> Self {
        Self { gravity: 9.81, mass: 80.0, stiffness: 8200.0, resting_length: 1.0 }
    }
}

impl SlipParams {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let all = [self.gravity, self.mass, self.stiffness, self.resting_length];
        if all.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(DynamicsError::InvalidParams(
                "SLIP parameters must be finite and positive".into(),
            ));
        }
        Ok(())
    }
}

/// Why a SLIP step failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    /// The leg tip would start below ground at apex; the pair has no
    /// physical meaning.
    Infeasible,
    /// The body hit the ground during stance.
    Fell,
    /// Horizontal motion stopped or reversed.
    Reversed,
    /// Liftoff happened with downward velocity, so no apex exists.
    NoAscent,
}

/// Full result of one apex-to-apex step.
#[derive(Debug, Clone)]
pub struct SlipStep {
    pub outcome: TransitionOutcome,
    pub failure: Option<FailureKind>,
    /// Apex height and forward velocity for non-failed steps.
    pub apex: Option<(f64, f64)>,
    /// Total mechanical energy at the next apex for non-failed steps.
    pub energy: Option<f64>,
}

/// Apex-to-apex stepping map at fixed total energy.
#[derive(Debug, Clone)]
pub struct Slip {
    params: SlipParams,
    total_energy: f64,
    ode: AdaptiveOptions,
}

impl Slip {
    pub fn new(params: SlipParams, total_energy: f64) -> Result<Self, DynamicsError> {
        params.validate()?;
        if !total_energy.is_finite() || total_energy <= 0.0 {
            return Err(DynamicsError::InvalidParams(
                "total energy must be finite and positive".into(),
            ));
        }
        Ok(Self { params, total_energy, ode: AdaptiveOptions::default() })
    }

    pub fn params(&self) -> &SlipParams {
        &self.params
    }

    pub fn total_energy(&self) -> f64 {
        self.total_energy
    }

    /// Apex height and forward velocity encoded by the normalized state.
    pub fn apex_from_state(&self, s: f64) -> Result<(f64, f64), DynamicsError> {
        if !s.is_finite() || s <= 0.0 || s > 1.0 {
            return Err(DynamicsError::InvalidState(format!(
                "normalized apex state {s} outside (0, 1]"
            )));
        }
        let p = &self.params;
        let y = s * self.total_energy / (p.mass * p.gravity);
        let vx = (2.0 * (1.0 - s) * self.total_energy / p.mass).sqrt();
        Ok((y, vx))
    }

    /// Normalized apex state of a raw apex (height, forward velocity).
    pub fn state_from_apex(&self, y: f64, vx: f64) -> f64 {
        let g = self.params.gravity;
        g * y / (vx * vx / 2.0 + g * y)
    }

    /// Total mechanical energy of a flight-phase state.
    pub fn flight_energy(&self, y: f64, vx: f64, vy: f64) -> f64 {
        let p = &self.params;
        p.mass * p.gravity * y + 0.5 * p.mass * (vx * vx + vy * vy)
    }

    /// Step with full diagnostics.
    pub fn step_detailed(&self, s: f64, alpha: f64) -> Result<SlipStep, DynamicsError> {
        if !alpha.is_finite() || alpha.abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(DynamicsError::InvalidAction(format!(
                "landing angle {alpha} outside (-pi/2, pi/2)"
            )));
        }
        let (y0, vx0) = self.apex_from_state(s)?;
        let p = self.params.clone();
        let l0 = p.resting_length;
        let touchdown_height = l0 * alpha.cos();

        if y0 <= touchdown_height {
            return Ok(SlipStep {
                outcome: TransitionOutcome::failure(vec![s]),
                failure: Some(FailureKind::Infeasible),
                apex: None,
                energy: None,
            });
        }

        // descent: ballistic until the leg tip reaches the ground
        let g = p.gravity;
        let flight = move |_t: f64, y: &[f64; 4]| [y[2], y[3], 0.0, -g];
        let td_event = Event {
            label: "touchdown",
            f: &|_t, y: &[f64; 4]| y[1] - touchdown_height,
            direction: Direction::Falling,
            requires_arming: false,
        };
        let t_max = (2.0 * y0 / g).sqrt() + 1.0;
        let td = match integrate_until_event(
            &flight,
            0.0,
            &[0.0, y0, vx0, 0.0],
            t_max,
            &[td_event],
            &self.ode,
        )? {
            Stopped::Event(hit) => hit,
            Stopped::TimeLimit { .. } => {
                return Err(crate::error::IntegratorError::EventNotFound {
                    label: "touchdown",
                    t_end: t_max,
                }
                .into())
            }
        };

        // stance: spring leg anchored at the touchdown foot position
        let foot_x = td.y[0] + l0 * alpha.sin();
        let k_over_m = p.stiffness / p.mass;
        let stance = move |_t: f64, y: &[f64; 4]| {
            let dx = y[0] - foot_x;
            let dy = y[1];
            let l = dx.hypot(dy);
            let theta = dy.atan2(dx) - std::f64::consts::FRAC_PI_2;
            let accel = k_over_m * (l0 - l);
            [y[2], y[3], -accel * theta.sin(), accel * theta.cos() - g]
        };
        let liftoff = Event {
            label: "liftoff",
            f: &|_t, y: &[f64; 4]| (y[0] - foot_x).hypot(y[1]) - l0,
            direction: Direction::Rising,
            requires_arming: true,
        };
        let fell = Event {
            label: "fell",
            f: &|_t, y: &[f64; 4]| y[1],
            direction: Direction::Falling,
            requires_arming: false,
        };
        let reversed = Event {
            label: "reversed",
            f: &|_t, y: &[f64; 4]| y[2],
            direction: Direction::Falling,
            requires_arming: false,
        };
        let stance_t_max = 20.0 * std::f64::consts::PI * (p.mass / p.stiffness).sqrt();
        let stance_hit = match integrate_until_event(
            &stance,
            0.0,
            &td.y,
            stance_t_max,
            &[fell, reversed, liftoff],
            &self.ode,
        )? {
            Stopped::Event(hit) => hit,
            Stopped::TimeLimit { .. } => {
                return Err(crate::error::IntegratorError::EventNotFound {
                    label: "liftoff",
                    t_end: stance_t_max,
                }
                .into())
            }
        };
        match stance_hit.index {
            0 => {
                return Ok(SlipStep {
                    outcome: TransitionOutcome::failure(vec![0.0]),
                    failure: Some(FailureKind::Fell),
                    apex: None,
                    energy: None,
                })
            }
            1 => {
                return Ok(SlipStep {
                    outcome: TransitionOutcome::failure(vec![1.0]),
                    failure: Some(FailureKind::Reversed),
                    apex: None,
                    energy: None,
                })
            }
            _ => {}
        }
        let lo = stance_hit.y;
        if lo[3] <= 0.0 {
            return Ok(SlipStep {
                outcome: TransitionOutcome::failure(vec![self.state_from_apex(lo[1], lo[2])]),
                failure: Some(FailureKind::NoAscent),
                apex: None,
                energy: None,
            });
        }

        // ascent: ballistic until vertical velocity crosses zero
        let apex_event = Event {
            label: "apex",
            f: &|_t, y: &[f64; 4]| y[3],
            direction: Direction::Falling,
            requires_arming: false,
        };
        let t_max = 2.0 * lo[3] / g + 1.0;
        let apex = match integrate_until_event(&flight, 0.0, &lo, t_max, &[apex_event], &self.ode)?
        {
            Stopped::Event(hit) => hit,
            Stopped::TimeLimit { .. } => {
                return Err(crate::error::IntegratorError::EventNotFound {
                    label: "apex",
                    t_end: t_max,
                }
                .into())
            }
        };
        let (y_apex, vx_apex) = (apex.y[1], apex.y[2]);
        Ok(SlipStep {
            outcome: TransitionOutcome::ok(vec![self.state_from_apex(y_apex, vx_apex)]),
            failure: None,
            apex: Some((y_apex, vx_apex)),
            energy: Some(self.flight_energy(y_apex, vx_apex, apex.y[3])),
        })
    }

    /// Search for a period-one fixed point of the stepping map at a fixed
    /// landing angle: an apex state mapped back onto itself. Scans
    /// [s_lo, s_hi] for a sign change of step(s) - s, then bisects.
    pub fn find_limit_cycle(&self, alpha: f64, s_lo: f64, s_hi: f64) -> Option<f64> {
        let residual = |s: f64| -> Option<f64> {
            let step = self.step_detailed(s, alpha).ok()?;
            if step.outcome.failed {
                return None;
            }
            Some(step.outcome.next_state[0] - s)
        };
        let scan = 40;
        let mut prev: Option<(f64, f64)> = None;
        for i in 0..=scan {
            let s = s_lo + (s_hi - s_lo) * i as f64 / scan as f64;
            let Some(r) = residual(s) else {
                prev = None;
                continue;
            };
            if let Some((sp, rp)) = prev {
                if rp.signum() != r.signum() {
                    // bisect [sp, s]
                    let (mut a, mut ra, mut b) = (sp, rp, s);
                    for _ in 0..80 {
                        let mid = 0.5 * (a + b);
                        let rm = residual(mid)?;
                        if rm.abs() < 1e-12 {
                            return Some(mid);
                        }
                        if rm.signum() == ra.signum() {
                            a = mid;
                            ra = rm;
                        } else {
                            b = mid;
                        }
                    }
                    return Some(0.5 * (a + b));
                }
            }
            prev = Some((s, r));
        }
        None
    }
}

impl Dynamics for Slip {
    fn state_dim(&self) -> usize {
        1
    }

    fn action_dim(&self) -> usize {
        1
    }

    fn is_failure_state(&self, _state: &[f64]) -> bool {
        // failure is evaluated on the full continuous state during a step;
        // no apex state is failed by itself
        false
    }

    fn step(&self, state: &[f64], action: &[f64]) -> Result<TransitionOutcome, DynamicsError> {
        if state.len() != 1 {
            return Err(DynamicsError::InvalidState(format!("{state:?}")));
        }
        if action.len() != 1 {
            return Err(DynamicsError::InvalidAction(format!("{action:?}")));
        }
        Ok(self.step_detailed(state[0], action[0])?.outcome)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn slip() -> Slip {
        Slip::new(SlipParams::default(), 1860.0).unwrap()
    }

    #[test]
    fn pure_vertical_apex_has_state_one() {
        let m = slip();
        assert_relative_eq!(m.state_from_apex(1.2, 0.0), 1.0);
        let (y, vx) = m.apex_from_state(1.0).unwrap();
        assert_relative_eq!(vx, 0.0);
        assert_relative_eq!(y, 1860.0 / (80.0 * 9.81));
    }

    #[test]
    fn apex_round_trip() {
        let m = slip();
        for s in [0.2, 0.5, 0.85, 1.0] {
            let (y, vx) = m.apex_from_state(s).unwrap();
            assert_relative_eq!(m.state_from_apex(y, vx), s, max_relative = 1e-12);
            assert_relative_eq!(m.flight_energy(y, vx, 0.0), 1860.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn steep_angle_with_low_apex_is_infeasible() {
        let m = slip();
        // y0 at s = 0.4 is ~0.948 m < l0 * cos(0) = 1 m
        let step = m.step_detailed(0.4, 0.0).unwrap();
        assert!(step.outcome.failed);
        assert_eq!(step.failure, Some(FailureKind::Infeasible));
    }

    #[test]
    fn energy_is_conserved_over_a_step() {
        let m = slip();
        let mut checked = 0;
        for s in [0.55, 0.6, 0.65, 0.7] {
            for alpha in [0.25, 0.35, 0.45] {
                let step = m.step_detailed(s, alpha).unwrap();
                if let Some(e) = step.energy {
                    checked += 1;
                    assert!(
                        (e - 1860.0).abs() / 1860.0 <= 1e-6,
                        "energy drift {} at (s={s}, alpha={alpha})",
                        (e - 1860.0).abs() / 1860.0
                    );
                }
            }
        }
        assert!(checked >= 4, "expected several non-failed steps, got {checked}");
    }

    #[test]
    fn vertical_hop_returns_to_same_state() {
        // s = 1 with a vertical leg: hop in place, apex state stays 1
        let m = slip();
        let step = m.step_detailed(1.0, 0.0).unwrap();
        assert!(!step.outcome.failed, "{:?}", step.failure);
        assert_relative_eq!(step.outcome.next_state[0], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn forward_leg_at_zero_speed_reverses() {
        // s = 1 (no forward velocity) with the leg tilted forward: the
        // spring pushes the body backward
        let m = slip();
        let step = m.step_detailed(1.0, 0.3).unwrap();
        assert!(step.outcome.failed);
        assert_eq!(step.failure, Some(FailureKind::Reversed));
    }

    #[test]
    fn determinism_is_bitwise() {
        let m = slip();
        let a = m.step_detailed(0.62, 0.38).unwrap();
        let b = m.step_detailed(0.62, 0.38).unwrap();
        assert_eq!(a.outcome, b.outcome);
        assert_eq!(a.energy.map(f64::to_bits), b.energy.map(f64::to_bits));
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let m = slip();
        assert!(m.step_detailed(0.0, 0.3).is_err());
        assert!(m.step_detailed(1.1, 0.3).is_err());
        assert!(m.step_detailed(f64::NAN, 0.3).is_err());
        assert!(m.step_detailed(0.5, 1.6).is_err());
    }
}
