//! Pulse sequences on the `|±1/2⟩` pair.
//!
//! A pulse of area `θ = 2|κ|t` rotates the pair about x; `θ = π/2` acts as a
//! beam splitter and `θ = π` as a mirror. Free flight between pulses only
//! adds a relative phase.

use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;

use crate::constants::{E_CHARGE, M_E};
use crate::{Error, Result};

pub type Matrix2 = [[Complex64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelState {
    pub amp_up: Complex64,
    pub amp_down: Complex64,
}

impl TwoLevelState {
    pub const UP: TwoLevelState = TwoLevelState {
        amp_up: Complex64::new(1.0, 0.0),
        amp_down: Complex64::new(0.0, 0.0),
    };
    pub const DOWN: TwoLevelState = TwoLevelState {
        amp_up: Complex64::new(0.0, 0.0),
        amp_down: Complex64::new(1.0, 0.0),
    };

    pub fn new(amp_up: Complex64, amp_down: Complex64) -> Result<Self> {
        let s = Self { amp_up, amp_down };
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(s)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp_up.norm_sqr() + self.amp_down.norm_sqr()
    }

    /// `(P_{+1/2}, P_{−1/2})`.
    pub fn populations(&self) -> (f64, f64) {
        (self.amp_up.norm_sqr(), self.amp_down.norm_sqr())
    }

    pub fn apply(&self, u: &Matrix2) -> Self {
        Self {
            amp_up: u[0][0] * self.amp_up + u[0][1] * self.amp_down,
            amp_down: u[1][0] * self.amp_up + u[1][1] * self.amp_down,
        }
    }
}

/// `e^{−iε·duration/4} [[cos θ/2, −i sin θ/2], [−i sin θ/2, cos θ/2]]`.
pub fn pulse_unitary(theta: f64, epsilon: f64, duration: f64) -> Matrix2 {
    let global = Complex64::from_polar(1.0, -epsilon * duration / 4.0);
    let (s, c) = (theta / 2.0).sin_cos();
    let diag = global * c;
    let off = global * Complex64::new(0.0, -s);
    [[diag, off], [off, diag]]
}

/// `diag(e^{−iΔφ/2}, e^{+iΔφ/2})`.
pub fn drift_unitary(delta_phi: f64) -> Matrix2 {
    let z = Complex64::new(0.0, 0.0);
    [
        [Complex64::from_polar(1.0, -delta_phi / 2.0), z],
        [z, Complex64::from_polar(1.0, delta_phi / 2.0)],
    ]
}

pub fn mat_mul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// `max |(U†U − 1)_ij|`.
pub fn unitarity_error(u: &Matrix2) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            let v = u[0][i].conj() * u[0][j] + u[1][i].conj() * u[1][j];
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((v - target).norm());
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    /// Rotation by `theta` driven with hopping `|κ|` (rad/s) and on-site `ε`
    /// (rad/s). The pulse lasts `θ/(2|κ|)`, or no time at all when `κ = 0`.
    Pulse { theta: f64, kappa: f64, epsilon: f64 },
    /// Relative phase `Δφ` between the arms.
    Drift { delta_phi: f64 },
}

impl Segment {
    pub fn pulse(theta: f64) -> Self {
        Segment::Pulse {
            theta,
            kappa: 0.0,
            epsilon: 0.0,
        }
    }

    pub fn drift(delta_phi: f64) -> Self {
        Segment::Drift { delta_phi }
    }

    pub fn unitary(&self) -> Matrix2 {
        match *self {
            Segment::Pulse { theta, kappa, epsilon } => {
                let duration = if kappa != 0.0 { theta / (2.0 * kappa.abs()) } else { 0.0 };
                pulse_unitary(theta, epsilon, duration)
            }
            Segment::Drift { delta_phi } => drift_unitary(delta_phi),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SequenceSpec {
    pub segments: Vec<Segment>,
}

impl SequenceSpec {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        for s in &segments {
            match *s {
                Segment::Pulse { theta, kappa, epsilon } => {
                    if !(theta >= 0.0 && theta.is_finite() && kappa.is_finite() && epsilon.is_finite()) {
                        return Err(Error::InvalidParameter {
                            name: "theta",
                            reason: "pulse area must be finite and non-negative",
                        });
                    }
                }
                Segment::Drift { delta_phi } => {
                    if !delta_phi.is_finite() {
                        return Err(Error::InvalidParameter {
                            name: "delta_phi",
                            reason: "must be finite",
                        });
                    }
                }
            }
        }
        Ok(Self { segments })
    }

    /// `π/2 – Drift(φ1) – π – Drift(φ2) – π/2`. The fringe phase is `φ1 − φ2`.
    pub fn mach_zehnder(phi_first: f64, phi_second: f64) -> Self {
        use core::f64::consts::{FRAC_PI_2, PI};
        Self {
            segments: alloc::vec![
                Segment::pulse(FRAC_PI_2),
                Segment::drift(phi_first),
                Segment::pulse(PI),
                Segment::drift(phi_second),
                Segment::pulse(FRAC_PI_2),
            ],
        }
    }

    /// Product of all segment unitaries, last segment leftmost.
    pub fn unitary(&self) -> Matrix2 {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        self.segments
            .iter()
            .fold([[one, zero], [zero, one]], |acc, s| mat_mul(&s.unitary(), &acc))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceOutcome {
    pub state: TwoLevelState,
    pub p_up: f64,
    pub p_down: f64,
}

pub fn run_sequence(seq: &SequenceSpec, psi0: &TwoLevelState) -> Result<SequenceOutcome> {
    let norm = psi0.norm_sqr();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::NotNormalized { norm });
    }
    let state = seq.segments.iter().fold(*psi0, |s, seg| s.apply(&seg.unitary()));
    let (p_up, p_down) = state.populations();
    Ok(SequenceOutcome { state, p_up, p_down })
}

/// `(P_up − P_down)/(P_up + P_down)`.
pub fn visibility(p_up: f64, p_down: f64) -> Result<f64> {
    let total = p_up + p_down;
    if !(total > 0.0) {
        return Err(Error::UndefinedVisibility);
    }
    Ok((p_up - p_down) / total)
}

/// Inputs of the phase-accumulation model. SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseEnvironment {
    pub e_local: f64,
    /// Vector-potential region; enters only through `extra_phase`.
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub gravity: f64,
    /// Momentum separation of the two arms, rad/m.
    pub q: f64,
    pub v0: f64,
    pub extra_phase: f64,
}

impl PhaseEnvironment {
    pub fn validate(&self) -> Result<()> {
        if !(self.l1 >= 0.0 && self.l2 >= 0.0 && self.l3 >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "length",
                reason: "interaction lengths must be non-negative",
            });
        }
        if !(self.v0 > 0.0 && self.v0.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "v0",
                reason: "must be finite and positive",
            });
        }
        Ok(())
    }
}

/// `Δφ = −(eEq/2m)(L2/v0)² + (q g/2)(L3/v0)² + extra_phase`.
pub fn accumulated_phase(env: &PhaseEnvironment) -> Result<f64> {
    env.validate()?;
    let t2 = env.l2 / env.v0;
    let t3 = env.l3 / env.v0;
    Ok(-(E_CHARGE * env.e_local * env.q / (2.0 * M_E)) * t2 * t2 + 0.5 * env.q * env.gravity * t3 * t3 + env.extra_phase)
}

/// Gravity-only path length giving `|Δφ| = target`:
/// `L3 = v0 √(2 target/(q g))`.
pub fn gravity_length_for_phase(target: f64, q: f64, gravity: f64, v0: f64) -> Result<f64> {
    if !(q > 0.0 && gravity > 0.0 && v0 > 0.0 && target >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "gravity",
            reason: "q, g and v0 must be positive and the target phase non-negative",
        });
    }
    Ok(v0 * (2.0 * target / (q * gravity)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{C, G_STANDARD};
    use core::f64::consts::{FRAC_PI_2, PI, TAU};

    /// Independent product of the five segment matrices written out in full.
    fn oracle_mz(phi1: f64, phi2: f64) -> (f64, f64) {
        let r = |theta: f64| {
            let (s, c) = (theta / 2.0).sin_cos();
            nalgebra::Matrix2::new(
                Complex64::new(c, 0.0),
                Complex64::new(0.0, -s),
                Complex64::new(0.0, -s),
                Complex64::new(c, 0.0),
            )
        };
        let d = |phi: f64| {
            nalgebra::Matrix2::new(
                Complex64::from_polar(1.0, -phi / 2.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::from_polar(1.0, phi / 2.0),
            )
        };
        let u = r(FRAC_PI_2) * d(phi2) * r(PI) * d(phi1) * r(FRAC_PI_2);
        let out = u * nalgebra::Vector2::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        (out[0].norm_sqr(), out[1].norm_sqr())
    }

    #[test]
    fn pulses() {
        let half = TwoLevelState::UP.apply(&pulse_unitary(FRAC_PI_2, 0.0, 0.0));
        let (u, d) = half.populations();
        assert!((u - 0.5).abs() < 1e-15 && (d - 0.5).abs() < 1e-15);
        let flip = TwoLevelState::UP.apply(&pulse_unitary(PI, 0.0, 0.0));
        assert!(flip.populations().0 < 1e-30);
        let id = pulse_unitary(0.0, 3.0, 2.0);
        assert_eq!(id[0][1], Complex64::new(0.0, 0.0));
        assert!((id[0][0] - id[1][1]).norm() == 0.0 && (id[0][0].norm() - 1.0).abs() < 1e-15);
        for theta in [0.0, 0.3, FRAC_PI_2, PI, 5.0] {
            assert!(unitarity_error(&pulse_unitary(theta, 1e14, 3e-13)) < 1e-14);
        }
    }

    #[test]
    fn fringes_follow_cosine() {
        for k in 0..100 {
            let dphi = TAU * k as f64 / 99.0;
            let out = run_sequence(&SequenceSpec::mach_zehnder(dphi, 0.0), &TwoLevelState::UP).unwrap();
            let v = visibility(out.p_up, out.p_down).unwrap();
            assert!((v - dphi.cos()).abs() < 1e-9);
            let (ou, od) = oracle_mz(dphi, 0.0);
            assert!((out.p_up - ou).abs() < 1e-12 && (out.p_down - od).abs() < 1e-12);
        }
        let balanced = run_sequence(&SequenceSpec::mach_zehnder(0.8, 0.8), &TwoLevelState::UP).unwrap();
        assert!((visibility(balanced.p_up, balanced.p_down).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_flips_restore_populations() {
        let psi = TwoLevelState::new(Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)).unwrap();
        let seq = SequenceSpec::new(alloc::vec![Segment::pulse(PI), Segment::pulse(PI)]).unwrap();
        let out = run_sequence(&seq, &psi).unwrap();
        assert!((out.p_up - 0.36).abs() < 1e-12 && (out.p_down - 0.64).abs() < 1e-12);
    }

    #[test]
    fn onsite_energy_is_a_global_phase() {
        let plain = SequenceSpec::mach_zehnder(1.1, 0.2);
        let mut dressed = plain.clone();
        for s in dressed.segments.iter_mut() {
            if let Segment::Pulse { kappa, epsilon, .. } = s {
                *kappa = 2.4e12;
                *epsilon = 1.4e14;
            }
        }
        let a = run_sequence(&plain, &TwoLevelState::UP).unwrap();
        let b = run_sequence(&dressed, &TwoLevelState::UP).unwrap();
        assert!((a.p_up - b.p_up).abs() < 1e-12);
    }

    #[test]
    fn visibility_errors() {
        assert_eq!(visibility(0.0, 0.0), Err(Error::UndefinedVisibility));
        assert_eq!(visibility(1.0, 0.0), Ok(1.0));
        assert_eq!(visibility(0.0, 1.0), Ok(-1.0));
    }

    #[test]
    fn phase_model() {
        let v0 = 0.02 * C;
        let q = TAU * C / 200e-9 / v0;
        let mut env = PhaseEnvironment {
            e_local: 0.0,
            l1: 0.0,
            l2: 1e-3,
            l3: 0.0,
            gravity: 0.0,
            q,
            v0,
            extra_phase: 0.0,
        };
        assert_eq!(accumulated_phase(&env).unwrap(), 0.0);
        env.e_local = 1.0;
        let p1 = accumulated_phase(&env).unwrap();
        env.e_local = 2.0;
        assert!(accumulated_phase(&env).unwrap() < p1 && p1 < 0.0);

        let l3 = gravity_length_for_phase(PI, q, G_STANDARD, v0).unwrap();
        let env = PhaseEnvironment {
            e_local: 0.0,
            l3,
            gravity: G_STANDARD,
            ..env
        };
        assert!((accumulated_phase(&env).unwrap() - PI).abs() < 1e-12);
        assert!(l3 > 100.0 && l3 < 10_000.0, "{l3}");
        env.validate().unwrap();
        assert!(PhaseEnvironment { l2: -1.0, ..env }.validate().is_err());
    }
}
