//! Physical inputs and the coupling constants derived from them.
//!
//! Everything downstream (ladder, envelope solver, interferometer) consumes a
//! [`CouplingParams`] produced by [`derive_coupling`]. The on-site term keeps
//! the `γ³` factor of the relativistically corrected dispersion.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use num_traits::Float;

use crate::constants::{C, E_CHARGE, HBAR, M_E};
use crate::{Error, Result};

/// Tolerance on `|ln Q|` inside which a point is reported as [`Regime::Boundary`].
pub const BOUNDARY_LN_Q_TOL: f64 = 1e-9;

/// Kinematics of the synchronized electron.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElectronParams {
    /// `v0 / c`.
    pub beta: f64,
    /// Kinetic energy in eV.
    pub kinetic_energy_ev: f64,
    pub gamma: f64,
    /// Group velocity, m/s.
    pub v0: f64,
    /// Central wavenumber `p0 / ħ`, rad/m.
    pub k0: f64,
    /// Momentum `γ m_e v0`, kg·m/s.
    pub p0: f64,
}

impl ElectronParams {
    pub fn from_beta(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidParameter {
                name: "beta",
                reason: "must lie in (0, 1)",
            });
        }
        let gamma = 1.0 / (1.0 - beta * beta).sqrt();
        // γ - 1 without cancellation at small β
        let gamma_m1 = beta * beta * gamma * gamma / (gamma + 1.0);
        Ok(Self::assemble(beta, gamma, gamma_m1))
    }

    pub fn from_kinetic_energy_ev(energy_ev: f64) -> Result<Self> {
        if !(energy_ev > 0.0 && energy_ev.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "kinetic_energy_ev",
                reason: "must be finite and positive",
            });
        }
        let x = energy_ev * E_CHARGE / (M_E * C * C);
        let gamma = 1.0 + x;
        let beta = (x * (x + 2.0)).sqrt() / gamma;
        Ok(Self::assemble(beta, gamma, x))
    }

    fn assemble(beta: f64, gamma: f64, gamma_m1: f64) -> Self {
        let v0 = beta * C;
        let p0 = gamma * M_E * v0;
        Self {
            beta,
            kinetic_energy_ev: gamma_m1 * M_E * C * C / E_CHARGE,
            gamma,
            v0,
            k0: p0 / HBAR,
            p0,
        }
    }
}

/// Driving near field and grating geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldParams {
    /// Longitudinal field amplitude, V/m.
    pub e_z: f64,
    /// Laser wavelength, m.
    pub lambda_l: f64,
    /// Laser angular frequency, rad/s.
    pub omega_l: f64,
    /// Phase delay, rad.
    pub phi0: f64,
    /// Grating period Λ, m.
    pub grating_period: f64,
    /// Longitudinal wavevector of the driving harmonic, rad/m.
    pub q_z: f64,
    /// Floquet harmonic index of the grating, `m ≥ 1`.
    pub harmonic: u32,
    /// Laser incidence angle θ, rad.
    pub incident_angle: f64,
}

impl FieldParams {
    /// A field exactly phase matched to `electron`: `q_z = ω_L / v0` and the
    /// grating period is the one that synchronizes harmonic `m`, `Λ = m β λ_L`.
    pub fn synchronized(
        electron: &ElectronParams,
        e_z: f64,
        lambda_l: f64,
        phi0: f64,
        harmonic: u32,
    ) -> Result<Self> {
        check_field_inputs(e_z, lambda_l, harmonic)?;
        let omega_l = TAU * C / lambda_l;
        Ok(Self {
            e_z,
            lambda_l,
            omega_l,
            phi0,
            grating_period: f64::from(harmonic) * electron.beta * lambda_l,
            q_z: omega_l / electron.v0,
            harmonic,
            incident_angle: FRAC_PI_2,
        })
    }

    /// A field whose wavevector is set by the grating:
    /// `q_z = k_L cos θ + m · 2π/Λ`.
    pub fn grating(
        e_z: f64,
        lambda_l: f64,
        phi0: f64,
        grating_period: f64,
        harmonic: u32,
        incident_angle: f64,
    ) -> Result<Self> {
        check_field_inputs(e_z, lambda_l, harmonic)?;
        if !(grating_period > 0.0) {
            return Err(Error::InvalidParameter {
                name: "grating_period",
                reason: "must be positive",
            });
        }
        let omega_l = TAU * C / lambda_l;
        let k_l = omega_l / C;
        Ok(Self {
            e_z,
            lambda_l,
            omega_l,
            phi0,
            grating_period,
            q_z: k_l * incident_angle.cos() + f64::from(harmonic) * TAU / grating_period,
            harmonic,
            incident_angle,
        })
    }

    pub fn with_field(mut self, e_z: f64) -> Self {
        self.e_z = e_z;
        self
    }

    pub fn k_l(&self) -> f64 {
        self.omega_l / C
    }
}

fn check_field_inputs(e_z: f64, lambda_l: f64, harmonic: u32) -> Result<()> {
    if !(e_z >= 0.0 && e_z.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "e_z",
            reason: "must be finite and non-negative",
        });
    }
    if !(lambda_l > 0.0 && lambda_l.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "lambda_l",
            reason: "must be finite and positive",
        });
    }
    if harmonic == 0 {
        return Err(Error::InvalidParameter {
            name: "harmonic",
            reason: "must be at least 1",
        });
    }
    Ok(())
}

/// Coefficients of the coupled-mode ladder and the quantities derived from them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingParams {
    /// On-site curvature ε, rad/s.
    pub epsilon: f64,
    /// Hopping amplitude κ, rad/s.
    pub kappa: Complex64,
    /// `Q = ε / (2|κ|)`; `+∞` without field.
    pub q_ratio: f64,
    /// `T_R = π / |κ|`, s; `+∞` without field.
    pub rabi_period: f64,
    /// `Δω_L = ω_L − v0 q_z`, rad/s.
    pub detuning: f64,
    /// `v0 T_R`, m.
    pub interaction_length: f64,
}

impl CouplingParams {
    /// Assemble from ε and κ directly (e.g. for synthetic studies).
    pub fn from_ladder_coefficients(epsilon: f64, kappa: Complex64, detuning: f64, v0: f64) -> Self {
        let abs_kappa = kappa.norm();
        let (q_ratio, rabi_period) = if abs_kappa > 0.0 {
            (epsilon / (2.0 * abs_kappa), PI / abs_kappa)
        } else {
            (f64::INFINITY, f64::INFINITY)
        };
        Self {
            epsilon,
            kappa,
            q_ratio,
            rabi_period,
            detuning,
            interaction_length: v0 * rabi_period,
        }
    }

    pub fn abs_kappa(&self) -> f64 {
        self.kappa.norm()
    }

    /// False when there is no field and therefore no finite Rabi period.
    pub fn has_finite_period(&self) -> bool {
        self.rabi_period.is_finite()
    }
}

/// `ε = ħ q_z² / (2 γ³ m_e)` and
/// `κ = −(e k0 E_z / (2 γ m_e ω_L)) · e^{i(φ0 + π/2)}`.
///
/// With `E_z = 0` the hopping vanishes and `Q`, `T_R` come back as `+∞`;
/// callers must check [`CouplingParams::has_finite_period`] before
/// scheduling pulses.
pub fn derive_coupling(electron: &ElectronParams, field: &FieldParams) -> Result<CouplingParams> {
    if !(electron.beta > 0.0 && electron.beta < 1.0) {
        return Err(Error::InvalidParameter {
            name: "beta",
            reason: "must lie in (0, 1)",
        });
    }
    if !(field.omega_l > 0.0) {
        return Err(Error::InvalidParameter {
            name: "omega_l",
            reason: "must be positive",
        });
    }
    if !(field.e_z >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "e_z",
            reason: "must be non-negative",
        });
    }
    let gamma = electron.gamma;
    let epsilon = HBAR * field.q_z * field.q_z / (2.0 * gamma * gamma * gamma * M_E);
    let magnitude = E_CHARGE * electron.k0 * field.e_z / (2.0 * gamma * M_E * field.omega_l);
    // i e^{iφ0}
    let phase = Complex64::new(-field.phi0.sin(), field.phi0.cos());
    let kappa = -phase * magnitude;
    let detuning = field.omega_l - electron.v0 * field.q_z;
    Ok(CouplingParams::from_ladder_coefficients(
        epsilon,
        kappa,
        detuning,
        electron.v0,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `Q > 1`: two neighbouring sidebands, Rabi oscillation.
    Bragg,
    /// `Q < 1`: many sidebands populate.
    RamanNath,
    /// `|ln Q| < 1e-9`.
    Boundary,
}

pub fn classify_q(q: f64) -> Result<Regime> {
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::UnclassifiableRegime { q });
    }
    let ln_q = q.ln();
    Ok(if ln_q.abs() < BOUNDARY_LN_Q_TOL {
        Regime::Boundary
    } else if ln_q > 0.0 {
        Regime::Bragg
    } else {
        Regime::RamanNath
    })
}

pub fn regime_classify(coupling: &CouplingParams) -> Result<Regime> {
    classify_q(coupling.q_ratio)
}

/// A sampled axis for [`regime_map`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    /// Geometric rather than arithmetic spacing.
    pub log: bool,
}

impl AxisSpec {
    pub fn linear(min: f64, max: f64, points: usize) -> Self {
        Self { min, max, points, log: false }
    }

    pub fn log(min: f64, max: f64, points: usize) -> Self {
        Self { min, max, points, log: true }
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        let last = (n - 1) as f64;
        (0..n)
            .map(|i| {
                let s = i as f64 / last;
                if i == n - 1 {
                    self.max
                } else if self.log {
                    self.min * (self.max / self.min).powf(s)
                } else {
                    self.min + (self.max - self.min) * s
                }
            })
            .collect()
    }

    fn validate(&self, name: &'static str, allow_zero_min: bool) -> Result<()> {
        let min_ok = if allow_zero_min && !self.log {
            self.min >= 0.0
        } else {
            self.min > 0.0
        };
        if !(min_ok && self.max > self.min && self.max.is_finite()) || self.points < 2 {
            return Err(Error::InvalidParameter {
                name,
                reason: "axis needs 0 < min < max (min may be 0 for a linear field axis) and at least 2 points",
            });
        }
        Ok(())
    }
}

/// `ln Q` over a (β, E_z) grid at fixed laser frequency. Row `i` is `betas[i]`,
/// column `j` is `fields[j]`. Cells with `E_z = 0` hold `+∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeMap {
    pub omega_l: f64,
    pub betas: Vec<f64>,
    pub fields: Vec<f64>,
    pub ln_q: Vec<f64>,
}

impl RegimeMap {
    pub fn get(&self, beta_index: usize, field_index: usize) -> f64 {
        self.ln_q[beta_index * self.fields.len() + field_index]
    }

    pub fn regime(&self, beta_index: usize, field_index: usize) -> Result<Regime> {
        classify_q(self.get(beta_index, field_index).exp())
    }

    pub fn non_finite_cells(&self) -> usize {
        self.ln_q.iter().filter(|v| !v.is_finite()).count()
    }
}

/// One row of [`regime_map`]: `ln Q` at `beta` for every field in `fields`.
pub fn regime_map_row(beta: f64, fields: &[f64], omega_l: f64) -> Result<Vec<f64>> {
    let electron = ElectronParams::from_beta(beta)?;
    let lambda_l = TAU * C / omega_l;
    let base = FieldParams::synchronized(&electron, 0.0, lambda_l, FRAC_PI_2, 1)?;
    fields
        .iter()
        .map(|&e_z| {
            let mut field = base.with_field(e_z);
            // keep ω_L exactly as requested rather than round-tripping through λ
            field.omega_l = omega_l;
            field.q_z = omega_l / electron.v0;
            derive_coupling(&electron, &field).map(|c| c.q_ratio.ln())
        })
        .collect()
}

pub fn regime_map(beta_axis: &AxisSpec, field_axis: &AxisSpec, omega_l: f64) -> Result<RegimeMap> {
    beta_axis.validate("beta_range", false)?;
    field_axis.validate("field_range", true)?;
    if beta_axis.max >= 1.0 {
        return Err(Error::InvalidParameter {
            name: "beta_range",
            reason: "beta must stay below 1",
        });
    }
    if !(omega_l > 0.0) {
        return Err(Error::InvalidParameter {
            name: "omega_l",
            reason: "must be positive",
        });
    }
    let betas = beta_axis.values();
    let fields = field_axis.values();
    let mut ln_q = Vec::with_capacity(betas.len() * fields.len());
    for &beta in &betas {
        ln_q.extend(regime_map_row(beta, &fields, omega_l)?);
    }
    Ok(RegimeMap { omega_l, betas, fields, ln_q })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynchronizationReport {
    /// `Δω_L = ω_L − v0 q_z`, rad/s.
    pub detuning: f64,
    /// `Λ = m β λ_L`, m.
    pub grating_period_required: f64,
    /// `v0 T_R / Λ` with the field's grating period.
    pub periods_per_rabi_cycle: f64,
    /// `|Δω_L| < |κ|`.
    pub detuning_below_hopping: bool,
    /// `|κ| < ε`.
    pub hopping_below_onsite: bool,
}

pub fn synchronization_report(
    electron: &ElectronParams,
    field: &FieldParams,
) -> Result<SynchronizationReport> {
    let coupling = derive_coupling(electron, field)?;
    let abs_kappa = coupling.abs_kappa();
    Ok(SynchronizationReport {
        detuning: coupling.detuning,
        grating_period_required: f64::from(field.harmonic) * electron.beta * field.lambda_l,
        periods_per_rabi_cycle: coupling.interaction_length / field.grating_period,
        detuning_below_hopping: coupling.detuning.abs() < abs_kappa,
        hopping_below_onsite: abs_kappa < coupling.epsilon,
    })
}

/// Electron and field at the reference working point: β = 0.02,
/// λ_L = 200 nm, E_z = 5 MV/m, φ0 = π/2, grating harmonic m = 5.
pub fn reference_point() -> (ElectronParams, FieldParams) {
    let electron = ElectronParams::from_beta(0.02).expect("valid beta");
    let field = FieldParams::synchronized(&electron, 5e6, 200e-9, FRAC_PI_2, 5).expect("valid field");
    (electron, field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::FEMTOSECOND;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn electron_kinematics() {
        let e = ElectronParams::from_beta(0.02).unwrap();
        assert!(rel(e.gamma, 1.0 / (1.0 - 0.0004f64).sqrt()) < 1e-12);
        assert!(rel(e.v0, 0.02 * C) < 1e-15);
        assert!(rel(e.p0, e.gamma * M_E * e.v0) < 1e-15);
        assert!(rel(e.k0, e.p0 / HBAR) < 1e-15);
        let back = ElectronParams::from_kinetic_energy_ev(e.kinetic_energy_ev).unwrap();
        assert!(rel(back.beta, e.beta) < 1e-6);
        assert!(ElectronParams::from_beta(1.0).is_err());
        assert!(ElectronParams::from_beta(0.0).is_err());
    }

    #[test]
    fn omega_from_wavelength() {
        let (_, f) = reference_point();
        assert!(rel(f.omega_l, TAU * C / 200e-9) < 1e-12);
    }

    #[test]
    fn reference_couplings() {
        let (e, f) = reference_point();
        let c = derive_coupling(&e, &f).unwrap();
        assert!(rel(c.q_ratio, 29.3) < 0.02, "Q = {}", c.q_ratio);
        assert!(rel(c.rabi_period, 1.29e-12) < 0.02, "T_R = {}", c.rabi_period);
        assert!(rel(c.abs_kappa() * FEMTOSECOND, 0.0024) < 0.02);
        assert!(rel(c.epsilon * FEMTOSECOND, 0.142) < 0.02);
        // φ0 = π/2 makes κ real positive
        assert!(c.kappa.re > 0.0 && c.kappa.im.abs() < 1e-12 * c.kappa.re);
    }

    #[test]
    fn coupling_invariants() {
        let (e, f) = reference_point();
        let c = derive_coupling(&e, &f).unwrap();
        assert!(rel(c.q_ratio, c.epsilon / (2.0 * c.abs_kappa())) < 1e-12);
        assert!(rel(c.rabi_period * c.abs_kappa(), PI) < 1e-15);
        assert!(rel(c.interaction_length, e.v0 * c.rabi_period) < 1e-12);
    }

    #[test]
    fn zero_field() {
        let (e, f) = reference_point();
        let c0 = derive_coupling(&e, &f.with_field(0.0)).unwrap();
        let c = derive_coupling(&e, &f).unwrap();
        assert_eq!(c0.kappa, Complex64::new(0.0, 0.0));
        assert!(!c0.q_ratio.is_finite());
        assert!(!c0.has_finite_period());
        assert_eq!(c0.epsilon, c.epsilon);
        assert!(regime_classify(&c0).is_err());
    }

    #[test]
    fn doubling_field_halves_q_and_period() {
        let (e, f) = reference_point();
        let c1 = derive_coupling(&e, &f).unwrap();
        let c2 = derive_coupling(&e, &f.with_field(2.0 * f.e_z)).unwrap();
        assert!(rel(c2.q_ratio, c1.q_ratio / 2.0) < 1e-14);
        assert!(rel(c2.rabi_period, c1.rabi_period / 2.0) < 1e-14);
    }

    #[test]
    fn classification() {
        assert_eq!(classify_q(29.3).unwrap(), Regime::Bragg);
        assert_eq!(classify_q(1.0).unwrap(), Regime::Boundary);
        assert_eq!(classify_q(0.1).unwrap(), Regime::RamanNath);
        assert!(classify_q(f64::NAN).is_err());
        assert!(classify_q(0.0).is_err());
    }

    #[test]
    fn synchronization_numbers() {
        let (e, f) = reference_point();
        let r = synchronization_report(&e, &f).unwrap();
        assert!(rel(r.grating_period_required, 20e-9) < 1e-12);
        assert!(rel(r.periods_per_rabi_cycle, 387.0) < 0.02, "{}", r.periods_per_rabi_cycle);
        assert!(r.detuning.abs() <= 4.0 * f64::EPSILON * f.omega_l);
        assert!(r.detuning_below_hopping && r.hopping_below_onsite);
    }

    #[test]
    fn grating_wavevector_matches_synchronous_at_normal_incidence() {
        let (e, f) = reference_point();
        let g = FieldParams::grating(f.e_z, f.lambda_l, f.phi0, 20e-9, 5, FRAC_PI_2).unwrap();
        assert!(rel(g.q_z, f.q_z) < 1e-9);
        let r = synchronization_report(&e, &g).unwrap();
        assert!(r.detuning.abs() < 1e-6 * f.omega_l);
    }

    #[test]
    fn map_rejects_bad_axes() {
        let good = AxisSpec::linear(0.01, 0.1, 4);
        assert!(regime_map(&AxisSpec::linear(0.01, 0.1, 1), &good, 1e16).is_err());
        assert!(regime_map(&good, &AxisSpec::log(0.0, 1e7, 4), 1e16).is_err());
        assert!(regime_map(&AxisSpec::linear(0.5, 1.2, 4), &good, 1e16).is_err());
    }

    #[test]
    fn zero_field_cells_are_flagged() {
        let m = regime_map(
            &AxisSpec::linear(0.01, 0.1, 3),
            &AxisSpec::linear(0.0, 1e7, 3),
            TAU * C / 200e-9,
        )
        .unwrap();
        assert_eq!(m.non_finite_cells(), 3);
        assert!(m.regime(0, 0).is_err());
    }
}
