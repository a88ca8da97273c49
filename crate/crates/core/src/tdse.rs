//! Real-space Crank-Nicolson solver for the slow envelope `χ(z, τ)`.
//!
//! The envelope obeys, with `τ = ct` and `θ(z, τ) = k_L τ − k_z z + φ0`,
//!
//! ```text
//! i ∂τ χ = −i[β − α1 sin θ] ∂z χ − [α2 ∂z² + α0 sin θ] χ
//! ```
//!
//! Space is a periodic grid of whole doubled field periods, so every
//! half-integer sideband `e^{i n k_z z}` is an exact grid mode. Each step
//! applies the Cayley form `(1 + iΔτH/2)⁻¹ (1 − iΔτH/2)` with `H` evaluated at
//! the step midpoint, solving one cyclic tridiagonal system.
//!
//! Internally lengths are in µm and time is `τ = ct` in µm; the public API
//! takes metres and seconds.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use num_complex::Complex64;
use num_traits::Float;

use crate::constants::{C, E_CHARGE, HBAR, MICROMETRE, M_E};
use crate::params::{ElectronParams, FieldParams};
use crate::tridiag::{CyclicTridiagonal, CyclicWorkspace};
use crate::{Error, HalfInt, Result};

/// Points per field period used by [`TdseResolution::default`].
pub const DEFAULT_POINTS_PER_PERIOD: usize = 512;
/// Field periods in the default domain.
pub const DEFAULT_FIELD_PERIODS: usize = 2;
/// Default `β Δτ / δz`.
pub const DEFAULT_COURANT: f64 = 1.0;
/// Cumulative norm drift that triggers a warning on the trajectory.
pub const NORM_DRIFT_WARNING: f64 = 1e-6;

/// Uniform periodic grid. Coordinates in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    pub z_min: f64,
    pub z_max: f64,
    pub n_points: usize,
    pub dz: f64,
    pub domain_length: f64,
}

impl SpatialGrid {
    pub fn z(&self, i: usize) -> f64 {
        self.z_min + i as f64 * self.dz
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.z(i)).collect()
    }

    /// Error unless the domain holds a whole, even number of periods
    /// `2π/k_z` (so `e^{±i k_z z/2}` is periodic on it).
    pub fn check_sideband_periodicity(&self, k_z: f64) -> Result<()> {
        let periods = self.domain_length * k_z / TAU;
        let doubled = periods / 2.0;
        if (doubled - doubled.round()).abs() > 1e-9 * doubled.max(1.0) || doubled.round() < 1.0 {
            return Err(Error::NonPeriodicDomain { periods });
        }
        Ok(())
    }
}

/// Grid spanning `periods` copies of `period` with `points_per_period`
/// samples each. `periods` must be even: half-integer sideband envelopes
/// repeat only over two periods.
pub fn make_grid(period: f64, periods: usize, points_per_period: usize) -> Result<SpatialGrid> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "period",
            reason: "must be finite and positive",
        });
    }
    if periods == 0 || periods % 2 != 0 {
        return Err(Error::InvalidParameter {
            name: "periods",
            reason: "must be even and nonzero: half-integer sidebands e^{i n q z} repeat only over two periods",
        });
    }
    if points_per_period < 16 {
        return Err(Error::InvalidParameter {
            name: "points_per_period",
            reason: "must be at least 16",
        });
    }
    let n_points = periods * points_per_period;
    let domain_length = periods as f64 * period;
    Ok(SpatialGrid {
        z_min: 0.0,
        z_max: domain_length,
        n_points,
        dz: domain_length / n_points as f64,
        domain_length,
    })
}

/// Envelope-equation coefficients in µm / `τ = ct` units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TdseCoefficients {
    /// `e E_z β / (ħ ω_L)`, µm⁻¹.
    pub alpha0: f64,
    /// `e E_z / (γ m_e c ω_L)`, dimensionless.
    pub alpha1: f64,
    /// `ħ / (2 γ³ m_e c)`, µm.
    pub alpha2: f64,
    pub beta: f64,
    /// `ω_L / c`, rad/µm.
    pub k_l: f64,
    /// Field wavevector, rad/µm.
    pub k_z: f64,
    pub phi0: f64,
}

impl TdseCoefficients {
    pub fn from_params(electron: &ElectronParams, field: &FieldParams) -> Self {
        let g = electron.gamma;
        Self {
            alpha0: E_CHARGE * field.e_z * electron.beta / (HBAR * field.omega_l) * MICROMETRE,
            alpha1: E_CHARGE * field.e_z / (g * M_E * C * field.omega_l),
            alpha2: HBAR / (2.0 * g * g * g * M_E * C) / MICROMETRE,
            beta: electron.beta,
            k_l: field.omega_l / C * MICROMETRE,
            k_z: field.q_z * MICROMETRE,
            phi0: field.phi0,
        }
    }

    pub fn without_field(mut self) -> Self {
        self.alpha0 = 0.0;
        self.alpha1 = 0.0;
        self
    }

    /// Field period `2π/k_z` in metres.
    pub fn field_period(&self) -> f64 {
        TAU / self.k_z * MICROMETRE
    }

    /// Two-level hopping `α0/2` expressed in rad/s.
    pub fn hopping_rate(&self) -> f64 {
        0.5 * self.alpha0 * C / MICROMETRE
    }

    /// Free-envelope dispersion `ω(k) = βc k + ħk²/(2γ³m_e)` in rad/s for
    /// `k` in rad/m.
    pub fn free_dispersion(&self, k: f64) -> f64 {
        let k_um = k * MICROMETRE;
        (self.beta * k_um + self.alpha2 * k_um * k_um) * C / MICROMETRE
    }
}

/// How the off-diagonal field coupling of the three-point stencil is placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StencilMode {
    /// Field phase of the `i ↔ i±1` coupling taken at the link midpoint
    /// `z_{i±1/2}`; `H` is exactly Hermitian.
    #[default]
    Midpoint,
    /// Field phase taken at `z_i` for both neighbours of row `i`, as the
    /// stencil is usually written. Hermitian only to `O(δz)`.
    Literal,
}

/// Precomputed spatial phases for a grid and coefficient set.
#[derive(Debug, Clone)]
struct FieldPhases {
    /// `e^{i(−k_z z_i + φ0)}`.
    site: Vec<Complex64>,
    /// `e^{i(−k_z z_{i+1/2} + φ0)}`.
    link: Vec<Complex64>,
}

impl FieldPhases {
    fn new(grid: &SpatialGrid, coeffs: &TdseCoefficients) -> Self {
        let dz = grid.dz / MICROMETRE;
        let z0 = grid.z_min / MICROMETRE;
        let phase = |z: f64| Complex64::from_polar(1.0, -coeffs.k_z * z + coeffs.phi0);
        Self {
            site: (0..grid.n_points).map(|i| phase(z0 + i as f64 * dz)).collect(),
            link: (0..grid.n_points).map(|i| phase(z0 + (i as f64 + 0.5) * dz)).collect(),
        }
    }
}

/// Fill `h` with the stencil Hamiltonian at time `tau` (µm).
fn fill_hamiltonian(
    h: &mut CyclicTridiagonal,
    grid: &SpatialGrid,
    coeffs: &TdseCoefficients,
    phases: &FieldPhases,
    tau: f64,
    mode: StencilMode,
) {
    let n = grid.n_points;
    let dz = grid.dz / MICROMETRE;
    let kin = coeffs.alpha2 / (dz * dz);
    let adv = coeffs.beta / (2.0 * dz);
    let a1 = coeffs.alpha1 / (2.0 * dz);
    let clock = Complex64::from_polar(1.0, coeffs.k_l * tau);
    for i in 0..n {
        let e_site = clock * phases.site[i]; // e^{iθ_i}
        let (fwd, back) = match mode {
            StencilMode::Midpoint => {
                let prev = (i + n - 1) % n;
                (clock * phases.link[i], (clock * phases.link[prev]).conj())
            }
            StencilMode::Literal => (e_site, e_site.conj()),
        };
        h.diag[i] = Complex64::new(
            2.0 * kin - 2.0 * a1 * e_site.re - coeffs.alpha0 * e_site.im,
            0.0,
        );
        h.upper[i] = Complex64::new(-kin, -adv) + fwd * a1;
        h.lower[i] = Complex64::new(-kin, adv) + back * a1;
    }
}

/// Cayley pair for one step: `implicit = 1 + iΔτH/2`, `explicit = 1 − iΔτH/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOperators {
    pub hamiltonian: CyclicTridiagonal,
    pub implicit: CyclicTridiagonal,
    pub explicit: CyclicTridiagonal,
}

fn check_step(grid: &SpatialGrid, coeffs: &TdseCoefficients, dtau: f64) -> Result<()> {
    if grid.n_points < 3 {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: "needs at least three points",
        });
    }
    if !(dtau != 0.0 && dtau.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "dtau",
            reason: "must be finite and nonzero",
        });
    }
    let ratio = coeffs.beta * dtau.abs() / (grid.dz / MICROMETRE);
    if ratio > 1.0 + 1e-12 {
        return Err(Error::StepGuard { ratio });
    }
    Ok(())
}

fn cayley_into(h: &CyclicTridiagonal, dtau: f64, implicit: &mut CyclicTridiagonal, explicit: &mut CyclicTridiagonal) {
    let s = Complex64::new(0.0, 0.5 * dtau);
    let one = Complex64::new(1.0, 0.0);
    for i in 0..h.len() {
        implicit.diag[i] = one + s * h.diag[i];
        explicit.diag[i] = one - s * h.diag[i];
        implicit.upper[i] = s * h.upper[i];
        explicit.upper[i] = -s * h.upper[i];
        implicit.lower[i] = s * h.lower[i];
        explicit.lower[i] = -s * h.lower[i];
    }
}

/// Build `H(τ)` and its Cayley pair. `tau` and `dtau` are in µm (`τ = ct`);
/// `dtau` may be negative for backward steps. Fails when `β|Δτ|/δz > 1`.
pub fn assemble_step(
    grid: &SpatialGrid,
    coeffs: &TdseCoefficients,
    tau: f64,
    dtau: f64,
    mode: StencilMode,
) -> Result<StepOperators> {
    check_step(grid, coeffs, dtau)?;
    let phases = FieldPhases::new(grid, coeffs);
    let n = grid.n_points;
    let mut hamiltonian = CyclicTridiagonal::zeros(n);
    fill_hamiltonian(&mut hamiltonian, grid, coeffs, &phases, tau, mode);
    let mut implicit = CyclicTridiagonal::zeros(n);
    let mut explicit = CyclicTridiagonal::zeros(n);
    cayley_into(&hamiltonian, dtau, &mut implicit, &mut explicit);
    Ok(StepOperators {
        hamiltonian,
        implicit,
        explicit,
    })
}

/// Envelope samples at one instant. Normalized so that the grid average of
/// `|χ|²` is one, i.e. `(1/L) Σ |χ_i|² δz = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWavefunction {
    pub values: Vec<Complex64>,
    /// Seconds.
    pub time: f64,
}

impl GridWavefunction {
    /// `e^{i n k_z z}` on the grid.
    pub fn sideband(grid: &SpatialGrid, k_z: f64, n: HalfInt) -> Self {
        Self::plane_wave(grid, n.value() * k_z)
    }

    /// `e^{i k z}` with `k` in rad/m.
    pub fn plane_wave(grid: &SpatialGrid, k: f64) -> Self {
        Self {
            values: (0..grid.n_points)
                .map(|i| Complex64::from_polar(1.0, k * grid.z(i)))
                .collect(),
            time: 0.0,
        }
    }

    pub fn from_values(values: Vec<Complex64>) -> Self {
        Self { values, time: 0.0 }
    }

    /// `(1/L) Σ |χ_i|² δz`.
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.values.len() as f64
    }

    pub fn normalized(mut self) -> Self {
        let s = 1.0 / self.norm_sqr().sqrt();
        self.values.iter_mut().for_each(|v| *v *= s);
        self
    }
}

/// `c_n = (1/L) Σ_i χ(z_i) e^{−i n k_z z_i} δz` with `k_z` in rad/m.
pub fn sideband_projection(chi: &GridWavefunction, grid: &SpatialGrid, k_z: f64, n: HalfInt) -> Complex64 {
    let k = n.value() * k_z;
    let sum: Complex64 = chi
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| v * Complex64::from_polar(1.0, -k * grid.z(i)))
        .sum();
    sum / chi.values.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TdseWarning {
    /// Cumulative norm drift passed [`NORM_DRIFT_WARNING`].
    NormDrift { step: usize, drift: f64 },
}

/// Numerical settings for [`propagate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationSettings {
    pub n_steps: usize,
    /// Keep every `record_every`-th state (the initial and final states are
    /// always kept).
    pub record_every: usize,
    pub mode: StencilMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TdseTrajectory {
    pub snapshots: Vec<GridWavefunction>,
    /// Largest single-step `|‖χ‖² change|`.
    pub max_step_norm_change: f64,
    /// `|‖χ_final‖² − ‖χ_0‖²|`.
    pub cumulative_norm_drift: f64,
    pub warnings: Vec<TdseWarning>,
    /// Step size in µm of `τ = ct`.
    pub dtau: f64,
}

impl TdseTrajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.time).collect()
    }

    /// `|c_n(t)|²` for every snapshot and every label in `labels`.
    pub fn sideband_populations(&self, grid: &SpatialGrid, k_z: f64, labels: &[HalfInt]) -> Vec<Vec<f64>> {
        self.snapshots
            .iter()
            .map(|s| {
                labels
                    .iter()
                    .map(|&n| sideband_projection(s, grid, k_z, n).norm_sqr())
                    .collect()
            })
            .collect()
    }
}

/// Integrate from `chi0` over `t_final` seconds in `n_steps` Crank-Nicolson
/// steps.
pub fn propagate(
    chi0: &GridWavefunction,
    grid: &SpatialGrid,
    coeffs: &TdseCoefficients,
    t_final: f64,
    settings: PropagationSettings,
) -> Result<TdseTrajectory> {
    let n = grid.n_points;
    if chi0.values.len() != n {
        return Err(Error::InvalidParameter {
            name: "chi0",
            reason: "length must match the grid",
        });
    }
    let norm0 = chi0.norm_sqr();
    if (norm0 - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm: norm0 });
    }
    if settings.n_steps == 0 || settings.record_every == 0 {
        return Err(Error::InvalidParameter {
            name: "n_steps",
            reason: "n_steps and record_every must be at least 1",
        });
    }
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "t_final",
            reason: "must be finite and positive",
        });
    }
    let tau0 = chi0.time * C / MICROMETRE;
    let dtau = t_final * C / MICROMETRE / settings.n_steps as f64;
    check_step(grid, coeffs, dtau)?;

    let phases = FieldPhases::new(grid, coeffs);
    let mut h = CyclicTridiagonal::zeros(n);
    let mut implicit = CyclicTridiagonal::zeros(n);
    let mut explicit = CyclicTridiagonal::zeros(n);
    let mut ws = CyclicWorkspace::new(n);
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    let mut psi = chi0.values.clone();

    let mut snapshots = vec![chi0.clone()];
    let mut warnings = Vec::new();
    let mut max_step = 0.0f64;
    let mut prev_norm = norm0;
    let mut drift_warned = false;

    for step in 0..settings.n_steps {
        let tau_mid = tau0 + (step as f64 + 0.5) * dtau;
        fill_hamiltonian(&mut h, grid, coeffs, &phases, tau_mid, settings.mode);
        cayley_into(&h, dtau, &mut implicit, &mut explicit);
        explicit.mul_vec_into(&psi, &mut rhs);
        ws.solve_into(&implicit, &rhs, &mut psi)
            .map_err(|_| Error::SingularSystem { step })?;

        let norm = psi.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
        max_step = max_step.max((norm - prev_norm).abs());
        prev_norm = norm;
        let drift = (norm - norm0).abs();
        if !drift_warned && drift > NORM_DRIFT_WARNING {
            warnings.push(TdseWarning::NormDrift { step, drift });
            drift_warned = true;
        }

        let done = step + 1;
        if done % settings.record_every == 0 || done == settings.n_steps {
            snapshots.push(GridWavefunction {
                values: psi.clone(),
                time: (tau0 + done as f64 * dtau) * MICROMETRE / C,
            });
        }
    }

    Ok(TdseTrajectory {
        snapshots,
        max_step_norm_change: max_step,
        cumulative_norm_drift: (prev_norm - norm0).abs(),
        warnings,
        dtau,
    })
}

/// Grid resolution and step count for a run over a given duration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TdseResolution {
    pub field_periods: usize,
    pub points_per_period: usize,
    /// Target `β Δτ / δz`; the step count is rounded up so the guard holds.
    pub courant: f64,
}

impl Default for TdseResolution {
    fn default() -> Self {
        Self {
            field_periods: DEFAULT_FIELD_PERIODS,
            points_per_period: DEFAULT_POINTS_PER_PERIOD,
            courant: DEFAULT_COURANT,
        }
    }
}

impl TdseResolution {
    pub fn grid(&self, coeffs: &TdseCoefficients) -> Result<SpatialGrid> {
        make_grid(coeffs.field_period(), self.field_periods, self.points_per_period)
    }

    /// Smallest step count over `duration` seconds with `β Δτ / δz ≤ courant`.
    pub fn steps_for(&self, grid: &SpatialGrid, coeffs: &TdseCoefficients, duration: f64) -> usize {
        let tau = duration * C / MICROMETRE;
        let max_dtau = self.courant * (grid.dz / MICROMETRE) / coeffs.beta;
        (tau / max_dtau).ceil().max(1.0) as usize
    }
}

/// Rabi period `π/|κ|` implied by the envelope coefficients, in seconds.
pub fn rabi_period(coeffs: &TdseCoefficients) -> f64 {
    PI / coeffs.hopping_rate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive_coupling, reference_point};

    fn small_setup() -> (SpatialGrid, TdseCoefficients) {
        let (e, f) = reference_point();
        let coeffs = TdseCoefficients::from_params(&e, &f);
        let grid = make_grid(coeffs.field_period(), 2, 32).unwrap();
        (grid, coeffs)
    }

    #[test]
    fn grid_arithmetic() {
        let g = make_grid(20e-9, 8, 64).unwrap();
        assert_eq!(g.n_points, 512);
        assert!((g.domain_length - 160e-9).abs() < 1e-22);
        assert_eq!(g.dz * g.n_points as f64, g.domain_length);
        assert!(make_grid(20e-9, 7, 64).is_err());
        assert!(make_grid(20e-9, 8, 8).is_err());
    }

    #[test]
    fn reference_coefficients() {
        let (e, f) = reference_point();
        let c = TdseCoefficients::from_params(&e, &f);
        assert!((c.alpha1 / 3.11e-7 - 1.0).abs() < 0.01, "{}", c.alpha1);
        assert!((c.alpha2 / 1.92e-7 - 1.0).abs() < 0.01, "{}", c.alpha2);
        assert!((c.alpha0 / 0.016 - 1.0).abs() < 0.01, "{}", c.alpha0);
        let k = derive_coupling(&e, &f).unwrap();
        assert!((c.hopping_rate() / k.abs_kappa() - 1.0).abs() < 1e-10);
        let eps_um = k.epsilon / C * MICROMETRE;
        assert!((c.alpha2 * c.k_z * c.k_z / eps_um - 1.0).abs() < 1e-10);
    }

    #[test]
    fn midpoint_stencil_is_hermitian() {
        let (grid, coeffs) = small_setup();
        let dtau = 0.5 * grid.dz / MICROMETRE / coeffs.beta;
        let ops = assemble_step(&grid, &coeffs, 0.37, dtau, StencilMode::Midpoint).unwrap();
        let h = &ops.hamiltonian;
        let n = h.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in [(i + 1) % n, (i + n - 1) % n, i] {
                worst = worst.max((h.get(i, j) - h.get(j, i).conj()).norm());
            }
        }
        assert_eq!(worst, 0.0);

        let lit = assemble_step(&grid, &coeffs, 0.37, dtau, StencilMode::Literal).unwrap();
        let h = &lit.hamiltonian;
        let dev = (0..n)
            .map(|i| (h.get(i, (i + 1) % n) - h.get((i + 1) % n, i).conj()).norm())
            .fold(0.0, f64::max);
        assert!(dev > 0.0);
    }

    #[test]
    fn step_guard() {
        let (grid, coeffs) = small_setup();
        let limit = grid.dz / MICROMETRE / coeffs.beta;
        assert!(matches!(
            assemble_step(&grid, &coeffs, 0.0, 1.5 * limit, StencilMode::Midpoint),
            Err(Error::StepGuard { .. })
        ));
        assert!(assemble_step(&grid, &coeffs, 0.0, limit, StencilMode::Midpoint).is_ok());
    }

    #[test]
    fn projection_orthogonality() {
        let (grid, coeffs) = small_setup();
        let k_z = coeffs.k_z / MICROMETRE;
        let chi = GridWavefunction::sideband(&grid, k_z, HalfInt::HALF);
        assert!((sideband_projection(&chi, &grid, k_z, HalfInt::HALF).norm() - 1.0).abs() < 1e-12);
        for n in [-5, -3, -1, 3, 5] {
            assert!(sideband_projection(&chi, &grid, k_z, HalfInt::half(n)).norm() < 1e-12);
        }
        let up = GridWavefunction::sideband(&grid, k_z, HalfInt::HALF);
        let down = GridWavefunction::sideband(&grid, k_z, HalfInt::MINUS_HALF);
        let mix = GridWavefunction::from_values(
            up.values.iter().zip(&down.values).map(|(a, b)| (a + b) / 2f64.sqrt()).collect(),
        );
        for n in [HalfInt::HALF, HalfInt::MINUS_HALF] {
            assert!((sideband_projection(&mix, &grid, k_z, n).norm_sqr() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn free_plane_wave_keeps_modulus() {
        let (grid, coeffs) = small_setup();
        let coeffs = coeffs.without_field();
        let k_z = coeffs.k_z / MICROMETRE;
        let chi0 = GridWavefunction::sideband(&grid, k_z, HalfInt::half(-1));
        let settings = PropagationSettings { n_steps: 200, record_every: 50, mode: StencilMode::Midpoint };
        let t = 200.0 * grid.dz / (coeffs.beta * C);
        let traj = propagate(&chi0, &grid, &coeffs, t, settings).unwrap();
        for snap in &traj.snapshots {
            for v in &snap.values {
                assert!((v.norm() - 1.0).abs() < 1e-10);
            }
            let p = sideband_projection(snap, &grid, k_z, HalfInt::half(-1)).norm_sqr();
            assert!((p - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn forward_then_backward_step_is_identity() {
        let (grid, coeffs) = small_setup();
        let dtau = 0.8 * grid.dz / MICROMETRE / coeffs.beta;
        let k_z = coeffs.k_z / MICROMETRE;
        let chi0 = GridWavefunction::sideband(&grid, k_z, HalfInt::half(-1));
        let tau_mid = 0.25 + 0.5 * dtau;
        let fwd = assemble_step(&grid, &coeffs, tau_mid, dtau, StencilMode::Midpoint).unwrap();
        let bwd = assemble_step(&grid, &coeffs, tau_mid, -dtau, StencilMode::Midpoint).unwrap();
        let x1 = fwd.implicit.solve(&fwd.explicit.mul_vec(&chi0.values)).unwrap();
        let x0 = bwd.implicit.solve(&bwd.explicit.mul_vec(&x1)).unwrap();
        for (a, b) in x0.iter().zip(&chi0.values) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn rejects_unnormalized_and_mismatched() {
        let (grid, coeffs) = small_setup();
        let bad = GridWavefunction::from_values(vec![Complex64::new(2.0, 0.0); grid.n_points]);
        let settings = PropagationSettings { n_steps: 1, record_every: 1, mode: StencilMode::Midpoint };
        assert!(matches!(
            propagate(&bad, &grid, &coeffs, 1e-18, settings),
            Err(Error::NotNormalized { .. })
        ));
        let short = GridWavefunction::from_values(vec![Complex64::new(1.0, 0.0); 4]);
        assert!(propagate(&short, &grid, &coeffs, 1e-18, settings).is_err());
    }

    #[test]
    fn periodicity_check() {
        let (grid, coeffs) = small_setup();
        assert!(grid.check_sideband_periodicity(coeffs.k_z / MICROMETRE).is_ok());
        let odd = SpatialGrid { domain_length: grid.domain_length * 1.5, ..grid };
        assert!(odd.check_sideband_periodicity(coeffs.k_z / MICROMETRE).is_err());
    }

    #[test]
    fn free_dispersion_phase() {
        let (e, f) = reference_point();
        let coeffs = TdseCoefficients::from_params(&e, &f).without_field();
        let grid = make_grid(coeffs.field_period(), 2, 4096).unwrap();
        let k = TAU / grid.domain_length;
        let chi0 = GridWavefunction::plane_wave(&grid, k);
        let n_steps = 400;
        let t = n_steps as f64 * grid.dz / (coeffs.beta * C);
        let settings = PropagationSettings { n_steps, record_every: n_steps, mode: StencilMode::Midpoint };
        let traj = propagate(&chi0, &grid, &coeffs, t, settings).unwrap();
        let last = traj.snapshots.last().unwrap();
        let c = sideband_projection(last, &grid, k / 0.5, HalfInt::HALF);
        let expected = coeffs.free_dispersion(k) * last.time;
        assert!(expected < PI);
        let measured = -c.arg();
        assert!((measured / expected - 1.0).abs() < 1e-6, "{measured} vs {expected}");
    }
}
