//! Quantized electron-photon dynamics.
//!
//! The electron is reduced to the sidebands of the ladder and the field to a
//! single photon mode. For the two-level pair `|±1/2⟩` this is the
//! Jaynes-Cummings model, `|+1/2, ν⟩ ↔ |−1/2, ν+1⟩` with coupling `g√(ν+1)`.
//! All frequencies are angular (rad/s) and `ħ = 1` inside this module.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{LN_2, TAU};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use num_traits::Float;

use crate::constants::{E_CHARGE, M_E};
use crate::ladder::labels;
use crate::params::ElectronParams;
use crate::{Error, HalfInt, Result};

/// Largest truncation error accepted for a generated distribution.
pub const TAIL_TOLERANCE: f64 = 1e-6;
/// Auto-extension of `ν_max` stops here.
pub const NU_MAX_CAP: usize = 4096;
/// Fixed RK4 steps per fastest period in [`jc_evolve_detuned`].
pub const DETUNED_STEPS_PER_PERIOD: usize = 1000;
/// Default cap on excitation-block dimension in [`evolve_full_quantized`].
pub const DEFAULT_BLOCK_CAP: usize = 512;

const NORM_TOL: f64 = 1e-10;

/// `⌈N + 8√N + 10⌉`.
pub fn default_nu_max(mean_photons: f64) -> usize {
    let n = mean_photons.max(0.0);
    (n + 8.0 * n.sqrt() + 10.0).ceil() as usize
}

/// Photon-number distribution over `ν = 0 … ν_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonDistribution {
    probs: Vec<f64>,
    amplitudes: Option<Vec<Complex64>>,
}

impl PhotonDistribution {
    /// From amplitudes `c_ν`; `P_ν = |c_ν|²`.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let probs = amplitudes.iter().map(|c| c.norm_sqr()).collect();
        Self::checked(probs, Some(amplitudes))
    }

    /// From probabilities of a mixed state.
    pub fn from_probabilities(probs: Vec<f64>) -> Result<Self> {
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidParameter {
                name: "probs",
                reason: "probabilities must be finite and non-negative",
            });
        }
        Self::checked(probs, None)
    }

    fn checked(probs: Vec<f64>, amplitudes: Option<Vec<Complex64>>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidParameter {
                name: "probs",
                reason: "distribution needs at least one entry",
            });
        }
        let sum: f64 = probs.iter().sum();
        let tail = 1.0 - sum;
        if tail > TAIL_TOLERANCE || sum > 1.0 + 1e-10 {
            return Err(Error::TruncationTail {
                tail,
                nu_max: probs.len() - 1,
            });
        }
        Ok(Self { probs, amplitudes })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn amplitudes(&self) -> Option<&[Complex64]> {
        self.amplitudes.as_deref()
    }

    pub fn nu_max(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn is_pure(&self) -> bool {
        self.amplitudes.is_some()
    }

    /// `1 − Σ P_ν`.
    pub fn tail(&self) -> f64 {
        1.0 - self.probs.iter().sum::<f64>()
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.probs
            .iter()
            .enumerate()
            .map(|(n, p)| (n as f64 - m).powi(2) * p)
            .sum()
    }
}

/// Run `build(ν_max)` and double `ν_max` until the tail is within tolerance.
fn auto_extend<F>(start: usize, mut build: F) -> Result<PhotonDistribution>
where
    F: FnMut(usize) -> (Vec<f64>, Option<Vec<Complex64>>, f64),
{
    let mut nu_max = start.max(1);
    loop {
        let (probs, amps, tail) = build(nu_max);
        if tail <= TAIL_TOLERANCE {
            return Ok(PhotonDistribution { probs, amplitudes: amps });
        }
        if nu_max >= NU_MAX_CAP {
            return Err(Error::TruncationTail { tail, nu_max });
        }
        nu_max = (2 * nu_max).min(NU_MAX_CAP);
    }
}

fn tail_of(probs: &[f64]) -> f64 {
    (1.0 - probs.iter().sum::<f64>()).max(0.0)
}

/// Fock state `|m⟩` in a space of `ν_max + 1` levels (default `m`).
pub fn photon_fock(m: usize, nu_max: Option<usize>) -> Result<PhotonDistribution> {
    let nu_max = nu_max.unwrap_or(m);
    if m > nu_max {
        return Err(Error::InvalidParameter {
            name: "m",
            reason: "Fock index exceeds nu_max",
        });
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); nu_max + 1];
    amps[m] = Complex64::new(1.0, 0.0);
    PhotonDistribution::from_amplitudes(amps)
}

/// Coherent state `|α⟩`, `c_ν = e^{−|α|²/2} αᵛ/√ν!`.
pub fn photon_coherent(alpha: Complex64, nu_max: Option<usize>) -> Result<PhotonDistribution> {
    let n = alpha.norm_sqr();
    if !n.is_finite() {
        return Err(Error::InvalidParameter {
            name: "alpha",
            reason: "must be finite",
        });
    }
    let start = nu_max.unwrap_or_else(|| default_nu_max(n));
    auto_extend(start, |nu_max| {
        let ln_abs = if n > 0.0 { 0.5 * n.ln() } else { f64::NEG_INFINITY };
        let phase = alpha.arg();
        let mut log_fact = 0.0;
        let mut amps = Vec::with_capacity(nu_max + 1);
        for nu in 0..=nu_max {
            if nu > 0 {
                log_fact += (nu as f64).ln();
            }
            let log_mag = if nu == 0 {
                -0.5 * n
            } else {
                -0.5 * n + nu as f64 * ln_abs - 0.5 * log_fact
            };
            amps.push(Complex64::from_polar(log_mag.exp(), nu as f64 * phase));
        }
        let probs: Vec<f64> = amps.iter().map(|c| c.norm_sqr()).collect();
        let tail = tail_of(&probs);
        (probs, Some(amps), tail)
    })
}

/// Thermal (Bose-Einstein) state, `P_ν = n̄ᵛ/(1+n̄)^{ν+1}`. Mixed.
pub fn photon_thermal(nbar: f64, nu_max: Option<usize>) -> Result<PhotonDistribution> {
    if !(nbar >= 0.0 && nbar.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "nbar",
            reason: "must be finite and non-negative",
        });
    }
    let start = nu_max.unwrap_or_else(|| default_nu_max(nbar));
    let x = nbar / (1.0 + nbar);
    auto_extend(start, |nu_max| {
        let probs: Vec<f64> = (0..=nu_max)
            .map(|nu| x.powi(nu as i32) / (1.0 + nbar))
            .collect();
        let tail = x.powi(nu_max as i32 + 1);
        (probs, None, tail)
    })
}

/// Operator ordering for [`photon_squeezed_coherent`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SqueezeOrdering {
    /// `D(α) S(ξ) |0⟩`.
    #[default]
    DisplaceSqueezed,
    /// `S(ξ) D(α) |0⟩`.
    SqueezeDisplaced,
}

/// Displaced squeezed vacuum with `S(ξ) = exp[(ξ* a² − ξ a†²)/2]`.
pub fn photon_squeezed_coherent(
    alpha: Complex64,
    xi: Complex64,
    ordering: SqueezeOrdering,
    nu_max: Option<usize>,
) -> Result<PhotonDistribution> {
    if !(alpha.norm().is_finite() && xi.norm().is_finite()) {
        return Err(Error::InvalidParameter {
            name: "xi",
            reason: "alpha and xi must be finite",
        });
    }
    let r = xi.norm();
    let e_theta = if r > 0.0 { xi / r } else { Complex64::new(1.0, 0.0) };
    let (ch, sh) = (r.cosh(), r.sinh());
    // S(ξ)D(α) = D(α')S(ξ) with α' = α cosh r − α* e^{iθ} sinh r
    let alpha = match ordering {
        SqueezeOrdering::DisplaceSqueezed => alpha,
        SqueezeOrdering::SqueezeDisplaced => alpha * ch - alpha.conj() * e_theta * sh,
    };
    let mean = alpha.norm_sqr() + sh * sh;
    let start = nu_max.unwrap_or_else(|| default_nu_max(mean));
    let gamma = alpha * ch + alpha.conj() * e_theta * sh;
    let c0 = (-0.5 * alpha.norm_sqr() - 0.5 * alpha.conj() * alpha.conj() * e_theta * r.tanh()).exp()
        / ch.sqrt();
    auto_extend(start, |nu_max| {
        let mut amps = Vec::with_capacity(nu_max + 1);
        amps.push(c0);
        for n in 0..nu_max {
            let prev = if n == 0 { Complex64::new(0.0, 0.0) } else { amps[n - 1] };
            let next = (gamma * amps[n] - e_theta * sh * (n as f64).sqrt() * prev)
                / (ch * ((n + 1) as f64).sqrt());
            amps.push(next);
        }
        let probs: Vec<f64> = amps.iter().map(|c| c.norm_sqr()).collect();
        let tail = tail_of(&probs);
        (probs, Some(amps), tail)
    })
}

/// Couplings of the quantized model, all in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizedParams {
    pub g: f64,
    pub omega_q: f64,
    /// `Δ = ω_q − v0 q_z`.
    pub detuning: f64,
    /// Vacuum field amplitude `Ẽ_z` in V/m when `g` was derived from it.
    pub e_vac: Option<f64>,
}

impl QuantizedParams {
    pub fn with_coupling(g: f64, omega_q: f64, detuning: f64) -> Self {
        Self {
            g,
            omega_q,
            detuning,
            e_vac: None,
        }
    }

    /// `g = e k0 Ẽ_z / (2 γ m_e ω_q)`.
    pub fn from_vacuum_field(electron: &ElectronParams, e_vac: f64, omega_q: f64, detuning: f64) -> Result<Self> {
        if !(omega_q > 0.0 && omega_q.is_finite() && e_vac.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "omega_q",
                reason: "photon frequency must be finite and positive, field finite",
            });
        }
        let g = E_CHARGE * electron.k0 * e_vac / (2.0 * electron.gamma * M_E * omega_q);
        Ok(Self {
            g,
            omega_q,
            detuning,
            e_vac: Some(e_vac),
        })
    }
}

/// Joint amplitudes `c_{+1/2,ν}` and `c_{−1/2,ν}`, `ν = 0 … ν_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct JcJointState {
    up: Vec<Complex64>,
    down: Vec<Complex64>,
}

impl JcJointState {
    pub fn from_amplitudes(up: Vec<Complex64>, down: Vec<Complex64>) -> Result<Self> {
        if up.len() != down.len() || up.is_empty() {
            return Err(Error::InvalidParameter {
                name: "amplitudes",
                reason: "up and down rows must be non-empty and of equal length",
            });
        }
        let s = Self { up, down };
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(s)
    }

    /// Electron in `|+1/2⟩`, photon in the pure state `dist`. The photon
    /// amplitudes are renormalized to absorb the truncation tail.
    pub fn electron_up(dist: &PhotonDistribution) -> Result<Self> {
        let amps = dist.amplitudes().ok_or(Error::MixedPhotonState)?;
        Self::up_with(amps.to_vec())
    }

    /// Electron in `|+1/2⟩` with photon amplitudes `√P_ν`. Reproduces the
    /// electron populations of a mixed photon state, not its coherences.
    pub fn population_equivalent_up(dist: &PhotonDistribution) -> Result<Self> {
        Self::up_with(dist.probs().iter().map(|p| Complex64::new(p.sqrt(), 0.0)).collect())
    }

    fn up_with(mut up: Vec<Complex64>) -> Result<Self> {
        let s = up.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        up.iter_mut().for_each(|c| *c /= s);
        let down = vec![Complex64::new(0.0, 0.0); up.len()];
        Self::from_amplitudes(up, down)
    }

    pub fn up(&self) -> &[Complex64] {
        &self.up
    }

    pub fn down(&self) -> &[Complex64] {
        &self.down
    }

    pub fn nu_max(&self) -> usize {
        self.up.len() - 1
    }

    pub fn norm_sqr(&self) -> f64 {
        self.up.iter().chain(&self.down).map(|c| c.norm_sqr()).sum()
    }

    pub fn population_up(&self) -> f64 {
        self.up.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn population_down(&self) -> f64 {
        self.down.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Photon-number distribution with the electron traced out.
    pub fn photon_probabilities(&self) -> Vec<f64> {
        self.up
            .iter()
            .zip(&self.down)
            .map(|(u, d)| u.norm_sqr() + d.norm_sqr())
            .collect()
    }
}

/// `P_{+1/2}(t) = Σ_ν P_ν cos²(g√(ν+1) t)` for an electron starting in `|+1/2⟩`.
pub fn jc_population_up(dist: &PhotonDistribution, g: f64, times: &[f64]) -> Vec<f64> {
    let rates: Vec<f64> = (0..dist.probs.len()).map(|nu| g * ((nu + 1) as f64).sqrt()).collect();
    times
        .iter()
        .map(|&t| {
            dist.probs
                .iter()
                .zip(&rates)
                .map(|(p, w)| p * (w * t).cos().powi(2))
                .sum()
        })
        .collect()
}

/// `I(t) = Σ_ν P_ν cos(2g√(ν+1) t)`.
pub fn jc_inversion(dist: &PhotonDistribution, g: f64, times: &[f64]) -> Vec<f64> {
    let rates: Vec<f64> = (0..dist.probs.len())
        .map(|nu| 2.0 * g * ((nu + 1) as f64).sqrt())
        .collect();
    times
        .iter()
        .map(|&t| dist.probs.iter().zip(&rates).map(|(p, w)| p * (w * t).cos()).sum())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct JcTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<JcJointState>,
    pub max_norm_error: f64,
    /// RK4 step used, s.
    pub step: f64,
}

impl JcTrajectory {
    pub fn population_up(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.population_up()).collect()
    }

    pub fn population_down(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.population_down()).collect()
    }
}

/// Integrate the detuned pair equations
///
/// ```text
/// i ċ_{+1/2,ν}   = g√(ν+1) e^{−iΔt} c_{−1/2,ν+1}
/// i ċ_{−1/2,ν+1} = g√(ν+1) e^{+iΔt} c_{+1/2,ν}
/// ```
///
/// with fixed-step RK4 from `t = 0`. `times` must be non-decreasing and
/// non-negative. `c_{+1/2,ν_max}` has no partner inside the truncation and
/// is left untouched.
pub fn jc_evolve_detuned(joint0: &JcJointState, params: &QuantizedParams, times: &[f64]) -> Result<JcTrajectory> {
    let norm0 = joint0.norm_sqr();
    if (norm0 - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized { norm: norm0 });
    }
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::BadSeries("times must be finite, non-negative and non-decreasing"));
    }
    let (g, delta) = (params.g, params.detuning);
    if !(g.is_finite() && delta.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "g",
            reason: "coupling and detuning must be finite",
        });
    }
    let nu_max = joint0.nu_max();
    let rates: Vec<f64> = (0..nu_max).map(|nu| g * ((nu + 1) as f64).sqrt()).collect();
    let omega_fast = delta.abs().max(2.0 * g.abs() * ((nu_max + 1) as f64).sqrt());
    let h_max = if omega_fast > 0.0 {
        TAU / omega_fast / DETUNED_STEPS_PER_PERIOD as f64
    } else {
        f64::INFINITY
    };

    // Pair ν holds (c_{+1/2,ν}, c_{−1/2,ν+1}).
    let mut pairs: Vec<[Complex64; 2]> = (0..nu_max)
        .map(|nu| [joint0.up[nu], joint0.down[nu + 1]])
        .collect();
    let down0 = joint0.down[0];
    let up_top = joint0.up[nu_max];
    let mi = Complex64::new(0.0, -1.0);

    let deriv = |t: f64, w: f64, y: [Complex64; 2]| -> [Complex64; 2] {
        let ph = Complex64::from_polar(1.0, -delta * t);
        [mi * w * ph * y[1], mi * w * ph.conj() * y[0]]
    };

    let mut t = 0.0;
    let mut steps_done = 0usize;
    let mut max_norm_error = 0.0f64;
    let mut states = Vec::with_capacity(times.len());
    let mut step_used = 0.0f64;
    for &target in times {
        let span = target - t;
        if span > 0.0 {
            let n = if h_max.is_finite() { (span / h_max).ceil().max(1.0) as usize } else { 1 };
            let h = span / n as f64;
            step_used = step_used.max(h);
            for _ in 0..n {
                for (y, &w) in pairs.iter_mut().zip(&rates) {
                    let k1 = deriv(t, w, *y);
                    let y2 = [y[0] + k1[0] * (h / 2.0), y[1] + k1[1] * (h / 2.0)];
                    let k2 = deriv(t + h / 2.0, w, y2);
                    let y3 = [y[0] + k2[0] * (h / 2.0), y[1] + k2[1] * (h / 2.0)];
                    let k3 = deriv(t + h / 2.0, w, y3);
                    let y4 = [y[0] + k3[0] * h, y[1] + k3[1] * h];
                    let k4 = deriv(t + h, w, y4);
                    for c in 0..2 {
                        y[c] += (k1[c] + k2[c] * 2.0 + k3[c] * 2.0 + k4[c]) * (h / 6.0);
                    }
                }
                t += h;
                steps_done += 1;
            }
            t = target;
        }
        let mut up = Vec::with_capacity(nu_max + 1);
        let mut down = Vec::with_capacity(nu_max + 1);
        down.push(down0);
        for p in &pairs {
            up.push(p[0]);
            down.push(p[1]);
        }
        up.push(up_top);
        let state = JcJointState { up, down };
        let err = (state.norm_sqr() - norm0).abs();
        max_norm_error = max_norm_error.max(err);
        if err > NORM_TOL {
            return Err(Error::IntegratorFailure {
                step: steps_done,
                norm_error: err,
            });
        }
        states.push(state);
    }
    Ok(JcTrajectory {
        times: times.to_vec(),
        states,
        max_norm_error,
        step: step_used,
    })
}

/// Characteristic times of the resonant dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapseRevival {
    /// `π/g`.
    pub t_c: f64,
    /// `4π⟨N⟩/g`; `None` when `⟨N⟩ = 0`.
    pub tau_r_linear: Option<f64>,
    /// `2π√⟨N⟩/g`; `None` when `⟨N⟩ = 0`.
    pub tau_r_stationary_phase: Option<f64>,
}

pub fn collapse_revival_times(dist: &PhotonDistribution, g: f64) -> CollapseRevival {
    let n = dist.mean();
    let pi = core::f64::consts::PI;
    let positive = n > 0.0;
    CollapseRevival {
        t_c: pi / g,
        tau_r_linear: positive.then(|| 4.0 * pi * n / g),
        tau_r_stationary_phase: positive.then(|| 2.0 * pi * n.sqrt() / g),
    }
}

/// Populations of `|+1/2, 0⟩` and `|−1/2, 1⟩`: `(cos² gt, sin² gt)`.
pub fn vacuum_rabi(g: f64, times: &[f64]) -> Vec<(f64, f64)> {
    times
        .iter()
        .map(|&t| {
            let (s, c) = (g * t).sin_cos();
            (c * c, s * s)
        })
        .collect()
}

/// Resonant state `cos(gt)|+1/2,0⟩ − i sin(gt)|−1/2,1⟩`.
pub fn vacuum_rabi_state(g: f64, t: f64) -> JcJointState {
    let (s, c) = (g * t).sin_cos();
    JcJointState {
        up: vec![Complex64::new(c, 0.0), Complex64::new(0.0, 0.0)],
        down: vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, -s)],
    }
}

/// Von Neumann entropy (nats) of the reduced electron density matrix.
pub fn entanglement_entropy(joint: &JcJointState) -> f64 {
    let a = joint.population_up();
    let b = joint.population_down();
    let c: Complex64 = joint.up.iter().zip(&joint.down).map(|(u, d)| u * d.conj()).sum();
    if c.norm() == 0.0 && (a == 0.0 || b == 0.0) {
        return 0.0;
    }
    let tr = a + b;
    let disc = ((a - b).powi(2) + 4.0 * c.norm_sqr()).sqrt();
    let entropy: f64 = [(tr + disc) / (2.0 * tr), (tr - disc) / (2.0 * tr)]
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.ln())
        .sum();
    entropy.clamp(0.0, LN_2)
}

/// Joint state of the sideband ladder and the photon mode, indexed by
/// `(n, ν)` with `n` from `−n_max` to `n_max` and `ν = 0 … ν_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderFockState {
    n_max: HalfInt,
    nu_max: usize,
    /// Row-major: `amplitudes[i * (ν_max + 1) + ν]` for sideband index `i`.
    amplitudes: Vec<Complex64>,
}

impl LadderFockState {
    pub fn from_amplitudes(n_max: HalfInt, nu_max: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if n_max.twice() <= 0 {
            return Err(Error::InvalidParameter {
                name: "n_max",
                reason: "must be positive",
            });
        }
        let rows = n_max.twice() as usize + 1;
        if amplitudes.len() != rows * (nu_max + 1) {
            return Err(Error::InvalidParameter {
                name: "amplitudes",
                reason: "length must be (2 n_max + 1)(nu_max + 1)",
            });
        }
        let s = Self {
            n_max,
            nu_max,
            amplitudes,
        };
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(s)
    }

    /// Electron in sideband `n`, photon in the pure state `dist` (which
    /// fixes `ν_max`). Photon amplitudes are renormalized.
    pub fn product(n_max: HalfInt, n: HalfInt, dist: &PhotonDistribution) -> Result<Self> {
        let photon = dist.amplitudes().ok_or(Error::MixedPhotonState)?;
        let row = labels(n_max)
            .iter()
            .position(|&l| l == n)
            .ok_or(Error::InvalidParameter {
                name: "n",
                reason: "sideband is outside the truncation",
            })?;
        let nu_max = dist.nu_max();
        let s = photon.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); (n_max.twice() as usize + 1) * (nu_max + 1)];
        for (nu, c) in photon.iter().enumerate() {
            amplitudes[row * (nu_max + 1) + nu] = c / s;
        }
        Self::from_amplitudes(n_max, nu_max, amplitudes)
    }

    pub fn n_max(&self) -> HalfInt {
        self.n_max
    }

    pub fn nu_max(&self) -> usize {
        self.nu_max
    }

    pub fn labels(&self) -> Vec<HalfInt> {
        labels(self.n_max)
    }

    pub fn amplitude(&self, row: usize, nu: usize) -> Complex64 {
        self.amplitudes[row * (self.nu_max + 1) + nu]
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Electron sideband populations, photon traced out.
    pub fn sideband_populations(&self) -> Vec<f64> {
        self.amplitudes
            .chunks(self.nu_max + 1)
            .map(|row| row.iter().map(|c| c.norm_sqr()).sum())
            .collect()
    }

    pub fn photon_probabilities(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.nu_max + 1];
        for row in self.amplitudes.chunks(self.nu_max + 1) {
            for (acc, c) in p.iter_mut().zip(row) {
                *acc += c.norm_sqr();
            }
        }
        p
    }

    /// Probability in each excitation block, keyed by `2 N_exc = 2(n + ν)`.
    pub fn block_weights(&self) -> BTreeMap<i32, f64> {
        let mut w = BTreeMap::new();
        for (row, n) in self.labels().into_iter().enumerate() {
            for nu in 0..=self.nu_max {
                *w.entry(n.twice() + 2 * nu as i32).or_insert(0.0) += self.amplitude(row, nu).norm_sqr();
            }
        }
        w
    }
}

/// On-site energies `ε_n = n ω_q + n² ε` for which every `|n, ν⟩ ↔
/// |n+1, ν−1⟩` exchange is resonant up to the ladder curvature.
pub fn synchronous_profile(n_max: HalfInt, omega_q: f64, epsilon: f64) -> Vec<f64> {
    labels(n_max)
        .iter()
        .map(|n| {
            let x = n.value();
            x * omega_q + x * x * epsilon
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FullQuantizedTrajectory {
    pub times: Vec<f64>,
    pub labels: Vec<HalfInt>,
    pub states: Vec<LadderFockState>,
    /// Largest `|‖ψ(t)‖² − 1|`.
    pub max_norm_error: f64,
    /// Largest probability found outside the excitation blocks populated
    /// at `t = 0`.
    pub max_leak_between_blocks: f64,
    pub largest_block: usize,
}

impl FullQuantizedTrajectory {
    pub fn sideband_populations(&self) -> Vec<Vec<f64>> {
        self.states.iter().map(|s| s.sideband_populations()).collect()
    }

    /// Population in sidebands with `|n| ≥ 3/2`.
    pub fn outer_population(&self) -> Vec<f64> {
        self.states
            .iter()
            .map(|s| {
                s.sideband_populations()
                    .iter()
                    .zip(&self.labels)
                    .filter(|(_, n)| n.abs().twice() >= 3)
                    .map(|(p, _)| p)
                    .sum()
            })
            .collect()
    }
}

struct Block {
    /// Flat indices into the state.
    members: Vec<usize>,
    shift: f64,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    initial: Vec<Complex64>,
}

/// Evolve under
///
/// ```text
/// H = Σ ε_n c_n†c_n + ω_q(a†a + ½) + g Σ (c_n†c_{n−1} a + c_n†c_{n+1} a†)
/// ```
///
/// block by block in the conserved excitation number `N = n + ν`. Each block
/// is a real symmetric tridiagonal matrix and is diagonalized exactly.
/// `epsilon_n` holds the on-site energies from `−n_max` to `n_max`.
pub fn evolve_full_quantized(
    state0: &LadderFockState,
    epsilon_n: &[f64],
    omega_q: f64,
    g: f64,
    times: &[f64],
    block_cap: usize,
) -> Result<FullQuantizedTrajectory> {
    let lbl = state0.labels();
    if epsilon_n.len() != lbl.len() {
        return Err(Error::InvalidParameter {
            name: "epsilon_n",
            reason: "one on-site energy per sideband is required",
        });
    }
    if !(omega_q.is_finite() && g.is_finite()) || epsilon_n.iter().any(|e| !e.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "g",
            reason: "energies and coupling must be finite",
        });
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::BadSeries("times must be finite"));
    }
    let norm0 = state0.norm_sqr();
    if (norm0 - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized { norm: norm0 });
    }
    let cols = state0.nu_max + 1;

    let mut by_block: BTreeMap<i32, Vec<(usize, usize)>> = BTreeMap::new();
    for (row, n) in lbl.iter().enumerate() {
        for nu in 0..cols {
            by_block.entry(n.twice() + 2 * nu as i32).or_default().push((row, nu));
        }
    }

    let mut blocks = Vec::new();
    let mut largest = 0usize;
    for members in by_block.values() {
        let initial: Vec<Complex64> = members.iter().map(|&(r, nu)| state0.amplitude(r, nu)).collect();
        if initial.iter().all(|c| c.norm_sqr() == 0.0) {
            continue;
        }
        let dim = members.len();
        largest = largest.max(dim);
        if dim > block_cap {
            return Err(Error::BlockTooLarge { dim, cap: block_cap });
        }
        // Members are ordered by increasing row, so neighbours differ by one
        // sideband and one photon.
        let diag: Vec<f64> = members
            .iter()
            .map(|&(r, nu)| epsilon_n[r] + omega_q * (nu as f64 + 0.5))
            .collect();
        let shift = diag.iter().sum::<f64>() / dim as f64;
        let mut h = DMatrix::<f64>::zeros(dim, dim);
        for i in 0..dim {
            h[(i, i)] = diag[i] - shift;
            if i + 1 < dim {
                // |n, ν⟩ and |n+1, ν−1⟩ couple through c_{n+1}† c_n a with √ν
                let nu = members[i].1;
                let v = g * (nu as f64).sqrt();
                h[(i, i + 1)] = v;
                h[(i + 1, i)] = v;
            }
        }
        let eig = SymmetricEigen::new(h);
        blocks.push(Block {
            members: members.iter().map(|&(r, nu)| r * cols + nu).collect(),
            shift,
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
            eigenvectors: eig.eigenvectors,
            initial,
        });
    }

    let populated: BTreeMap<i32, ()> = state0
        .block_weights()
        .into_iter()
        .filter(|(_, w)| *w > 0.0)
        .map(|(k, _)| (k, ()))
        .collect();

    let mut states = Vec::with_capacity(times.len());
    let mut max_norm_error = 0.0f64;
    let mut max_leak = 0.0f64;
    for &t in times {
        let mut amps = vec![Complex64::new(0.0, 0.0); state0.amplitudes.len()];
        for b in &blocks {
            let v = &b.eigenvectors;
            let dim = b.members.len();
            let proj: Vec<Complex64> = (0..dim)
                .map(|k| {
                    let overlap: Complex64 = (0..dim).map(|i| b.initial[i] * v[(i, k)]).sum();
                    overlap * Complex64::from_polar(1.0, -b.eigenvalues[k] * t)
                })
                .collect();
            let global = Complex64::from_polar(1.0, -b.shift * t);
            for (i, &idx) in b.members.iter().enumerate() {
                let a: Complex64 = (0..dim).map(|k| proj[k] * v[(i, k)]).sum();
                amps[idx] = a * global;
            }
        }
        let state = LadderFockState {
            n_max: state0.n_max,
            nu_max: state0.nu_max,
            amplitudes: amps,
        };
        max_norm_error = max_norm_error.max((state.norm_sqr() - norm0).abs());
        let leak: f64 = state
            .block_weights()
            .iter()
            .filter(|(k, _)| !populated.contains_key(k))
            .map(|(_, w)| w)
            .sum();
        max_leak = max_leak.max(leak);
        states.push(state);
    }
    Ok(FullQuantizedTrajectory {
        times: times.to_vec(),
        labels: lbl,
        states,
        max_norm_error,
        max_leak_between_blocks: max_leak,
        largest_block: largest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn grid(t_end: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|i| t_end * i as f64 / n as f64).collect()
    }

    #[test]
    fn coherent_mean_and_tail() {
        let d = photon_coherent(c(2.6, 0.0), None).unwrap();
        assert!((d.mean() - 6.76).abs() < 1e-6);
        assert!(d.tail() < TAIL_TOLERANCE);
        for (p, a) in d.probs().iter().zip(d.amplitudes().unwrap()) {
            assert!((p - a.norm_sqr()).abs() < 1e-12);
        }
        assert!((d.variance() - 6.76).abs() < 1e-5);
    }

    #[test]
    fn thermal_values() {
        let d = photon_thermal(2.0, None).unwrap();
        assert!((d.probs()[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((d.probs()[1] - 2.0 / 9.0).abs() < 1e-15);
        assert!(d.tail() <= TAIL_TOLERANCE);
        assert!(!d.is_pure());
        // geometric series: Σ x^ν/(1+n̄) over all ν is one
        let x: f64 = 2.0 / 3.0;
        let partial: f64 = d.probs().iter().sum();
        assert!((partial + x.powi(d.nu_max() as i32 + 1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn explicit_truncation_too_small_is_extended() {
        let d = photon_coherent(c(3.0, 0.0), Some(5)).unwrap();
        assert!(d.nu_max() >= 20);
        assert!(matches!(
            photon_thermal(1e6, None),
            Err(Error::TruncationTail { .. })
        ));
    }

    #[test]
    fn fock_bounds() {
        assert!(photon_fock(3, Some(2)).is_err());
        let d = photon_fock(3, Some(10)).unwrap();
        assert_eq!(d.probs()[3], 1.0);
        assert_eq!(d.mean(), 3.0);
    }

    /// `exp(A)` for a dense complex matrix by scaling and squaring.
    fn expm(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let norm = a.iter().map(|x| x.norm()).fold(0.0, f64::max) * a.nrows() as f64;
        let s = (norm.max(1.0).log2().ceil() as i32 + 4).max(0);
        let scaled = a / Complex64::new(2f64.powi(s), 0.0);
        let n = a.nrows();
        let mut result = DMatrix::<Complex64>::identity(n, n);
        let mut term = DMatrix::<Complex64>::identity(n, n);
        for k in 1..30 {
            term = &term * &scaled / Complex64::new(k as f64, 0.0);
            result += &term;
        }
        for _ in 0..s {
            result = &result * &result;
        }
        result
    }

    fn operator_oracle(alpha: Complex64, xi: Complex64, ordering: SqueezeOrdering) -> Vec<Complex64> {
        let n = 257;
        let mut a = DMatrix::<Complex64>::zeros(n, n);
        for k in 1..n {
            a[(k - 1, k)] = c((k as f64).sqrt(), 0.0);
        }
        let ad = a.adjoint();
        let a2 = &a * &a;
        let ad2 = &ad * &ad;
        let d = expm(&(&ad * alpha - &a * alpha.conj()));
        let s = expm(&((&a2 * xi.conj() - &ad2 * xi) * c(0.5, 0.0)));
        let u = match ordering {
            SqueezeOrdering::DisplaceSqueezed => &d * &s,
            SqueezeOrdering::SqueezeDisplaced => &s * &d,
        };
        u.column(0).iter().copied().collect()
    }

    #[test]
    fn squeezed_coherent_matches_operator_construction() {
        let alpha = c(2.6, 0.0);
        for (xi, ordering) in [
            (c(0.4, 0.0), SqueezeOrdering::DisplaceSqueezed),
            (c(0.4, 0.0), SqueezeOrdering::SqueezeDisplaced),
            (Complex64::from_polar(0.4, 0.7), SqueezeOrdering::DisplaceSqueezed),
        ] {
            let d = photon_squeezed_coherent(alpha, xi, ordering, None).unwrap();
            let oracle = operator_oracle(alpha, xi, ordering);
            let amps = d.amplitudes().unwrap();
            for (nu, a) in amps.iter().enumerate() {
                assert!((a - oracle[nu]).norm() < 1e-9, "{ordering:?} ν={nu}: {a} vs {}", oracle[nu]);
            }
            assert!(d.tail() < TAIL_TOLERANCE);
        }
        let sq = photon_squeezed_coherent(alpha, c(0.4, 0.0), SqueezeOrdering::DisplaceSqueezed, None).unwrap();
        assert!((sq.mean() - (6.76 + 0.4f64.sinh().powi(2))).abs() < 1e-6);
    }

    #[test]
    fn population_examples() {
        let g = 2e11;
        let ts = grid(3.0 * PI / g, 300);
        let vac = photon_fock(0, Some(0)).unwrap();
        for (p, t) in jc_population_up(&vac, g, &ts).iter().zip(&ts) {
            assert!((p - (g * t).cos().powi(2)).abs() < 1e-14);
        }
        let f3 = photon_fock(3, Some(6)).unwrap();
        for (p, t) in jc_population_up(&f3, g, &ts).iter().zip(&ts) {
            assert!((p - (g * 2.0 * t).cos().powi(2)).abs() < 1e-14);
        }
        let coh = photon_coherent(c(2.6, 0.0), None).unwrap();
        assert!((jc_population_up(&coh, g, &[0.0])[0] - 1.0).abs() < TAIL_TOLERANCE);
        for (i, t) in jc_inversion(&vac, g, &ts).iter().zip(&ts) {
            assert!((i - (2.0 * g * t).cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn detuned_resonant_limit_matches_closed_form() {
        let g = 2e11;
        let vac = photon_fock(0, Some(1)).unwrap();
        let joint = JcJointState::electron_up(&vac).unwrap();
        let ts = grid(10.0 * PI / g, 500);
        let traj = jc_evolve_detuned(&joint, &QuantizedParams::with_coupling(g, 9e15, 0.0), &ts).unwrap();
        for (p, t) in traj.population_up().iter().zip(&ts) {
            assert!((p - (g * t).cos().powi(2)).abs() < 1e-8);
        }
        let coh = photon_coherent(c(2.6, 0.0), None).unwrap();
        let joint = JcJointState::electron_up(&coh).unwrap();
        let traj = jc_evolve_detuned(&joint, &QuantizedParams::with_coupling(g, 9e15, 0.0), &ts).unwrap();
        let exact = jc_population_up(&coh, g, &ts);
        // the closed form uses the untruncated weights; the state is renormalized
        let scale = 1.0 / coh.probs().iter().sum::<f64>();
        for (p, e) in traj.population_up().iter().zip(&exact) {
            assert!((p - e * scale).abs() < 1e-8);
        }
    }

    #[test]
    fn far_detuning_and_zero_coupling() {
        let g = 2e11;
        let vac = photon_fock(0, Some(1)).unwrap();
        let joint = JcJointState::electron_up(&vac).unwrap();
        let ts = grid(4.0 * PI / g, 400);
        let far = jc_evolve_detuned(&joint, &QuantizedParams::with_coupling(g, 9e15, 100.0 * g), &ts).unwrap();
        let min_up = far.population_up().into_iter().fold(1.0, f64::min);
        assert!(min_up > 1.0 - 1e-3, "{min_up}");
        let frozen = jc_evolve_detuned(&joint, &QuantizedParams::with_coupling(0.0, 9e15, 0.0), &ts).unwrap();
        assert!(frozen.states.iter().all(|s| *s == joint));
    }

    #[test]
    fn mixed_state_has_no_joint_amplitudes() {
        let th = photon_thermal(2.0, None).unwrap();
        assert_eq!(JcJointState::electron_up(&th), Err(Error::MixedPhotonState));
        let eq = JcJointState::population_equivalent_up(&th).unwrap();
        assert!((eq.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn times_and_vacuum_rabi() {
        let g = 2e11;
        let ct = collapse_revival_times(&photon_fock(0, Some(0)).unwrap(), g);
        assert!((ct.t_c - 15.707963e-12).abs() < 1e-17);
        assert!(ct.tau_r_linear.is_none());
        let coh = photon_coherent(c(2.6, 0.0), None).unwrap();
        let ct = collapse_revival_times(&coh, g);
        assert!((ct.tau_r_linear.unwrap() * g / (4.0 * PI * 6.76) - 1.0).abs() < 1e-6);
        assert!((ct.tau_r_stationary_phase.unwrap() * g / (2.0 * PI * 2.6) - 1.0).abs() < 1e-6);

        let v = vacuum_rabi(g, &[PI / 2.0 / g, PI / g]);
        assert!(v[0].0.abs() < 1e-15 && (v[0].1 - 1.0).abs() < 1e-15);
        assert!((v[1].0 - 1.0).abs() < 1e-15 && v[1].1.abs() < 1e-15);
    }

    #[test]
    fn entropy_examples() {
        let g = 1.0;
        assert_eq!(entanglement_entropy(&vacuum_rabi_state(g, 0.0)), 0.0);
        assert!((entanglement_entropy(&vacuum_rabi_state(g, PI / 4.0)) - LN_2).abs() < 1e-12);
        let s = vacuum_rabi_state(g, PI / 2.0);
        assert!(entanglement_entropy(&s) < 1e-12);
        let coh = photon_coherent(c(1.5, 0.0), None).unwrap();
        let joint = JcJointState::electron_up(&coh).unwrap();
        let ts = grid(20.0, 50);
        let traj = jc_evolve_detuned(&joint, &QuantizedParams::with_coupling(1.0, 0.0, 0.3), &ts).unwrap();
        for s in &traj.states {
            let e = entanglement_entropy(s);
            assert!((0.0..=LN_2).contains(&e));
        }
    }

    #[test]
    fn full_quantized_two_level_matches_closed_form() {
        let g = 2e11;
        let omega_q = 9.42e15;
        let n_max = HalfInt::HALF;
        let coh = photon_coherent(c(2.6, 0.0), None).unwrap();
        let state = LadderFockState::product(n_max, HalfInt::HALF, &coh).unwrap();
        let eps = synchronous_profile(n_max, omega_q, 1.4e14);
        let ts = grid(20.0 / g, 200);
        let traj = evolve_full_quantized(&state, &eps, omega_q, g, &ts, DEFAULT_BLOCK_CAP).unwrap();
        let scale = 1.0 / coh.probs().iter().sum::<f64>();
        let exact = jc_population_up(&coh, g, &ts);
        // +1/2 row paired with −1/2 one photon higher; the top photon state
        // of the +1/2 row has no partner inside the truncation
        let top = coh.probs()[coh.nu_max()] * scale;
        for (pops, e) in traj.sideband_populations().iter().zip(&exact) {
            assert!((pops[1] - e * scale).abs() < 1e-8 + top);
        }
        assert!(traj.max_norm_error < 1e-10);
        assert!(traj.max_leak_between_blocks <= 1e-12);
    }

    #[test]
    fn confinement_controls_sideband_spread() {
        let g = 1.0;
        let coh = photon_coherent(c(2.6, 0.0), None).unwrap();
        let n_max = HalfInt::half(9);
        let state = LadderFockState::product(n_max, HalfInt::HALF, &coh).unwrap();
        let ts = grid(30.0, 300);
        let kappa = g * 2.6;
        let strong = synchronous_profile(n_max, 0.0, 40.0 * kappa);
        let weak = synchronous_profile(n_max, 0.0, 0.05 * kappa);
        let outer = |eps: &[f64]| {
            let tr = evolve_full_quantized(&state, eps, 0.0, g, &ts, DEFAULT_BLOCK_CAP).unwrap();
            assert!(tr.max_leak_between_blocks <= 1e-12);
            tr.outer_population().into_iter().fold(0.0, f64::max)
        };
        assert!(outer(&strong) < 0.01);
        assert!(outer(&weak) > 0.5);
    }

    #[test]
    fn block_cap_is_enforced() {
        let coh = photon_coherent(c(2.6, 0.0), None).unwrap();
        let n_max = HalfInt::half(9);
        let state = LadderFockState::product(n_max, HalfInt::HALF, &coh).unwrap();
        let eps = synchronous_profile(n_max, 0.0, 1.0);
        assert!(matches!(
            evolve_full_quantized(&state, &eps, 0.0, 1.0, &[0.0], 4),
            Err(Error::BlockTooLarge { .. })
        ));
    }

    #[test]
    fn semiclassical_limit() {
        let kappa = 1.0;
        let g = kappa / 20.0;
        let d = photon_coherent(c(20.0, 0.0), None).unwrap();
        let t_c = PI / g;
        let dev_until = |frac: f64| {
            let ts = grid(frac * t_c, 20_000);
            jc_inversion(&d, g, &ts)
                .iter()
                .zip(&ts)
                .map(|(i, t)| (i - (2.0 * kappa * t).cos()).abs())
                .fold(0.0, f64::max)
        };
        assert!(dev_until(0.1) <= 0.05);
        // beyond that the spread of √(ν+1) dephases the signal with a
        // Gaussian envelope e^{−(gt)²/2}
        let gt = 0.2 * PI;
        assert!((dev_until(0.2) - (1.0 - (-0.5 * gt * gt).exp())).abs() < 0.01);
    }
}
