//! Semiclassical sideband ladder.
//!
//! Amplitudes `c_n` on the sideband lattice obey
//! `i ċ_n = n² ε c_n + κ c_{n+1} + κ* c_{n−1}`. In the co-moving Floquet frame
//! the generator is time independent, so states are propagated exactly through
//! one eigendecomposition and sampled at arbitrary times.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use num_traits::Float;

use crate::params::CouplingParams;
use crate::{Error, HalfInt, Result};

/// Default truncation for runs in the Bragg regime.
pub const DEFAULT_N_MAX: HalfInt = HalfInt::half(7);

/// Which sideband lattice to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LadderKind {
    /// Labels `±1/2, ±3/2, …`; the innermost pair is the two-level system.
    #[default]
    HalfInteger,
    /// Labels `0, ±1, ±2, …`.
    Integer,
}

fn check_truncation(n_max: HalfInt, kind: LadderKind) -> Result<()> {
    let ok = match kind {
        LadderKind::HalfInteger => n_max.is_half_integer() && n_max.twice() > 0,
        LadderKind::Integer => !n_max.is_half_integer() && n_max.twice() > 0,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "n_max",
            reason: "must be a positive label on the requested lattice (k/2 with odd k for half-integer ladders)",
        })
    }
}

/// Labels `−n_max, −n_max + 1, …, n_max`.
pub fn labels(n_max: HalfInt) -> Vec<HalfInt> {
    let t = n_max.twice();
    (0..=t).map(|k| HalfInt::from_twice(-t + 2 * k)).collect()
}

fn index_of(n_max: HalfInt, label: HalfInt) -> Option<usize> {
    let offset = label.twice() + n_max.twice();
    if offset < 0 || offset > 2 * n_max.twice() || offset % 2 != 0 {
        None
    } else {
        Some((offset / 2) as usize)
    }
}

/// Complex sideband amplitudes ordered from `−n_max` to `n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct SidebandState {
    n_max: HalfInt,
    amplitudes: Vec<Complex64>,
}

impl SidebandState {
    /// All weight on `label`.
    pub fn basis(n_max: HalfInt, label: HalfInt) -> Result<Self> {
        let dim = (n_max.twice() + 1) as usize;
        let idx = index_of(n_max, label).ok_or(Error::InvalidParameter {
            name: "label",
            reason: "not a sideband of this ladder",
        })?;
        let mut amplitudes = alloc::vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[idx] = Complex64::new(1.0, 0.0);
        Ok(Self { n_max, amplitudes })
    }

    pub fn from_amplitudes(n_max: HalfInt, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != (n_max.twice() + 1) as usize {
            return Err(Error::InvalidParameter {
                name: "amplitudes",
                reason: "length must be 2 n_max + 1",
            });
        }
        let state = Self { n_max, amplitudes };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(state)
    }

    pub fn n_max(&self) -> HalfInt {
        self.n_max
    }

    pub fn labels(&self) -> Vec<HalfInt> {
        labels(self.n_max)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, label: HalfInt) -> Option<Complex64> {
        index_of(self.n_max, label).map(|i| self.amplitudes[i])
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Tridiagonal Hermitian generator of the ladder, rad/s.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderHamiltonian {
    n_max: HalfInt,
    matrix: DMatrix<Complex64>,
}

impl LadderHamiltonian {
    /// Wrap an arbitrary matrix. No Hermiticity check happens here;
    /// [`evolve_ladder`] rejects non-Hermitian input.
    pub fn from_dense(n_max: HalfInt, matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = (n_max.twice() + 1) as usize;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::InvalidParameter {
                name: "matrix",
                reason: "shape must be (2 n_max + 1) square",
            });
        }
        Ok(Self { n_max, matrix })
    }

    pub fn n_max(&self) -> HalfInt {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn labels(&self) -> Vec<HalfInt> {
        labels(self.n_max)
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    /// `max |H_ij − conj(H_ji)|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

/// Coupled-mode generator truncated at `±n_max`: diagonal `n² ε`, `κ` above
/// and `κ*` below the diagonal, nothing else.
pub fn build_ladder(
    n_max: HalfInt,
    kind: LadderKind,
    coupling: &CouplingParams,
) -> Result<LadderHamiltonian> {
    check_truncation(n_max, kind)?;
    let labels = labels(n_max);
    let dim = labels.len();
    let kappa = coupling.kappa;
    let mut matrix = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for (i, n) in labels.iter().enumerate() {
        let v = n.value();
        matrix[(i, i)] = Complex64::new(v * v * coupling.epsilon, 0.0);
        if i + 1 < dim {
            matrix[(i, i + 1)] = kappa;
            matrix[(i + 1, i)] = kappa.conj();
        }
    }
    Ok(LadderHamiltonian { n_max, matrix })
}

/// Spectral decomposition of a ladder generator, reusable across times.
#[derive(Debug, Clone)]
pub struct LadderPropagator {
    n_max: HalfInt,
    energies: DVector<f64>,
    modes: DMatrix<Complex64>,
}

impl LadderPropagator {
    pub fn new(h: &LadderHamiltonian) -> Result<Self> {
        let scale = h.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let deviation = h.hermiticity_deviation();
        if deviation > 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NotHermitian { deviation });
        }
        let eig = SymmetricEigen::new(h.matrix.clone());
        Ok(Self {
            n_max: h.n_max,
            energies: eig.eigenvalues,
            modes: eig.eigenvectors,
        })
    }

    /// `exp(−i H t) ψ0`; `t` may be negative.
    pub fn evolve(&self, psi0: &SidebandState, t: f64) -> Result<SidebandState> {
        if psi0.n_max != self.n_max {
            return Err(Error::InvalidParameter {
                name: "psi0",
                reason: "state truncation does not match the Hamiltonian",
            });
        }
        let psi = DVector::from_column_slice(&psi0.amplitudes);
        let mut coeffs = self.modes.adjoint() * psi;
        for (c, &e) in coeffs.iter_mut().zip(self.energies.iter()) {
            *c *= Complex64::from_polar(1.0, -e * t);
        }
        let out = &self.modes * coeffs;
        Ok(SidebandState {
            n_max: self.n_max,
            amplitudes: out.iter().copied().collect(),
        })
    }
}

/// Sideband populations sampled along an evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderTrajectory {
    pub labels: Vec<HalfInt>,
    pub times: Vec<f64>,
    /// `populations[k][i]` is `|c_{labels[i]}(times[k])|²`.
    pub populations: Vec<Vec<f64>>,
    /// `max_k |Σ_n |c_n(t_k)|² − 1|`.
    pub norm_drift: f64,
}

impl LadderTrajectory {
    pub fn population_of(&self, label: HalfInt) -> Option<Vec<f64>> {
        let i = self.labels.iter().position(|&l| l == label)?;
        Some(self.populations.iter().map(|row| row[i]).collect())
    }

    /// Weight outside the `±1/2` pair (or outside `0` on an integer ladder).
    pub fn leakage(&self) -> Vec<f64> {
        self.populations
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&self.labels)
                    .filter(|(_, l)| l.abs().twice() > 1)
                    .map(|(p, _)| p)
                    .sum()
            })
            .collect()
    }
}

/// Propagate `psi0` under the time-independent `h` and record populations.
///
/// `times` must be non-negative and ascending.
pub fn evolve_ladder(
    h: &LadderHamiltonian,
    psi0: &SidebandState,
    times: &[f64],
) -> Result<LadderTrajectory> {
    let norm = psi0.norm_sqr();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm });
    }
    if times.iter().any(|&t| !(t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter {
            name: "times",
            reason: "must be non-negative and ascending",
        });
    }
    let prop = LadderPropagator::new(h)?;
    let mut populations = Vec::with_capacity(times.len());
    let mut norm_drift = 0.0f64;
    for &t in times {
        let state = prop.evolve(psi0, t)?;
        norm_drift = norm_drift.max((state.norm_sqr() - 1.0).abs());
        populations.push(state.populations());
    }
    Ok(LadderTrajectory {
        labels: h.labels(),
        times: times.to_vec(),
        populations,
        norm_drift,
    })
}

/// Two-level closed form `P_{+1/2}(t) = (1 + cos 2|κ|t) / 2`.
pub fn two_level_population(abs_kappa: f64, t: f64) -> f64 {
    0.5 * (1.0 + (2.0 * abs_kappa * t).cos())
}

/// Rabi period of a sampled `P_{+1/2}(t)` trace that starts near 1: twice the
/// time of its first minimum below 1/2, located by a parabola through the
/// lowest sample and its neighbours. `None` if no such minimum is sampled.
pub fn measured_rabi_period(times: &[f64], p_up: &[f64]) -> Option<f64> {
    if times.len() != p_up.len() || times.len() < 3 {
        return None;
    }
    let k = (1..p_up.len() - 1)
        .find(|&i| p_up[i] < 0.5 && p_up[i] <= p_up[i - 1] && p_up[i] < p_up[i + 1])?;
    Some(2.0 * parabolic_vertex(
        (times[k - 1], p_up[k - 1]),
        (times[k], p_up[k]),
        (times[k + 1], p_up[k + 1]),
    ))
}

/// Abscissa of the vertex of the parabola through three points.
pub fn parabolic_vertex(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    let (x0, y0) = a;
    let (x1, y1) = b;
    let (x2, y2) = c;
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curvature = (d12 - d01) / (x2 - x0);
    if curvature == 0.0 {
        return x1;
    }
    0.5 * (x0 + x1) - d01 / (2.0 * curvature)
}
