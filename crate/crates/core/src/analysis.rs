//! Analysis of inversion traces: projection onto the Rabi comb
//! `2g√(ν+1)`, photon-statistics recovery and collapse/revival detection.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_traits::Float;

use crate::quantum::PhotonDistribution;
use crate::{Error, Result};

/// Default minimum window, in beat periods of the closest comb pair.
pub const DEFAULT_MIN_BEAT_PERIODS: f64 = 20.0;
/// Default largest accepted condition number of the comb design matrix.
pub const DEFAULT_MAX_CONDITION: f64 = 1e8;
pub const DEFAULT_COLLAPSE_FRACTION: f64 = 0.1;
pub const DEFAULT_REVIVAL_FRACTION: f64 = 0.25;
/// Envelope window length in fast periods.
pub const ENVELOPE_WINDOW_PERIODS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::BadSeries("times and values differ in length"));
        }
        if times.len() < 2 {
            return Err(Error::BadSeries("need at least two samples"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::BadSeries("times must be strictly increasing"));
        }
        if times.iter().chain(&values).any(|x| !x.is_finite()) {
            return Err(Error::BadSeries("samples must be finite"));
        }
        Ok(Self { times, values })
    }

    /// Sample `f` at `n + 1` equally spaced times on `[t0, t1]`.
    pub fn sample<F: Fn(f64) -> f64>(t0: f64, t1: f64, n: usize, f: F) -> Result<Self> {
        let times: Vec<f64> = (0..=n).map(|i| t0 + (t1 - t0) * i as f64 / n as f64).collect();
        let values = times.iter().map(|&t| f(t)).collect();
        Self::new(times, values)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.times[self.times.len() - 1] - self.times[0]
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            times: self.times.clone(),
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }
}

/// `2g√(ν+1)` for `ν = 0 … nu_cap`.
pub fn comb_frequencies(g: f64, nu_cap: usize) -> Vec<f64> {
    (0..=nu_cap).map(|nu| 2.0 * g * ((nu + 1) as f64).sqrt()).collect()
}

/// Shortest window satisfying the beat rule for a comb up to `nu_cap`.
pub fn required_window(g: f64, nu_cap: usize, min_beat_periods: f64) -> f64 {
    let w = comb_frequencies(g, nu_cap.max(1));
    let gap = w.windows(2).map(|p| p[1] - p[0]).fold(f64::INFINITY, f64::min);
    min_beat_periods * TAU / gap
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    pub min_beat_periods: f64,
    pub max_condition: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            min_beat_periods: DEFAULT_MIN_BEAT_PERIODS,
            max_condition: DEFAULT_MAX_CONDITION,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RabiSpectrum {
    pub orders: Vec<usize>,
    /// rad/s.
    pub frequencies: Vec<f64>,
    /// Least-squares weights clipped at zero.
    pub weights: Vec<f64>,
    /// Least-squares weights before clipping.
    pub raw_weights: Vec<f64>,
    /// `Σ |w| over negative raw weights`.
    pub clipped_mass: f64,
    /// RMS of `signal − A w_raw`.
    pub residual_rms: f64,
    /// `σ_max/σ_min` of the design matrix.
    pub condition: f64,
    /// Periodogram `|Σ v e^{−iωt} δt|²/T` at the comb frequencies.
    pub periodogram: Vec<f64>,
}

/// Least-squares projection of `signal` onto `{cos(2g√(ν+1) t)}`.
pub fn rabi_spectrum(signal: &TimeSeries, g: f64, nu_cap: usize, options: SpectrumOptions) -> Result<RabiSpectrum> {
    if !(g > 0.0 && g.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "g",
            reason: "must be finite and positive",
        });
    }
    let required = required_window(g, nu_cap, options.min_beat_periods);
    if signal.duration() < required {
        return Err(Error::WindowTooShort {
            duration: signal.duration(),
            required,
        });
    }
    let freqs = comb_frequencies(g, nu_cap);
    let m = signal.len();
    let k = freqs.len();
    let a = DMatrix::from_fn(m, k, |i, j| (freqs[j] * signal.times[i]).cos());
    let svd = a.clone().svd(true, true);
    let s_max = svd.singular_values.max();
    let s_min = svd.singular_values.min();
    let condition = if s_min > 0.0 { s_max / s_min } else { f64::INFINITY };
    if !(condition <= options.max_condition) {
        return Err(Error::IllConditioned { condition });
    }
    let b = DVector::from_column_slice(&signal.values);
    let w = svd
        .solve(&b, 0.0)
        .map_err(|_| Error::IllConditioned { condition })?;
    let residual = &a * &w - &b;
    let residual_rms = (residual.norm_squared() / m as f64).sqrt();
    let raw_weights: Vec<f64> = w.iter().copied().collect();
    let clipped_mass = raw_weights.iter().filter(|x| **x < 0.0).map(|x| -x).sum();
    let weights = raw_weights.iter().map(|x| x.max(0.0)).collect();
    Ok(RabiSpectrum {
        orders: (0..=nu_cap).collect(),
        periodogram: periodogram(signal, &freqs),
        frequencies: freqs,
        weights,
        raw_weights,
        clipped_mass,
        residual_rms,
        condition,
    })
}

/// `|Σ_i v_i e^{−iωt_i} δt_i|² / T` with trapezoidal weights.
pub fn periodogram(signal: &TimeSeries, omegas: &[f64]) -> Vec<f64> {
    let t = &signal.times;
    let n = t.len();
    let dt: Vec<f64> = (0..n)
        .map(|i| {
            let lo = if i > 0 { t[i] - t[i - 1] } else { 0.0 };
            let hi = if i + 1 < n { t[i + 1] - t[i] } else { 0.0 };
            0.5 * (lo + hi)
        })
        .collect();
    let duration = signal.duration();
    omegas
        .iter()
        .map(|&w| {
            let (mut re, mut im) = (0.0, 0.0);
            for i in 0..n {
                let (s, c) = (w * t[i]).sin_cos();
                re += signal.values[i] * c * dt[i];
                im -= signal.values[i] * s * dt[i];
            }
            (re * re + im * im) / duration
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredStatistics {
    pub distribution: PhotonDistribution,
    /// `1 − Σ weights` before renormalization.
    pub mass_deficit: f64,
}

pub fn recover_photon_statistics(spectrum: &RabiSpectrum) -> Result<RecoveredStatistics> {
    if spectrum.weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::InvalidParameter {
            name: "weights",
            reason: "weights must be finite and non-negative",
        });
    }
    let total: f64 = spectrum.weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::EmptySpectrum);
    }
    let probs = spectrum.weights.iter().map(|w| w / total).collect();
    Ok(RecoveredStatistics {
        distribution: PhotonDistribution::from_probabilities(probs)?,
        mass_deficit: 1.0 - total,
    })
}

/// `Σ |p_i − q_i|` with missing entries taken as zero.
pub fn l1_distance(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len().max(q.len());
    (0..n)
        .map(|i| (p.get(i).copied().unwrap_or(0.0) - q.get(i).copied().unwrap_or(0.0)).abs())
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeOptions {
    /// Period of the fast oscillation, `π/(g√(⟨N⟩+1))`.
    pub fast_period: f64,
    pub collapse_fraction: f64,
    pub revival_fraction: f64,
}

impl EnvelopeOptions {
    pub fn new(fast_period: f64) -> Self {
        Self {
            fast_period,
            collapse_fraction: DEFAULT_COLLAPSE_FRACTION,
            revival_fraction: DEFAULT_REVIVAL_FRACTION,
        }
    }

    /// Fast period of the Rabi comb around `⟨N⟩` photons.
    pub fn for_mean_photons(g: f64, mean_photons: f64) -> Self {
        Self::new(core::f64::consts::PI / (g * (mean_photons + 1.0).sqrt()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollapseRevivalReport {
    /// `√2 ×` sliding RMS, so a steady sinusoid of amplitude `A` reads `A`.
    pub envelope: TimeSeries,
    /// Envelope at its first sample.
    pub initial: f64,
    pub collapsed: bool,
    pub collapse_time: Option<f64>,
    /// Times of the envelope peak of each revival.
    pub revival_times: Vec<f64>,
    /// Peak envelope of each revival divided by `initial`.
    pub revival_peak_fractions: Vec<f64>,
    pub options: EnvelopeOptions,
}

/// Sliding-RMS envelope of `signal` over a centered window of
/// [`ENVELOPE_WINDOW_PERIODS`] fast periods. Only times whose full window
/// lies inside the signal are kept.
pub fn envelope(signal: &TimeSeries, fast_period: f64) -> Result<TimeSeries> {
    if !(fast_period > 0.0 && fast_period.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "fast_period",
            reason: "must be finite and positive",
        });
    }
    let half = 0.5 * ENVELOPE_WINDOW_PERIODS * fast_period;
    let t = &signal.times;
    let n = t.len();
    let (mut lo, mut hi) = (0usize, 0usize);
    let mut times = Vec::new();
    let mut values = Vec::new();
    for i in 0..n {
        let (a, b) = (t[i] - half, t[i] + half);
        if a < t[0] || b > t[n - 1] {
            continue;
        }
        while t[lo] < a {
            lo += 1;
        }
        if hi < lo {
            hi = lo;
        }
        while hi + 1 < n && t[hi + 1] <= b {
            hi += 1;
        }
        let count = (hi - lo + 1) as f64;
        times.push(t[i]);
        // summed directly: a running prefix sum loses the small values
        // inside a collapse to cancellation
        let sum: f64 = signal.values[lo..=hi].iter().map(|v| v * v).sum();
        values.push((2.0 * sum / count).sqrt());
    }
    TimeSeries::new(times, values).map_err(|_| Error::WindowTooShort {
        duration: signal.duration(),
        required: 2.0 * half,
    })
}

/// Collapse is the first time the envelope drops below
/// `collapse_fraction × initial`. Each later excursion above
/// `revival_fraction × initial` is one revival, reported at its peak.
pub fn detect_collapse_revival(signal: &TimeSeries, options: EnvelopeOptions) -> Result<CollapseRevivalReport> {
    let env = envelope(signal, options.fast_period)?;
    let initial = env.values[0];
    let mut report = CollapseRevivalReport {
        envelope: env.clone(),
        initial,
        collapsed: false,
        collapse_time: None,
        revival_times: Vec::new(),
        revival_peak_fractions: Vec::new(),
        options,
    };
    if !(initial > 0.0) {
        return Ok(report);
    }
    let lo = options.collapse_fraction * initial;
    let hi = options.revival_fraction * initial;
    let Some(start) = env.values.iter().position(|&v| v < lo) else {
        return Ok(report);
    };
    report.collapsed = true;
    report.collapse_time = Some(env.times[start]);

    let mut peak: Option<(f64, f64)> = None;
    for (&t, &v) in env.times[start..].iter().zip(&env.values[start..]) {
        if v > hi {
            peak = match peak {
                Some((pt, pv)) if pv >= v => Some((pt, pv)),
                _ => Some((t, v)),
            };
        } else if let Some((pt, pv)) = peak.take() {
            report.revival_times.push(pt);
            report.revival_peak_fractions.push(pv / initial);
        }
    }
    if let Some((pt, pv)) = peak {
        report.revival_times.push(pt);
        report.revival_peak_fractions.push(pv / initial);
    }
    Ok(report)
}

/// Locate the minimum of a function that is locally even about its minimum
/// inside `[lo, hi]`, by bisection on `sign(f(t + h) − f(t − h))`.
pub fn refine_minimum<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, h: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid + h) - f(mid - h) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Period of `P(t)` starting at a maximum: twice its first local minimum.
/// The minimum is bracketed on the samples and refined on `f`.
pub fn measured_period<F: Fn(f64) -> f64>(f: F, t_end: f64, samples: usize) -> Option<f64> {
    let ts: Vec<f64> = (0..=samples).map(|i| t_end * i as f64 / samples as f64).collect();
    let vs: Vec<f64> = ts.iter().map(|&t| f(t)).collect();
    let i = (1..samples).find(|&i| vs[i] <= vs[i - 1] && vs[i] < vs[i + 1])?;
    let h = 0.25 * (ts[1] - ts[0]);
    Some(2.0 * refine_minimum(&f, ts[i - 1], ts[i + 1], h))
}
