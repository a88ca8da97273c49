//! One function per scenario, each turning a config into tables and a report.

use std::f64::consts::{PI, TAU};

use rabi_core::analysis::{
    detect_collapse_revival, l1_distance, measured_period, rabi_spectrum, recover_photon_statistics,
    required_window, EnvelopeOptions, SpectrumOptions, TimeSeries,
};
use rabi_core::constants::C;
use rabi_core::interferometry::{
    accumulated_phase, gravity_length_for_phase, run_sequence, unitarity_error, visibility, PhaseEnvironment,
    Segment, SequenceSpec, TwoLevelState,
};
use rabi_core::ladder::{build_ladder, evolve_ladder, measured_rabi_period, two_level_population, LadderKind, SidebandState};
use rabi_core::params::{derive_coupling, regime_classify, regime_map_row, AxisSpec, CouplingParams, ElectronParams, FieldParams, Regime};
use rabi_core::quantum::{
    collapse_revival_times, entanglement_entropy, jc_evolve_detuned, jc_inversion, jc_population_up,
    photon_coherent, photon_fock, photon_squeezed_coherent, photon_thermal, vacuum_rabi, vacuum_rabi_state,
    JcJointState, PhotonDistribution, QuantizedParams, SqueezeOrdering,
};
use rabi_core::tdse::{
    propagate, GridWavefunction, PropagationSettings, StencilMode, TdseCoefficients, TdseResolution, TdseWarning,
};
use rabi_core::{Complex64, HalfInt};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{parse_label, Ordering, PhotonState, QuantumSolver, RunConfig, Scenario, Stencil};
use crate::output::{distribution_json, finite_or_string, Table};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plot {
    Lines,
    Heatmap,
}

/// A table written as `<stem><suffix>.csv` / `.json`.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub suffix: &'static str,
    pub table: Table,
    pub plot: Plot,
    pub title: String,
}

/// Everything a scenario produces.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub datasets: Vec<Dataset>,
    pub report: Value,
    /// Extra JSON documents written as `<stem>.<name>.json`.
    pub documents: Vec<(&'static str, Value)>,
}

pub fn run(scenario: Scenario, cfg: &RunConfig) -> Result<Artifacts, CliError> {
    match scenario {
        Scenario::RegimeMap => regime_map(cfg),
        Scenario::Ladder => ladder(cfg),
        Scenario::Tdse => tdse(cfg),
        Scenario::Interfere => interfere(cfg),
        Scenario::Quantum => quantum(cfg),
        Scenario::Vacuum => vacuum(cfg),
        Scenario::Spectrum => spectrum(cfg),
    }
}

fn physical(cfg: &RunConfig) -> Result<(ElectronParams, FieldParams, CouplingParams), CliError> {
    let electron = ElectronParams::from_beta(cfg.electron.beta)?;
    let f = &cfg.field;
    let field = FieldParams::synchronized(&electron, f.e_z, f.lambda_l, f.phi0, f.harmonic)?;
    let coupling = derive_coupling(&electron, &field)?;
    Ok((electron, field, coupling))
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Bragg => "bragg",
        Regime::RamanNath => "raman-nath",
        Regime::Boundary => "boundary",
    }
}

fn coupling_report(electron: &ElectronParams, field: &FieldParams, c: &CouplingParams) -> Result<Value, CliError> {
    Ok(json!({
        "beta": electron.beta,
        "gamma": electron.gamma,
        "v0_m_per_s": electron.v0,
        "omega_l_rad_per_s": field.omega_l,
        "q_z_rad_per_m": field.q_z,
        "grating_period_m": field.grating_period,
        "epsilon_rad_per_s": c.epsilon,
        "abs_kappa_rad_per_s": c.abs_kappa(),
        "q_ratio": finite_or_string(c.q_ratio),
        "regime": regime_name(regime_classify(c)?),
        "rabi_period_s": finite_or_string(c.rabi_period),
        "interaction_length_m": finite_or_string(c.interaction_length),
        "grating_periods_per_rabi_cycle": finite_or_string(c.interaction_length / field.grating_period),
        "detuning_rad_per_s": c.detuning,
    }))
}

fn linspace(t_end: f64, samples: usize) -> Vec<f64> {
    let last = (samples - 1) as f64;
    (0..samples).map(|i| t_end * i as f64 / last).collect()
}

fn regime_map(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let r = &cfg.regime_map;
    let axis = |min, max, points| if r.log { AxisSpec::log(min, max, points) } else { AxisSpec::linear(min, max, points) };
    let betas = axis(r.beta_min, r.beta_max, r.beta_points).values();
    let fields = axis(r.field_min, r.field_max, r.field_points).values();
    let omega_l = TAU * C / cfg.field.lambda_l;
    let rows: Vec<Vec<f64>> = betas
        .par_iter()
        .map(|&b| regime_map_row(b, &fields, omega_l))
        .collect::<Result<_, _>>()?;

    let mut table = Table::new(["beta", "E_z_V_per_m", "ln_Q", "regime_sign"]);
    let mut counts = [0usize; 3];
    for (b, row) in betas.iter().zip(&rows) {
        for (e, &ln_q) in fields.iter().zip(row) {
            let sign = match rabi_core::params::classify_q(ln_q.exp()) {
                Ok(Regime::Bragg) => 1.0,
                Ok(Regime::RamanNath) => -1.0,
                _ => 0.0,
            };
            counts[(sign + 1.0) as usize] += 1;
            table.push(vec![*b, *e, ln_q, sign]);
        }
    }
    let report = json!({
        "scenario": "regime-map",
        "omega_l_rad_per_s": omega_l,
        "beta_points": betas.len(),
        "field_points": fields.len(),
        "log_axes": r.log,
        "cells_bragg": counts[2],
        "cells_raman_nath": counts[0],
        "cells_boundary": counts[1],
        "regime_sign": "+1 Bragg (Q > 1), -1 Raman-Nath (Q < 1), 0 boundary",
    });
    Ok(Artifacts {
        datasets: vec![Dataset {
            suffix: "",
            table,
            plot: Plot::Heatmap,
            title: "ln Q over (beta, E_z); dashed: Q = 1".into(),
        }],
        report,
        documents: Vec::new(),
    })
}

fn ladder(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let (electron, field, coupling) = physical(cfg)?;
    let n_max = parse_label("ladder.n_max", &cfg.ladder.n_max)?;
    let initial = parse_label("ladder.initial", &cfg.ladder.initial)?;
    let kind = if n_max.is_half_integer() { LadderKind::HalfInteger } else { LadderKind::Integer };
    if initial.is_half_integer() != n_max.is_half_integer() || initial.abs() > n_max {
        return Err(CliError::Config(format!(
            "`ladder.initial` = {initial} is not a label of the ladder truncated at {n_max}"
        )));
    }
    let h = build_ladder(n_max, kind, &coupling)?;
    let psi0 = SidebandState::basis(n_max, initial)?;
    let times = linspace(cfg.ladder.rabi_cycles * coupling.rabi_period, cfg.ladder.samples);
    let tr = evolve_ladder(&h, &psi0, &times)?;
    let leak = tr.leakage();
    let inner = initial.abs() == HalfInt::HALF;

    let mut table = match kind {
        LadderKind::HalfInteger if inner => Table::new(["t_s", "P_up", "P_down", "P_outer", "P_initial_two_level"]),
        LadderKind::HalfInteger => Table::new(["t_s", "P_up", "P_down", "P_outer"]),
        LadderKind::Integer => Table::new(["t_s", "P_0", "P_outer"]),
    };
    let up = tr.population_of(HalfInt::HALF);
    let down = tr.population_of(HalfInt::MINUS_HALF);
    let zero = tr.population_of(HalfInt::whole(0));
    for (k, &t) in times.iter().enumerate() {
        match kind {
            LadderKind::HalfInteger => {
                let mut row = vec![t, up.as_ref().unwrap()[k], down.as_ref().unwrap()[k], leak[k]];
                if inner {
                    row.push(two_level_population(coupling.abs_kappa(), t));
                }
                table.push(row);
            }
            LadderKind::Integer => table.push(vec![t, zero.as_ref().unwrap()[k], leak[k]]),
        }
    }
    let initial_pop = tr.population_of(initial).unwrap();
    let measured = measured_rabi_period(&times, &initial_pop);
    let report = json!({
        "scenario": "ladder",
        "coupling": coupling_report(&electron, &field, &coupling)?,
        "n_max": n_max.to_string(),
        "initial": initial.to_string(),
        "measured_rabi_period_s": measured,
        "max_outer_population": leak.iter().copied().fold(0.0, f64::max),
        "norm_drift": tr.norm_drift,
    });
    Ok(Artifacts {
        datasets: vec![Dataset {
            suffix: "",
            table,
            plot: Plot::Lines,
            title: format!("Sideband populations, Q = {:.3}", coupling.q_ratio),
        }],
        report,
        documents: Vec::new(),
    })
}

fn tdse(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let (electron, field, coupling) = physical(cfg)?;
    let t = &cfg.tdse;
    let initial = parse_label("tdse.initial", &t.initial)?;
    let coeffs = TdseCoefficients::from_params(&electron, &field);
    let resolution = TdseResolution {
        field_periods: t.field_periods,
        points_per_period: t.points_per_period,
        courant: t.courant,
    };
    let grid = resolution.grid(&coeffs)?;
    let duration = t.rabi_cycles * coupling.rabi_period;
    let n_steps = resolution.steps_for(&grid, &coeffs, duration);
    let settings = PropagationSettings {
        n_steps,
        record_every: (n_steps / t.snapshots).max(1),
        mode: match t.stencil {
            Stencil::Midpoint => StencilMode::Midpoint,
            Stencil::Literal => StencilMode::Literal,
        },
    };
    let chi0 = GridWavefunction::sideband(&grid, field.q_z, initial);
    let traj = propagate(&chi0, &grid, &coeffs, duration, settings)?;

    let labels: Vec<HalfInt> = (-5..=5).step_by(2).map(HalfInt::half).collect();
    let pops = traj.sideband_populations(&grid, field.q_z, &labels);
    let idx = |l: HalfInt| labels.iter().position(|&x| x == l).unwrap();
    let (iu, id) = (idx(HalfInt::HALF), idx(HalfInt::MINUS_HALF));
    let inner = initial.abs() == HalfInt::HALF;
    let ii = labels.iter().position(|&x| x == initial);
    let mut table = if inner {
        Table::new(["t_s", "P_up", "P_down", "P_outer", "P_initial_two_level"])
    } else {
        Table::new(["t_s", "P_up", "P_down", "P_outer"])
    };
    let mut sq = 0.0;
    let times = traj.times();
    for (time, p) in times.iter().zip(&pops) {
        let outer: f64 = p.iter().enumerate().filter(|(i, _)| *i != iu && *i != id).map(|(_, v)| v).sum();
        let mut row = vec![*time, p[iu], p[id], outer];
        if inner {
            let two_level = two_level_population(coupling.abs_kappa(), *time);
            sq += (p[ii.unwrap()] - two_level).powi(2);
            row.push(two_level);
        }
        table.push(row);
    }
    let rms = (sq / times.len() as f64).sqrt();
    let report = json!({
        "scenario": "tdse",
        "coupling": coupling_report(&electron, &field, &coupling)?,
        "initial": initial.to_string(),
        "grid_points": grid.n_points,
        "dz_m": grid.dz,
        "domain_length_m": grid.domain_length,
        "steps": n_steps,
        "dtau_um": traj.dtau,
        "courant": electron.beta * traj.dtau * rabi_core::constants::MICROMETRE / grid.dz,
        "stencil": format!("{:?}", settings.mode).to_lowercase(),
        "cumulative_norm_drift": traj.cumulative_norm_drift,
        "max_step_norm_change": traj.max_step_norm_change,
        "warnings": traj.warnings.iter().map(|w| match w {
            TdseWarning::NormDrift { step, drift } => json!({"norm_drift": {"step": step, "drift": drift}}),
        }).collect::<Vec<_>>(),
        "rms_deviation_from_two_level": if inner { json!(rms) } else { Value::Null },
    });
    Ok(Artifacts {
        datasets: vec![Dataset {
            suffix: "",
            table,
            plot: Plot::Lines,
            title: "Sideband populations from the envelope equation".into(),
        }],
        report,
        documents: Vec::new(),
    })
}

fn interfere(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let (electron, field, coupling) = physical(cfg)?;
    let e = &cfg.interfere.environment;
    let env = PhaseEnvironment {
        e_local: e.e_local,
        l1: e.l1,
        l2: e.l2,
        l3: e.l3,
        gravity: e.gravity,
        q: field.q_z,
        v0: electron.v0,
        extra_phase: e.extra_phase,
    };
    let env_phase = accumulated_phase(&env)?;
    let pulse = |theta: f64| Segment::Pulse {
        theta,
        kappa: coupling.abs_kappa(),
        epsilon: coupling.epsilon,
    };
    let n = cfg.interfere.phases;
    let scan: Vec<f64> = linspace(TAU, n);
    let rows: Vec<Vec<f64>> = scan
        .par_iter()
        .map(|&dphi| -> Result<Vec<f64>, CliError> {
            let seq = SequenceSpec::new(vec![
                pulse(PI / 2.0),
                Segment::drift(dphi + env_phase),
                pulse(PI),
                Segment::drift(0.0),
                pulse(PI / 2.0),
            ])?;
            let out = run_sequence(&seq, &TwoLevelState::UP)?;
            let v = visibility(out.p_up, out.p_down)?;
            Ok(vec![dphi, out.p_up, out.p_down, v, (dphi + env_phase).cos(), unitarity_error(&seq.unitary())])
        })
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(["delta_phi_rad", "P_up", "P_down", "visibility", "visibility_cos"]);
    let mut worst_dev = 0.0f64;
    let mut worst_unitarity = 0.0f64;
    for r in rows {
        worst_dev = worst_dev.max((r[3] - r[4]).abs());
        worst_unitarity = worst_unitarity.max(r[5]);
        table.push(r[..5].to_vec());
    }
    let l3_pi = gravity_length_for_phase(PI, field.q_z, e.gravity, electron.v0)?;
    let report = json!({
        "scenario": "interfere",
        "coupling": coupling_report(&electron, &field, &coupling)?,
        "sequence": "pi/2 - drift(delta_phi + environment) - pi - pi/2",
        "environment_phase_rad": env_phase,
        "gravity_length_for_pi_m": l3_pi,
        "max_visibility_deviation_from_cos": worst_dev,
        "max_unitarity_error": worst_unitarity,
    });
    Ok(Artifacts {
        datasets: vec![Dataset {
            suffix: "",
            table,
            plot: Plot::Lines,
            title: "Mach-Zehnder fringe".into(),
        }],
        report,
        documents: Vec::new(),
    })
}

fn photon_distribution(cfg: &RunConfig) -> Result<PhotonDistribution, CliError> {
    let p = &cfg.photon;
    let nu_max = (p.nu_max > 0).then_some(p.nu_max);
    let alpha = Complex64::new(p.alpha_re, p.alpha_im);
    Ok(match p.state {
        PhotonState::Fock => photon_fock(p.fock, nu_max)?,
        PhotonState::Coherent => photon_coherent(alpha, nu_max)?,
        PhotonState::Thermal => photon_thermal(p.nbar, nu_max)?,
        PhotonState::Squeezed => photon_squeezed_coherent(
            alpha,
            Complex64::new(p.xi_re, p.xi_im),
            match p.ordering {
                Ordering::DisplaceSqueezed => SqueezeOrdering::DisplaceSqueezed,
                Ordering::SqueezeDisplaced => SqueezeOrdering::SqueezeDisplaced,
            },
            nu_max,
        )?,
    })
}

fn distribution_report(d: &PhotonDistribution) -> Value {
    json!({
        "mean": d.mean(),
        "variance": d.variance(),
        "nu_max": d.nu_max(),
        "tail": d.tail(),
        "pure": d.is_pure(),
    })
}

fn omega_q(cfg: &RunConfig) -> f64 {
    if cfg.quantized.omega_q > 0.0 {
        cfg.quantized.omega_q
    } else {
        TAU * C / cfg.field.lambda_l
    }
}

fn quantum(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let dist = photon_distribution(cfg)?;
    let q = &cfg.quantized;
    let g = q.g;
    let times = linspace(cfg.quantum.t_end_g / g, cfg.quantum.samples);
    let closed = match cfg.quantum.solver {
        QuantumSolver::Auto => q.detuning == 0.0,
        QuantumSolver::ClosedForm => true,
        QuantumSolver::Rk4 => false,
    };
    let mut integrator = Value::Null;
    let (p_up, p_down): (Vec<f64>, Vec<f64>) = if closed {
        let up: Vec<f64> = times.par_chunks(256).flat_map_iter(|c| jc_population_up(&dist, g, c)).collect();
        let down = up.iter().map(|p| 1.0 - p).collect();
        (up, down)
    } else {
        let joint = if dist.is_pure() {
            JcJointState::electron_up(&dist)?
        } else {
            JcJointState::population_equivalent_up(&dist)?
        };
        let tr = jc_evolve_detuned(&joint, &QuantizedParams::with_coupling(g, omega_q(cfg), q.detuning), &times)?;
        integrator = json!({
            "method": "rk4",
            "step_s": tr.step,
            "max_norm_error": tr.max_norm_error,
            "mixed_state_as_population_equivalent_pure_state": !dist.is_pure(),
        });
        (tr.population_up(), tr.population_down())
    };
    let inversion: Vec<f64> = p_up.iter().zip(&p_down).map(|(u, d)| u - d).collect();

    let mut table = Table::new(["t_s", "P_up", "P_down", "inversion"]);
    for k in 0..times.len() {
        table.push(vec![times[k], p_up[k], p_down[k], inversion[k]]);
    }
    let series = TimeSeries::new(times.clone(), inversion)?;
    let mut opts = EnvelopeOptions::for_mean_photons(g, dist.mean());
    opts.collapse_fraction = cfg.quantum.collapse_fraction;
    opts.revival_fraction = cfg.quantum.revival_fraction;
    let mut datasets = vec![Dataset {
        suffix: "",
        table,
        plot: Plot::Lines,
        title: format!("Electron populations, <N> = {:.3}", dist.mean()),
    }];
    let detection = match detect_collapse_revival(&series, opts) {
        Ok(rep) => {
            let mut env = Table::new(["t_s", "envelope"]);
            for (t, v) in rep.envelope.times().iter().zip(rep.envelope.values()) {
                env.push(vec![*t, *v]);
            }
            datasets.push(Dataset {
                suffix: ".envelope",
                table: env,
                plot: Plot::Lines,
                title: "Inversion envelope".into(),
            });
            json!({
                "fast_period_s": opts.fast_period,
                "collapse_fraction": opts.collapse_fraction,
                "revival_fraction": opts.revival_fraction,
                "initial_envelope": rep.initial,
                "collapsed": rep.collapsed,
                "collapse_time_s": rep.collapse_time,
                "revival_times_s": rep.revival_times,
                "revival_peak_fractions": rep.revival_peak_fractions,
            })
        }
        Err(e) => json!({ "skipped": e.to_string() }),
    };
    let refs = collapse_revival_times(&dist, g);
    let report = json!({
        "scenario": "quantum",
        "g_rad_per_s": g,
        "omega_q_rad_per_s": omega_q(cfg),
        "detuning_rad_per_s": q.detuning,
        "solver": if closed { "closed-form" } else { "rk4" },
        "integrator": integrator,
        "photons": distribution_report(&dist),
        "reference_times": {
            "t_c_s": refs.t_c,
            "tau_r_linear_s": refs.tau_r_linear,
            "tau_r_stationary_phase_s": refs.tau_r_stationary_phase,
        },
        "detected": detection,
    });
    Ok(Artifacts {
        datasets,
        report,
        documents: vec![("distribution", distribution_json(dist.probs()))],
    })
}

fn vacuum(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let g = cfg.quantized.g;
    let period = PI / g;
    let times = linspace(cfg.vacuum.periods * period, cfg.vacuum.samples);
    let pops = vacuum_rabi(g, &times);
    let mut table = Table::new(["t_s", "P_up", "P_down", "entropy_nats"]);
    for (&t, &(u, d)) in times.iter().zip(&pops) {
        table.push(vec![t, u, d, entanglement_entropy(&vacuum_rabi_state(g, t))]);
    }
    // first crossing of the two populations
    let diff = |t: f64| {
        let (u, d) = vacuum_rabi(g, &[t])[0];
        u - d
    };
    let (mut lo, mut hi) = (0.0, 0.5 * period);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if diff(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let crossing = 0.5 * (lo + hi);
    let measured = measured_period(|t| vacuum_rabi(g, &[t])[0].0, cfg.vacuum.periods * period, cfg.vacuum.samples);
    let report = json!({
        "scenario": "vacuum",
        "g_rad_per_s": g,
        "vacuum_rabi_period_s": period,
        "measured_period_s": measured,
        "first_crossing_s": crossing,
        "first_crossing_gt": g * crossing,
        "entropy_at_crossing_nats": entanglement_entropy(&vacuum_rabi_state(g, crossing)),
    });
    Ok(Artifacts {
        datasets: vec![Dataset {
            suffix: "",
            table,
            plot: Plot::Lines,
            title: "Vacuum Rabi oscillation".into(),
        }],
        report,
        documents: Vec::new(),
    })
}

fn spectrum(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let dist = photon_distribution(cfg)?;
    let s = &cfg.spectrum;
    let g = cfg.quantized.g;
    let t_end = s.window_factor * required_window(g, s.nu_cap, s.min_beat_periods);
    let samples = ((t_end * g / s.dt_g).ceil() as usize).max(2);
    let times = linspace(t_end, samples + 1);
    let values: Vec<f64> = times.par_chunks(256).flat_map_iter(|c| jc_inversion(&dist, g, c)).collect();
    let series = TimeSeries::new(times, values)?;
    let spec = rabi_spectrum(
        &series,
        g,
        s.nu_cap,
        SpectrumOptions {
            min_beat_periods: s.min_beat_periods,
            max_condition: s.max_condition,
        },
    )?;
    let recovered = recover_photon_statistics(&spec)?;
    let truth = dist.probs();
    let mut table = Table::new(["nu", "omega_rad_per_s", "weight", "raw_weight", "p_generator", "periodogram"]);
    for k in 0..spec.orders.len() {
        table.push(vec![
            spec.orders[k] as f64,
            spec.frequencies[k],
            spec.weights[k],
            spec.raw_weights[k],
            truth.get(k).copied().unwrap_or(0.0),
            spec.periodogram[k],
        ]);
    }
    let rec = recovered.distribution.probs();
    let report = json!({
        "scenario": "spectrum",
        "g_rad_per_s": g,
        "nu_cap": s.nu_cap,
        "window_s": t_end,
        "samples": series.len(),
        "condition": spec.condition,
        "residual_rms": spec.residual_rms,
        "clipped_mass": spec.clipped_mass,
        "mass_deficit": recovered.mass_deficit,
        "generator_mass_above_cap": truth.iter().skip(s.nu_cap + 1).sum::<f64>(),
        "l1_distance": l1_distance(rec, truth),
        "generator": distribution_report(&dist),
        "recovered_mean": recovered.distribution.mean(),
    });
    Ok(Artifacts {
        datasets: vec![Dataset {
            suffix: "",
            table,
            plot: Plot::Lines,
            title: "Rabi spectrum weights".into(),
        }],
        report,
        documents: vec![
            ("distribution", distribution_json(rec)),
            ("generator", distribution_json(truth)),
        ],
    })
}
