use core::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;
use rabi_core::analysis::{
    comb_frequencies, detect_collapse_revival, rabi_spectrum, required_window, EnvelopeOptions, SpectrumOptions,
    TimeSeries,
};
use rabi_core::interferometry::{mat_mul, Segment, SequenceSpec};
use rabi_core::ladder::{build_ladder, evolve_ladder, LadderKind, SidebandState};
use rabi_core::params::{derive_coupling, CouplingParams, ElectronParams, FieldParams};
use rabi_core::quantum::{jc_evolve_detuned, photon_coherent, JcJointState, QuantizedParams};
use rabi_core::tridiag::CyclicTridiagonal;
use rabi_core::{Complex64, HalfInt};

fn segment() -> impl Strategy<Value = Segment> {
    prop_oneof![
        (0.0..7.0f64, 0.0..1e13f64, -1e14..1e14f64).prop_map(|(theta, kappa, epsilon)| Segment::Pulse {
            theta,
            kappa,
            epsilon
        }),
        (-10.0..10.0f64).prop_map(Segment::drift),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ladder_evolution_conserves_norm(
        eps in 1e12..1e15f64,
        k_re in -5e12..5e12f64,
        k_im in -5e12..5e12f64,
        t in 0.0..5e-12f64,
    ) {
        let c = CouplingParams::from_ladder_coefficients(eps, Complex64::new(k_re, k_im), 0.0, 6e6);
        let h = build_ladder(HalfInt::half(7), LadderKind::HalfInteger, &c).unwrap();
        let psi = SidebandState::basis(HalfInt::half(7), HalfInt::HALF).unwrap();
        let tr = evolve_ladder(&h, &psi, &[0.0, t, 2.0 * t]).unwrap();
        prop_assert!(tr.norm_drift < 1e-10);
    }

    #[test]
    fn q_scales_with_cube_of_frequency(
        beta in 0.005..0.2f64,
        e_z in 1e5..1e8f64,
        lambda in 100e-9..2e-6f64,
    ) {
        let el = ElectronParams::from_beta(beta).unwrap();
        let q1 = derive_coupling(&el, &FieldParams::synchronized(&el, e_z, lambda, FRAC_PI_2, 5).unwrap()).unwrap().q_ratio;
        let q2 = derive_coupling(&el, &FieldParams::synchronized(&el, e_z, lambda / 2.0, FRAC_PI_2, 5).unwrap()).unwrap().q_ratio;
        prop_assert!((q2 / q1 / 8.0 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn sequence_grouping_is_associative(segs in prop::collection::vec(segment(), 3..8), split in 1usize..3) {
        let whole = SequenceSpec::new(segs.clone()).unwrap().unitary();
        let split = split.min(segs.len() - 1);
        let first = SequenceSpec::new(segs[..split].to_vec()).unwrap().unitary();
        let second = SequenceSpec::new(segs[split..].to_vec()).unwrap().unitary();
        let grouped = mat_mul(&second, &first);
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((whole[i][j] - grouped[i][j]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn envelope_is_scale_equivariant(s in 0.01..100.0f64, alpha in 1.0..3.0f64) {
        let g = 1.0;
        let d = photon_coherent(Complex64::new(alpha, 0.0), None).unwrap();
        let series = TimeSeries::sample(0.0, 40.0, 4000, |t| {
            rabi_core::quantum::jc_inversion(&d, g, &[t])[0]
        }).unwrap();
        let opts = EnvelopeOptions::for_mean_photons(g, d.mean());
        let a = detect_collapse_revival(&series, opts).unwrap();
        let b = detect_collapse_revival(&series.scaled(s), opts).unwrap();
        prop_assert_eq!(a.collapse_time, b.collapse_time);
        prop_assert_eq!(&a.revival_times, &b.revival_times);
        for (x, y) in a.envelope.values().iter().zip(b.envelope.values()) {
            prop_assert!((y - s * x).abs() <= 1e-12 * s * x.abs().max(1.0));
        }
    }

    #[test]
    fn comb_projection_is_exact(weights in prop::collection::vec(0.0..1.0f64, 11)) {
        let g = 1.0;
        let nu_cap = 10;
        let freqs = comb_frequencies(g, nu_cap);
        let t_end = required_window(g, nu_cap, 20.0);
        let series = TimeSeries::sample(0.0, t_end, 6000, |t| {
            weights.iter().zip(&freqs).map(|(w, f)| w * (f * t).cos()).sum()
        }).unwrap();
        let spec = rabi_spectrum(&series, g, nu_cap, SpectrumOptions::default()).unwrap();
        prop_assert!(spec.residual_rms < 1e-9);
        for (w, r) in weights.iter().zip(&spec.raw_weights) {
            prop_assert!((w - r).abs() < 1e-9);
        }
    }

    #[test]
    fn detuned_jc_conserves_norm(delta in -5.0..5.0f64, alpha in 0.0..2.0f64) {
        let d = photon_coherent(Complex64::new(alpha, 0.3), None).unwrap();
        let joint = JcJointState::electron_up(&d).unwrap();
        let ts: Vec<f64> = (0..=20).map(|i| i as f64 * PI / 4.0).collect();
        let tr = jc_evolve_detuned(&joint, &QuantizedParams::with_coupling(1.0, 0.0, delta), &ts).unwrap();
        prop_assert!(tr.max_norm_error <= 1e-10);
    }

    #[test]
    fn cyclic_solve_residual(seed in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 3 * 40)) {
        let n = 40;
        let mut a = CyclicTridiagonal::zeros(n);
        let c = |k: usize| Complex64::new(seed[k].0, seed[k].1);
        for i in 0..n {
            a.lower[i] = c(i);
            a.upper[i] = c(n + i);
            a.diag[i] = c(2 * n + i) + Complex64::new(4.0, 0.0);
        }
        let rhs: Vec<Complex64> = (0..n).map(|i| c(i) * 3.0 - c(n + i)).collect();
        let x = a.solve(&rhs).unwrap();
        for (p, q) in a.mul_vec(&x).iter().zip(&rhs) {
            prop_assert!((p - q).norm() < 1e-12);
        }
    }
}
