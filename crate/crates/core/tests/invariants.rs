use std::f64::consts::PI;

use proptest::prelude::*;

use noon_diffusion::estimator::{fit_diffusion, AttenuationCurve, CurvePoint, FitMethod, FitOptions};
use noon_diffusion::spin::{
    cnot_parallel, collective_rotation, j_evolution, make_pseudopure, thermal_state, Axis, Channel, Nuclide,
    Polarization, Representation, SpinSystemSpec, StateOperator,
};

#[derive(Clone, Debug)]
enum Op {
    Pulse(Channel, Axis, f64),
    Free(f64),
    Cnot,
}

fn op() -> impl Strategy<Value = Op> {
    let channel = prop_oneof![Just(Channel::ControlOnly), Just(Channel::TargetsOnly), Just(Channel::Both)];
    let axis = prop_oneof![Just(Axis::X), Just(Axis::Y), Just(Axis::NegX), Just(Axis::NegY)];
    prop_oneof![
        4 => (channel, axis, -2.0 * PI..2.0 * PI).prop_map(|(c, a, t)| Op::Pulse(c, a, t)),
        3 => (0.0..0.2f64).prop_map(Op::Free),
        1 => Just(Op::Cnot),
    ]
}

fn spec(n: usize, rep: Representation) -> SpinSystemSpec {
    SpinSystemSpec::new(Nuclide::phosphorus(), Nuclide::proton(), n, 11.0, rep).unwrap()
}

fn run(mut rho: StateOperator, ops: &[Op]) -> StateOperator {
    for op in ops {
        rho = match *op {
            Op::Pulse(c, a, t) => collective_rotation(&rho, c, a, t),
            Op::Free(d) => j_evolution(&rho, d).unwrap(),
            Op::Cnot if rho.spec().n_total < 2 => rho,
            Op::Cnot => cnot_parallel(&rho).unwrap(),
        };
    }
    rho
}

fn start(spec: &SpinSystemSpec, eps_a: f64, eps_m: f64, pure: bool) -> StateOperator {
    if pure {
        make_pseudopure(spec, &StateOperator::ket(spec, 0, 0), eps_a.abs().max(1e-6) * 1e3).unwrap()
    } else {
        thermal_state(spec, Polarization { control: eps_a, target: eps_m }).unwrap()
    }
}

fn max_abs(m: &nalgebra::DMatrix<noon_diffusion::C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn dicke_and_full_tensor_agree(
        n in 2usize..=4,
        ops in proptest::collection::vec(op(), 1..12),
        eps_a in -1e-4..1e-4f64,
        eps_m in -1e-4..1e-4f64,
        pure in any::<bool>(),
    ) {
        let dicke = spec(n, Representation::DickeSubspace);
        let full = spec(n, Representation::FullTensor);
        let a = run(start(&dicke, eps_a, eps_m, pure), &ops).to_full().unwrap();
        let b = run(start(&full, eps_a, eps_m, pure), &ops).to_full().unwrap();
        let scale = max_abs(&b).max(1e-300);
        prop_assert!(max_abs(&(&a - &b)) < 1e-10 * scale.max(1.0));
    }

    #[test]
    fn gates_preserve_trace_hermiticity_and_purity(
        n in 1usize..=5,
        ops in proptest::collection::vec(op(), 1..12),
        eps_a in -1e-4..1e-4f64,
        eps_m in -1e-4..1e-4f64,
        rep in prop_oneof![Just(Representation::DickeSubspace), Just(Representation::FullTensor)],
    ) {
        let s = spec(n, rep);
        let rho0 = start(&s, eps_a, eps_m, false);
        let rho = run(rho0.clone(), &ops);
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(rho.trace().im.abs() < 1e-12);
        prop_assert!(rho.hermiticity_error() < 1e-14);
        let (f0, f1) = (rho0.frobenius_sq(), rho.frobenius_sq());
        prop_assert!((f1 - f0).abs() < 1e-12 * f0);
    }
}

fn synthetic(d: f64, s0: f64, q: f64, n: usize) -> AttenuationCurve {
    let (delta, big) = (2e-3, 50e-3);
    // reach b·D ≈ 2 whatever D is
    let g_max = (2.0 / (d * (big - delta / 3.0))).sqrt() / (q * delta);
    let points = (0..n)
        .map(|i| {
            let g = g_max * i as f64 / (n - 1) as f64;
            let b = (q * g * delta).powi(2) * (big - delta / 3.0);
            CurvePoint { g, s: s0 * (-b * d).exp(), sigma: None }
        })
        .collect();
    AttenuationCurve { points, little_delta: delta, big_delta: big, q_gamma: q }
}

fn opts(method: FitMethod) -> FitOptions {
    FitOptions { method, bootstrap_samples: 0, seed: 0 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn noiseless_curves_recover_d(log_d in -11.0..-8.0f64, s0 in 0.1..10.0f64, n in 3usize..30) {
        let d = 10f64.powf(log_d);
        let c = synthetic(d, s0, 2.6752218744e8, n);
        let nls = fit_diffusion(&c, &opts(FitMethod::NonlinearLs)).unwrap();
        let ll = fit_diffusion(&c, &opts(FitMethod::LogLinear)).unwrap();
        prop_assert!(((nls.d_fit - d) / d).abs() < 1e-6);
        prop_assert!(((ll.d_fit - d) / d).abs() < 1e-6);
        prop_assert!(((ll.d_fit - nls.d_fit) / d).abs() < 1e-9);
        prop_assert!(((nls.s0_fit - s0) / s0).abs() < 1e-6);
    }

    #[test]
    fn fit_is_invariant_under_signal_scaling(log_d in -11.0..-8.0f64, scale in 1e-6..1e6f64) {
        let d = 10f64.powf(log_d);
        let c = synthetic(d, 1.0, 2.6752218744e8, 21);
        let mut scaled = c.clone();
        for p in &mut scaled.points {
            p.s *= scale;
        }
        for method in [FitMethod::LogLinear, FitMethod::NonlinearLs] {
            let a = fit_diffusion(&c, &opts(method)).unwrap();
            let b = fit_diffusion(&scaled, &opts(method)).unwrap();
            prop_assert!(((a.d_fit - b.d_fit) / a.d_fit).abs() < 1e-12);
        }
    }
}
