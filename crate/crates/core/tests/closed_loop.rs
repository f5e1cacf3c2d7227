use funnelsim_core::{
    controller_eval, simulate, verify_run, ControllerConfig, ControllerError, ConvolutionOperator, Disturbance, Drift,
    FunnelFunction, FunnelStack, GainMap, Integrator, Jet, LtiInternal, Measure, Plant, RefComponent, ReferenceSignal,
    Scenario, VerifyConfig,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn phi() -> FunnelFunction {
    FunnelFunction::exp_shift(2.0, 2.0, 0.1).unwrap()
}

proptest! {
    #[test]
    fn relative_degree_one_closed_form(t in 0.0..10.0f64, e in prop::collection::vec(-1.0..1.0f64, 1..4), frac in 0.0..0.99f64) {
        let norm = e.iter().map(|x| x * x).sum::<f64>().sqrt();
        let f = phi();
        let scale = if norm > 0.0 { frac * f.radius(t) / norm } else { 0.0 };
        let e: Vec<f64> = e.iter().map(|x| x * scale).collect();
        let n2: f64 = e.iter().map(|x| x * x).sum();
        let cfg = ControllerConfig::new(FunnelStack::uniform(f.clone(), 1).unwrap());
        let out = controller_eval(&cfg, t, &Jet::new(vec![e.clone()]).unwrap()).unwrap();
        let k = 1.0 / (1.0 - f.value(t).powi(2) * n2);
        prop_assert!((out.k[0] - k).abs() <= 1e-12 * k);
        for (u, x) in out.u.iter().zip(&e) {
            prop_assert!((u + k * x).abs() <= 1e-12 * k * x.abs().max(1e-300));
        }
    }

    #[test]
    fn violation_iff_denominator_below_guard(t in 0.0..10.0f64, x in 0.0..1.2f64, y in -1.0..1.0f64, guard in 1e-12..0.5f64) {
        let f = phi();
        let e = vec![x * f.radius(t), y * 0.1];
        let denom = 1.0 - f.value(t).powi(2) * (e[0] * e[0] + e[1] * e[1]);
        let cfg = ControllerConfig::new(FunnelStack::uniform(f, 1).unwrap()).with_guard(guard);
        let res = controller_eval(&cfg, t, &Jet::new(vec![e]).unwrap());
        match res {
            Err(ControllerError::Violation { stage: 0, .. }) => prop_assert!(denom < guard),
            Ok(_) => prop_assert!(denom >= guard),
            Err(other) => prop_assert!(false, "{other}"),
        }
    }
}

/// `y^{(r)} = f0 + d(t) + w + γ u`, with `w` from a stable first-order lag of `y`.
fn lti_scenario(r: usize, gamma: f64, f0: f64, amp: f64, omega: f64, offset: f64) -> Scenario {
    let op = LtiInternal::new(
        DMatrix::from_element(1, 1, -1.5),
        DMatrix::from_fn(1, r, |_, j| if j == 0 { 1.0 } else { 0.0 }),
        DMatrix::from_element(1, 1, 0.7),
        DVector::zeros(1),
    )
    .unwrap();
    let plant = Plant {
        r,
        m: 1,
        drift: Drift::Affine {
            f0: DVector::from_element(1, f0),
            d: DMatrix::from_element(1, 1, 1.0),
            w: DMatrix::from_element(1, 1, 1.0),
        },
        gain: GainMap::Constant(DMatrix::from_element(1, 1, gamma)),
        disturbance: Disturbance::Sinusoid { amp: vec![0.3], omega: 2.0, phase: 0.0 },
        operator: Box::new(op),
        memory: 0.0,
        initial: (0..r).map(|i| vec![if i == 0 { amp + offset } else { 0.0 }]).collect(),
        history: None,
    };
    let funnels = FunnelStack::uniform(FunnelFunction::exp_shift(1.0, 1.0, 0.2).unwrap(), r).unwrap();
    let reference = ReferenceSignal::scalar(RefComponent::Cos { amp, omega, phase: 0.0 });
    Scenario::new(plant, ControllerConfig::new(funnels), reference, 4.0, 2e-3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn trace_stays_inside_every_funnel(
        r in 1usize..=2,
        gamma in 0.5..3.0f64,
        f0 in -1.0..1.0f64,
        amp in 0.0..1.0f64,
        omega in 0.2..1.5f64,
        offset in -0.5..0.5f64,
    ) {
        let sc = lti_scenario(r, gamma, f0, amp, omega, offset);
        let run = simulate(&sc).unwrap();
        prop_assert!(run.report.completed);
        for row in &run.trace {
            for i in 0..r {
                prop_assert!(row.e_norm[i] < row.radius[i], "t={} stage {i}", row.t);
                prop_assert!(row.k[i] >= 1.0);
            }
        }
        prop_assert!(run.report.min_margin.iter().all(|&m| m > 0.0));
        let verdict = verify_run(&run.trace, &run.report, &VerifyConfig { u_cap: 1e6, k_cap: 1e6, min_distance: 0.0 });
        prop_assert!(verdict.passed());
    }
}

#[test]
fn runs_are_bitwise_reproducible() {
    let a = simulate(&lti_scenario(2, 1.3, 0.2, 0.8, 1.1, 0.3)).unwrap();
    let b = simulate(&lti_scenario(2, 1.3, 0.2, 0.8, 1.1, 0.3)).unwrap();
    assert_eq!(a.trace, b.trace);
}

fn dirac_scenario(dt: f64, integrator: Integrator) -> Scenario {
    let plant = Plant {
        r: 1,
        m: 1,
        drift: Drift::Affine { f0: DVector::zeros(1), d: DMatrix::zeros(1, 1), w: DMatrix::identity(1, 1) },
        gain: GainMap::Constant(DMatrix::identity(1, 1)),
        disturbance: Disturbance::Zero { dim: 1 },
        operator: Box::new(ConvolutionOperator::new(Measure::dirac(0.0).unwrap(), 0)),
        memory: 0.0,
        initial: vec![vec![0.0]],
        history: None,
    };
    let funnels = FunnelStack::uniform(phi(), 1).unwrap();
    let reference = ReferenceSignal::scalar(RefComponent::Cos { amp: 1.0, omega: 1.0, phase: 0.0 });
    let mut sc = Scenario::new(plant, ControllerConfig::new(funnels), reference, 2.0, dt);
    sc.integrator = integrator;
    sc
}

fn end_value(dt: f64, integrator: Integrator) -> f64 {
    simulate(&dirac_scenario(dt, integrator)).unwrap().trace.last().unwrap().y[0]
}

#[test]
fn step_halving_shows_integrator_order() {
    let reference = end_value(1e-4, Integrator::Rk4);
    let euler: Vec<f64> =
        [4e-3, 2e-3, 1e-3].iter().map(|&dt| (end_value(dt, Integrator::Euler) - reference).abs()).collect();
    let rk4: Vec<f64> = [4e-2, 2e-2].iter().map(|&dt| (end_value(dt, Integrator::Rk4) - reference).abs()).collect();
    for w in euler.windows(2) {
        assert!((1.7..2.3).contains(&(w[0] / w[1])), "euler {euler:?}");
    }
    assert!(rk4[0] / rk4[1] > 10.0, "rk4 {rk4:?}");
}
