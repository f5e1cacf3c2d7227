use funnelsim_core::operators::probes::{causal_on, run_operator, Samples};
use funnelsim_core::{
    Atom, ComposedOperator, ConvolutionOperator, Density, DensityProfile, InternalOperator, LtiInternal, Measure,
    ObservationMap, Passthrough, TransportPde,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

const DT: f64 = 0.02;
const HORIZON: f64 = 4.0;

fn mixed() -> Measure {
    Measure::new(
        vec![Atom { location: 0.0, weight: 0.5 }, Atom { location: 0.3, weight: -1.0 }],
        Some(Density::regular(DensityProfile::Exp { rate: 2.0 })),
    )
    .unwrap()
}

fn lti() -> LtiInternal {
    LtiInternal::new(
        DMatrix::from_row_slice(2, 2, &[-1.0, 0.5, -0.3, -2.0]),
        DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.5, 1.0]),
        DMatrix::from_row_slice(1, 2, &[1.0, -1.0]),
        DVector::zeros(2),
    )
    .unwrap()
}

fn linear_zoo() -> Vec<Box<dyn InternalOperator>> {
    vec![
        Box::new(ConvolutionOperator::new(Measure::exp_sqrt(), 0)),
        Box::new(ConvolutionOperator::new(mixed(), 1)),
        Box::new(TransportPde::for_step(&Measure::exp_sqrt(), 1.0, 10.0, DT, 0).unwrap()),
        Box::new(TransportPde::for_step(&mixed(), 0.5, 4.0, DT, 1).unwrap()),
        Box::new(lti()),
        Box::new(
            ComposedOperator::new(
                2,
                Passthrough::Delay { h: 0.0 },
                Some(Box::new(lti())),
                Some(Box::new(ConvolutionOperator::new(Measure::exp_sqrt(), 1))),
                ObservationMap::Linear {
                    pass: DMatrix::from_row_slice(1, 2, &[0.5, -0.5]),
                    state: DMatrix::from_element(1, 1, 1.0),
                    output: DMatrix::from_element(1, 1, 2.0),
                },
            )
            .unwrap(),
        ),
    ]
}

/// A two-channel trigonometric input with the given coefficients.
fn signal(c: &[f64]) -> Samples {
    let c = c.to_vec();
    Samples::from_fn(0.0, HORIZON, DT, move |t| {
        vec![c[0] * (c[1] * t).sin() + c[2], c[3] * (c[4] * t).cos() - c[5] * t]
    })
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, 6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn linear_operators_are_linear(x in coeffs(), y in coeffs(), a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let (sx, sy) = (signal(&x), signal(&y));
        let combined = Samples {
            times: sx.times.clone(),
            values: sx.values.iter().zip(&sy.values).map(|(u, v)| vec![a * u[0] + b * v[0], a * u[1] + b * v[1]]).collect(),
        };
        for op in linear_zoo() {
            prop_assert!(op.is_linear());
            let (wx, wy, wc) = (run_operator(op.as_ref(), &sx).unwrap(), run_operator(op.as_ref(), &sy).unwrap(), run_operator(op.as_ref(), &combined).unwrap());
            for k in 0..wc.len() {
                for j in 0..wc[k].len() {
                    let expect = a * wx[k][j] + b * wy[k][j];
                    let scale = (a * wx[k][j]).abs() + (b * wy[k][j]).abs() + 1e-300;
                    prop_assert!((wc[k][j] - expect).abs() <= 1e-10 * scale.max(1e-3), "{} at t={}: {} vs {}", op.name(), sx.times[k], wc[k][j], expect);
                }
            }
        }
    }

    #[test]
    fn outputs_before_a_change_are_unaffected(x in coeffs(), cut in 0.1..3.9f64, bump in -5.0..5.0f64) {
        let a = signal(&x);
        let mut b = signal(&x);
        for (t, v) in b.times.iter().zip(b.values.iter_mut()) {
            if *t >= cut {
                v[0] += bump;
                v[1] -= bump;
            }
        }
        let first = a.times.iter().position(|&t| t >= cut).unwrap();
        for op in linear_zoo() {
            prop_assert!(causal_on(op.as_ref(), &a, &b, a.times[first]).unwrap(), "{}", op.name());
        }
    }

    #[test]
    fn peek_does_not_disturb_committed_state(x in coeffs(), probe in -10.0..10.0f64) {
        let s = signal(&x);
        for op in linear_zoo() {
            let plain = run_operator(op.as_ref(), &s).unwrap();
            let mut peeked = op.boxed_clone();
            peeked.reset();
            for (k, (t, v)) in s.times.iter().zip(&s.values).enumerate() {
                if k > 0 {
                    peeked.peek(*t, &[probe, -probe]).unwrap();
                }
                peeked.advance(*t, v).unwrap();
                prop_assert_eq!(&peeked.output().unwrap(), &plain[k]);
            }
        }
    }
}

fn max_gap(dt: f64, measure: &Measure, length: f64) -> f64 {
    let input = Samples::from_fn(0.0, HORIZON, dt, |t| vec![(2.0 * t).sin() + 0.3 * t]);
    let conv = run_operator(&ConvolutionOperator::new(measure.clone(), 0), &input).unwrap();
    let pde = run_operator(&TransportPde::for_step(measure, 1.0, length, dt, 0).unwrap(), &input).unwrap();
    conv.iter().zip(&pde).map(|(a, b)| (a[0] - b[0]).abs()).fold(0.0, f64::max)
}

#[test]
fn transport_converges_to_convolution() {
    let measure = Measure::new(Vec::new(), Some(Density::regular(DensityProfile::Exp { rate: 1.5 }))).unwrap();
    let gaps: Vec<f64> = [0.04, 0.02, 0.01].iter().map(|&dt| max_gap(dt, &measure, 12.0)).collect();
    for w in gaps.windows(2) {
        // At least first order; smooth inputs and densities give second.
        assert!(w[0] / w[1] >= 1.8, "gaps {gaps:?}");
    }
    assert!(gaps[2] < 1e-2, "gaps {gaps:?}");
}
