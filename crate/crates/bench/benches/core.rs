use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use funnelsim_core::operators::probes::{run_operator, Samples};
use funnelsim_core::{
    controller_eval, simulate, ControllerConfig, ConvolutionOperator, Disturbance, Drift, FunnelFunction, FunnelStack,
    GainMap, Jet, Measure, Plant, RefComponent, ReferenceSignal, Scenario, TransportPde,
};
use nalgebra::{DMatrix, DVector};

fn jets(c: &mut Criterion) {
    let a = Jet::scalar(&[1.3, -0.2, 0.7, 0.1, -0.4, 0.9]).unwrap();
    let b = Jet::scalar(&[0.4, 1.1, -0.3, 0.2, 0.6, -0.5]).unwrap();
    let v = Jet::new((0..6).map(|j| vec![j as f64, 1.0 - j as f64, 0.5]).collect()).unwrap();
    c.bench_function("jet mul order 5", |bch| bch.iter(|| black_box(&a).mul(black_box(&b)).unwrap()));
    c.bench_function("jet reciprocal order 5", |bch| bch.iter(|| black_box(&a).reciprocal().unwrap()));
    c.bench_function("jet sqnorm order 5 dim 3", |bch| bch.iter(|| black_box(&v).sqnorm()));

    let cfg =
        ControllerConfig::new(FunnelStack::uniform(FunnelFunction::exp_shift(2.0, 2.0, 0.1).unwrap(), 3).unwrap());
    let e = Jet::new(vec![vec![0.01, -0.005], vec![0.02, 0.0], vec![-0.01, 0.03]]).unwrap();
    c.bench_function("controller r = 3, m = 2", |bch| bch.iter(|| controller_eval(&cfg, 1.0, black_box(&e)).unwrap()));
}

fn operators(c: &mut Criterion) {
    let dt = 0.0025;
    let input = Samples::from_fn(0.0, 2.0, dt, |t| vec![t.cos()]);
    let conv = ConvolutionOperator::new(Measure::exp_sqrt(), 0);
    c.bench_function("convolve expsqrt over [0, 2]", |bch| bch.iter(|| run_operator(&conv, &input).unwrap()));

    let pde = TransportPde::for_step(&Measure::exp_sqrt(), 1.0, 10.0, dt, 0).unwrap();
    c.bench_function("transport step, 4000 cells", |bch| {
        bch.iter_batched(|| pde.clone(), |mut p| p.pde_step(black_box(0.5), dt).unwrap(), BatchSize::SmallInput)
    });
}

fn transport_loop(horizon: f64) -> Scenario {
    let dt = 0.0025;
    let plant = Plant {
        r: 1,
        m: 1,
        drift: Drift::Affine { f0: DVector::zeros(1), d: DMatrix::zeros(1, 1), w: DMatrix::identity(1, 1) },
        gain: GainMap::Constant(DMatrix::identity(1, 1)),
        disturbance: Disturbance::Zero { dim: 1 },
        operator: Box::new(TransportPde::for_step(&Measure::exp_sqrt(), 1.0, 10.0, dt, 0).unwrap()),
        memory: 0.0,
        initial: vec![vec![0.0]],
        history: None,
    };
    let funnels = FunnelStack::uniform(FunnelFunction::exp_shift(2.0, 2.0, 0.1).unwrap(), 1).unwrap();
    let reference = ReferenceSignal::scalar(RefComponent::Cos { amp: 1.0, omega: 1.0, phase: 0.0 });
    Scenario::new(plant, ControllerConfig::new(funnels), reference, horizon, dt)
}

fn closed_loop(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate");
    group.sample_size(10);
    let sc = transport_loop(15.0);
    group.bench_function("transport loop, T = 15", |bch| bch.iter(|| simulate(&sc).unwrap()));
    group.finish();
}

criterion_group!(benches, jets, operators, closed_loop);
criterion_main!(benches);
