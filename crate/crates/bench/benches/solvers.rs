use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use pssc_bench::{box_qp, rcci_controller};
use pssc_core::plant::scenarios;
use pssc_core::plant::sim::{invariant_set_for, simulate_with};
use pssc_core::qp::solve_qp;
use pssc_core::DVector;

fn qp(c: &mut Criterion) {
    for n in [10, 40] {
        let prob = box_qp(n);
        c.bench_function(&format!("qp/box_{n}"), |b| {
            b.iter(|| solve_qp(&prob, None).unwrap())
        });
    }
}

fn pssc_step(c: &mut Criterion) {
    let (_, ctrl) = rcci_controller();
    let x = DVector::from_column_slice(&[2.0, 20.0, -50.0, 30.0]);
    let r = DVector::from_column_slice(&[1.0, -150.0]);
    c.bench_function("pssc/rcci_step_cold", |b| {
        b.iter_batched(
            || {
                let mut ctrl = ctrl.clone();
                ctrl.reset();
                ctrl
            },
            |mut ctrl| ctrl.step(&x, &r).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn invariant_set(c: &mut Criterion) {
    let mut group = c.benchmark_group("invariant_set");
    group.sample_size(10);
    for name in ["scalar", "double-integrator", "fig2"] {
        let cfg = scenarios::builtin(name).unwrap();
        group.bench_function(name, |b| b.iter(|| invariant_set_for(&cfg).unwrap()));
    }
    group.finish();
}

fn simulation(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate");
    group.sample_size(10);
    let cfg = scenarios::fig2();
    let t = invariant_set_for(&cfg).unwrap();
    group.bench_function("fig2_80_cycles", |b| {
        b.iter(|| simulate_with(&cfg, Some(t.clone())).unwrap())
    });
    group.finish();
}

criterion_group!(benches, qp, pssc_step, invariant_set, simulation);
criterion_main!(benches);
