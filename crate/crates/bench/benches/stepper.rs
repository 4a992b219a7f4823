use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use gradwave::{SimulationConfig, StepOrder, Stepper};
use gradwave_bench::{line_config, plane_config};

fn bench_step(c: &mut Criterion, name: &str, cfg: SimulationConfig) {
    let mut st = Stepper::new(cfg).expect("valid config");
    let init = st.initial_state().expect("initial data");
    c.bench_function(name, |b| {
        b.iter_batched_ref(
            || init.clone(),
            // history from the previous iteration keeps etd2 on its two-step path
            |state| st.step(state).expect("finite step"),
            BatchSize::LargeInput,
        )
    });
}

fn steps(c: &mut Criterion) {
    bench_step(c, "step_1d_8192_etd1", line_config(8192, StepOrder::Etd1));
    bench_step(c, "step_1d_8192_etd2", line_config(8192, StepOrder::Etd2));
    bench_step(c, "step_2d_256_etd2_dealiased", plane_config(256, StepOrder::Etd2));
}

criterion_group!(benches, steps);
criterion_main!(benches);
