use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use memsat::dynamics::{flow_field_into, Derivative, SolverParams};
use memsat::gen::{generate_cdc, CdcParams};
use memsat::integrator::{init_state, RunConfig};

fn bench_flow_field(c: &mut Criterion) {
    let mut group = c.benchmark_group("flow_field");
    for &n in &[100usize, 400, 1000] {
        let inst = generate_cdc(&CdcParams { n, ratio: 4.3, p0: 0.08, seed: 1 }).unwrap();
        let f = &inst.formula;
        let params = SolverParams::for_ratio(4.3);
        let state = init_state(f, &params, &RunConfig::with_seed(2)).unwrap();
        let alpha = vec![params.alpha; f.num_clauses()];
        let mut out = Derivative::zeros(f.num_vars(), f.num_clauses());
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| flow_field_into(f, &params, &alpha, &state, &mut out));
        });
    }
    group.finish();
}

fn bench_solve_steps(c: &mut Criterion) {
    let inst = generate_cdc(&CdcParams { n: 200, ratio: 4.3, p0: 0.08, seed: 3 }).unwrap();
    let params = SolverParams::for_ratio(4.3);
    c.bench_function("solve_1000_steps_n200", |b| {
        b.iter(|| {
            let cfg = RunConfig { max_steps: 1000, ..RunConfig::with_seed(4) };
            memsat::integrator::solve(&inst.formula, &params, &cfg)
        });
    });
}

criterion_group!(benches, bench_flow_field, bench_solve_steps);
criterion_main!(benches);
