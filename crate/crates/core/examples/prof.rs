use memsat::gen::*;
use memsat::integrator::*;
use std::time::Instant;
fn main() {
    let inst = generate_cdc(&CdcParams { n: 300, ratio: 4.3, p0: 0.08, seed: 301 }).unwrap();
    let f = &inst.formula;
    let params = memsat::SolverParams::for_ratio(4.3);
    let cfg = RunConfig { max_steps: 4_000_000, ..RunConfig::with_seed(3) };
    let mut last = Instant::now();
    let mut last_step = 0u64;
    let r = solve_observed(f, &params, &cfg, |s| {
        if s.steps % 500_000 == 0 {
            let el = last.elapsed().as_secs_f64();
            println!("steps {}: {:.2} us/step, dt {:.5}, max_xl {:.3e}", s.steps, el * 1e6 / (s.steps - last_step) as f64, s.dt, s.x_l.iter().cloned().fold(0.0f64, f64::max));
            last = Instant::now();
            last_step = s.steps;
        }
    });
    println!("solved {} steps {}", r.solved, r.steps);
}
