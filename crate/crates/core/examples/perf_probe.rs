use sketchcord::eval::{success_rate_experiment, SuccessRateConfig};

fn main() {
    let trials: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let cfg = SuccessRateConfig {
        dims: vec![250],
        n: 10_000,
        m: 100,
        trials,
        threshold: 0.001,
        seed: 0xC3,
        k: 16,
        refine: true,
    };
    let started = std::time::Instant::now();
    let results = success_rate_experiment(&cfg).unwrap();
    let r = &results[0];
    println!(
        "d={} trials={} success_rate={:.3} mean_speedup={:.1} total={:.1}s",
        r.d, trials, r.success_rate, r.mean_speedup, started.elapsed().as_secs_f64()
    );
    for t in &r.trials {
        println!(
            "  trial {}: success={} rank_fraction={:.6} fast={:.0}ms exact={:.0}ms",
            t.trial, t.success, t.rank_fraction, t.fast_ms, t.exact_ms
        );
    }
}
