use std::time::Duration;

use commitment_games::equilibria::probe_strong_punishability;
use commitment_games::protocol::build_improvement_plan;
use commitment_games::verify::{check_deviations, VerifyOptions};
use commitment_games::{catalog, sample, Execution, MixedProfile};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const POLICIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn probe(c: &mut Criterion) {
    let mut group = c.benchmark_group("punishability_probe");
    let g = catalog::three_action_coordination();
    let half = MixedProfile::uniform_on(&[3, 3], &[vec![0, 1], vec![0, 1]]);
    let mut rng = sample::rng(3);
    let (g3, s3, _) = sample::full_support_instance(&mut rng, &[3, 3, 2], 0.5);
    for (name, exec) in POLICIES {
        group.bench_with_input(BenchmarkId::new(name, "3x3 two-player, 400 samples"), &exec, |b, &exec| {
            b.iter(|| probe_strong_punishability(&g, &half, 1.0, 0.05, 400, 7, exec).unwrap())
        });
        group.bench_with_input(BenchmarkId::new(name, "3x3x2 three-player, 200 samples"), &exec, |b, &exec| {
            b.iter(|| probe_strong_punishability(&g3, &s3, 1.0, 0.01, 200, 7, exec).unwrap())
        });
    }
    group.finish();
}

fn deviations(c: &mut Criterion) {
    let mut group = c.benchmark_group("deviation_check");
    let g = catalog::rps_with_exit();
    let u3 = MixedProfile::uniform_on(&[4, 4], &[vec![0, 1, 2], vec![0, 1, 2]]);
    let plan = build_improvement_plan(&g, &u3, &[3, 3], 0.06).unwrap();
    let mut rng = sample::rng(11);
    let (g3, s3, t3) = loop {
        let inst = sample::full_support_instance(&mut rng, &[2, 2, 2], 0.5);
        if !commitment_games::equilibria::is_pure_nash(&inst.0, &inst.2, 0.0) {
            break inst;
        }
    };
    let plan3 = build_improvement_plan(&g3, &s3, &t3, 0.01 * g3.utility_range()).unwrap();
    for (name, exec) in POLICIES {
        let opts = VerifyOptions { exec, ..VerifyOptions::default() };
        group.bench_with_input(BenchmarkId::new(name, "4x4 partial support, full plan"), &opts, |b, opts| {
            b.iter(|| check_deviations(&g, &plan, opts).unwrap())
        });
        let opts = VerifyOptions { exec, budget: Some(16), ..VerifyOptions::default() };
        group.bench_with_input(BenchmarkId::new(name, "2x2x2 full support, 16 prefixes"), &opts, |b, opts| {
            b.iter(|| check_deviations(&g3, &plan3, opts).unwrap())
        });
    }
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10).measurement_time(Duration::from_secs(3)).warm_up_time(Duration::from_millis(500));
    targets = probe, deviations
}
criterion_main!(benches);
