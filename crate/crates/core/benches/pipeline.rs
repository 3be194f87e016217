//! Sequential vs parallel execution of the data-parallel stages.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use oobsim_core::crypto::SasValue;
use oobsim_core::decoder::{decode_session, DecodeConfig};
use oobsim_core::encoder::{build_schedule, render_schedule, LayoutParams, LedLayout, NoiseModel};
use oobsim_core::exec::Execution;
use oobsim_core::harness::{attack_experiment, AttackStrategy};
use oobsim_core::BitString;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn fixture() -> (LedLayout, oobsim_core::encoder::FrameSchedule, NoiseModel) {
    let layout = LedLayout::grid(16, 2, &LayoutParams::default()).unwrap();
    let sas: Vec<_> = (0..16u64)
        .map(|i| SasValue::new(BitString::from_u64(i * 65_537 % (1 << 20), 20).unwrap()).unwrap())
        .collect();
    let schedule = build_schedule(&sas, &layout, 250).unwrap();
    (layout, schedule, NoiseModel::with_sigma(8.0))
}

fn render(c: &mut Criterion) {
    let (layout, schedule, noise) = fixture();
    let mut g = c.benchmark_group("render_schedule");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| render_schedule(&layout, &schedule, &noise, 1, exec).unwrap())
        });
    }
    g.finish();
}

fn decode(c: &mut Criterion) {
    let (layout, schedule, noise) = fixture();
    let frames = render_schedule(&layout, &schedule, &noise, 1, Execution::Sequential).unwrap();
    let mut g = c.benchmark_group("decode_session");
    for (name, exec) in MODES {
        let cfg = DecodeConfig {
            exec,
            ..DecodeConfig::default()
        };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| decode_session(&frames, layout.led_count(), 20, 2, &cfg).unwrap())
        });
    }
    g.finish();
}

fn attack(c: &mut Criterion) {
    let mut g = c.benchmark_group("attack_experiment");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| attack_experiment(4, 8, 2_000, AttackStrategy::RandomGuess, 3, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, render, decode, attack);
criterion_main!(benches);
