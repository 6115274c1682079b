use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use secrecy_sim_bench::{network, realizations};
use secrecy_sim_core::asymptotic::{i12, i13};
use secrecy_sim_core::essr::i1_closed;
use secrecy_sim_core::opa::{opa_numeric, DEFAULT_TOL};
use secrecy_sim_core::special::{dilog, e1, ei_approx};
use secrecy_sim_core::{essr_montecarlo, EiApproxParams, KernelBackend, McOptions, Strategy};

fn special(c: &mut Criterion) {
    let mut g = c.benchmark_group("special");
    g.bench_function("e1", |b| {
        b.iter(|| e1(black_box(0.37)) + e1(black_box(7.5)))
    });
    g.bench_function("dilog", |b| {
        b.iter(|| dilog(black_box(0.42)) + dilog(black_box(-3.0)))
    });
    let p = EiApproxParams::new(20, 20).unwrap();
    g.bench_function("ei_approx_t20", |b| {
        b.iter(|| ei_approx(black_box(1.3), &p))
    });
    g.finish();
}

fn closed_form(c: &mut Criterion) {
    let mut g = c.benchmark_group("closed_form");
    g.sample_size(20);
    for nf in [4, 16] {
        let cfg = network(256, nf, 30.0);
        g.bench_with_input(BenchmarkId::new("i1", nf), &cfg, |b, cfg| {
            b.iter(|| i1_closed(cfg, &KernelBackend::Exact).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("i12_i13", nf), &cfg, |b, cfg| {
            b.iter(|| i12(cfg).unwrap() + i13(cfg).unwrap())
        });
    }
    g.finish();
}

fn allocation(c: &mut Criterion) {
    let cfg = network(64, 1, 20.0);
    let chs = realizations(&cfg, 256);
    c.bench_function("opa_numeric_x256", |b| {
        b.iter(|| {
            chs.iter()
                .map(|ch| opa_numeric(ch, &cfg, DEFAULT_TOL).unwrap().lambda)
                .sum::<f64>()
        })
    });
}

fn montecarlo(c: &mut Criterion) {
    let mut g = c.benchmark_group("montecarlo_10k");
    g.sample_size(10);
    let cfg = network(64, 1, 20.0);
    for s in [Strategy::OpaNumeric, Strategy::Epa, Strategy::OpaLsma] {
        let opts = McOptions {
            trials: 10_000,
            ..McOptions::default()
        };
        g.bench_function(s.name(), |b| {
            b.iter(|| essr_montecarlo(&cfg, s, &opts).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, special, closed_form, allocation, montecarlo);
criterion_main!(benches);
