use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;

use pmallows::exact::exact_posterior;
use pmallows::mcmc::{mcmc_rho, McmcConfig};
use pmallows::pseudo::{estimate_rho_hat, PseudoMallowsSampler};
use pmallows::{Alpha, SeededRng};
use pmallows_bench::fixture;

fn pseudo_mallows_draw(c: &mut Criterion) {
    let mut group = c.benchmark_group("pseudo_mallows_draw");
    let alpha = Alpha::new(2.0).unwrap();
    for n in [10, 20, 40] {
        let data = fixture(n, 200, 2.0, 1);
        let rho_hat = estimate_rho_hat(&data).unwrap();
        let sampler = PseudoMallowsSampler::new(&data, alpha, &rho_hat, 0.0).unwrap();
        let mut rng = SeededRng::seed_from_u64(7);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| sampler.draw(&mut rng)));
    }
    group.finish();
}

fn mcmc_chain(c: &mut Criterion) {
    let mut group = c.benchmark_group("mcmc_1000_iterations");
    let alpha = Alpha::new(2.0).unwrap();
    for n in [10, 20, 40] {
        let data = fixture(n, 200, 2.0, 2);
        let cfg = McmcConfig::new(n, 1000, 3);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| mcmc_rho(&data, alpha, &cfg).unwrap())
        });
    }
    group.finish();
}

fn exact(c: &mut Criterion) {
    let data = fixture(6, 50, 2.0, 3);
    let alpha = Alpha::new(2.0).unwrap();
    c.bench_function("exact_posterior_n6", |b| b.iter(|| exact_posterior(&data, alpha).unwrap()));
}

criterion_group!(benches, pseudo_mallows_draw, mcmc_chain, exact);
criterion_main!(benches);
