use pmallows::mcmc::simulate_dataset;
use pmallows::variational::{choose_sigma, reference_profile};
use pmallows::{stream_rng, Alpha, McmcConfig, Ranking};

fn choices(n: usize, users: usize, alpha: f64, grid: &[f64], seed: u64) -> Vec<f64> {
    let a = Alpha::new(alpha).unwrap();
    (0..20u64)
        .map(|rep| {
            let mut rng = stream_rng(seed, &[rep]);
            let data = simulate_dataset(&Ranking::identity(n), a, users, &mut rng).unwrap();
            let chain = McmcConfig::new(n, 200_000, seed ^ rep).with_burn_in(20_000).with_thin(10);
            let reference = reference_profile(&data, a, &chain).unwrap();
            choose_sigma(&data, a, grid, &reference, 200, rep).unwrap()
        })
        .collect()
}

#[test]
fn concentrated_posteriors_need_no_perturbation() {
    let picks = choices(10, 1000, 5.0, &[0.0, 1.0, 2.0], 1);
    let zeros = picks.iter().filter(|&&s| s == 0.0).count();
    assert!(zeros >= 16, "{picks:?}");
}

#[test]
fn diffuse_posteriors_prefer_perturbation() {
    let picks = choices(20, 100, 1.0, &[0.0, 1.0, 2.0, 3.0], 2);
    let positive = picks.iter().filter(|&&s| s > 0.0).count();
    assert!(positive >= 14, "{picks:?}");
}
