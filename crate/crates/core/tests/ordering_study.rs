use pmallows::mcmc::simulate_dataset;
use pmallows::variational::{enumerate_ordering_study, EvalMode};
use pmallows::{stream_rng, Alpha, Ranking, VSet};

#[test]
fn sampled_study_tracks_exact_v_membership() {
    let n = 4;
    let a = Alpha::new(1.0).unwrap();
    let rho0 = Ranking::identity(n);
    let vset = VSet::new(&rho0);
    let (mut exact_hits, mut sampled_hits) = (0i32, 0i32);
    for rep in 0..20u64 {
        let data = simulate_dataset(&rho0, a, 50, &mut stream_rng(12, &[rep])).unwrap();
        let exact = enumerate_ordering_study(&data, a, EvalMode::Exact).unwrap();
        let sampled = enumerate_ordering_study(&data, a, EvalMode::Sampled { draws: 200, seed: rep }).unwrap();
        exact_hits += i32::from(vset.contains(&exact[0].ordering_ranking));
        sampled_hits += i32::from(vset.contains(&sampled[0].ordering_ranking));
        assert_eq!(exact.len(), 24);
        assert!(sampled.windows(2).all(|w| w[0].kl <= w[1].kl));
    }
    // Rates within 10 percentage points.
    assert!((exact_hits - sampled_hits).abs() <= 2, "exact {exact_hits}/20, sampled {sampled_hits}/20");
}
