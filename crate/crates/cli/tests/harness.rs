use rand::seq::SliceRandom;
use rand::Rng;

use pmallows::clicking::{recommend_topk, recommendation_accuracy};
use pmallows::exact::exact_posterior;
use pmallows::mcmc::simulate_dataset;
use pmallows::{cp_consensus, stream_rng, Alpha, ClickVector, Ranking, SampleSet};
use pmallows_cli::config::{ExperimentConfig, ExperimentKind};
use pmallows_cli::experiments::run;
use pmallows_cli::table::ResultTable;

fn shuffled(n: usize, rng: &mut impl Rng) -> Ranking {
    let mut v: Vec<usize> = (1..=n).collect();
    v.shuffle(rng);
    Ranking::new(v).unwrap()
}

#[test]
fn cp_consensus_examples() {
    let r = |v: &[usize]| Ranking::new(v.to_vec()).unwrap();
    assert_eq!(cp_consensus(&vec![r(&[2, 3, 1]); 4]).unwrap(), r(&[2, 3, 1]));
    assert_eq!(cp_consensus(&[r(&[1, 2, 3]), r(&[2, 1, 3])]).unwrap(), r(&[1, 2, 3]));
    assert!(cp_consensus(&[]).is_err());
}

#[test]
fn cp_consensus_recovers_exact_posterior_mode() {
    let a = Alpha::new(5.0).unwrap();
    for n in 3..=5 {
        for rep in 0..20u64 {
            let mut rng = stream_rng(rep, &[n as u64]);
            let rho0 = shuffled(n, &mut rng);
            let data = simulate_dataset(&rho0, a, 100, &mut rng).unwrap();
            let post = exact_posterior(&data, a).unwrap();
            let samples: Vec<Ranking> = (0..2000).map(|_| post.sample(&mut rng)).collect();
            assert_eq!(&cp_consensus(&samples).unwrap(), post.mode().0, "n = {n}, replicate {rep}");
        }
    }
}

#[test]
fn accuracy_matches_independent_scorer() {
    let mut rng = stream_rng(77, &[]);
    for _ in 0..1000 {
        let n = rng.random_range(4..=12);
        let truth = shuffled(n, &mut rng);
        let c = rng.random_range(0..n);
        let bits: Vec<bool> = (0..n).map(|i| truth.rank(i) <= c).collect();
        let clicks = ClickVector::new(bits.clone()).unwrap();
        let k = rng.random_range(1..=n - c);
        let samples: Vec<Ranking> = (0..rng.random_range(1..30)).map(|_| shuffled(n, &mut rng)).collect();
        let recs = recommend_topk(&SampleSet::new(samples, 0, 0.0), &clicks, k).unwrap();
        assert_eq!(recs.len(), k);

        // Share of recommendations among the k best unclicked items of the truth.
        let mut unclicked: Vec<usize> = (0..n).filter(|&i| !bits[i]).collect();
        unclicked.sort_by_key(|&i| truth.rank(i));
        let top = &unclicked[..k];
        let expected = recs.iter().filter(|r| top.contains(&r.item)).count() as f64 / k as f64;
        assert_eq!(recommendation_accuracy(&recs, &truth, &clicks), expected);
    }
}

fn without_clock(mut t: ResultTable) -> ResultTable {
    for r in &mut t.rows {
        r.wall_clock = 0.0;
    }
    t
}

#[test]
fn experiments_replay_and_ignore_thread_count() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::ClickingAccuracy, 8, 30, 3.0, 5);
    cfg.replicates = 2;
    cfg.pm_samples = vec![30];
    cfg.mcmc_iterations = vec![500];
    let a = without_clock(run(&cfg).unwrap());
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let b = without_clock(pool.install(|| run(&cfg).unwrap()));
    assert_eq!(a, b);
    cfg.seed = 6;
    assert_ne!(a, without_clock(run(&cfg).unwrap()));
}

#[test]
fn full_timing_small_budget_favours_pseudo_mallows() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::FullTiming, 20, 200, 2.0, 31);
    cfg.replicates = 20;
    cfg.pm_samples = vec![10];
    cfg.mcmc_iterations = vec![320];
    let t = run(&cfg).unwrap();
    assert_eq!(t.len(), 40);
    let pm: Vec<f64> = t.select("pseudo_mallows", "footrule_error").map(|r| r.y).collect();
    let mc: Vec<f64> = t.select("mcmc", "footrule_error").map(|r| r.y).collect();
    assert!(pm.iter().all(|e| e.is_finite()));
    let wins = pm.iter().zip(&mc).filter(|(p, m)| p <= m).count();
    assert!(wins >= 15, "{wins}/20");
}

#[test]
fn random_baseline_matches_combinatorial_expectation() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::ClickingAccuracy, 10, 40, 2.0, 8);
    cfg.pm_samples = vec![10];
    cfg.mcmc_iterations = vec![100];
    cfg.lambda = 3.0;
    let t = run(&cfg).unwrap();
    let baseline = t.select("random", "accuracy").next().unwrap().y;
    assert!(baseline > 3.0 / 9.0 - 1e-12 && baseline < 3.0 / 3.0 + 1e-12);
}
