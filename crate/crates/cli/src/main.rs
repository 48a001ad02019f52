use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use pmallows::clicking::{pseudo_clicking, ClickingConfig, CountModel};
use pmallows::mcmc::{mcmc_rho, simulate_dataset};
use pmallows::pseudo::{default_alpha_grid, estimate_alpha_full, estimate_rho_hat, exact_distribution, sample_rho};
use pmallows::variational::{
    iterative_search, marginal_kl, reference_profile, EvalMode, MarginalProfile, MAX_STUDY_EXACT_N,
};
use pmallows::{stream_rng, Alpha, McmcConfig, PseudoConfig, Ranking, RankingDataset, VSet};
use pmallows_cli::config::{ExperimentConfig, ExperimentKind};
use pmallows_cli::experiments::{self, recommend_all};
use pmallows_cli::table::{emit, Format};
use pmallows_cli::{io, table};

/// Pseudo-Mallows inference for rankings and clicks.
#[derive(Parser)]
#[command(name = "pmallows", version)]
struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "PMALLOWS_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the consensus of complete rankings.
    FitRho(FitRho),
    /// Sample the consensus from click data.
    FitClicks(FitClicks),
    /// Top-k recommendations per user from click data.
    Recommend(Recommend),
    /// Marginal KL between Pseudo-Mallows for one ordering and the posterior.
    EvalKl(EvalKl),
    /// Iterative search for a low-KL ordering.
    SearchOrdering(SearchOrdering),
    /// Run a configured experiment and write its result table.
    Experiment(Experiment),
    /// Write simulated Mallows rankings and, optionally, their clicks.
    Simulate(Simulate),
}

#[derive(Args)]
struct Model {
    /// Scale; estimated from the data when absent.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sampler {
    PseudoMallows,
    Mcmc,
}

#[derive(Args)]
struct FitRho {
    /// Rankings CSV.
    #[arg(long, short)]
    input: PathBuf,
    #[command(flatten)]
    model: Model,
    #[arg(long, value_enum, default_value = "pseudo-mallows")]
    method: Sampler,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// MCMC iterations; a fifth is discarded as burn-in.
    #[arg(long, default_value_t = 100_000)]
    iters: usize,
    #[arg(long, default_value_t = 10)]
    thin: usize,
    /// Where to write the consensus samples.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FitClicks {
    /// Clicks CSV.
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 500)]
    samples: usize,
    #[arg(long, default_value_t = pmallows::clicking::DEFAULT_WARM_UP)]
    warm_up: usize,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct Recommend {
    #[command(flatten)]
    fit: FitClicks,
    #[arg(long, short, default_value_t = 3)]
    k: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Sampled,
}

#[derive(Args)]
struct Eval {
    #[arg(long, value_enum, default_value = "exact")]
    mode: Mode,
    /// Samples per evaluation in sampled mode.
    #[arg(long, default_value_t = 200)]
    draws: usize,
    /// Reference chain length when the posterior cannot be enumerated.
    #[arg(long, default_value_t = 100_000)]
    iters: usize,
}

#[derive(Args)]
struct EvalKl {
    #[arg(long, short)]
    input: PathBuf,
    #[command(flatten)]
    model: Model,
    /// Sampling position of each item, comma separated; a V-ranking of the
    /// estimated consensus when absent.
    #[arg(long, value_delimiter = ',')]
    ordering: Option<Vec<usize>>,
    #[command(flatten)]
    eval: Eval,
}

#[derive(Args)]
struct SearchOrdering {
    #[arg(long, short)]
    input: PathBuf,
    #[command(flatten)]
    model: Model,
    /// Initial ordering-ranking; a V-ranking of the estimated consensus when absent.
    #[arg(long, value_delimiter = ',')]
    init: Option<Vec<usize>>,
    #[arg(long, default_value_t = 50)]
    max_iters: usize,
    #[command(flatten)]
    eval: Eval,
    /// Where to write the search trace as CSV.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct Experiment {
    kind: ExperimentKind,
    /// JSON configuration; flags below override its fields.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    users: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    samples: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    iters: Option<Vec<usize>>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Output file; the format follows the extension unless `--format` is given.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct Simulate {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    users: usize,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Consensus used for simulation; the identity when absent.
    #[arg(long, value_delimiter = ',')]
    rho0: Option<Vec<usize>>,
    #[arg(long, short)]
    output: PathBuf,
    /// Also binarize with truncated-Poisson click counts on `1..=n-3`.
    #[arg(long)]
    clicks_output: Option<PathBuf>,
    #[arg(long, default_value_t = 5.0)]
    lambda: f64,
}

fn main() -> Result<()> {
    match run(Cli::parse()) {
        Err(e) if is_broken_pipe(&e) => Ok(()),
        other => other,
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    let broken = |io: &std::io::Error| io.kind() == std::io::ErrorKind::BrokenPipe;
    e.chain().any(|c| {
        c.downcast_ref::<std::io::Error>().is_some_and(broken)
            || c.downcast_ref::<csv::Error>()
                .is_some_and(|ce| matches!(ce.kind(), csv::ErrorKind::Io(io) if broken(io)))
    })
}

fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::FitRho(a) => fit_rho(a),
        Command::FitClicks(a) => fit_clicks(a),
        Command::Recommend(a) => recommend(a),
        Command::EvalKl(a) => eval_kl(a),
        Command::SearchOrdering(a) => search_ordering(a),
        Command::Experiment(a) => experiment(a),
        Command::Simulate(a) => simulate(a),
    }
}

fn print_ranking(label: &str, r: &Ranking) {
    let ranks: Vec<String> = r.as_slice().iter().map(usize::to_string).collect();
    println!("{label}: {}", ranks.join(","));
}

fn resolve_alpha(data: &RankingDataset, model: &Model) -> Result<Alpha> {
    match model.alpha {
        Some(a) => Ok(Alpha::new(a)?.require_positive()?),
        None => {
            let alpha = estimate_alpha_full(
                data,
                &default_alpha_grid(),
                pmallows::pseudo::DEFAULT_SIM_USERS,
                &mut stream_rng(model.seed, &[u64::MAX]),
            )?;
            eprintln!("estimated alpha: {}", alpha.value());
            Ok(alpha)
        }
    }
}

fn fit_rho(a: FitRho) -> Result<()> {
    let data = io::load_rankings(&a.input)?;
    let alpha = resolve_alpha(&data, &a.model)?;
    let (samples, seconds) = match a.method {
        Sampler::PseudoMallows => {
            let set = sample_rho(&data, &PseudoConfig::new(alpha, a.sigma, a.samples, a.model.seed)?)?;
            (set.samples, set.wall_clock)
        }
        Sampler::Mcmc => {
            let cfg = McmcConfig::new(data.n_items(), a.iters, a.model.seed)
                .with_burn_in(a.iters / 5)
                .with_thin(a.thin);
            let trace = mcmc_rho(&data, alpha, &cfg)?;
            eprintln!("acceptance rate: {:.3}", trace.acceptance_rate);
            (trace.rho_samples, trace.wall_clock)
        }
    };
    if samples.is_empty() {
        bail!("the sampler recorded no samples");
    }
    print_ranking("cp consensus", &pmallows::cp_consensus(&samples)?);
    eprintln!("{} samples in {seconds:.3} s", samples.len());
    if let Some(out) = a.output {
        io::write_rankings(out, &samples, data.labels())?;
    }
    Ok(())
}

fn run_clicks(a: &FitClicks) -> Result<(pmallows::ClickDataset, pmallows::clicking::ClickingSamples)> {
    let clicks = io::load_clicks(&a.input)?;
    let alpha = Alpha::new(a.alpha)?;
    let cfg = ClickingConfig::new(PseudoConfig::new(alpha, a.sigma, a.samples, a.seed)?).with_warm_up(a.warm_up);
    let fit = pseudo_clicking(&clicks, &cfg)?;
    Ok((clicks, fit))
}

fn fit_clicks(a: FitClicks) -> Result<()> {
    let (clicks, fit) = run_clicks(&a)?;
    print_ranking("cp consensus", &fit.rho.cp_consensus()?);
    eprintln!("{} samples in {:.3} s", fit.rho.len(), fit.rho.wall_clock);
    if let Some(out) = a.output {
        io::write_rankings(out, &fit.rho.samples, clicks.labels())?;
    }
    Ok(())
}

fn recommend(a: Recommend) -> Result<()> {
    let (clicks, fit) = run_clicks(&a.fit)?;
    let recs = recommend_all(&fit.users, &clicks, a.k)?;
    let sink: Box<dyn Write> = match &a.fit.output {
        Some(path) => Box::new(std::fs::File::create(path).with_context(|| format!("{}", path.display()))?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(["user", "item", "probability"])?;
    for (user, list) in recs.iter().enumerate() {
        for r in list {
            let item = match clicks.labels() {
                Some(labels) => labels[r.item].clone(),
                None => r.item.to_string(),
            };
            writer.write_record([user.to_string(), item, r.probability.to_string()])?;
        }
    }
    writer.flush()?;
    Ok(())
}

fn parse_ordering_ranking(values: Option<Vec<usize>>, data: &RankingDataset, seed: u64) -> Result<Ranking> {
    match values {
        Some(v) => Ok(Ranking::new(v)?),
        None => Ok(VSet::new(&estimate_rho_hat(data)?).sample(&mut stream_rng(seed, &[u64::MAX - 1]))),
    }
}

fn reference(data: &RankingDataset, alpha: Alpha, eval: &Eval, seed: u64) -> Result<MarginalProfile> {
    let chain = McmcConfig::new(data.n_items(), eval.iters, seed)
        .with_burn_in(eval.iters / 5)
        .with_thin(10);
    Ok(reference_profile(data, alpha, &chain)?)
}

fn eval_kl(a: EvalKl) -> Result<()> {
    let data = io::load_rankings(&a.input)?;
    let alpha = resolve_alpha(&data, &a.model)?;
    let x = parse_ordering_ranking(a.ordering, &data, a.model.seed)?;
    if x.len() != data.n_items() {
        bail!("ordering has {} entries for {} items", x.len(), data.n_items());
    }
    let p = reference(&data, alpha, &a.eval, a.model.seed)?;
    let q = match a.eval.mode {
        Mode::Exact => {
            if data.n_items() > pmallows::exact::MAX_EXACT_N {
                bail!("exact mode supports at most {} items", pmallows::exact::MAX_EXACT_N);
            }
            MarginalProfile::from_distribution(&exact_distribution(&data, alpha, &x.ordering())?)
        }
        Mode::Sampled => {
            let sampler = pmallows::pseudo::PseudoMallowsSampler::new(&data, alpha, &Ranking::identity(data.n_items()), 0.0)?;
            let ordering = x.ordering();
            let draws: Vec<Ranking> = (0..a.eval.draws)
                .map(|t| sampler.given_ordering(&ordering, &mut stream_rng(a.model.seed, &[t as u64])))
                .collect();
            MarginalProfile::from_samples(&draws)?
        }
    };
    print_ranking("ordering-ranking", &x);
    println!("marginal kl: {}", marginal_kl(&q, &p)?);
    if data.n_items() > MAX_STUDY_EXACT_N {
        eprintln!("reference marginals from {} chain iterations", a.eval.iters);
    }
    Ok(())
}

fn search_ordering(a: SearchOrdering) -> Result<()> {
    let data = io::load_rankings(&a.input)?;
    let alpha = resolve_alpha(&data, &a.model)?;
    let init = parse_ordering_ranking(a.init, &data, a.model.seed)?;
    let p = reference(&data, alpha, &a.eval, a.model.seed)?;
    let mode = match a.eval.mode {
        Mode::Exact => EvalMode::Exact,
        Mode::Sampled => EvalMode::Sampled {
            draws: a.eval.draws,
            seed: a.model.seed,
        },
    };
    let v_reference = estimate_rho_hat(&data)?;
    let trace = iterative_search(&data, alpha, &init, a.max_iters, mode, &p, &v_reference)?;
    print_ranking("best ordering-ranking", &trace.best.ordering_ranking);
    println!("best marginal kl: {}", trace.best.kl);
    println!("distance to V-set of the estimated consensus: {}", trace.best.v_distance);
    if let Some(path) = a.output {
        let mut writer = csv::Writer::from_path(&path).with_context(|| format!("{}", path.display()))?;
        writer.write_record(["iteration", "kl", "v_distance", "ordering_ranking"])?;
        for (i, s) in std::iter::once(&trace.initial).chain(&trace.steps).enumerate() {
            let x: Vec<String> = s.ordering_ranking.as_slice().iter().map(usize::to_string).collect();
            writer.write_record([i.to_string(), s.kl.to_string(), s.v_distance.to_string(), x.join(" ")])?;
        }
        writer.flush()?;
    }
    Ok(())
}

fn experiment(a: Experiment) -> Result<()> {
    let mut cfg = match &a.config {
        Some(path) => {
            let cfg = ExperimentConfig::load(path)?;
            if cfg.kind != a.kind {
                bail!("{} describes a {} experiment, not {}", path.display(), cfg.kind.name(), a.kind.name());
            }
            cfg
        }
        None => ExperimentConfig::new(
            a.kind,
            a.n.context("--n is required without --config")?,
            a.users.context("--users is required without --config")?,
            a.alpha.context("--alpha is required without --config")?,
            a.seed.unwrap_or(0),
        ),
    };
    if let Some(v) = a.n {
        cfg.n = v;
    }
    if let Some(v) = a.users {
        cfg.n_users = v;
    }
    if let Some(v) = a.alpha {
        cfg.alpha0 = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.replicates {
        cfg.replicates = v;
    }
    if let Some(v) = a.samples {
        cfg.pm_samples = v;
    }
    if let Some(v) = a.iters {
        cfg.mcmc_iterations = v;
    }
    if let Some(v) = a.sigma {
        cfg.sigma = v;
    }
    let result = experiments::run(&cfg)?;
    let path = match (a.output, &cfg.output_dir) {
        (Some(p), _) => p,
        (None, Some(dir)) => {
            std::fs::create_dir_all(dir).with_context(|| format!("{}", dir.display()))?;
            dir.join(format!("{}.csv", cfg.kind.name()))
        }
        (None, None) => {
            table::write_to(&result, a.format.unwrap_or(Format::Csv), std::io::stdout().lock(), "stdout".as_ref())?;
            return Ok(());
        }
    };
    emit(&result, a.format.unwrap_or_else(|| Format::from_path(&path)), &path)?;
    eprintln!("{} rows written to {}", result.len(), path.display());
    Ok(())
}

fn simulate(a: Simulate) -> Result<()> {
    let rho0 = match a.rho0 {
        Some(v) => Ranking::new(v)?,
        None => Ranking::identity(a.n),
    };
    if rho0.len() != a.n {
        bail!("rho0 has {} entries, n is {}", rho0.len(), a.n);
    }
    let mut rng = stream_rng(a.seed, &[0]);
    let data = simulate_dataset(&rho0, Alpha::new(a.alpha)?.require_positive()?, a.users, &mut rng)?;
    io::write_rankings(&a.output, data.rankings(), None)?;
    if let Some(path) = a.clicks_output {
        if a.n < 4 {
            bail!("clicks need at least 4 items");
        }
        let model = CountModel::TruncatedPoisson {
            lambda: a.lambda,
            lo: 1,
            hi: a.n - 3,
        };
        let clicks = pmallows::clicking::binarize(&data, &model, &mut stream_rng(a.seed, &[1]))?;
        io::write_clicks(path, &clicks)?;
    }
    Ok(())
}
