use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use coauthor_cli::{CliError, RunConfig, Stage, Workspace};
use coauthor_core::corpus;
use coauthor_core::fixture::{self, FixtureConfig};

#[derive(Parser)]
#[command(name = "coauthor", version, about = "Gender-aware co-authorship and interdisciplinarity analysis")]
struct Cli {
    #[command(flatten)]
    opts: Overrides,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, gender-label and filter the corpus.
    Ingest,
    /// Fit the topic model (and score candidate topic counts).
    Topics,
    /// Author topic profiles.
    Profiles,
    /// Collaboration graph, teams and per-year collaboration tables.
    Graph,
    /// Author entropy, pair cosine and team diversity.
    Metrics,
    /// Betweenness, core and periphery, top subnetwork.
    Centrality,
    /// Null-model moments and team z-scores.
    Nullmodel,
    /// Bibliometric indicators.
    Indicators,
    /// Hypothesis tests, summaries and densities.
    Stats,
    /// Bundle every table into report.json.
    Report,
    /// Every stage in order.
    Run,
    /// Write a synthetic corpus and gender lexicon.
    Fixture(FixtureArgs),
}

#[derive(Args)]
struct FixtureArgs {
    /// Output directory.
    #[arg(long, default_value = "fixture")]
    dir: PathBuf,
    #[arg(long, default_value_t = FixtureConfig::default().publications)]
    publications: usize,
    #[arg(long, default_value_t = FixtureConfig::default().authors)]
    authors: usize,
    #[arg(long, default_value_t = FixtureConfig::default().seed)]
    fixture_seed: u64,
}

/// Flags overriding the configuration file.
#[derive(Args)]
struct Overrides {
    /// TOML or JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Reproducible mode: a seed is required.
    #[arg(long, global = true)]
    ci: bool,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    #[arg(long, global = true)]
    lexicon: Option<PathBuf>,
    #[arg(long, global = true)]
    stopwords: Option<PathBuf>,
    /// Number of topics.
    #[arg(short, long, global = true)]
    k: Option<usize>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    #[arg(long, global = true)]
    iterations: Option<usize>,
    /// Candidate topic counts to score, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    select_k: Option<Vec<usize>>,
    #[arg(long, global = true)]
    tau: Option<f64>,
    #[arg(long, global = true)]
    core_fraction: Option<f64>,
    #[arg(long, global = true)]
    top_fraction: Option<f64>,
    #[arg(long, global = true)]
    permutations: Option<usize>,
    #[arg(long, global = true)]
    year_min: Option<i32>,
    #[arg(long, global = true)]
    year_max: Option<i32>,
}

impl Overrides {
    fn resolve(self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field { c.$field = v; }
            )*};
        }
        set!(k, beta, iterations, tau, core_fraction, top_fraction, permutations, year_min, year_max);
        if let Some(v) = self.out {
            c.out_dir = v;
        }
        if let Some(v) = self.select_k {
            c.k_candidates = v;
        }
        c.corpus = self.corpus.or(c.corpus);
        c.lexicon = self.lexicon.or(c.lexicon);
        c.stopwords = self.stopwords.or(c.stopwords);
        c.alpha = self.alpha.or(c.alpha);
        c.seed = self.seed.or(c.seed);
        c.threads = self.threads.or(c.threads);
        if self.ci && c.seed.is_none() {
            return Err(CliError::Config("--ci requires a seed (--seed or config)".into()));
        }
        c.validate()?;
        Ok(c)
    }
}

fn fixture(args: FixtureArgs, seed: Option<u64>) -> Result<(), CliError> {
    let config = FixtureConfig {
        publications: args.publications,
        authors: args.authors,
        seed: seed.unwrap_or(args.fixture_seed),
        ..FixtureConfig::default()
    };
    let generated = fixture::generate_corpus(&config);
    std::fs::create_dir_all(&args.dir).map_err(|e| CliError::Io(args.dir.clone(), e))?;
    corpus::write_records_jsonl(&args.dir.join("corpus.jsonl"), &generated.records)?;
    generated.lexicon.write_csv(&args.dir.join("lexicon.csv"))?;
    println!("wrote {} records to {}", generated.records.len(), args.dir.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let stage = match cli.command {
        Command::Fixture(args) => return fixture(args, cli.opts.seed),
        Command::Run => None,
        Command::Ingest => Some(Stage::Ingest),
        Command::Topics => Some(Stage::Topics),
        Command::Profiles => Some(Stage::Profiles),
        Command::Graph => Some(Stage::Graph),
        Command::Metrics => Some(Stage::Metrics),
        Command::Centrality => Some(Stage::Centrality),
        Command::Nullmodel => Some(Stage::Nullmodel),
        Command::Indicators => Some(Stage::Indicators),
        Command::Stats => Some(Stage::Stats),
        Command::Report => Some(Stage::Report),
    };
    let config = cli.opts.resolve()?;
    if let Some(n) = config.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let ws = Workspace::new(config)?;
    match stage {
        Some(s) => ws.run_stage(s).map(drop),
        None => ws.run_all(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
