//! Pipeline stages. Each stage reads the persisted outputs of earlier
//! stages from the output directory and writes its own.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use coauthor_core::centrality;
use coauthor_core::corpus::{self, CorpusFormat, Gender, GenderLexicon, PublicationRecord};
use coauthor_core::diversity;
use coauthor_core::graph::{self, CollabGraph, TeamRecord};
use coauthor_core::indicators;
use coauthor_core::nullmodel::{self, NullConfig};
use coauthor_core::profiles::{self, AuthorProfile};
use coauthor_core::table::{MetricTable, Value};
use coauthor_core::textprep;
use coauthor_core::topicmodel::{self, DocTopicMatrix};
use serde::{Deserialize, Serialize};

use crate::analysis;
use crate::config::RunConfig;
use crate::error::CliError;

pub type Counts = BTreeMap<String, u64>;

pub mod files {
    pub const CORPUS: &str = "corpus.jsonl";
    pub const INGEST_ERRORS: &str = "ingest_errors.csv";
    pub const LDA_MODEL: &str = "lda_model.json";
    pub const DOC_TOPIC: &str = "doc_topic.csv";
    pub const TOPIC_TERMS: &str = "topic_terms.csv";
    pub const SELECT_K: &str = "select_k.csv";
    pub const PROFILES: &str = "profiles.csv";
    pub const NODES: &str = "nodes.csv";
    pub const EDGES: &str = "edges.csv";
    pub const TEAMS: &str = "teams.csv";
    pub const DEGREE_STATS: &str = "degree_stats.csv";
    pub const COLLAB_TYPES: &str = "collab_types.csv";
    pub const AUTHOR_ENTROPY: &str = "author_entropy.csv";
    pub const PAIR_COSINE: &str = "pair_cosine.csv";
    pub const TEAM_DIVERSITY: &str = "team_diversity.csv";
    pub const CENTRALITY: &str = "centrality.csv";
    pub const TOP_NODES: &str = "top_nodes.csv";
    pub const TOP_EDGES: &str = "top_edges.csv";
    pub const TOP_SUMMARY: &str = "top_summary.csv";
    pub const NULL_MOMENTS: &str = "null_moments.csv";
    pub const ZSCORES: &str = "zscores.csv";
    pub const FRACTIONAL_SHARES: &str = "fractional_shares.csv";
    pub const AUTHOR_COUNTS: &str = "author_counts.csv";
    pub const FIELD_CITATIONS: &str = "field_citations.csv";
    pub const AUTHOR_INDICATORS: &str = "author_indicators.csv";
    pub const CORE_INDICATORS: &str = "core_indicators.csv";
    pub const TESTS: &str = "tests.json";
    pub const GROUP_SUMMARIES: &str = "group_summaries.csv";
    pub const DENSITIES: &str = "densities.csv";
    pub const REPORT: &str = "report.json";
    pub const MANIFEST: &str = "manifest.json";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Ingest,
    Topics,
    Profiles,
    Graph,
    Metrics,
    Centrality,
    Nullmodel,
    Indicators,
    Stats,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 10] = [
        Stage::Ingest,
        Stage::Topics,
        Stage::Profiles,
        Stage::Graph,
        Stage::Metrics,
        Stage::Centrality,
        Stage::Nullmodel,
        Stage::Indicators,
        Stage::Stats,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Topics => "topics",
            Stage::Profiles => "profiles",
            Stage::Graph => "graph",
            Stage::Metrics => "metrics",
            Stage::Centrality => "centrality",
            Stage::Nullmodel => "nullmodel",
            Stage::Indicators => "indicators",
            Stage::Stats => "stats",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL.into_iter().find(|st| st.name() == s).ok_or_else(|| format!("unknown stage {s:?}"))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub status: String,
    pub seconds: f64,
    pub counts: Counts,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Run log: configuration echo, per-stage timings and counts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config: RunConfig,
    pub stages: Vec<StageRecord>,
    pub failed_stage: Option<Stage>,
}

impl Manifest {
    fn new(config: &RunConfig) -> Self {
        Self {
            tool: "coauthor".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed: config.seed(),
            config: config.clone(),
            stages: Vec::new(),
            failed_stage: None,
        }
    }

    pub fn load(path: &Path) -> Option<Self> {
        serde_json::from_str(&std::fs::read_to_string(path).ok()?).ok()
    }

    fn record(&mut self, rec: StageRecord) {
        if rec.error.is_some() {
            self.failed_stage = Some(rec.stage);
        } else if self.failed_stage == Some(rec.stage) {
            self.failed_stage = None;
        }
        self.stages.retain(|r| r.stage != rec.stage);
        self.stages.push(rec);
        self.stages.sort_by_key(|r| r.stage);
    }

    fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| CliError::Io(path.to_path_buf(), e))
    }
}

/// Output directory plus configuration.
pub struct Workspace {
    pub config: RunConfig,
}

impl Workspace {
    pub fn new(config: RunConfig) -> Result<Self, CliError> {
        config.validate()?;
        std::fs::create_dir_all(&config.out_dir).map_err(|e| CliError::Io(config.out_dir.clone(), e))?;
        Ok(Self { config })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.config.out_dir.join(name)
    }

    /// Path of an upstream output, or an error naming the stage that
    /// produces it.
    fn input(&self, name: &str, stage: &'static str) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        if path.is_file() {
            Ok(path)
        } else {
            Err(CliError::MissingInput { path, stage })
        }
    }

    fn records(&self) -> Result<Vec<PublicationRecord>, CliError> {
        let path = self.input(files::CORPUS, "ingest")?;
        let parsed = corpus::parse_corpus(&path, CorpusFormat::Jsonl)?;
        if let Some(e) = parsed.errors.first() {
            return Err(CliError::Config(format!("{}:{}: {}", path.display(), e.line, e.message)));
        }
        Ok(parsed.records)
    }

    fn doc_topic(&self) -> Result<DocTopicMatrix, CliError> {
        Ok(DocTopicMatrix::read_csv(&self.input(files::DOC_TOPIC, "topics")?)?)
    }

    fn profiles(&self) -> Result<Vec<AuthorProfile>, CliError> {
        Ok(profiles::read_profiles_csv(&self.input(files::PROFILES, "profiles")?)?)
    }

    fn graph(&self) -> Result<CollabGraph, CliError> {
        let nodes = self.input(files::NODES, "graph")?;
        let edges = self.input(files::EDGES, "graph")?;
        Ok(CollabGraph::read_csv(&nodes, &edges)?)
    }

    fn table(&self, name: &str, stage: &'static str) -> Result<MetricTable, CliError> {
        Ok(MetricTable::read_csv(&self.input(name, stage)?)?)
    }

    fn write(&self, name: &str, table: &MetricTable) -> Result<(), CliError> {
        Ok(table.write_csv(&self.path(name))?)
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        let path = self.path(name);
        let text = serde_json::to_string_pretty(value)?;
        std::fs::write(&path, text + "\n").map_err(|e| CliError::Io(path, e))
    }

    fn teams(&self, records: &[PublicationRecord], profiles: &[AuthorProfile]) -> Vec<TeamRecord> {
        graph::extract_teams(records, profiles, self.config.team_size_rule)
    }

    /// Run one stage and record it in the manifest.
    pub fn run_stage(&self, stage: Stage) -> Result<Counts, CliError> {
        let manifest_path = self.path(files::MANIFEST);
        let mut manifest = Manifest::load(&manifest_path).unwrap_or_else(|| Manifest::new(&self.config));
        manifest.config = self.config.clone();
        manifest.seed = self.config.seed();
        let start = Instant::now();
        log::info!("stage {stage}");
        let outcome = self.dispatch(stage);
        let seconds = start.elapsed().as_secs_f64();
        let rec = match &outcome {
            Ok(counts) => StageRecord { stage, status: "ok".into(), seconds, counts: counts.clone(), error: None },
            Err(e) => StageRecord { stage, status: "failed".into(), seconds, counts: Counts::new(), error: Some(e.to_string()) },
        };
        manifest.record(rec);
        manifest.write(&manifest_path)?;
        outcome
    }

    /// Every stage in order; stops at the first failure.
    pub fn run_all(&self) -> Result<(), CliError> {
        for stage in Stage::ALL {
            self.run_stage(stage)?;
        }
        Ok(())
    }

    fn dispatch(&self, stage: Stage) -> Result<Counts, CliError> {
        match stage {
            Stage::Ingest => self.ingest(),
            Stage::Topics => self.topics(),
            Stage::Profiles => self.build_profiles(),
            Stage::Graph => self.build_graph(),
            Stage::Metrics => self.metrics(),
            Stage::Centrality => self.centrality(),
            Stage::Nullmodel => self.nullmodel(),
            Stage::Indicators => self.indicators(),
            Stage::Stats => self.stats(),
            Stage::Report => self.report(),
        }
    }

    fn ingest(&self) -> Result<Counts, CliError> {
        let path = self.config.corpus.as_ref().ok_or_else(|| CliError::Config("no corpus path given (--corpus)".into()))?;
        if !path.is_file() {
            return Err(CliError::Io(path.clone(), std::io::Error::new(std::io::ErrorKind::NotFound, "corpus file not found")));
        }
        let parsed = corpus::parse_corpus(path, CorpusFormat::from_path(path))?;
        let mut records = parsed.records;
        if let Some(lex_path) = &self.config.lexicon {
            let lexicon = GenderLexicon::from_csv(lex_path)?;
            corpus::assign_genders(&mut records, &lexicon);
        }
        let parsed_count = records.len();
        let kept = corpus::filter_corpus(records, self.config.window());
        corpus::write_records_jsonl(&self.path(files::CORPUS), &kept)?;

        let mut errors = MetricTable::new(["line", "message"]);
        for e in &parsed.errors {
            log::warn!("{}:{}: {}", path.display(), e.line, e.message);
            errors.push(vec![e.line.into(), e.message.as_str().into()]);
        }
        self.write(files::INGEST_ERRORS, &errors)?;

        let mut authors: BTreeMap<&str, Gender> = BTreeMap::new();
        for a in kept.iter().flat_map(|r| &r.authors) {
            authors.entry(a.author_id.as_str()).or_insert(a.gender);
        }
        let mut counts = Counts::new();
        counts.insert("records_parsed".into(), parsed_count as u64);
        counts.insert("records_malformed".into(), parsed.errors.len() as u64);
        counts.insert("records_excluded".into(), (parsed_count - kept.len()) as u64);
        counts.insert("records_included".into(), kept.len() as u64);
        for g in [Gender::F, Gender::M, Gender::U] {
            counts.insert(format!("authors_{g}"), authors.values().filter(|&&x| x == g).count() as u64);
        }
        Ok(counts)
    }

    fn topics(&self) -> Result<Counts, CliError> {
        let records = self.records()?;
        let stopwords = match &self.config.stopwords {
            Some(p) => textprep::load_stopwords(p)?,
            None => textprep::default_stopwords(),
        };
        let docs: Vec<_> = records
            .iter()
            .map(|r| textprep::preprocess(&r.pub_id, &r.title, &r.abstract_text, &stopwords))
            .collect();
        let build = textprep::build_dtm(&docs, self.config.min_df)?;
        let dtm = build.matrix;
        let model = topicmodel::fit_lda(&dtm, &self.config.lda_params())?;
        model.save_json(&self.path(files::LDA_MODEL))?;
        model.doc_topic.write_csv(&self.path(files::DOC_TOPIC))?;

        let mut terms = MetricTable::new(["topic", "rank", "term", "probability"]);
        for (k, top) in model.top_terms(10).into_iter().enumerate() {
            for (rank, (term, p)) in top.into_iter().enumerate() {
                terms.push(vec![k.into(), (rank + 1).into(), term.into(), p.into()]);
            }
        }
        self.write(files::TOPIC_TERMS, &terms)?;

        if !self.config.k_candidates.is_empty() {
            let scores = topicmodel::select_k(&dtm, &self.config.k_candidates, &self.config.lda_params())?;
            let mut t = MetricTable::new(["k", "log_likelihood", "perplexity", "heldout_log_likelihood", "heldout_perplexity"]);
            for s in scores {
                t.push(vec![s.k.into(), s.log_likelihood.into(), s.perplexity.into(), s.heldout_log_likelihood.into(), s.heldout_perplexity.into()]);
            }
            self.write(files::SELECT_K, &t)?;
        }

        let mut counts = Counts::new();
        counts.insert("documents".into(), dtm.n_docs() as u64);
        counts.insert("documents_without_tokens".into(), build.dropped.len() as u64);
        counts.insert("vocabulary".into(), dtm.vocab_size() as u64);
        counts.insert("tokens".into(), dtm.total_tokens());
        counts.insert("topics".into(), model.k as u64);
        Ok(counts)
    }

    fn build_profiles(&self) -> Result<Counts, CliError> {
        let records = self.records()?;
        let doc_topic = self.doc_topic()?;
        let profiles = profiles::build_profiles(&doc_topic, &records, self.config.tau)?;
        profiles::write_profiles_csv(&self.path(files::PROFILES), &profiles)?;
        let mut counts = Counts::new();
        counts.insert("profiles".into(), profiles.len() as u64);
        for g in [Gender::F, Gender::M] {
            counts.insert(format!("profiles_{g}"), profiles.iter().filter(|p| p.gender == g).count() as u64);
        }
        Ok(counts)
    }

    fn build_graph(&self) -> Result<Counts, CliError> {
        let records = self.records()?;
        let profiles = self.profiles()?;
        let g = graph::project(&records);
        g.write_csv(&self.path(files::NODES), &self.path(files::EDGES))?;
        let teams = self.teams(&records, &profiles);
        graph::write_teams_csv(&self.path(files::TEAMS), &teams)?;
        self.write(files::DEGREE_STATS, &graph::degree_stats(&records))?;
        self.write(files::COLLAB_TYPES, &graph::collaboration_type_shares(&records))?;

        let mut counts = Counts::new();
        counts.insert("nodes".into(), g.node_count() as u64);
        counts.insert("edges".into(), g.edge_count() as u64);
        for (t, c) in g.edge_type_counts() {
            counts.insert(format!("edges_{t}"), c as u64);
        }
        counts.insert("teams".into(), teams.len() as u64);
        Ok(counts)
    }

    fn metrics(&self) -> Result<Counts, CliError> {
        let records = self.records()?;
        let profiles = self.profiles()?;
        let g = self.graph()?;
        let authors = diversity::author_entropy_table(&profiles, self.config.tau);
        let pairs = diversity::pair_cosine_table(&g, &profiles)?;
        let teams = self.teams(&records, &profiles);
        let team_table = diversity::team_table(&teams, &profiles, self.config.disciplines())?;
        self.write(files::AUTHOR_ENTROPY, &authors)?;
        self.write(files::PAIR_COSINE, &pairs)?;
        self.write(files::TEAM_DIVERSITY, &team_table)?;

        let defined = |t: &MetricTable, col: &str| t.numbers(col).map_or(0, |v| v.iter().flatten().count()) as u64;
        let mut counts = Counts::new();
        counts.insert("author_entropy_defined".into(), defined(&authors, "H_i"));
        counts.insert("author_entropy_excluded".into(), authors.len() as u64 - defined(&authors, "H_i"));
        counts.insert("pair_cosines".into(), pairs.len() as u64);
        counts.insert("team_entropy_defined".into(), defined(&team_table, "H_p"));
        counts.insert("team_cosine_defined".into(), defined(&team_table, "S_p"));
        Ok(counts)
    }

    fn centrality(&self) -> Result<Counts, CliError> {
        let records = self.records()?;
        let g = self.graph()?;
        let c = &self.config;
        let result = centrality::betweenness(&g, c.exact_threshold, c.bc_samples, c.seed())?;
        let partition = centrality::core_periphery(&result, c.core_fraction)?;
        centrality::write_centrality_csv(&self.path(files::CENTRALITY), &result, &partition)?;
        let ind = indicators::author_indicators(&records, None);
        let top = centrality::top_subnetwork(&g, &result, c.top_fraction, &ind)?;
        top.graph.write_csv(&self.path(files::TOP_NODES), &self.path(files::TOP_EDGES))?;
        self.write(files::TOP_SUMMARY, &top.summary)?;

        let mut counts = Counts::new();
        counts.insert("core".into(), partition.core.len() as u64);
        counts.insert("periphery".into(), partition.periphery.len() as u64);
        counts.insert("top_nodes".into(), top.graph.node_count() as u64);
        counts.insert("top_edges".into(), top.graph.edge_count() as u64);
        counts.insert("sampled".into(), matches!(result.method, centrality::Method::Sampled { .. }) as u64);
        Ok(counts)
    }

    fn nullmodel(&self) -> Result<Counts, CliError> {
        let records = self.records()?;
        let profiles = self.profiles()?;
        let teams = self.teams(&records, &profiles);
        let n_d = self.config.disciplines();
        let scores = teams
            .iter()
            .map(|t| diversity::team_diversity(t, &profiles, n_d))
            .collect::<Result<Vec<_>, _>>()?;
        let null_config = NullConfig {
            confidence: self.config.null_confidence,
            margin: self.config.null_margin,
            seed: self.config.seed(),
            sampling: self.config.null_sampling,
            disciplines: n_d,
        };
        let moments = nullmodel::null_moments(&teams, &profiles, &null_config)?;
        let z = nullmodel::z_scores(&teams, &scores, &moments, self.config.null_sampling)?;
        self.write(files::NULL_MOMENTS, &moments.table())?;
        nullmodel::write_z_csv(&self.path(files::ZSCORES), &z)?;

        let mut counts = Counts::new();
        counts.insert("sizes".into(), moments.entries.len() as u64);
        counts.insert("synthetic_teams".into(), moments.entries.values().map(|m| m.count as u64).sum());
        counts.insert("z_h_defined".into(), z.iter().filter(|r| r.z_h.is_some()).count() as u64);
        counts.insert("z_s_defined".into(), z.iter().filter(|r| r.z_s.is_some()).count() as u64);
        Ok(counts)
    }

    fn indicators(&self) -> Result<Counts, CliError> {
        let records = self.records()?;
        let doc_topic = self.doc_topic()?;
        self.write(files::FRACTIONAL_SHARES, &indicators::fractional_shares(&records))?;
        self.write(files::AUTHOR_COUNTS, &indicators::author_counts(&records))?;
        self.write(files::FIELD_CITATIONS, &indicators::field_normalized_table(&records, &doc_topic))?;
        let ind = indicators::author_indicators(&records, Some(&doc_topic));
        self.write(files::AUTHOR_INDICATORS, &indicators::author_indicator_table(&ind))?;
        let mut counts = Counts::new();
        counts.insert("authors".into(), ind.len() as u64);
        Ok(counts)
    }

    fn stats(&self) -> Result<Counts, CliError> {
        let inputs = analysis::StatsInputs {
            author_entropy: self.table(files::AUTHOR_ENTROPY, "metrics")?,
            pair_cosine: self.table(files::PAIR_COSINE, "metrics")?,
            centrality: self.table(files::CENTRALITY, "centrality")?,
            author_indicators: self.table(files::AUTHOR_INDICATORS, "indicators")?,
            zscores: self.table(files::ZSCORES, "nullmodel")?,
        };
        let out = analysis::run_tests(&inputs, &self.config)?;
        self.write_json(files::TESTS, &out.tests)?;
        self.write(files::GROUP_SUMMARIES, &out.summaries)?;
        self.write(files::DENSITIES, &out.densities)?;
        self.write(files::CORE_INDICATORS, &out.core_indicators)?;
        let mut counts = Counts::new();
        counts.insert("tests".into(), out.tests.len() as u64);
        Ok(counts)
    }

    fn report(&self) -> Result<Counts, CliError> {
        let mut tables = serde_json::Map::new();
        for (name, stage) in analysis::REPORT_TABLES {
            if name == files::SELECT_K && self.config.k_candidates.is_empty() {
                continue;
            }
            let t = self.table(name, stage)?;
            tables.insert(name.trim_end_matches(".csv").to_string(), t.to_json_records());
        }
        let tests_path = self.input(files::TESTS, "stats")?;
        let tests: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(&tests_path).map_err(|e| CliError::Io(tests_path.clone(), e))?,
        )?;
        let report = serde_json::json!({
            "figures": analysis::figure_map(),
            "tables": tables,
            "tests": tests,
        });
        self.write_json(files::REPORT, &report)?;
        let mut counts = Counts::new();
        counts.insert("tables".into(), tables.len() as u64);
        Ok(counts)
    }
}

/// Role lookup from a centrality table.
pub(crate) fn roles(centrality: &MetricTable) -> BTreeMap<String, String> {
    let (id, role) = (centrality.column("author_id"), centrality.column("role"));
    let (Some(id), Some(role)) = (id, role) else { return BTreeMap::new() };
    centrality
        .rows
        .iter()
        .filter_map(|r| match (&r[id], &r[role]) {
            (Value::Text(a), Value::Text(b)) => Some((a.clone(), b.clone())),
            _ => None,
        })
        .collect()
}
