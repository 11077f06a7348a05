use std::path::{Path, PathBuf};

use coauthor_core::centrality::{DEFAULT_CORE_FRACTION, DEFAULT_EXACT_THRESHOLD, DEFAULT_TOP_FRACTION};
use coauthor_core::diversity::DisciplineCount;
use coauthor_core::graph::TeamSizeRule;
use coauthor_core::nullmodel::Sampling;
use coauthor_core::profiles::DEFAULT_TAU;
use coauthor_core::stats::{PermutationStatistic, DEFAULT_PERMUTATIONS};
use coauthor_core::{LdaParams, YearWindow};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisciplineNormalizer {
    /// `N_d` = number of topics.
    #[default]
    Global,
    /// `N_d` = distinct disciplines in the team.
    WithinTeam,
}

/// Every tunable of a pipeline run. Loaded from TOML or JSON, then
/// overridden by command-line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
    pub threads: Option<usize>,

    pub year_min: i32,
    pub year_max: i32,

    pub k: usize,
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub min_df: usize,
    /// Candidate topic counts scored by the `topics` stage; empty skips it.
    pub k_candidates: Vec<usize>,

    pub tau: f64,
    pub team_size_rule: TeamSizeRule,
    pub discipline_normalizer: DisciplineNormalizer,

    pub core_fraction: f64,
    pub top_fraction: f64,
    pub exact_threshold: usize,
    /// Sources for sampled betweenness above `exact_threshold` nodes.
    pub bc_samples: usize,

    pub null_sampling: Sampling,
    pub null_confidence: f64,
    pub null_margin: f64,

    pub permutations: usize,
    pub permutation_statistic: PermutationStatistic,
    pub density_bins: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let lda = LdaParams::default();
        let window = YearWindow::default();
        Self {
            corpus: None,
            lexicon: None,
            stopwords: None,
            out_dir: PathBuf::from("out"),
            seed: None,
            threads: None,
            year_min: window.min,
            year_max: window.max,
            k: lda.k,
            alpha: lda.alpha,
            beta: lda.beta,
            iterations: lda.iterations,
            min_df: 1,
            k_candidates: Vec::new(),
            tau: DEFAULT_TAU,
            team_size_rule: TeamSizeRule::default(),
            discipline_normalizer: DisciplineNormalizer::default(),
            core_fraction: DEFAULT_CORE_FRACTION,
            top_fraction: DEFAULT_TOP_FRACTION,
            exact_threshold: DEFAULT_EXACT_THRESHOLD,
            bc_samples: 1000,
            null_sampling: Sampling::default(),
            null_confidence: 0.95,
            null_margin: 0.01,
            permutations: DEFAULT_PERMUTATIONS,
            permutation_statistic: PermutationStatistic::default(),
            density_bins: 20,
        }
    }
}

impl RunConfig {
    /// Read a `.toml` or `.json` file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if is_json {
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        } else {
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn window(&self) -> YearWindow {
        YearWindow { min: self.year_min, max: self.year_max }
    }

    pub fn lda_params(&self) -> LdaParams {
        LdaParams { k: self.k, alpha: self.alpha, beta: self.beta, iterations: self.iterations, seed: self.seed() }
    }

    pub fn disciplines(&self) -> DisciplineCount {
        match self.discipline_normalizer {
            DisciplineNormalizer::Global => DisciplineCount::Global(self.k),
            DisciplineNormalizer::WithinTeam => DisciplineCount::WithinTeam,
        }
    }

    /// Range checks for every numeric field.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if self.alpha.is_some_and(|a| !(a > 0.0)) || !(self.beta > 0.0) {
            return bad("alpha and beta must be positive".into());
        }
        if self.iterations == 0 {
            return bad("iterations must be at least 1".into());
        }
        if self.k_candidates.contains(&0) {
            return bad("k_candidates must be positive".into());
        }
        if !(0.0..1.0).contains(&self.tau) {
            return bad(format!("tau {} outside [0, 1)", self.tau));
        }
        for (name, f) in [("core_fraction", self.core_fraction), ("top_fraction", self.top_fraction)] {
            if !(f > 0.0 && f <= 1.0) {
                return bad(format!("{name} {f} outside (0, 1]"));
            }
        }
        if !(self.null_confidence > 0.0 && self.null_confidence < 1.0) || !(self.null_margin > 0.0 && self.null_margin < 1.0) {
            return bad("null_confidence and null_margin must lie in (0, 1)".into());
        }
        if self.permutations == 0 || self.bc_samples == 0 || self.density_bins == 0 {
            return bad("permutations, bc_samples and density_bins must be positive".into());
        }
        if self.year_min > self.year_max {
            return bad(format!("year window {}..{} is empty", self.year_min, self.year_max));
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_and_json_load() {
        let dir = tempfile::tempdir().unwrap();
        let toml_path = dir.path().join("c.toml");
        std::fs::write(&toml_path, "k = 4\nseed = 9\nnull_sampling = \"stratified\"\nk_candidates = [2, 3]\n").unwrap();
        let c = RunConfig::load(&toml_path).unwrap();
        assert_eq!((c.k, c.seed, c.null_sampling), (4, Some(9), Sampling::Stratified));
        assert_eq!(c.beta, 0.01);

        let json_path = dir.path().join("c.json");
        std::fs::write(&json_path, r#"{"tau": 0.1, "team_size_rule": "known_only"}"#).unwrap();
        let c = RunConfig::load(&json_path).unwrap();
        assert_eq!(c.tau, 0.1);
        assert_eq!(c.team_size_rule, TeamSizeRule::KnownOnly);

        std::fs::write(&toml_path, "bogus = 1\n").unwrap();
        assert!(RunConfig::load(&toml_path).is_err());
    }

    #[test]
    fn validation() {
        assert!(RunConfig::default().validate().is_ok());
        for c in [
            RunConfig { k: 0, ..Default::default() },
            RunConfig { tau: 1.0, ..Default::default() },
            RunConfig { core_fraction: 0.0, ..Default::default() },
            RunConfig { null_margin: 1.5, ..Default::default() },
            RunConfig { year_min: 2020, year_max: 2000, ..Default::default() },
            RunConfig { alpha: Some(-1.0), ..Default::default() },
        ] {
            assert!(c.validate().is_err());
        }
    }
}
