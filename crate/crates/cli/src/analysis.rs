//! Hypothesis tests, group summaries and density tables built from the
//! persisted metric tables.

use std::collections::BTreeMap;

use coauthor_core::stats::{self, Alternative, PermutationStatistic, TestResult};
use coauthor_core::table::{MetricTable, Value};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::pipeline::{self, files};

pub struct StatsInputs {
    pub author_entropy: MetricTable,
    pub pair_cosine: MetricTable,
    pub centrality: MetricTable,
    pub author_indicators: MetricTable,
    pub zscores: MetricTable,
}

/// A test result tagged with the metric and subset it was run on.
#[derive(Debug, Clone, Serialize)]
pub struct LabeledTest {
    pub metric: String,
    pub subset: String,
    #[serde(flatten)]
    pub result: TestResult,
}

pub struct StatsOutput {
    pub tests: Vec<LabeledTest>,
    pub summaries: MetricTable,
    pub densities: MetricTable,
    pub core_indicators: MetricTable,
}

/// Tables bundled into the report, with the stage producing each.
pub const REPORT_TABLES: [(&str, &str); 23] = [
    (files::INGEST_ERRORS, "ingest"),
    (files::TOPIC_TERMS, "topics"),
    (files::SELECT_K, "topics"),
    (files::DEGREE_STATS, "graph"),
    (files::COLLAB_TYPES, "graph"),
    (files::TEAMS, "graph"),
    (files::AUTHOR_ENTROPY, "metrics"),
    (files::PAIR_COSINE, "metrics"),
    (files::TEAM_DIVERSITY, "metrics"),
    (files::CENTRALITY, "centrality"),
    (files::TOP_NODES, "centrality"),
    (files::TOP_EDGES, "centrality"),
    (files::TOP_SUMMARY, "centrality"),
    (files::NULL_MOMENTS, "nullmodel"),
    (files::ZSCORES, "nullmodel"),
    (files::FRACTIONAL_SHARES, "indicators"),
    (files::AUTHOR_COUNTS, "indicators"),
    (files::FIELD_CITATIONS, "indicators"),
    (files::AUTHOR_INDICATORS, "indicators"),
    (files::CORE_INDICATORS, "stats"),
    (files::GROUP_SUMMARIES, "stats"),
    (files::DENSITIES, "stats"),
    (files::PROFILES, "profiles"),
];

/// Which tables back each figure of the standard report.
pub fn figure_map() -> serde_json::Value {
    serde_json::json!({
        "authors_per_year": ["author_counts"],
        "fractional_shares_per_year": ["fractional_shares"],
        "coauthors_per_year": ["degree_stats"],
        "collaboration_types_per_year": ["collab_types"],
        "author_entropy_density": ["author_entropy", "densities"],
        "pair_cosine_density": ["pair_cosine", "densities"],
        "team_zscore_density": ["zscores", "densities"],
        "core_periphery_citations": ["core_indicators", "densities"],
        "core_periphery_publications": ["core_indicators", "densities"],
        "core_periphery_career_length": ["core_indicators", "densities"],
        "top_subnetwork": ["top_nodes", "top_edges", "top_summary"],
    })
}

/// Numeric column `value` grouped by the text columns `keys`, joined by `|`.
/// Rows with a missing value are skipped.
fn grouped(table: &MetricTable, keys: &[&str], value: &str) -> Result<BTreeMap<String, Vec<f64>>, CliError> {
    let col = |name: &str| table.column(name).ok_or_else(|| CliError::Config(format!("table lacks column {name:?}")));
    let key_cols = keys.iter().map(|k| col(k)).collect::<Result<Vec<_>, _>>()?;
    let v = col(value)?;
    let mut out: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for row in &table.rows {
        if let Some(x) = row[v].as_f64().filter(|x| x.is_finite()) {
            let key = key_cols.iter().map(|&c| row[c].to_string()).collect::<Vec<_>>().join("|");
            out.entry(key).or_default().push(x);
        }
    }
    Ok(out)
}

struct Battery<'a> {
    config: &'a RunConfig,
    tests: Vec<LabeledTest>,
    summaries: BTreeMap<String, Vec<f64>>,
    densities: MetricTable,
}

impl Battery<'_> {
    fn push(&mut self, metric: &str, subset: &str, a: &str, b: &str, outcome: coauthor_core::Result<TestResult>) {
        match outcome {
            Ok(r) => self.tests.push(LabeledTest { metric: metric.into(), subset: subset.into(), result: r.with_groups(a, b) }),
            Err(e) => log::warn!("skipping {metric} {subset} {a} vs {b}: {e}"),
        }
    }

    fn compare(
        &mut self,
        metric: &str,
        subset: &str,
        groups: &BTreeMap<String, Vec<f64>>,
        (a, b): (&str, &str),
        tests: &[(&str, Alternative)],
    ) {
        let empty = Vec::new();
        let xa = groups.get(a).unwrap_or(&empty);
        let xb = groups.get(b).unwrap_or(&empty);
        let seed = self.config.seed();
        let rounds = self.config.permutations;
        for &(kind, alt) in tests {
            let outcome = match kind {
                "mwu" => stats::mann_whitney_u(xa, xb, alt),
                "welch" => stats::t_test_welch(xa, xb, alt),
                "perm" => stats::permutation_test(xa, xb, self.config.permutation_statistic, rounds, alt, seed),
                "perm_mean" => stats::permutation_test(xa, xb, PermutationStatistic::MeanDiff, rounds, alt, seed),
                _ => unreachable!("unknown test kind {kind}"),
            };
            self.push(metric, subset, a, b, outcome);
        }
    }

    fn summarize(&mut self, metric: &str, groups: &BTreeMap<String, Vec<f64>>) {
        for (g, v) in groups {
            self.summaries.insert(format!("{metric}|{g}"), v.clone());
        }
    }

    /// Histograms of every group on a shared range; `None` bounds use the
    /// pooled min or max.
    fn density(&mut self, metric: &str, groups: &BTreeMap<String, Vec<f64>>, lo: Option<f64>, hi: Option<f64>) {
        let pooled = groups.values().flatten().copied();
        let (min, max) = pooled.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
        if !min.is_finite() {
            return;
        }
        let lo = lo.unwrap_or(min);
        let mut hi = hi.unwrap_or(max);
        if hi <= lo {
            hi = lo + 1.0;
        }
        for (g, v) in groups {
            let h = stats::histogram(v, lo, hi, self.config.density_bins);
            for row in h.rows {
                let mut out = vec![Value::from(metric), Value::from(g.as_str())];
                out.extend(row);
                self.densities.push(out);
            }
        }
    }
}

fn subset_by(groups_src: &MetricTable, pred: impl Fn(i64) -> bool) -> Result<MetricTable, CliError> {
    let nd = groups_src.column("n_d").ok_or_else(|| CliError::Config("author entropy table lacks n_d".into()))?;
    let mut t = MetricTable::new(groups_src.columns.clone());
    for row in &groups_src.rows {
        if matches!(row[nd], Value::Int(n) if pred(n)) {
            t.push(row.clone());
        }
    }
    Ok(t)
}

/// Author indicators of graph nodes joined with their core or periphery role.
pub fn core_indicator_table(indicators: &MetricTable, centrality: &MetricTable) -> MetricTable {
    let roles = pipeline::roles(centrality);
    let id = indicators.column("author_id");
    let mut columns = vec!["author_id".to_string(), "role".to_string()];
    columns.extend(indicators.columns.iter().filter(|c| *c != "author_id").cloned());
    let mut t = MetricTable::new(columns);
    let Some(id) = id else { return t };
    for row in &indicators.rows {
        let author = row[id].to_string();
        if let Some(role) = roles.get(&author) {
            let mut out = vec![Value::from(author), Value::from(role.as_str())];
            out.extend(row.iter().enumerate().filter(|&(i, _)| i != id).map(|(_, v)| v.clone()));
            t.push(out);
        }
    }
    t
}

pub fn run_tests(inputs: &StatsInputs, config: &RunConfig) -> Result<StatsOutput, CliError> {
    let mut b = Battery {
        config,
        tests: Vec::new(),
        summaries: BTreeMap::new(),
        densities: MetricTable::new(["metric", "group", "bin_low", "bin_high", "count", "density"]),
    };
    use Alternative::{Greater, Less, TwoSided};

    // Author entropy: are women less interdisciplinary than men?
    let h = grouped(&inputs.author_entropy, &["gender"], "H_i")?;
    b.summarize("H_i", &h);
    b.density("H_i", &h, Some(0.0), Some(1.0));
    b.compare("H_i", "all", &h, ("F", "M"), &[("mwu", Less), ("perm", Less)]);
    for (subset, pred) in [("n_d<=5", (|n| n <= 5) as fn(i64) -> bool), ("n_d>5", |n| n > 5)] {
        let g = grouped(&subset_by(&inputs.author_entropy, pred)?, &["gender"], "H_i")?;
        b.summarize(&format!("H_i[{subset}]"), &g);
        b.compare("H_i", subset, &g, ("F", "M"), &[("mwu", Less), ("perm", Less)]);
    }

    // Pair cosine by collaboration type.
    let s = grouped(&inputs.pair_cosine, &["type"], "S_ij")?;
    b.summarize("S_ij", &s);
    b.density("S_ij", &s, Some(0.0), Some(1.0));
    for pair in [("FF", "MM"), ("FF", "FM"), ("FM", "MM")] {
        b.compare("S_ij", "all", &s, pair, &[("mwu", TwoSided), ("welch", Greater), ("perm_mean", TwoSided)]);
    }

    // Team z-scores by gender composition.
    for metric in ["z_H", "z_S"] {
        let z = grouped(&inputs.zscores, &["gender_class"], metric)?;
        b.summarize(metric, &z);
        b.density(metric, &z, None, None);
        for pair in [("female_only", "male_only"), ("mixed", "female_only"), ("mixed", "male_only")] {
            b.compare(metric, "all", &z, pair, &[("mwu", TwoSided)]);
        }
    }

    // Core versus periphery, within each gender and between genders in the core.
    let core = core_indicator_table(&inputs.author_indicators, &inputs.centrality);
    for metric in ["avg_citations", "pub_count", "career_length"] {
        let g = grouped(&core, &["role", "gender"], metric)?;
        b.summarize(metric, &g);
        b.density(metric, &g, Some(0.0), None);
        for gender in ["F", "M"] {
            let (c, p) = (format!("core|{gender}"), format!("periphery|{gender}"));
            b.compare(metric, gender, &g, (&c, &p), &[("mwu", Greater)]);
        }
        b.compare(metric, "core", &g, ("core|F", "core|M"), &[("mwu", TwoSided), ("welch", Less)]);
    }

    Ok(StatsOutput {
        tests: b.tests,
        summaries: stats::group_summary(&b.summaries),
        densities: b.densities,
        core_indicators: core,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(columns: &[&str], rows: Vec<Vec<Value>>) -> MetricTable {
        let mut t = MetricTable::new(columns.iter().copied());
        for r in rows {
            t.push(r);
        }
        t
    }

    #[test]
    fn grouping_skips_missing_values() {
        let t = table(
            &["gender", "H_i"],
            vec![
                vec!["F".into(), 0.5.into()],
                vec!["F".into(), Value::Missing],
                vec!["M".into(), 0.25.into()],
            ],
        );
        let g = grouped(&t, &["gender"], "H_i").unwrap();
        assert_eq!(g["F"], vec![0.5]);
        assert_eq!(g["M"], vec![0.25]);
        assert!(grouped(&t, &["nope"], "H_i").is_err());
    }

    #[test]
    fn core_join_keeps_only_graph_nodes() {
        let ind = table(&["author_id", "gender", "pub_count"], vec![
            vec!["a".into(), "F".into(), 3usize.into()],
            vec!["u".into(), "U".into(), 1usize.into()],
        ]);
        let cen = table(&["author_id", "bc", "role"], vec![vec!["a".into(), 0.5.into(), "core".into()]]);
        let t = core_indicator_table(&ind, &cen);
        assert_eq!(t.columns, vec!["author_id", "role", "gender", "pub_count"]);
        assert_eq!(t.rows, vec![vec![Value::from("a"), "core".into(), "F".into(), Value::Int(3)]]);
    }
}
