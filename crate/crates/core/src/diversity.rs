//! Diversity at three scales: author entropy, co-author pair cosine, and
//! team entropy and mean cosine.
//!
//! Every metric lies in `[0, 1]`. Entities for which a metric is undefined
//! (single-field authors, single-member teams) yield `None`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CollabGraph, TeamRecord};
use crate::profiles::{active_fields, profile_index, AuthorProfile};
use crate::table::{MetricTable, Value};

/// Normalized Shannon entropy of an author's active fields.
///
/// The vector is restricted to entries above `tau`, renormalized, and its
/// entropy divided by `ln n_d`. `None` when `n_d = 1`.
pub fn author_entropy(topic_vector: &[f64], tau: f64) -> Option<f64> {
    let active = active_fields(topic_vector, tau);
    if active.len() < 2 {
        return None;
    }
    let total: f64 = active.iter().map(|&i| topic_vector[i]).sum();
    let h: f64 = active
        .iter()
        .map(|&i| topic_vector[i] / total)
        .filter(|&x| x > 0.0)
        .map(|x| -x * x.ln())
        .sum();
    Some((h / (active.len() as f64).ln()).clamp(0.0, 1.0))
}

/// Cosine similarity, clamped to `[0, 1]`.
pub fn pair_cosine(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    let (mut dot, mut nx, mut ny) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        dot += a * b;
        nx += a * a;
        ny += b * b;
    }
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((dot / (nx * ny).sqrt()).clamp(0.0, 1.0))
}

/// The `N_d` in the team entropy normalizer `ln min(|p|, N_d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "value")]
pub enum DisciplineCount {
    /// Number of disciplines in the model (K).
    Global(usize),
    /// Number of distinct disciplines present in the team.
    WithinTeam,
}

/// Entropy of a team's primary-discipline fractions over
/// `ln min(|p|, N_d)`. `None` for teams with fewer than two profiled members.
pub fn team_entropy(team: &TeamRecord, n_d: DisciplineCount) -> Option<f64> {
    let fractions = &team.discipline_fractions;
    if team.members.len() < 2 {
        return None;
    }
    if fractions.len() <= 1 {
        return Some(0.0);
    }
    let n_d = match n_d {
        DisciplineCount::Global(k) => k,
        DisciplineCount::WithinTeam => fractions.len(),
    };
    let h: f64 = fractions.values().filter(|&&f| f > 0.0).map(|&f| -f * f.ln()).sum();
    let norm = (team.total_size.min(n_d) as f64).ln();
    if norm <= 0.0 {
        return Some(0.0);
    }
    Some((h / norm).clamp(0.0, 1.0))
}

/// Mean pairwise cosine over a team's profiled members. `None` with fewer
/// than two members.
pub fn team_cosine(vectors: &[&[f64]]) -> Result<Option<f64>> {
    let m = vectors.len();
    if m < 2 {
        return Ok(None);
    }
    let mut sum = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            sum += pair_cosine(vectors[i], vectors[j])?;
        }
    }
    Ok(Some((sum * 2.0 / (m * (m - 1)) as f64).clamp(0.0, 1.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamDiversity {
    pub entropy: Option<f64>,
    pub cosine: Option<f64>,
}

/// Both team metrics, looking member vectors up in `profiles`.
pub fn team_diversity(team: &TeamRecord, profiles: &[AuthorProfile], n_d: DisciplineCount) -> Result<TeamDiversity> {
    let index = profile_index(profiles);
    team_diversity_indexed(team, &index, n_d)
}

pub(crate) fn team_diversity_indexed(
    team: &TeamRecord,
    index: &std::collections::HashMap<&str, &AuthorProfile>,
    n_d: DisciplineCount,
) -> Result<TeamDiversity> {
    let vectors = team
        .members
        .iter()
        .map(|id| {
            index
                .get(id.as_str())
                .map(|p| p.topic_vector.as_slice())
                .ok_or_else(|| Error::InvalidParameter(format!("team {} member {id} has no profile", team.pub_id)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TeamDiversity { entropy: team_entropy(team, n_d), cosine: team_cosine(&vectors)? })
}

/// `author_id, gender, n_d, H_i`.
pub fn author_entropy_table(profiles: &[AuthorProfile], tau: f64) -> MetricTable {
    let values: Vec<Option<f64>> = profiles.par_iter().map(|p| author_entropy(&p.topic_vector, tau)).collect();
    let mut table = MetricTable::new(["author_id", "gender", "n_d", "H_i"]);
    for (p, h) in profiles.iter().zip(values) {
        table.push(vec![p.author_id.as_str().into(), p.gender.as_str().into(), p.active_field_count.into(), h.into()]);
    }
    table
}

/// `src, dst, type, S_ij` for every graph edge whose endpoints have profiles.
pub fn pair_cosine_table(graph: &CollabGraph, profiles: &[AuthorProfile]) -> Result<MetricTable> {
    let index = profile_index(profiles);
    let values = graph
        .edges
        .par_iter()
        .map(|e| {
            let a = index.get(graph.nodes[e.a].author_id.as_str());
            let b = index.get(graph.nodes[e.b].author_id.as_str());
            match (a, b) {
                (Some(a), Some(b)) => pair_cosine(&a.topic_vector, &b.topic_vector).map(Some),
                _ => Ok(None),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = MetricTable::new(["src", "dst", "type", "S_ij"]);
    for (e, s) in graph.edges.iter().zip(values) {
        if let Some(s) = s {
            table.push(vec![
                graph.nodes[e.a].author_id.as_str().into(),
                graph.nodes[e.b].author_id.as_str().into(),
                e.edge_type.as_str().into(),
                s.into(),
            ]);
        }
    }
    Ok(table)
}

/// `pub_id, year, size, gender_class, H_p, S_p`.
pub fn team_table(teams: &[TeamRecord], profiles: &[AuthorProfile], n_d: DisciplineCount) -> Result<MetricTable> {
    let index = profile_index(profiles);
    let scores = teams
        .par_iter()
        .map(|t| team_diversity_indexed(t, &index, n_d))
        .collect::<Result<Vec<_>>>()?;
    let mut table = MetricTable::new(["pub_id", "year", "size", "gender_class", "H_p", "S_p"]);
    for (t, s) in teams.iter().zip(scores) {
        table.push(vec![
            t.pub_id.as_str().into(),
            t.year.into(),
            t.total_size.into(),
            t.gender_class.as_str().into(),
            Value::opt(s.entropy),
            Value::opt(s.cosine),
        ]);
    }
    Ok(table)
}
