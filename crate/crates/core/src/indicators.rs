//! Descriptive scientometric indicators.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::{Gender, PublicationRecord};
use crate::profiles::argmax;
use crate::table::{MetricTable, Value};
use crate::topicmodel::DocTopicMatrix;

/// Per year and gender: fractional authorship credit (1/n per listed author)
/// and its percentage of the year's total. U credit is its own row.
pub fn fractional_shares(records: &[PublicationRecord]) -> MetricTable {
    let mut credit: BTreeMap<i32, [f64; 3]> = BTreeMap::new();
    for r in records {
        if r.authors.is_empty() {
            continue;
        }
        let share = 1.0 / r.authors.len() as f64;
        let year = credit.entry(r.year).or_default();
        for a in &r.authors {
            year[gender_slot(a.gender)] += share;
        }
    }
    let mut table = MetricTable::new(["year", "gender", "credit", "share_pct"]);
    for (year, c) in credit {
        let total: f64 = c.iter().sum();
        for g in [Gender::F, Gender::M, Gender::U] {
            let x = c[gender_slot(g)];
            table.push(vec![year.into(), g.as_str().into(), x.into(), (100.0 * x / total).into()]);
        }
    }
    table
}

fn gender_slot(g: Gender) -> usize {
    match g {
        Gender::F => 0,
        Gender::M => 1,
        Gender::U => 2,
    }
}

/// Per year and gender: number of distinct authors with at least one
/// publication that year.
pub fn author_counts(records: &[PublicationRecord]) -> MetricTable {
    let mut seen: BTreeMap<(i32, Gender), std::collections::BTreeSet<&str>> = BTreeMap::new();
    for r in records {
        for a in &r.authors {
            seen.entry((r.year, a.gender)).or_default().insert(a.author_id.as_str());
        }
    }
    let mut table = MetricTable::new(["year", "gender", "authors"]);
    for ((year, g), ids) in seen {
        table.push(vec![year.into(), g.as_str().into(), ids.len().into()]);
    }
    table
}

/// A publication's field: the argmax of its topic row.
pub fn publication_fields(doc_topic: &DocTopicMatrix) -> HashMap<&str, usize> {
    doc_topic
        .doc_ids
        .iter()
        .zip(&doc_topic.rows)
        .map(|(id, row)| (id.as_str(), argmax(row)))
        .collect()
}

/// Citations divided by the mean citations of the publication's
/// `(field, year)` cell, in corpus order. `None` for publications without a
/// topic row or in a cell whose mean is zero.
pub fn field_normalized_citations(records: &[PublicationRecord], doc_topic: &DocTopicMatrix) -> Vec<Option<f64>> {
    let fields = publication_fields(doc_topic);
    let mut cells: HashMap<(usize, i32), (f64, usize)> = HashMap::new();
    for r in records {
        if let Some(&f) = fields.get(r.pub_id.as_str()) {
            let cell = cells.entry((f, r.year)).or_default();
            cell.0 += r.citation_count as f64;
            cell.1 += 1;
        }
    }
    records
        .iter()
        .map(|r| {
            let f = *fields.get(r.pub_id.as_str())?;
            let (sum, n) = cells[&(f, r.year)];
            let mean = sum / n as f64;
            (mean > 0.0).then(|| r.citation_count as f64 / mean)
        })
        .collect()
}

/// `pub_id, year, field, citations, fnc`.
pub fn field_normalized_table(records: &[PublicationRecord], doc_topic: &DocTopicMatrix) -> MetricTable {
    let fields = publication_fields(doc_topic);
    let fnc = field_normalized_citations(records, doc_topic);
    let mut table = MetricTable::new(["pub_id", "year", "field", "citations", "fnc"]);
    for (r, x) in records.iter().zip(fnc) {
        let field = fields.get(r.pub_id.as_str()).map_or(Value::Missing, |&f| f.into());
        table.push(vec![r.pub_id.as_str().into(), r.year.into(), field, r.citation_count.into(), x.into()]);
    }
    table
}

/// Years between first and last publication.
pub fn career_length(years: &[i32]) -> u32 {
    match (years.iter().min(), years.iter().max()) {
        (Some(lo), Some(hi)) => (hi - lo) as u32,
        _ => 0,
    }
}

/// `(h, i10)` of a citation list.
pub fn h_and_i10(citations: &[u32]) -> (usize, usize) {
    let mut sorted = citations.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let h = sorted.iter().enumerate().take_while(|(i, &c)| c as usize > *i).count();
    let i10 = citations.iter().filter(|&&c| c >= 10).count();
    (h, i10)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthorIndicators {
    pub author_id: String,
    pub gender: Gender,
    pub pub_count: usize,
    pub citation_total: u64,
    pub avg_citations: f64,
    /// Mean over publications with a defined value.
    pub field_norm_citations: Option<f64>,
    pub career_length: u32,
    pub h_index: usize,
    pub i10_index: usize,
}

/// Indicators for every F/M author, sorted by id.
pub fn author_indicators(records: &[PublicationRecord], doc_topic: Option<&DocTopicMatrix>) -> Vec<AuthorIndicators> {
    let fnc = doc_topic.map(|dt| field_normalized_citations(records, dt));
    let mut by_author: BTreeMap<&str, (Gender, Vec<usize>)> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        let mut ids: Vec<_> = r.known_authors().map(|a| (a.author_id.as_str(), a.gender)).collect();
        ids.sort_unstable();
        ids.dedup_by_key(|(id, _)| *id);
        for (id, g) in ids {
            by_author.entry(id).or_insert((g, Vec::new())).1.push(i);
        }
    }
    by_author
        .into_iter()
        .map(|(id, (gender, pubs))| {
            let citations: Vec<u32> = pubs.iter().map(|&i| records[i].citation_count).collect();
            let years: Vec<i32> = pubs.iter().map(|&i| records[i].year).collect();
            let total: u64 = citations.iter().map(|&c| c as u64).sum();
            let (h, i10) = h_and_i10(&citations);
            let field_norm_citations = fnc.as_ref().and_then(|fnc| {
                let defined: Vec<f64> = pubs.iter().filter_map(|&i| fnc[i]).collect();
                (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64)
            });
            AuthorIndicators {
                author_id: id.to_string(),
                gender,
                pub_count: pubs.len(),
                citation_total: total,
                avg_citations: total as f64 / pubs.len() as f64,
                field_norm_citations,
                career_length: career_length(&years),
                h_index: h,
                i10_index: i10,
            }
        })
        .collect()
}

pub fn author_indicator_table(indicators: &[AuthorIndicators]) -> MetricTable {
    let mut table = MetricTable::new([
        "author_id",
        "gender",
        "pub_count",
        "citation_total",
        "avg_citations",
        "field_norm_citations",
        "career_length",
        "h_index",
        "i10_index",
    ]);
    for a in indicators {
        table.push(vec![
            a.author_id.as_str().into(),
            a.gender.as_str().into(),
            a.pub_count.into(),
            a.citation_total.into(),
            a.avg_citations.into(),
            a.field_norm_citations.into(),
            a.career_length.into(),
            a.h_index.into(),
            a.i10_index.into(),
        ]);
    }
    table
}
