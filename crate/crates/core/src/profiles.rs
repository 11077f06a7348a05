//! Author disciplinary profiles: the mean topic distribution of an author's
//! publications, its argmax (primary discipline) and the number of active
//! fields above a threshold.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Gender, PublicationRecord};
use crate::error::{Error, Result};
use crate::topicmodel::DocTopicMatrix;

pub const DEFAULT_TAU: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthorProfile {
    pub author_id: String,
    pub gender: Gender,
    pub topic_vector: Vec<f64>,
    pub primary_discipline: usize,
    pub active_field_count: usize,
    pub pub_ids: Vec<String>,
}

/// Index of the largest entry, lowest index on ties.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Indices of entries strictly above `tau`. Never empty for a non-empty
/// vector: if nothing clears the threshold the argmax is the only field.
pub fn active_fields(v: &[f64], tau: f64) -> Vec<usize> {
    let active: Vec<usize> = (0..v.len()).filter(|&i| v[i] > tau).collect();
    if active.is_empty() && !v.is_empty() {
        vec![argmax(v)]
    } else {
        active
    }
}

impl AuthorProfile {
    pub fn from_vector(author_id: String, gender: Gender, topic_vector: Vec<f64>, pub_ids: Vec<String>, tau: f64) -> Self {
        Self {
            primary_discipline: argmax(&topic_vector),
            active_field_count: active_fields(&topic_vector, tau).len(),
            author_id,
            gender,
            topic_vector,
            pub_ids,
        }
    }
}

/// Average the document-topic rows of each F/M author's publications.
///
/// Publications are summed in `pub_id` order so the result does not depend
/// on corpus order. Authors none of whose publications has a row are
/// skipped with a warning.
pub fn build_profiles(doc_topic: &DocTopicMatrix, records: &[PublicationRecord], tau: f64) -> Result<Vec<AuthorProfile>> {
    if !(0.0..1.0).contains(&tau) {
        return Err(Error::InvalidParameter(format!("activity threshold {tau} outside [0, 1)")));
    }
    let index = doc_topic.index();
    let mut by_author: BTreeMap<&str, (Gender, Vec<&str>)> = BTreeMap::new();
    for r in records {
        for a in r.known_authors() {
            let entry = by_author.entry(a.author_id.as_str()).or_insert((a.gender, Vec::new()));
            entry.1.push(r.pub_id.as_str());
        }
    }

    let k = doc_topic.n_topics();
    let mut profiles = Vec::with_capacity(by_author.len());
    for (author_id, (gender, mut pubs)) in by_author {
        pubs.sort_unstable();
        pubs.dedup();
        let rows: Vec<&Vec<f64>> = pubs
            .iter()
            .filter_map(|p| index.get(p).map(|&i| &doc_topic.rows[i]))
            .collect();
        if rows.is_empty() {
            log::warn!("author {author_id} has no publication with a topic row; skipped");
            continue;
        }
        let mut mean = vec![0.0; k];
        for row in &rows {
            for (m, x) in mean.iter_mut().zip(row.iter()) {
                *m += x;
            }
        }
        let n = rows.len() as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        let pub_ids = pubs.into_iter().filter(|p| index.contains_key(p)).map(str::to_string).collect();
        profiles.push(AuthorProfile::from_vector(author_id.to_string(), gender, mean, pub_ids, tau));
    }
    Ok(profiles)
}

pub fn profile_index(profiles: &[AuthorProfile]) -> std::collections::HashMap<&str, &AuthorProfile> {
    profiles.iter().map(|p| (p.author_id.as_str(), p)).collect()
}

/// `author_id, gender, n_d, primary, x0..x{K-1}`.
pub fn write_profiles_csv(path: &Path, profiles: &[AuthorProfile]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let k = profiles.first().map_or(0, |p| p.topic_vector.len());
    let mut header: Vec<String> = ["author_id", "gender", "n_d", "primary"].iter().map(|s| s.to_string()).collect();
    header.extend((0..k).map(|i| format!("x{i}")));
    w.write_record(&header)?;
    for p in profiles {
        let mut rec = vec![
            p.author_id.clone(),
            p.gender.to_string(),
            p.active_field_count.to_string(),
            p.primary_discipline.to_string(),
        ];
        rec.extend(p.topic_vector.iter().map(|x| x.to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Read profiles back. `pub_ids` are not part of the CSV and come back
/// empty; `n_d` and `primary` are taken as written.
pub fn read_profiles_csv(path: &Path) -> Result<Vec<AuthorProfile>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let bad = |message: String| Error::Parse { path: path.into(), line, message };
        if rec.len() < 5 {
            return Err(bad("expected author_id, gender, n_d, primary, x0..".into()));
        }
        let gender: Gender = rec[1].parse().map_err(bad)?;
        let n_d = rec[2].parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?;
        let primary = rec[3].parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?;
        let vector = rec
            .iter()
            .skip(4)
            .map(str::parse::<f64>)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| bad(e.to_string()))?;
        out.push(AuthorProfile {
            author_id: rec[0].to_string(),
            gender,
            topic_vector: vector,
            primary_discipline: primary,
            active_field_count: n_d,
            pub_ids: Vec::new(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::AuthorRef;

    const P1: [f64; 8] = [0.5, 0.0, 0.1, 0.0, 0.0, 0.4, 0.0, 0.0];
    const P2: [f64; 8] = [0.6, 0.0, 0.2, 0.2, 0.0, 0.0, 0.0, 0.0];

    fn rec(id: &str, authors: &[(&str, Gender)]) -> PublicationRecord {
        PublicationRecord {
            pub_id: id.into(),
            title: "t".into(),
            abstract_text: "a".into(),
            year: 2010,
            citation_count: 0,
            authors: authors
                .iter()
                .map(|(a, g)| AuthorRef { author_id: a.to_string(), full_name: a.to_string(), gender: *g })
                .collect(),
        }
    }

    fn matrix(rows: &[(&str, &[f64])]) -> DocTopicMatrix {
        DocTopicMatrix {
            doc_ids: rows.iter().map(|(id, _)| id.to_string()).collect(),
            rows: rows.iter().map(|(_, r)| r.to_vec()).collect(),
        }
    }

    #[test]
    fn two_publication_average() {
        let dt = matrix(&[("P1", &P1), ("P2", &P2)]);
        let records = [rec("P1", &[("i", Gender::F)]), rec("P2", &[("i", Gender::F)])];
        let profiles = build_profiles(&dt, &records, DEFAULT_TAU).unwrap();
        assert_eq!(profiles.len(), 1);
        let expected = [0.55, 0.0, 0.15, 0.1, 0.0, 0.2, 0.0, 0.0];
        for (x, e) in profiles[0].topic_vector.iter().zip(expected) {
            assert!((x - e).abs() < 1e-12);
        }
        assert_eq!(profiles[0].primary_discipline, 0);
        assert_eq!(profiles[0].active_field_count, 4);
        assert_eq!(profiles[0].pub_ids, ["P1", "P2"]);
    }

    #[test]
    fn single_publication_profile_is_the_row() {
        let dt = matrix(&[("P1", &P1)]);
        let profiles = build_profiles(&dt, &[rec("P1", &[("a", Gender::M), ("u", Gender::U)])], DEFAULT_TAU).unwrap();
        assert_eq!(profiles.len(), 1, "U authors get no profile");
        assert_eq!(profiles[0].topic_vector, P1);
    }

    #[test]
    fn argmax_ties_go_low() {
        assert_eq!(argmax(&[0.25, 0.25, 0.5]), 2);
        assert_eq!(argmax(&[0.5, 0.5]), 0);
        assert_eq!(active_fields(&[0.01; 4], 0.05), [0]);
    }

    #[test]
    fn missing_rows_skip_author() {
        let dt = matrix(&[("P1", &P1)]);
        let profiles = build_profiles(&dt, &[rec("P9", &[("z", Gender::F)])], DEFAULT_TAU).unwrap();
        assert!(profiles.is_empty());
        assert!(build_profiles(&dt, &[], 1.0).is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let dt = matrix(&[("P1", &P1), ("P2", &P2)]);
        let records = [rec("P1", &[("a", Gender::F), ("b", Gender::M)]), rec("P2", &[("a", Gender::F)])];
        let mut profiles = build_profiles(&dt, &records, DEFAULT_TAU).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("profiles.csv");
        write_profiles_csv(&path, &profiles).unwrap();
        profiles.iter_mut().for_each(|p| p.pub_ids.clear());
        assert_eq!(read_profiles_csv(&path).unwrap(), profiles);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn simplex(k: usize) -> impl Strategy<Value = Vec<f64>> {
            prop::collection::vec(0.01f64..1.0, k).prop_map(|v| {
                let s: f64 = v.iter().sum();
                v.into_iter().map(|x| x / s).collect()
            })
        }

        proptest! {
            #[test]
            fn mean_stays_on_simplex_and_ignores_order(rows in prop::collection::vec(simplex(6), 1..8)) {
                let ids: Vec<String> = (0..rows.len()).map(|i| format!("P{i}")).collect();
                let dt = DocTopicMatrix { doc_ids: ids.clone(), rows };
                let mut records: Vec<_> = ids.iter().map(|id| rec(id, &[("a", Gender::F)])).collect();
                let forward = build_profiles(&dt, &records, DEFAULT_TAU).unwrap();
                records.reverse();
                let backward = build_profiles(&dt, &records, DEFAULT_TAU).unwrap();
                prop_assert_eq!(&forward, &backward);
                let p = &forward[0];
                prop_assert!((p.topic_vector.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                prop_assert!(p.topic_vector.iter().all(|&x| x >= 0.0));
                prop_assert_eq!(p.primary_discipline, argmax(&p.topic_vector));
            }
        }
    }
}
