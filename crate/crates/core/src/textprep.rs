//! Title/abstract preprocessing and the document-term matrix.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEFAULT_STOPWORDS: &str = include_str!("stopwords_en.txt");

pub type StopWords = HashSet<String>;

/// English function words plus the query terms of an AI corpus
/// (artificial, intelligence, machine, learning, deep).
pub fn default_stopwords() -> StopWords {
    parse_stopwords(DEFAULT_STOPWORDS)
}

fn parse_stopwords(text: &str) -> StopWords {
    text.lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty())
        .collect()
}

/// One token per line, UTF-8.
pub fn load_stopwords(path: &Path) -> Result<StopWords> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_stopwords(&text))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedDoc {
    pub pub_id: String,
    pub tokens: Vec<String>,
}

pub const MIN_TOKEN_LEN: usize = 3;

/// Merge title and abstract, lowercase, split on anything outside `a-z`,
/// drop short tokens and stop-words.
pub fn tokenize(title: &str, abstract_text: &str, stopwords: &StopWords) -> Vec<String> {
    let text = format!("{title} {abstract_text}").to_lowercase();
    text.split(|c: char| !c.is_ascii_lowercase())
        .filter(|t| t.len() >= MIN_TOKEN_LEN && !stopwords.contains(*t))
        .map(str::to_string)
        .collect()
}

pub fn preprocess(pub_id: &str, title: &str, abstract_text: &str, stopwords: &StopWords) -> TokenizedDoc {
    TokenizedDoc {
        pub_id: pub_id.to_string(),
        tokens: tokenize(title, abstract_text, stopwords),
    }
}

/// Sparse bag-of-words matrix. Rows hold `(term index, count)` sorted by
/// term index; stored counts are always positive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocTermMatrix {
    pub vocab: Vec<String>,
    pub doc_ids: Vec<String>,
    pub rows: Vec<Vec<(usize, u32)>>,
}

impl DocTermMatrix {
    pub fn n_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn doc_len(&self, d: usize) -> u64 {
        self.rows[d].iter().map(|&(_, c)| u64::from(c)).sum()
    }

    pub fn total_tokens(&self) -> u64 {
        (0..self.n_docs()).map(|d| self.doc_len(d)).sum()
    }

    /// Dense count row, mostly for tests and small exports.
    pub fn dense_row(&self, d: usize) -> Vec<u32> {
        let mut row = vec![0; self.vocab_size()];
        for &(w, c) in &self.rows[d] {
            row[w] = c;
        }
        row
    }
}

#[derive(Debug, Clone)]
pub struct DtmBuild {
    pub matrix: DocTermMatrix,
    /// Documents left with no in-vocabulary tokens.
    pub dropped: Vec<String>,
}

/// Vocabulary = terms with document frequency >= `min_df`, in lexicographic
/// order. Documents emptied by pruning are dropped and reported.
pub fn build_dtm(docs: &[TokenizedDoc], min_df: usize) -> Result<DtmBuild> {
    if docs.is_empty() {
        return Err(Error::EmptyVocabulary("no documents".into()));
    }
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in docs {
        let unique: HashSet<&str> = doc.tokens.iter().map(String::as_str).collect();
        for t in unique {
            *df.entry(t).or_default() += 1;
        }
    }
    let vocab: Vec<String> = df
        .into_iter()
        .filter(|&(_, n)| n >= min_df)
        .map(|(t, _)| t.to_string())
        .collect();
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary(format!(
            "no term occurs in at least {min_df} of {} documents",
            docs.len()
        )));
    }
    let index: std::collections::HashMap<&str, usize> =
        vocab.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();

    let mut doc_ids = Vec::with_capacity(docs.len());
    let mut rows = Vec::with_capacity(docs.len());
    let mut dropped = Vec::new();
    for doc in docs {
        let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
        for t in &doc.tokens {
            if let Some(&w) = index.get(t.as_str()) {
                *counts.entry(w).or_default() += 1;
            }
        }
        if counts.is_empty() {
            dropped.push(doc.pub_id.clone());
        } else {
            doc_ids.push(doc.pub_id.clone());
            rows.push(counts.into_iter().collect());
        }
    }
    Ok(DtmBuild {
        matrix: DocTermMatrix { vocab, doc_ids, rows },
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sw(words: &[&str]) -> StopWords {
        words.iter().map(|s| s.to_string()).collect()
    }

    fn doc(id: &str, tokens: &[&str]) -> TokenizedDoc {
        TokenizedDoc {
            pub_id: id.into(),
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn preprocess_examples() {
        assert_eq!(tokenize("Deep Learning for AI!", "", &sw(&["for"])), ["deep", "learning"]);
        assert!(tokenize("", "", &sw(&[])).is_empty());
        assert_eq!(tokenize("A2B c3d machine", "", &sw(&[])), ["machine"]);
        assert_eq!(tokenize("Über naïve", "words", &sw(&[])), ["ber", "words"]);
    }

    #[test]
    fn default_list_removes_query_terms() {
        let stop = default_stopwords();
        let tokens = tokenize("Deep learning with artificial intelligence", "graph kernels", &stop);
        assert_eq!(tokens, ["graph", "kernels"]);
    }

    #[test]
    fn dtm_min_df_one() {
        let built = build_dtm(&[doc("d1", &["aaa", "bbb"]), doc("d2", &["bbb", "ccc"])], 1).unwrap();
        let m = built.matrix;
        assert_eq!(m.vocab, ["aaa", "bbb", "ccc"]);
        assert_eq!(m.dense_row(0), [1, 1, 0]);
        assert_eq!(m.dense_row(1), [0, 1, 1]);
        assert!(built.dropped.is_empty());
    }

    #[test]
    fn dtm_min_df_two() {
        let built = build_dtm(&[doc("d1", &["aaa", "bbb"]), doc("d2", &["bbb", "ccc"])], 2).unwrap();
        assert_eq!(built.matrix.vocab, ["bbb"]);
    }

    #[test]
    fn dtm_reports_pruned_docs() {
        let built = build_dtm(&[doc("d1", &["aaa"]), doc("d2", &["aaa"]), doc("d3", &["zzz"])], 2).unwrap();
        assert_eq!(built.matrix.doc_ids, ["d1", "d2"]);
        assert_eq!(built.dropped, ["d3"]);
    }

    #[test]
    fn dtm_empty_vocabulary_is_fatal() {
        let err = build_dtm(&[doc("d1", &["aaa"]), doc("d2", &["aaa"])], 3).unwrap_err();
        assert!(matches!(err, Error::EmptyVocabulary(_)));
        assert!(build_dtm(&[], 1).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn tokens_are_clean(title in "\\PC{0,40}", abs in "\\PC{0,80}") {
                let stop = sw(&["the", "and"]);
                for t in tokenize(&title, &abs, &stop) {
                    prop_assert!(t.len() >= 3);
                    prop_assert!(t.bytes().all(|b| b.is_ascii_lowercase()));
                    prop_assert!(!stop.contains(&t));
                }
            }

            #[test]
            fn counts_sum_to_surviving_tokens(
                docs in prop::collection::vec(prop::collection::vec("[a-d]{3}", 0..12), 1..8),
                min_df in 1usize..3,
            ) {
                let docs: Vec<_> = docs.into_iter().enumerate()
                    .map(|(i, t)| TokenizedDoc { pub_id: i.to_string(), tokens: t }).collect();
                if let Ok(built) = build_dtm(&docs, min_df) {
                    let vocab: HashSet<_> = built.matrix.vocab.iter().collect();
                    let surviving: usize = docs.iter()
                        .flat_map(|d| d.tokens.iter()).filter(|t| vocab.contains(t)).count();
                    prop_assert_eq!(built.matrix.total_tokens() as usize, surviving);
                    for row in &built.matrix.rows {
                        prop_assert!(row.iter().all(|&(w, c)| c > 0 && w < vocab.len()));
                    }
                }
            }
        }
    }
}
