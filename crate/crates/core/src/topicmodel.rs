//! Latent Dirichlet allocation fitted by collapsed Gibbs sampling.
//!
//! The sampler keeps the usual three count tables (document-topic,
//! topic-word, topic totals) and resamples every token's topic once per
//! sweep from
//!
//! ```text
//! p(z = k | rest) ∝ (n_dk + alpha) · (n_kw + beta) / (n_k + V·beta)
//! ```
//!
//! Point estimates are read off the final sample; no averaging over samples
//! is done, so a fixed seed pins every output bit.

use std::collections::HashMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textprep::DocTermMatrix;

/// Row-stochastic document × topic matrix keyed by publication id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocTopicMatrix {
    pub doc_ids: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl DocTopicMatrix {
    pub fn n_topics(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn index(&self) -> HashMap<&str, usize> {
        self.doc_ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["pub_id".to_string()];
        header.extend((0..self.n_topics()).map(|k| format!("p_topic{k}")));
        w.write_record(&header)?;
        for (id, row) in self.doc_ids.iter().zip(&self.rows) {
            let mut rec = vec![id.clone()];
            rec.extend(row.iter().map(|p| p.to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let mut out = DocTopicMatrix { doc_ids: Vec::new(), rows: Vec::new() };
        for rec in reader.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            let mut fields = rec.iter();
            let id = fields.next().unwrap_or_default().to_string();
            let row = fields
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse { path: path.into(), line, message: e.to_string() })?;
            out.doc_ids.push(id);
            out.rows.push(row);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdaParams {
    pub k: usize,
    /// Symmetric document-topic prior; `None` means `50 / k`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for LdaParams {
    fn default() -> Self {
        Self { k: 8, alpha: None, beta: 0.01, iterations: 1000, seed: 0 }
    }
}

impl LdaParams {
    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.k as f64)
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("number of topics must be >= 1".into()));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidParameter("iterations must be >= 1".into()));
        }
        if !(self.alpha() > 0.0) || !(self.beta > 0.0) {
            return Err(Error::InvalidParameter("alpha and beta must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
    pub vocab: Vec<String>,
    /// K × V, row-major.
    pub topic_word: Vec<Vec<f64>>,
    pub doc_topic: DocTopicMatrix,
}

impl LdaModel {
    pub fn save_json(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer(BufWriter::new(file), self)?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
    }

    /// The `n` most probable terms of each topic, ties by term order.
    pub fn top_terms(&self, n: usize) -> Vec<Vec<(&str, f64)>> {
        self.topic_word
            .iter()
            .map(|row| {
                let mut idx: Vec<usize> = (0..row.len()).collect();
                idx.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
                idx.into_iter().take(n).map(|w| (self.vocab[w].as_str(), row[w])).collect()
            })
            .collect()
    }
}

struct Counts {
    k: usize,
    v: usize,
    doc_topic: Vec<u32>,
    topic_word: Vec<u32>,
    topic: Vec<u32>,
}

impl Counts {
    fn check(&self, docs: &[Vec<usize>]) {
        for (d, tokens) in docs.iter().enumerate() {
            let s: u32 = self.doc_topic[d * self.k..(d + 1) * self.k].iter().sum();
            debug_assert_eq!(s as usize, tokens.len(), "doc-topic counts drifted for doc {d}");
        }
        for t in 0..self.k {
            let s: u32 = self.topic_word[t * self.v..(t + 1) * self.v].iter().sum();
            debug_assert_eq!(s, self.topic[t], "topic-word counts drifted for topic {t}");
        }
    }
}

fn expand_tokens(dtm: &DocTermMatrix) -> Vec<Vec<usize>> {
    dtm.rows
        .iter()
        .map(|row| row.iter().flat_map(|&(w, c)| std::iter::repeat_n(w, c as usize)).collect())
        .collect()
}

/// Run the collapsed Gibbs sampler for `params.iterations` sweeps.
pub fn fit_lda(dtm: &DocTermMatrix, params: &LdaParams) -> Result<LdaModel> {
    params.validate()?;
    if dtm.n_docs() == 0 || dtm.vocab_size() == 0 {
        return Err(Error::InvalidParameter("document-term matrix is empty".into()));
    }
    if params.k > dtm.vocab_size() {
        log::warn!("{} topics requested for a vocabulary of {} terms", params.k, dtm.vocab_size());
    }
    let (k, v) = (params.k, dtm.vocab_size());
    let alpha = params.alpha();
    let beta = params.beta;
    let v_beta = v as f64 * beta;

    let docs = expand_tokens(dtm);
    if let Some(d) = docs.iter().position(Vec::is_empty) {
        return Err(Error::InvalidParameter(format!("document {} has no tokens", dtm.doc_ids[d])));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut counts = Counts {
        k,
        v,
        doc_topic: vec![0; docs.len() * k],
        topic_word: vec![0; k * v],
        topic: vec![0; k],
    };
    let mut assignments: Vec<Vec<usize>> = Vec::with_capacity(docs.len());
    for (d, tokens) in docs.iter().enumerate() {
        let z: Vec<usize> = tokens.iter().map(|_| rng.random_range(0..k)).collect();
        for (&w, &t) in tokens.iter().zip(&z) {
            counts.doc_topic[d * k + t] += 1;
            counts.topic_word[t * v + w] += 1;
            counts.topic[t] += 1;
        }
        assignments.push(z);
    }

    let mut cumulative = vec![0.0f64; k];
    for _ in 0..params.iterations {
        for (d, tokens) in docs.iter().enumerate() {
            let z = &mut assignments[d];
            for (i, &w) in tokens.iter().enumerate() {
                let old = z[i];
                counts.doc_topic[d * k + old] -= 1;
                counts.topic_word[old * v + w] -= 1;
                counts.topic[old] -= 1;

                let mut total = 0.0;
                for t in 0..k {
                    total += (f64::from(counts.doc_topic[d * k + t]) + alpha)
                        * (f64::from(counts.topic_word[t * v + w]) + beta)
                        / (f64::from(counts.topic[t]) + v_beta);
                    cumulative[t] = total;
                }
                let u = rng.random::<f64>() * total;
                let new = cumulative.iter().position(|&c| u < c).unwrap_or(k - 1);

                z[i] = new;
                counts.doc_topic[d * k + new] += 1;
                counts.topic_word[new * v + w] += 1;
                counts.topic[new] += 1;
            }
        }
        if cfg!(debug_assertions) {
            counts.check(&docs);
        }
    }

    let doc_rows = docs
        .iter()
        .enumerate()
        .map(|(d, tokens)| {
            let denom = tokens.len() as f64 + k as f64 * alpha;
            (0..k).map(|t| (f64::from(counts.doc_topic[d * k + t]) + alpha) / denom).collect()
        })
        .collect();
    let topic_word = (0..k)
        .map(|t| {
            let denom = f64::from(counts.topic[t]) + v_beta;
            (0..v).map(|w| (f64::from(counts.topic_word[t * v + w]) + beta) / denom).collect()
        })
        .collect();

    Ok(LdaModel {
        k,
        alpha,
        beta,
        iterations: params.iterations,
        seed: params.seed,
        vocab: dtm.vocab.clone(),
        topic_word,
        doc_topic: DocTopicMatrix { doc_ids: dtm.doc_ids.clone(), rows: doc_rows },
    })
}

/// Σ over tokens of `ln Σ_k θ_dk φ_kw`, using the model's rows for the
/// matrix's documents.
pub fn log_likelihood(model: &LdaModel, dtm: &DocTermMatrix) -> Result<f64> {
    if model.vocab != dtm.vocab {
        return Err(Error::VocabularyMismatch { model: model.vocab.len(), matrix: dtm.vocab.len() });
    }
    let index = model.doc_topic.index();
    let mut ll = 0.0;
    for (id, row) in dtm.doc_ids.iter().zip(&dtm.rows) {
        let d = *index.get(id.as_str()).ok_or_else(|| Error::UnknownDocument(id.clone()))?;
        let theta = &model.doc_topic.rows[d];
        for &(w, c) in row {
            let p: f64 = theta.iter().zip(&model.topic_word).map(|(th, phi)| th * phi[w]).sum();
            ll += f64::from(c) * p.ln();
        }
    }
    Ok(ll)
}

pub fn perplexity(model: &LdaModel, dtm: &DocTermMatrix) -> Result<f64> {
    let n = dtm.total_tokens();
    if n == 0 {
        return Err(Error::NoTokens("perplexity"));
    }
    Ok((-log_likelihood(model, dtm)? / n as f64).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KScore {
    pub k: usize,
    pub log_likelihood: f64,
    pub perplexity: f64,
    /// Document-completion scores: fit on a random 80% of each document's
    /// tokens, evaluate on the remaining 20%.
    pub heldout_log_likelihood: f64,
    pub heldout_perplexity: f64,
}

pub const HELDOUT_FRACTION: f64 = 0.2;

/// Split every document's tokens into a fitting part and a held-out part.
/// Each document keeps at least one fitting token.
pub fn completion_split(dtm: &DocTermMatrix, fraction: f64, seed: u64) -> (DocTermMatrix, DocTermMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x005e_ed0f_5011);
    let mut fit_rows = Vec::with_capacity(dtm.n_docs());
    let mut held_rows = Vec::with_capacity(dtm.n_docs());
    for row in &dtm.rows {
        let mut fit: Vec<(usize, u32)> = Vec::new();
        let mut held: Vec<(usize, u32)> = Vec::new();
        for &(w, c) in row {
            let h = (0..c).filter(|_| rng.random_bool(fraction)).count() as u32;
            if c > h {
                fit.push((w, c - h));
            }
            if h > 0 {
                held.push((w, h));
            }
        }
        if fit.is_empty() {
            let (w, h) = &mut held[0];
            fit.push((*w, 1));
            *h -= 1;
            if *h == 0 {
                held.remove(0);
            }
        }
        fit_rows.push(fit);
        held_rows.push(held);
    }
    let make = |rows| DocTermMatrix { vocab: dtm.vocab.clone(), doc_ids: dtm.doc_ids.clone(), rows };
    (make(fit_rows), make(held_rows))
}

/// Fit one model per candidate K (in parallel, seed + K each) and score
/// it. Choosing K is left to the caller.
pub fn select_k(dtm: &DocTermMatrix, candidates: &[usize], base: &LdaParams) -> Result<Vec<KScore>> {
    if candidates.is_empty() {
        return Err(Error::InvalidParameter("no candidate topic counts".into()));
    }
    let (fit_part, held_part) = completion_split(dtm, HELDOUT_FRACTION, base.seed);
    let held_tokens = held_part.total_tokens();
    candidates
        .par_iter()
        .map(|&k| {
            let params = LdaParams { k, seed: base.seed.wrapping_add(k as u64), ..*base };
            let full = fit_lda(dtm, &params)?;
            let ll = log_likelihood(&full, dtm)?;
            let partial = fit_lda(&fit_part, &params)?;
            let held_ll = log_likelihood(&partial, &held_part)?;
            Ok(KScore {
                k,
                log_likelihood: ll,
                perplexity: (-ll / dtm.total_tokens() as f64).exp(),
                heldout_log_likelihood: held_ll,
                heldout_perplexity: if held_tokens == 0 {
                    f64::NAN
                } else {
                    (-held_ll / held_tokens as f64).exp()
                },
            })
        })
        .collect()
}
