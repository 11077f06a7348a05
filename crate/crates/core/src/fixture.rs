//! Synthetic corpora with planted structure, for tests, benches and demos.
//!
//! [`generate_corpus`] builds a small bibliographic corpus whose authors have
//! a home discipline and a gender, and whose teams form with gender and
//! discipline homophily. A handful of records are deliberately invalid (all
//! authors unlabelled, empty abstract, out-of-window year) so that the
//! inclusion filter has something to do.
//!
//! [`planted_topic_corpus`] builds documents over disjoint vocabularies, one
//! planted topic per document, for checking topic recovery.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{AuthorRef, Gender, GenderLexicon, PublicationRecord};
use crate::textprep::TokenizedDoc;

const DISCIPLINES: [&[&str]; 4] = [
    &[
        "image", "pixel", "convolution", "segmentation", "camera", "vision", "object", "detection", "scene",
        "video", "recognition", "visual", "optical", "frame", "texture", "depth", "pose", "tracking",
    ],
    &[
        "language", "text", "sentence", "translation", "word", "corpus", "parsing", "speech", "dialogue",
        "semantic", "syntax", "token", "lexical", "grammar", "question", "answer", "document", "summarization",
    ],
    &[
        "patient", "clinical", "disease", "diagnosis", "medical", "health", "hospital", "treatment", "cancer",
        "imaging", "therapy", "drug", "genomic", "protein", "cohort", "risk", "outcome", "symptom",
    ],
    &[
        "robot", "control", "motion", "planning", "sensor", "navigation", "manipulation", "trajectory", "agent",
        "reward", "policy", "actuator", "autonomous", "vehicle", "grasping", "locomotion", "simulation", "dynamics",
    ],
];

const GENERIC: &[&str] = &[
    "method", "approach", "results", "performance", "model", "framework", "evaluation", "proposed", "dataset",
    "accuracy", "algorithm", "novel", "experiments", "efficient", "training",
];

const FEMALE_NAMES: &[&str] = &[
    "Alice", "Beatriz", "Chen", "Daria", "Elena", "Fatima", "Grace", "Hana", "Ines", "Julia", "Keiko", "Lucia",
    "Maria", "Nadia", "Olga", "Priya", "Rosa", "Sofia", "Tara", "Yasmin",
];
const MALE_NAMES: &[&str] = &[
    "Ahmed", "Bruno", "Carlos", "David", "Erik", "Felix", "Gustavo", "Hiro", "Ivan", "Jonas", "Kofi", "Luis",
    "Marco", "Nikhil", "Omar", "Pavel", "Rafael", "Samuel", "Tomas", "Viktor",
];
/// Given names the lexicon labels U.
const AMBIGUOUS_NAMES: &[&str] = &["Alex", "Jordan", "Kim", "Robin", "Sasha"];
/// Given names absent from the lexicon.
const UNLISTED_NAMES: &[&str] = &["Xyl", "Qorin", "Zev"];
const SURNAMES: &[&str] = &[
    "Abe", "Bauer", "Costa", "Dubois", "Evans", "Fischer", "Garcia", "Hansen", "Ito", "Jensen", "Khan", "Lopez",
    "Moreau", "Novak", "Okafor", "Petrov", "Quinn", "Rossi", "Silva", "Tanaka", "Umar", "Varga", "Wang", "Yilmaz",
    "Zhang",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixtureConfig {
    pub publications: usize,
    pub authors: usize,
    pub female_fraction: f64,
    /// Share of authors whose given name the lexicon cannot resolve.
    pub unknown_fraction: f64,
    /// Probability a co-author is drawn from the lead author's gender.
    pub gender_homophily: f64,
    /// Probability a co-author is drawn from the lead author's discipline.
    pub discipline_homophily: f64,
    pub seed: u64,
}

impl Default for FixtureConfig {
    fn default() -> Self {
        Self {
            publications: 200,
            authors: 120,
            female_fraction: 0.3,
            unknown_fraction: 0.08,
            gender_homophily: 0.6,
            discipline_homophily: 0.7,
            seed: 20_240_601,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FixtureAuthor {
    pub author_id: String,
    pub full_name: String,
    pub gender: Gender,
    pub discipline: usize,
}

#[derive(Debug, Clone)]
pub struct FixtureCorpus {
    pub records: Vec<PublicationRecord>,
    pub lexicon: GenderLexicon,
    pub authors: Vec<FixtureAuthor>,
}

pub fn fixture_lexicon() -> GenderLexicon {
    let mut lex = GenderLexicon::new();
    FEMALE_NAMES.iter().for_each(|n| lex.insert(n, Gender::F));
    MALE_NAMES.iter().for_each(|n| lex.insert(n, Gender::M));
    AMBIGUOUS_NAMES.iter().for_each(|n| lex.insert(n, Gender::U));
    lex
}

fn make_authors(config: &FixtureConfig, rng: &mut ChaCha8Rng) -> Vec<FixtureAuthor> {
    (0..config.authors)
        .map(|i| {
            let r: f64 = rng.random();
            let (gender, given) = if r < config.unknown_fraction {
                let pool = if rng.random_bool(0.5) { AMBIGUOUS_NAMES } else { UNLISTED_NAMES };
                (Gender::U, *pool.choose(rng).unwrap())
            } else if r < config.unknown_fraction + (1.0 - config.unknown_fraction) * config.female_fraction {
                (Gender::F, *FEMALE_NAMES.choose(rng).unwrap())
            } else {
                (Gender::M, *MALE_NAMES.choose(rng).unwrap())
            };
            FixtureAuthor {
                author_id: format!("A{i:04}"),
                full_name: format!("{given} {}", SURNAMES.choose(rng).unwrap()),
                gender,
                discipline: rng.random_range(0..DISCIPLINES.len()),
            }
        })
        .collect()
}

fn team_size(rng: &mut ChaCha8Rng) -> usize {
    const WEIGHTS: [(usize, f64); 6] = [(1, 0.10), (2, 0.25), (3, 0.30), (4, 0.20), (5, 0.10), (6, 0.05)];
    let mut r: f64 = rng.random();
    for (size, w) in WEIGHTS {
        if r < w {
            return size;
        }
        r -= w;
    }
    6
}

fn pick_coauthor(authors: &[FixtureAuthor], lead: &FixtureAuthor, taken: &[usize], config: &FixtureConfig, rng: &mut ChaCha8Rng) -> usize {
    let same_gender = rng.random_bool(config.gender_homophily);
    let same_field = rng.random_bool(config.discipline_homophily);
    let fits = |a: &FixtureAuthor| {
        (!same_gender || a.gender == lead.gender) && (!same_field || a.discipline == lead.discipline)
    };
    let candidates: Vec<usize> = (0..authors.len()).filter(|i| !taken.contains(i) && fits(&authors[*i])).collect();
    match candidates.choose(rng) {
        Some(&i) => i,
        None => {
            let rest: Vec<usize> = (0..authors.len()).filter(|i| !taken.contains(i)).collect();
            *rest.choose(rng).expect("team smaller than author pool")
        }
    }
}

fn words(disciplines: &[usize], n: usize, rng: &mut ChaCha8Rng) -> String {
    (0..n)
        .map(|_| {
            let r: f64 = rng.random();
            if r < 0.2 {
                *GENERIC.choose(rng).unwrap()
            } else {
                // Most topical words come from the lead author's discipline.
                let d = if r < 0.75 || disciplines.len() == 1 { disciplines[0] } else { *disciplines.choose(rng).unwrap() };
                *DISCIPLINES[d].choose(rng).unwrap()
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn citations(year: i32, rng: &mut ChaCha8Rng) -> u32 {
    let age = (2020 - year).max(1) as f64;
    let u: f64 = rng.random::<f64>().max(1e-12);
    (-u.ln() * age * 1.5).floor() as u32
}

/// A corpus of `config.publications` records, eight of which the inclusion
/// filter rejects.
pub fn generate_corpus(config: &FixtureConfig) -> FixtureCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let authors = make_authors(config, &mut rng);
    let known: Vec<usize> = (0..authors.len()).filter(|&i| authors[i].gender.is_known()).collect();
    let unknown: Vec<usize> = (0..authors.len()).filter(|&i| !authors[i].gender.is_known()).collect();

    let to_ref = |i: usize| AuthorRef {
        author_id: authors[i].author_id.clone(),
        full_name: authors[i].full_name.clone(),
        gender: authors[i].gender,
    };

    let invalid = 8.min(config.publications);
    let mut records = Vec::with_capacity(config.publications);
    for p in 0..config.publications {
        let year = rng.random_range(2000..=2019);
        let lead = *known.choose(&mut rng).unwrap();
        let size = team_size(&mut rng).min(authors.len());
        let mut team = vec![lead];
        while team.len() < size {
            let next = pick_coauthor(&authors, &authors[lead], &team, config, &mut rng);
            team.push(next);
        }
        let mut fields: Vec<usize> = vec![authors[lead].discipline];
        fields.extend(team[1..].iter().map(|&i| authors[i].discipline));
        let title = words(&fields, 6, &mut rng);
        let mut abstract_text = words(&fields, 45, &mut rng);
        let mut record_year = year;
        let mut byline: Vec<AuthorRef> = team.iter().map(|&i| to_ref(i)).collect();

        // The last few records exercise the inclusion filter.
        match p.checked_sub(config.publications - invalid) {
            Some(0..=2) if !unknown.is_empty() => {
                byline = unknown.choose_multiple(&mut rng, 2.min(unknown.len())).map(|&i| to_ref(i)).collect();
            }
            Some(3..=5) => abstract_text.clear(),
            Some(6) => record_year = 1998,
            Some(7) => record_year = 2021,
            _ => {}
        }
        byline.shuffle(&mut rng);
        records.push(PublicationRecord {
            pub_id: format!("P{p:04}"),
            title,
            abstract_text,
            year: record_year,
            citation_count: citations(year, &mut rng),
            authors: byline,
        });
    }
    FixtureCorpus { records, lexicon: fixture_lexicon(), authors }
}

/// Alphabetic pseudo-word `i` of topic `t`, e.g. `alphaab`.
fn planted_word(t: usize, i: usize) -> String {
    const NAMES: [&str; 6] = ["alpha", "bravo", "charlie", "delta", "echo", "foxtrot"];
    let a = (b'a' + (i / 26) as u8) as char;
    let b = (b'a' + (i % 26) as u8) as char;
    format!("{}{a}{b}", NAMES[t % NAMES.len()])
}

/// `docs` documents of `tokens` tokens, document `d` drawn entirely from
/// topic `d % topics`, each topic owning `words_per_topic` words. Returns
/// the documents and their planted labels.
pub fn planted_topic_corpus(docs: usize, topics: usize, words_per_topic: usize, tokens: usize, seed: u64) -> (Vec<TokenizedDoc>, Vec<usize>) {
    assert!(topics <= 6 && words_per_topic <= 26 * 26, "planted vocabulary too large");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab: Vec<Vec<String>> = (0..topics).map(|t| (0..words_per_topic).map(|i| planted_word(t, i)).collect()).collect();
    let labels: Vec<usize> = (0..docs).map(|d| d % topics).collect();
    let out = labels
        .iter()
        .enumerate()
        .map(|(d, &t)| TokenizedDoc {
            pub_id: format!("D{d:04}"),
            tokens: (0..tokens).map(|_| vocab[t].choose(&mut rng).unwrap().clone()).collect(),
        })
        .collect();
    (out, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{assign_genders, filter_corpus, YearWindow};

    #[test]
    fn corpus_shape_and_filter() {
        let fx = generate_corpus(&FixtureConfig::default());
        assert_eq!(fx.records.len(), 200);
        let mut relabelled = fx.records.clone();
        assign_genders(&mut relabelled, &fx.lexicon);
        assert_eq!(relabelled, fx.records, "lexicon reproduces the planted genders");
        let kept = filter_corpus(fx.records.clone(), YearWindow::default());
        assert_eq!(kept.len(), 192);
        assert!(kept.iter().all(|r| r.authors.len() <= 6));
        assert!(kept.iter().any(|r| r.authors.iter().any(|a| a.gender == Gender::U)));
        let mut ids: Vec<&str> = fx.records.iter().map(|r| r.pub_id.as_str()).collect();
        ids.dedup();
        assert_eq!(ids.len(), 200);
    }

    #[test]
    fn corpus_is_deterministic() {
        let a = generate_corpus(&FixtureConfig::default()).records;
        let b = generate_corpus(&FixtureConfig::default()).records;
        assert_eq!(a, b);
        let c = generate_corpus(&FixtureConfig { seed: 1, ..Default::default() }).records;
        assert_ne!(a, c);
    }

    #[test]
    fn planted_documents() {
        let (docs, labels) = planted_topic_corpus(9, 3, 10, 20, 0);
        assert_eq!(labels, [0, 1, 2, 0, 1, 2, 0, 1, 2]);
        for (d, &l) in docs.iter().zip(&labels) {
            assert_eq!(d.tokens.len(), 20);
            let prefix = ["alpha", "bravo", "charlie"][l];
            assert!(d.tokens.iter().all(|t| t.starts_with(prefix)));
        }
        // Planted words survive tokenization.
        let stop = crate::textprep::default_stopwords();
        assert_eq!(crate::textprep::tokenize(&docs[0].tokens.join(" "), "", &stop), docs[0].tokens);
    }
}
