//! Publication metadata: parsing, lexicon-based gender labels and the
//! inclusion filter applied before any analysis.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
pub enum Gender {
    F,
    M,
    /// Unisex or unknown. Kept on bylines, excluded from gender-keyed metrics.
    #[default]
    U,
}

impl Gender {
    pub fn as_str(self) -> &'static str {
        match self {
            Gender::F => "F",
            Gender::M => "M",
            Gender::U => "U",
        }
    }

    pub fn is_known(self) -> bool {
        self != Gender::U
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Gender {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "F" | "f" => Ok(Gender::F),
            "M" | "m" => Ok(Gender::M),
            "U" | "u" => Ok(Gender::U),
            other => Err(format!("unknown gender label {other:?} (expected F, M or U)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorRef {
    pub author_id: String,
    pub full_name: String,
    #[serde(default)]
    pub gender: Gender,
}

impl AuthorRef {
    /// U authors stay on the byline (team size, fractional credit) but are
    /// left out of every gender-keyed computation.
    pub fn is_excluded(&self) -> bool {
        self.gender == Gender::U
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicationRecord {
    pub pub_id: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub year: i32,
    pub citation_count: u32,
    pub authors: Vec<AuthorRef>,
}

impl PublicationRecord {
    pub fn known_authors(&self) -> impl Iterator<Item = &AuthorRef> {
        self.authors.iter().filter(|a| !a.is_excluded())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Jsonl,
    Csv,
}

impl FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "json" => Ok(CorpusFormat::Jsonl),
            "csv" => Ok(CorpusFormat::Csv),
            other => Err(format!("unknown corpus format {other:?}")),
        }
    }
}

impl CorpusFormat {
    /// Guess from the file extension, defaulting to JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => CorpusFormat::Csv,
            _ => CorpusFormat::Jsonl,
        }
    }
}

/// A record rejected by schema validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecordError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedCorpus {
    pub records: Vec<PublicationRecord>,
    pub errors: Vec<RecordError>,
}

#[derive(Deserialize)]
struct CsvRow {
    pub_id: String,
    title: String,
    #[serde(rename = "abstract")]
    abstract_text: String,
    year: i32,
    citation_count: u32,
    authors: String,
}

fn parse_author_list(field: &str) -> std::result::Result<Vec<AuthorRef>, String> {
    field
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|entry| {
            let (id, name) = entry
                .split_once('|')
                .ok_or_else(|| format!("author entry {entry:?} is not `author_id|full_name`"))?;
            Ok(AuthorRef {
                author_id: id.trim().to_string(),
                full_name: name.trim().to_string(),
                gender: Gender::U,
            })
        })
        .collect()
}

fn validate(record: &PublicationRecord) -> std::result::Result<(), String> {
    if record.pub_id.trim().is_empty() {
        return Err("empty pub_id".into());
    }
    if record.authors.is_empty() {
        return Err("authors: empty author list".into());
    }
    if let Some(a) = record.authors.iter().find(|a| a.author_id.trim().is_empty()) {
        return Err(format!("authors: empty author_id for {:?}", a.full_name));
    }
    Ok(())
}

/// Parse a corpus file. Unreadable files are fatal; malformed records are
/// collected in [`ParsedCorpus::errors`] with their line number.
pub fn parse_corpus(path: &Path, format: CorpusFormat) -> Result<ParsedCorpus> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = ParsedCorpus::default();
    let mut seen = HashSet::new();
    let mut accept = |out: &mut ParsedCorpus, line: usize, record: PublicationRecord| {
        if let Err(message) = validate(&record) {
            out.errors.push(RecordError { line, message });
        } else if !seen.insert(record.pub_id.clone()) {
            out.errors.push(RecordError {
                line,
                message: format!("duplicate pub_id {:?}", record.pub_id),
            });
        } else {
            out.records.push(record);
        }
    };

    match format {
        CorpusFormat::Jsonl => {
            for (idx, line) in BufReader::new(file).lines().enumerate() {
                let line_no = idx + 1;
                let line = line.map_err(|e| Error::io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<PublicationRecord>(&line) {
                    Ok(record) => accept(&mut out, line_no, record),
                    Err(e) => out.errors.push(RecordError {
                        line: line_no,
                        message: e.to_string(),
                    }),
                }
            }
        }
        CorpusFormat::Csv => {
            let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(file);
            let headers = reader.headers()?.clone();
            for row in reader.records() {
                let row = match row {
                    Ok(r) => r,
                    Err(e) => {
                        let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
                        out.errors.push(RecordError {
                            line,
                            message: e.to_string(),
                        });
                        continue;
                    }
                };
                let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
                let parsed = row
                    .deserialize::<CsvRow>(Some(&headers))
                    .map_err(|e| e.to_string())
                    .and_then(|r| {
                        Ok(PublicationRecord {
                            pub_id: r.pub_id,
                            title: r.title,
                            abstract_text: r.abstract_text,
                            year: r.year,
                            citation_count: r.citation_count,
                            authors: parse_author_list(&r.authors)?,
                        })
                    });
                match parsed {
                    Ok(record) => accept(&mut out, line, record),
                    Err(message) => out.errors.push(RecordError { line, message }),
                }
            }
        }
    }
    Ok(out)
}

/// Write records (with their gender labels) as JSONL.
pub fn write_records_jsonl(path: &Path, records: &[PublicationRecord]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Given-name → gender table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GenderLexicon {
    entries: BTreeMap<String, Gender>,
}

fn normalize_name(name: &str) -> String {
    name.trim().to_lowercase()
}

impl GenderLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: &str, gender: Gender) {
        self.entries.insert(normalize_name(name), gender);
    }

    pub fn get(&self, given_name: &str) -> Option<Gender> {
        self.entries.get(&normalize_name(given_name)).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Load a `name,gender` CSV.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::Reader::from_reader(file);
        let mut lexicon = Self::new();
        for row in reader.records() {
            let row = row?;
            let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
            let (Some(name), Some(gender)) = (row.get(0), row.get(1)) else {
                return Err(Error::Parse {
                    path: path.into(),
                    line,
                    message: "expected columns name,gender".into(),
                });
            };
            let gender = gender.parse().map_err(|message| Error::Parse {
                path: path.into(),
                line,
                message,
            })?;
            lexicon.insert(name, gender);
        }
        Ok(lexicon)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["name", "gender"])?;
        for (name, gender) in &self.entries {
            w.write_record([name.as_str(), gender.as_str()])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

impl FromIterator<(String, Gender)> for GenderLexicon {
    fn from_iter<I: IntoIterator<Item = (String, Gender)>>(iter: I) -> Self {
        let mut lexicon = Self::new();
        for (name, gender) in iter {
            lexicon.insert(&name, gender);
        }
        lexicon
    }
}

/// Look up the first whitespace-delimited token of `name`; anything not in
/// the lexicon is U.
pub fn assign_gender(name: &str, lexicon: &GenderLexicon) -> Gender {
    name.split_whitespace()
        .next()
        .and_then(|given| lexicon.get(given))
        .unwrap_or(Gender::U)
}

pub fn assign_genders(records: &mut [PublicationRecord], lexicon: &GenderLexicon) {
    for author in records.iter_mut().flat_map(|r| r.authors.iter_mut()) {
        author.gender = assign_gender(&author.full_name, lexicon);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearWindow {
    pub min: i32,
    pub max: i32,
}

impl Default for YearWindow {
    fn default() -> Self {
        Self { min: 2000, max: 2019 }
    }
}

impl YearWindow {
    pub fn contains(&self, year: i32) -> bool {
        (self.min..=self.max).contains(&year)
    }
}

/// Inclusion rule: at least one F/M author, non-empty title and abstract,
/// year inside the window.
pub fn is_included(record: &PublicationRecord, window: YearWindow) -> bool {
    record.known_authors().next().is_some()
        && !record.title.trim().is_empty()
        && !record.abstract_text.trim().is_empty()
        && window.contains(record.year)
}

pub fn filter_corpus(records: Vec<PublicationRecord>, window: YearWindow) -> Vec<PublicationRecord> {
    records.into_iter().filter(|r| is_included(r, window)).collect()
}
