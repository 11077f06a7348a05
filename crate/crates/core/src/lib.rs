//! Gender-aware co-authorship analytics.
//!
//! The crate covers the whole analysis chain, from publication metadata to
//! statistical tests:
//!
//! - [`corpus`]: parsing, lexicon gender labels, inclusion filter
//! - [`textprep`] and [`topicmodel`]: tokens, document-term matrix, LDA
//! - [`profiles`]: per-author topic vectors and primary disciplines
//! - [`graph`]: author-publication projection, teams, degree statistics
//! - [`diversity`]: author entropy, pair cosine, team entropy and cosine
//! - [`centrality`]: betweenness (exact and sampled), core/periphery split
//! - [`nullmodel`]: randomized teams and z-scores
//! - [`stats`]: Mann-Whitney U, permutation and Welch tests
//! - [`indicators`]: fractional credit, citations, career length, h/i10
//! - [`table`]: the CSV/JSON table type every stage emits
//! - [`fixture`]: synthetic corpora with planted structure

pub mod centrality;
pub mod corpus;
pub mod diversity;
pub mod error;
pub mod fixture;
pub mod graph;
pub mod indicators;
pub mod nullmodel;
pub mod profiles;
pub mod stats;
pub mod table;
pub mod textprep;
pub mod topicmodel;

pub use centrality::{CentralityResult, CorePartition};
pub use corpus::{AuthorRef, Gender, GenderLexicon, PublicationRecord, YearWindow};
pub use diversity::DisciplineCount;
pub use error::{Error, Result};
pub use graph::{CollabGraph, GenderClass, TeamRecord, TeamSizeRule};
pub use indicators::AuthorIndicators;
pub use nullmodel::{NullMoments, ZScoreRecord};
pub use profiles::AuthorProfile;
pub use stats::{Alternative, TestResult};
pub use table::{MetricTable, Value};
pub use textprep::DocTermMatrix;
pub use topicmodel::{DocTopicMatrix, LdaModel, LdaParams};
