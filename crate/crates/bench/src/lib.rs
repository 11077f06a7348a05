//! Criterion benchmarks for coauthor-core live under `benches/`.
