//! Criterion benchmarks for the estimators; see `benches/`.
