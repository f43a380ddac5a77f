//! Criterion benchmarks for the rydberg workspace; see `benches/`.
