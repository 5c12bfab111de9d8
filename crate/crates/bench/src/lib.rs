//! Criterion benchmarks for `dirant-core`; see `benches/`.
