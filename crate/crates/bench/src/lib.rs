//! Criterion benchmarks for macq-core live under `benches/`.
