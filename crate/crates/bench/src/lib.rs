//! Criterion benchmarks for sitscov-core live under `benches/`.
