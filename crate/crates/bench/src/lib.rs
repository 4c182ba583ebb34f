//! Criterion benchmarks for morl-core; see `benches/`.
