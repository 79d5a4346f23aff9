//! Criterion benchmarks for `billiard-core`; see `benches/`.
