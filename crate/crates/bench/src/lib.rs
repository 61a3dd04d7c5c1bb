//! Criterion benchmarks for the `fato` crate; see `benches/`.
