//! Criterion benchmarks for `extremal-sl`; see `benches/`.
