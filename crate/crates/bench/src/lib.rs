//! Benchmarks for odro-core live in `benches/`.
