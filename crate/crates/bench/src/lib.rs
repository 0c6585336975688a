//! Criterion benchmarks for the `moulds` kernels live in `benches/kernels.rs`.
