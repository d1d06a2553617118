//! Criterion benchmarks for the numerical kernels; see `benches/numerics.rs`.
