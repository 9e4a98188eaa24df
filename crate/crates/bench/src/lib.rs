//! Criterion benchmarks for `longrun-core`; see `benches/engine.rs`.
