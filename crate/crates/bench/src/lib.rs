//! Benchmark-only crate; see `benches/graded_ops.rs`.
