//! Criterion benchmarks for the reconstruction paths.
//!
//! Run with `cargo bench -p framebridge-bench`. Groups: `bridge_reconstruct`,
//! `inverse_reconstruct`, `skew_spark_audit` and `trig_sampling`.
