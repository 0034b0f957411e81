//! Criterion benchmarks for the detector hot paths live in `benches/`;
//! this crate has no library code of its own.
