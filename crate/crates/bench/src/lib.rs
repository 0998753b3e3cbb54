//! Benchmarks for the labgate pipelines live under `benches/`.
