//! Benchmarks for the extraction sweeps live in `benches/`.
