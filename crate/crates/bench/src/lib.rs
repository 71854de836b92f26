//! Criterion benchmarks for form assembly, operator application and the solver live in `benches/`.
