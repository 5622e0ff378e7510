//! Criterion benchmarks for the generator, the DSP baseline, the file
//! formats and the model. Run with `cargo bench -p vsynth-bench`.
