//! Benchmark-only crate; see the `engines` bench target.
