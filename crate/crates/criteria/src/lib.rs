//! Acceptance criteria for the workspace, run as the `acceptance` test target.
//!
//! The target lives in its own package so that `cargo test --workspace` runs
//! every other suite before it.
