//! Library surface of the verification runner: suite parsing, job
//! execution, and report rendering. The binary in `main.rs` is a thin
//! argument layer over these.

pub mod parse;
pub mod suite;

pub use suite::{
    parse_suite, render_json, render_text, run_suite, JobSpec, Overrides, RunReport,
    SuiteFile,
};
