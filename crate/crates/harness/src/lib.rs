pub mod config;
pub mod error;
pub mod sample;
pub mod suites;
pub mod sweep;
pub mod eval;
