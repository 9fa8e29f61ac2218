//! Command-line and HTTP front ends for `xsat-core`.

pub mod cli;
mod json;
pub mod service;
