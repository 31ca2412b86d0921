//! Batch front end: density spec parsing, JSON reports and cube export.

pub mod commands;
pub mod cube;
pub mod report;
pub mod spec;
