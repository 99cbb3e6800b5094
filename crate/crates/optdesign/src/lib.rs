//! Command-line front end for `optdesign-core`: model and design files,
//! JSON reports, CSV traces and the bundled example suite.

pub mod cli;
pub mod files;
pub mod job;
pub mod report;
pub mod suite;
