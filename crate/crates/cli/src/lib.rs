//! Experiment runner for the privauction mechanisms: configuration, the
//! `run`, `sweep` and `verify` commands, and report writers.

pub mod commands;
pub mod config;
pub mod report;
