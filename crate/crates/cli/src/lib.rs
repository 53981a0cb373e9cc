//! Scenario runner: configuration, the simulation pipeline, reports and plots.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;
pub mod report;
pub mod svg;
