//! Experiment harness, configuration files, output formats and the command-line
//! interface around [`nullkink_core`].

pub mod cli;
pub mod config;
pub mod criticality;
pub mod output;
