//! Monte-Carlo campaigns, configuration files, CSV/SVG output and the
//! `oris` command line on top of `oris-core`.

pub mod cli;
pub mod config;
pub mod experiments;
pub mod montecarlo;
pub mod output;
pub mod plot;
