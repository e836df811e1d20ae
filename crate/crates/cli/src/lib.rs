//! Command-line front end: input documents, reports and plot data.

pub mod cli;
pub mod diagnostics;
pub mod input;
pub mod locate;
pub mod output;
pub mod plot;
pub mod report;

pub use cli::run_cli;
