pub mod config;
pub mod csvout;
pub mod commands;
pub mod cli;

pub use cli::run_cli;
