//! Command-line front end: fixture generation, checks and export.

pub mod cli;
pub mod exit;
pub mod mesh;
pub mod run;
pub mod schema;

pub use cli::Cli;
pub use exit::{CliError, Code};
pub use run::{run, Outcome};
