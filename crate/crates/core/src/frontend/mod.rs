//! Text format, command line and JSON output.
//!
//! ```text
//! # the {0, 1} gadget
//! vars x
//! x >= 0
//! x <= 1
//! x <= 0 | x >= 1
//! ```

pub mod cli;
pub mod json;
pub mod parse;
pub mod print;

pub use cli::run_cli;
pub use parse::{parse, parse_named};
pub use print::pretty_print;
