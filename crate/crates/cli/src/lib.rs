//! Session language for the toolkit: parser, printer, runner and reports.

pub mod ast;
pub mod parser;
pub mod printer;

pub use ast::Session;
pub use parser::{parse_session, ParseError};
pub mod report;
pub mod runner;
pub mod selftest;

pub use report::{emit_report, Format, Record, Report, Status};
pub use runner::{run_session, RunCaps, RunConfig};
