//! Model files, benchmark generators and reports for the `fpmc` command.

pub mod ast;
pub mod bench;
pub mod build;
pub mod generate;
pub mod parser;
pub mod printer;
pub mod report;

pub use build::{build_model, load_model, BuiltModel, DslError};
pub use parser::parse_model_file;
pub use printer::print_model_file;
