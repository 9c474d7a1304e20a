//! Text formats: the sectioned model file and the LP export.

mod lex;
pub mod lp_text;
pub mod model_file;

pub use lp_text::write_lp;
pub use model_file::{parse_model, parse_model_str, print_model, ParsedModel, SequenceBlock};
