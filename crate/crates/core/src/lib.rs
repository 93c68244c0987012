//! Reading, checking, interpreting and exporting match files: text files
//! that align a symbolic (MIDI) performance with its score, note by note
//! and at sampled beat positions.

pub mod model;
pub mod parser;
pub mod semantics;
pub mod export;
pub mod session;

pub use model::*;
pub use parser::{parse, serialize, Diagnostic, ParseMode, Severity};
