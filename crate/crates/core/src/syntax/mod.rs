//! Lexing, parsing, and span-based editing.

pub mod edit;
pub mod lexer;
pub mod parser;

pub use edit::{apply_edits, Edit, EditError, Feature, Segment, SegmentMap};
pub use lexer::{tokenize, LexOutput, Token, TokenKind};
pub use parser::{parse, ParseError, SyntaxTree};
