//! Source positions. Lines and columns are 1-based and counted in characters,
//! so spans survive the literate-extraction pass unchanged.

use std::fmt;
use std::rc::Rc;

/// A half-open source region `start..end` inside one file.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Span {
    pub file: Rc<str>,
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl Span {
    pub fn new(file: Rc<str>, start_line: u32, start_col: u32, end_line: u32, end_col: u32) -> Span {
        debug_assert!((start_line, start_col) <= (end_line, end_col));
        Span { file, start_line, start_col, end_line, end_col }
    }

    /// A span for internally synthesized expressions.
    pub fn synthetic() -> Span {
        Span { file: Rc::from("<internal>"), start_line: 0, start_col: 0, end_line: 0, end_col: 0 }
    }

    pub fn is_synthetic(&self) -> bool {
        self.start_line == 0
    }

    /// Smallest span covering both `self` and `other` (assumes same file).
    pub fn to(&self, other: &Span) -> Span {
        Span {
            file: self.file.clone(),
            start_line: self.start_line,
            start_col: self.start_col,
            end_line: other.end_line,
            end_col: other.end_col,
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.start_line, self.start_col)
    }
}

impl fmt::Debug for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}-{}:{}",
            self.file, self.start_line, self.start_col, self.end_line, self.end_col
        )
    }
}
