//! Diagnostics with stable machine-readable codes, and the report type
//! produced by a batch checking run.
//!
//! The code set is closed:
//!
//! | code            | meaning                                              |
//! |-----------------|------------------------------------------------------|
//! | `E-PARSE`       | lexical or syntactic error                           |
//! | `E-TYPE-MISMATCH` | expected/actual type disagreement (incl. refl endpoints) |
//! | `E-BOUNDARY`    | refinement boundary value disagreement               |
//! | `E-TOPE`        | required tope entailment does not hold               |
//! | `E-USES`        | undeclared (implicit) use of a section variable      |
//! | `E-DUP`         | duplicate global name                                |
//! | `E-UNBOUND`     | unbound variable                                     |
//! | `E-INFER`       | type cannot be synthesized (needs an ascription)     |
//! | `E-NOT-FUNCTION`| application head is not a function                   |
//! | `E-NOT-PAIR`    | projection subject is not a pair                     |
//! | `E-NOT-TYPE`    | expression is not usable as a type or binder domain  |
//! | `E-SECTION`     | section name mismatch or stray `#end`                |
//! | `E-POINT`       | ill-formed point/cube-layer expression               |
//! | `E-BOUND`       | cube-variable bound exceeded                         |
//! | `E-HOLE`        | hole encountered                                     |
//!
//! `W-USES` is the only warning code (declared-but-unused `uses` entry).

use crate::span::Span;
use std::fmt;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Severity {
    Error,
    Warning,
}

/// Stable diagnostic codes; the numeric discriminant is not part of the contract,
/// the `as_str` strings are.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Code {
    Parse,
    TypeMismatch,
    Boundary,
    Tope,
    Uses,
    Dup,
    Unbound,
    Infer,
    NotFunction,
    NotPair,
    NotType,
    Section,
    Point,
    Bound,
    Hole,
    UnusedUses,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::Parse => "E-PARSE",
            Code::TypeMismatch => "E-TYPE-MISMATCH",
            Code::Boundary => "E-BOUNDARY",
            Code::Tope => "E-TOPE",
            Code::Uses => "E-USES",
            Code::Dup => "E-DUP",
            Code::Unbound => "E-UNBOUND",
            Code::Infer => "E-INFER",
            Code::NotFunction => "E-NOT-FUNCTION",
            Code::NotPair => "E-NOT-PAIR",
            Code::NotType => "E-NOT-TYPE",
            Code::Section => "E-SECTION",
            Code::Point => "E-POINT",
            Code::Bound => "E-BOUND",
            Code::Hole => "E-HOLE",
            Code::UnusedUses => "W-USES",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            Code::UnusedUses => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One reported problem. `notes` carry pretty-printed expected/actual normal
/// forms and similar secondary lines.
#[derive(Clone, Debug)]
pub struct Diagnostic {
    pub code: Code,
    pub span: Span,
    pub message: String,
    pub notes: Vec<(String, String)>,
}

impl Diagnostic {
    pub fn new(code: Code, span: Span, message: impl Into<String>) -> Diagnostic {
        Diagnostic { code, span, message: message.into(), notes: Vec::new() }
    }

    pub fn with_note(mut self, label: impl Into<String>, text: impl Into<String>) -> Diagnostic {
        self.notes.push((label.into(), text.into()));
        self
    }

    pub fn severity(&self) -> Severity {
        self.code.severity()
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.severity() {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}[{}]: {}", kind, self.code, self.message)?;
        if !self.span.is_synthetic() {
            write!(f, "\n  --> {}", self.span)?;
        }
        for (label, text) in &self.notes {
            write!(f, "\n  {}: {}", label, text)?;
        }
        Ok(())
    }
}

/// Per-declaration outcome of a checking run.
#[derive(Clone, Debug)]
pub struct DeclStatus {
    pub file: String,
    pub name: String,
    pub ok: bool,
}

/// Outcome of checking a batch of files: per-declaration status lines,
/// diagnostics, and counts. Wall time is attached by the caller.
#[derive(Clone, Debug, Default)]
pub struct RunReport {
    pub statuses: Vec<DeclStatus>,
    pub diagnostics: Vec<Diagnostic>,
    pub checked: usize,
    pub failed: usize,
}

impl RunReport {
    pub fn has_errors(&self) -> bool {
        self.failed > 0
            || self.diagnostics.iter().any(|d| d.severity() == Severity::Error)
    }

    pub fn merge(&mut self, other: RunReport) {
        self.statuses.extend(other.statuses);
        self.diagnostics.extend(other.diagnostics);
        self.checked += other.checked;
        self.failed += other.failed;
    }
}
