//! The checking kernel: semantic values, evaluation/quotation, directed
//! type comparison, and the bidirectional checker.

pub mod check;
pub mod equal;
pub mod eval;
pub mod value;
