//! Typechecking kernel for a simplicial type theory.
//!
//! The language is Martin-Löf type theory extended with a strict layer of
//! shape primitives: cubes built from the point and the directed interval,
//! a decidable logic of *topes* (constraints over interval variables),
//! shapes carved out of cubes by topes, and types refined by boundary
//! constraints. Extension types arise as functions out of a shape whose
//! codomain carries refinements.
//!
//! Crate layout:
//!
//! * [`token`] / [`parser`] / [`ast`] — concrete syntax to surface trees;
//! * [`printer`] — precedence-aware pretty-printer and a stable dump;
//! * [`literate`] — code extraction from Markdown files;
//! * [`tope`] — the decidable constraint logic with two independent
//!   deciders that are tested against each other;
//! * [`kernel`] — values, evaluation, definitional equality, subtyping,
//!   and bidirectional typechecking;
//! * [`module`] — global environments, sections, and file elaboration;
//! * [`diagnostics`] — error codes and reporting.

pub mod ast;
pub mod diagnostics;
pub mod kernel;
pub mod literate;
pub mod module;
pub mod parser;
pub mod printer;
pub mod span;
pub mod token;
pub mod tope;
