//! Bundled formalization corpus and its harness (filled in alongside the
//! kernel).
