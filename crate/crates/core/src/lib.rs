//! Engine for backporting C++11 translation units to C++03.
//!
//! The crate is organized as a pipeline: a compilation database names the
//! translation units, each unit is lexed and parsed into a lightweight
//! syntax tree, a fixed catalog of transformations rewrites C++11
//! constructs into their C++03 equivalents through span edits, and the
//! resulting line movements are recorded so diagnostics against the
//! transformed tree can be traced back to original source lines. An
//! on-disk state store keeps track of dependencies so re-runs only touch
//! stale units.

pub mod compdb;
pub mod incremental;
pub mod pipeline;
pub mod semantics;
pub mod syntax;
pub mod traceability;
pub mod transforms;
