//! Pure-decoherence models of quantum Darwinism.
//!
//! The crate simulates a system monitored by a many-component environment,
//! computes the information that environment fragments carry about the
//! system's pointer observable (Holevo bound, accessible information,
//! Helstrom and quantum Chernoff discrimination errors), and quantifies the
//! redundancy with which that information is recorded. Closed-form results
//! are cross-checked against a brute-force full-Hilbert-space oracle.

pub mod chernoff;
pub mod error;
pub mod measures;
pub mod model;
pub mod numerics;
pub mod oracle;
pub mod redundancy;

pub use error::{Error, Result};

// Every Rust snippet in the book is compiled and run by `cargo test --doc`,
// so the guide cannot drift from the API it documents.
#[cfg(doctest)]
mod guide {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            mod $name {}
        };
    }

    chapter!(introduction, "../../../book/src/introduction.md");
    chapter!(model, "../../../book/src/model.md");
    chapter!(measures, "../../../book/src/measures.md");
    chapter!(decay, "../../../book/src/decay.md");
    chapter!(redundancy, "../../../book/src/redundancy.md");
    chapter!(oracle, "../../../book/src/oracle.md");
    chapter!(cli, "../../../book/src/cli.md");
}
