//! Solver toolkit for systems of twisted word equations with regular constraints.
//!
//! The solution set of such a system is computed as an EDT0L language: a trimmed
//! NFA whose arcs are labeled by endomorphism tables over an extended alphabet,
//! together with distinguished letters `c_X` so that applying the composed table
//! of any accepting path to `c_X` spells out `σ(X)`.
//!
//! The crate is organized around the pipeline
//!
//! ```text
//! group equations ──► twisted systems ──► triangulated system ──► W_init
//!        (group)        (equations)          (equations)         (solver)
//!                                                                   │
//!    brute-force oracle ◄── solutions ──► guided paths ──► EndoNfa (edtol)
//! ```
//!
//! plus the word-combinatorics substrate (`words`) and finite constraint
//! monoids (`monoid`) that everything else leans on.

pub mod alphabet;
pub mod config;
pub mod edtol;
pub mod equations;
#[path = "group/mod.rs"]
pub mod group;
pub mod monoid;
pub mod parse;
#[path = "solver/mod.rs"]
pub mod solver;
pub mod words;

pub use alphabet::{GroupElem, GroupSpec, Letter};
pub use config::RunConfig;
pub use equations::{System, TSym, TWord};
