//! A workbench for many-sorted universal algebra.
//!
//! The crate evaluates sorted terms, checks identities in finite algebras
//! with possibly-empty carriers, enumerates homomorphisms, computes
//! algebraic closures of equation systems over finite algebras, builds
//! derived algebras from systems of verbal operations, decides geometric
//! equivalence of finite algebras up to a generator bound, and searches for
//! the word systems that classify strongly stable automorphisms of the
//! built-in example varieties.
//!
//! Modules follow the pipeline bottom-up:
//!
//! * [`signature`] - sorted signatures, alphabets, varieties, validation
//! * [`term`] - the absolutely free term algebra
//! * [`model`] - finite algebras: evaluation, homomorphisms, products
//! * [`freealg`] - exact free algebras for the built-in varieties
//! * [`verbal`] - verbal operations, derived algebras, induced bijections
//! * [`geometry`] - solution sets, closures, geometric equivalence
//! * [`search`] - word-system search and automorphic equivalence
//! * [`fmt`] - text formats for varieties, algebras, systems, words
//! * [`report`] - deterministic JSON reports for the CLI

pub mod fmt;
pub mod freealg;
pub mod geometry;
pub mod model;
pub mod report;
pub mod search;
pub mod signature;
pub mod term;
pub mod verbal;
