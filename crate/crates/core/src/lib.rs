//! Semantic complexity of texts from rule-based symbolic derivations.
//!
//! The pipeline: a [`logic::SemanticLogic`] rule base quantizes a text into
//! ground terms, [`derive::derive`] forward-chains them into a leveled lattice,
//! and [`complexity`] assigns values to lattice nodes. The remaining modules
//! score judgments against human data, analyze paragraph-pair corpora, and model
//! multi-step judgment deviation.

pub mod complexity;
pub mod corpus;
pub mod derive;
pub mod judgment;
pub mod logic;
pub mod markov;
pub mod regression;
pub mod report;
