//! Node importance estimation on knowledge graphs with LLM-augmented node
//! descriptions.
//!
//! The pipeline runs in stages: [`kg`] loads and verbalises triplets,
//! [`sampler`] picks representative triplet sentences per node, [`augment`]
//! turns them into prompts and generated descriptions, [`embedding`] encodes
//! texts into node features, [`models`] trains importance estimators and
//! [`eval`] scores them under k-fold cross-validation.

pub mod augment;
pub mod embedding;
pub mod error;
pub mod eval;
mod http;
pub mod kg;
pub mod models;
pub mod sampler;
pub mod synth;

pub use error::{Error, Result};
pub use http::RetryPolicy;
pub use kg::{load_kg, Entity, EntityId, ImportanceLabel, KnowledgeGraph, Relation, Triplet};
