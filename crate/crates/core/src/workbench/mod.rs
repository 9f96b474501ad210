//! Seeded generation and the canonical serialization of conditions.

pub mod codec;
pub mod generate;

pub use codec::{condition_id, decode, encode};
pub use generate::{generate, heart_limit, GeneratorSpec, TermPool, CORPUS_SHAPES, CORPUS_SIZE};
