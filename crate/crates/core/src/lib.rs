//! Behaviour-aligned video embeddings from synchronised gameplay logs.
//!
//! The crate covers the whole pipeline: parsing keypress/mouse logs
//! ([`dataset`]), turning them into captioned 16-frame windows
//! ([`preprocess`]), embedding storage and a deterministic caption embedder
//! ([`embeddings`]), training an MLP projector that maps frozen video
//! embeddings onto caption embeddings ([`align`]), and measuring the result
//! with silhouette scores and cross-game classifier transfer ([`eval`]).
//! [`synth`] generates multi-game data with a controllable domain gap.

pub mod align;
pub mod dataset;
pub mod embeddings;
mod error;
pub mod eval;
pub mod preprocess;
pub mod synth;

pub use error::{Error, Result};
