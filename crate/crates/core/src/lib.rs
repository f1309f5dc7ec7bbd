//! Fact checking for community question answering.
//!
//! Each fact-labelled answer of a forum thread is described by several
//! feature groups (who wrote it, what it says, how the forum and the web
//! support it), a linear SVM is trained on the groups, and the system is
//! evaluated with leave-one-thread-out cross-validation.

pub mod config;
pub mod corpus;
pub mod credfeat;
pub mod embfeat;
pub mod error;
pub mod evalkit;
pub mod evidence;
pub mod features;
pub mod hashing;
pub mod lexfeat;
pub mod model;
pub mod pipeline;
pub mod resources;
pub mod retrieval;
pub mod semeval;
pub mod textproc;
pub mod userfeat;

pub use error::{Error, Result};
