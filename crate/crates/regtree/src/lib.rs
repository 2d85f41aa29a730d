//! Finite set-systems over ranked alphabets, the flattening monad on them, and
//! decision procedures for the regular trees they denote.

pub mod algebras;
pub mod automata;
pub mod corpus;
pub mod equiv;
pub mod error;
pub mod model;
pub mod monad;
pub mod morphism;
pub mod reference;
pub mod resolutions;
pub mod ya;

pub use error::{Error, Result};
