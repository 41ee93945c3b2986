//! Workbench for labelled Turing machines, a digit-doubling Gödel codec,
//! quasi-trivial machine families, the overtaking function `g`, and
//! Busy Beaver search.

pub mod acceptance;
pub mod busy_beaver;
pub mod codec;
pub mod ell;
pub mod error;
pub mod factory;
pub mod growth;
pub mod machine;
pub(crate) mod ser;
pub mod word;

pub use error::{Error, Result};
pub use word::Word;
