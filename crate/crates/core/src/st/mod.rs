//! The structured-text (ST) layout model: domain types and their JSON codec.

mod codec;
mod types;

pub use codec::*;
pub use types::*;
