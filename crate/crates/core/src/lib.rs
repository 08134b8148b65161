#![no_std]
// Modules import `num_traits::Float` for f64 math without std. Builds that
// link std resolve the inherent methods first, so those imports carry an
// `allow(unused_imports)`.

extern crate alloc;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod fock;
pub mod hamiltonians;
pub mod linalg;
pub mod revivals;
pub mod states;
