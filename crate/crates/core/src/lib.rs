pub mod bases;
pub mod diagnostics;
pub mod error;
pub mod gf2;
pub mod linalg;
pub mod mpo;
pub mod mps;
pub mod network;
pub mod peps;
pub mod incomplete;
pub mod io;
pub mod protocol;
pub mod seeds;
pub mod selftest;

pub use error::{Error, Result};
pub use linalg::{CTensor, C64};
