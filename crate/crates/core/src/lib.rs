//! Finite-dimensional operator spaces, quantum channels and the glued category of
//! bipolar pairs, with certified numerical norms.

pub mod error;
pub mod matcore;
pub mod normlab;
pub mod osx;
pub mod qglue;
pub mod random;
pub mod supop;
pub mod vnstruct;

pub use error::{OscatError, Result};
pub use matcore::{BlockMatrix, CMatrix, C64};
pub use supop::{ChannelFlags, CombineMode, SuperOp};
