#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

pub mod error;
pub mod exchange;
pub mod fem;
pub mod linalg;
pub mod local_solver;
pub mod mesh;
pub mod par;
pub mod potentials;
pub mod presets;
pub mod skeleton_solver;
pub mod specfun;
pub mod traces;
pub mod verify;

pub use error::{Error, Result};
pub use par::Exec;
