//! Projection functionals and boundary forms of Gabor localization operators
//! on planar lattices.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod boundary;
pub mod domain;
pub mod error;
pub mod lattice;
pub mod localization;
pub mod metaplectic;
pub mod numeric;
pub mod par;
pub mod window;

pub use error::{Error, Result};
