//! Explicit warped-product metrics on `R_+ x S^3 x S^2` with Ricci lower bounds.
//!
//! The crate builds the radial profiles of a positive-Ricci "bubble", a conical
//! surgery on a model base and their glued composite, evaluates the Ricci
//! tensor block by block in closed form, and verifies the claimed inequalities
//! on dense grids against an independent finite-difference oracle.

// `!(x > 0.0)` is how NaN gets rejected; index loops follow the tensor notation
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod construction;
pub mod curvature;
pub mod error;
pub mod jet;
pub mod limits;
pub mod profiles;
pub mod verify;

pub use curvature::{MetricForm, RicciBlocks, WarpedMetric};
pub use error::{Error, Result};
pub use jet::Jet2;
pub use profiles::{Piece, Profile, Rule};
