//! Detection, normal forms and classification of CR singularities of real
//! m-dimensional submanifolds of C^n, together with explicit perturbations
//! that repair degenerate points and an LP-based polynomial hull probe.
//!
//! Everything numerical is built on truncated 3-jets ([`jet`]) and on
//! SVD-based rank decisions that always carry their margins ([`linalg`]).
// `!(x >= y)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod classify;
pub mod embedding;
pub mod error;
pub mod fixtures;
pub mod hull;
pub mod jet;
pub mod linalg;
pub mod locus;
pub mod normal_form;
pub mod perturb;
pub mod poly;

pub use error::{Error, Result};
pub use num_complex::Complex64;
