// `!(x > 0.0)` is used on purpose so NaN fails every gate; node-indexed
// loops mirror the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod collar;
pub mod error;
pub mod glue;
pub mod numerics;
pub mod path;
pub mod pipeline;
pub mod rotsym;
pub mod sphere;
pub mod table;

pub use error::{Error, Result};
