// Negated float comparisons are deliberate: they send NaN down the error path.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cone;
pub mod error;
pub mod geometry;
pub mod henon;
pub mod invariant;
pub mod layout;
pub mod map;
pub mod report;
pub mod symbolic;
pub mod toy;
