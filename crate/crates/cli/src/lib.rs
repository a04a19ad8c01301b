//! Command-line driver for the fractional plasma solver.

// `!(x > 0)` style comparisons deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod io;
pub mod problem;
pub mod report;
pub mod verify;
