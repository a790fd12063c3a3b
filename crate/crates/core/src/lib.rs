//! Numerical laboratory for foliated pseudo-Riemannian geometry.
//!
//! The crate models foliations through coordinate charts ([`model`]), checks
//! metric compatibility conditions numerically ([`criteria`]), follows
//! holonomy along leaves ([`holonomy`]) and assembles the pair groupoid of
//! leaf-connected points with its induced metric ([`graph`]).
//!
//! Batch work is data-parallel via rayon when the default `parallel` feature
//! is enabled; [`exec::run_batch`] falls back to a sequential loop otherwise
//! and always returns results in index order, so outputs are identical
//! either way.

pub mod criteria;
pub mod error;
pub mod exec;
pub mod graph;
pub mod holonomy;
pub mod metric;
pub mod model;
pub mod report;

pub use error::{Error, Result};
pub use exec::{run_batch, ExecMode};
