//! Asymptotic coefficient extraction for multivariate rational generating
//! functions `F = G / H^p` at smooth critical points.

pub mod error;
pub mod exec;
pub mod expansion;
pub mod flterms;
pub mod geometry;
pub mod json;
pub mod linalg;
pub mod localdata;
pub mod num;
pub mod oracle;
pub mod pipeline;
pub mod problem;
pub mod series;

pub use error::{Error, Result};
pub use num::Precision;
