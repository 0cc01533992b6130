//! Exact symbolic toolkit and batch verifier for homogeneous plane
//! foliations, birational maps between them, and Chazy-type derivations.

pub mod birmap;
pub mod chazy;
pub mod exterior;
pub mod frontend;
pub mod localfol;
pub mod matrix;
pub mod poly;
pub mod props;
pub mod scalar;
