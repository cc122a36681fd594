//! Long intense periods of finite-buffer queues driven by regularly varying
//! arrivals, together with their first- and second-level limit measures.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod heavytail;
pub mod intense;
pub mod measures;
pub mod pathspace;
pub mod quadrature;
pub mod reflect;
pub mod seeding;

pub use error::{Error, Result};
