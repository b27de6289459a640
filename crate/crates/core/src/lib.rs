//! Linking and winding numbers of closed curves in complex projective space.
//!
//! The crate computes the projective winding number `∫_Γ d^C log‖σ‖` of a
//! curve against a section, the projective linking number through an explicit
//! cobounding chain, masses of holomorphic chains, and the search for the
//! infimum of reduced winding numbers that bounds the least mass of a positive
//! holomorphic chain with boundary `Γ`. A smaller part estimates best
//! constants for projective hull membership.
//!
//! ```
//! use projlink::curves::ParamCurve;
//! use projlink::fs::HomogeneousSection;
//! use projlink::invariants::{winding_number, QuadratureOptions};
//!
//! let circle = ParamCurve::circle_in_line(2, 1.0, 1).unwrap();
//! let z0 = HomogeneousSection::coordinate(2, 0);
//! let w = winding_number(&circle, &z0, &QuadratureOptions::default()).unwrap();
//! assert!((w.value + 0.5).abs() < 1e-12);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod criterion;
pub mod curves;
pub mod ensemble;
pub mod error;
pub mod fs;
pub mod invariants;
pub mod io;
pub mod qpsh;
pub mod quadrature;
pub mod verify;

pub use error::{Error, Result};
