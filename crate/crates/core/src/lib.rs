//! Core algorithms for enumerating the stable minimal surfaces spanned by two
//! families of planar Jordan curves placed in nearby parallel planes.
//!
//! The pipeline runs from curves to a signed planar [`arrangement`], through
//! the admissible multiplicity assignments of [`varifold`] and their glued
//! [`sheet`] complexes, to triangulated surfaces ([`mesh`]) that are relaxed
//! to discrete minimal surfaces ([`relax`]) and checked for stability via the
//! Jacobi operator ([`stability`]).
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod arrangement;
pub mod discrete;
pub mod error;
pub mod fixtures;
pub mod geom;
pub mod mesh;
pub mod relax;
pub mod sheet;
pub mod sparse;
pub mod stability;
pub mod varifold;

pub use error::{Error, Result};
