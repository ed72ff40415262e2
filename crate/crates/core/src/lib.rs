//! Guided-wave forward model and inverse-characterisation toolkit for layered
//! composite plates.
//!
//! The forward half computes dispersion roots of the fundamental Lamb modes
//! (A0, S0) with the stiffness matrix method, reconstructs the modal fields,
//! and turns power flow and energy into group-velocity vectors. Sweeping the
//! propagation angle gives polar wavecrest curves, which are rasterised into
//! binary images.
//!
//! The inverse half is a small CPU neural-network kit (convolution, batch
//! normalisation, pooling, dense layers, Adam) used to build dual-branch
//! networks that read one image per wave mode.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! parallel dataset generation live in the `lambpolar` crate.

#![no_std]
#![deny(unsafe_code)]
#![cfg_attr(test, allow(unused_imports))]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod elastic;
pub mod error;
pub mod features;
pub mod linalg;
pub mod nn;
pub mod polar;
pub mod quadrature;
pub mod sensitivity;
pub mod smm;
pub mod wavefield;

pub use error::{Error, Result};
