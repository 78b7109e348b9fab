//! Lattice Seiberg-Witten functional on the flat 4-torus.
//!
//! The crate evaluates the SW energy of a `(connection, spinor)` pair on a
//! periodic hypercubic lattice, its exact gradient and second variation, the
//! Hodge splitting of 1-cochains, and the Morse index of reducible critical
//! points `(A, 0)` as the negative-eigenvalue count of `Δ_A + k_g/4`.

pub mod checks;
pub mod error;
pub mod fields;
pub mod flow;
pub mod functional;
pub mod hessian;
pub mod hodge;
pub mod io;
pub mod lattice;
pub mod linalg;
pub mod spectral;

pub use error::{Error, Result};
pub use fields::{
    BundleData, Chirality, Configuration, GaugeTransform, SpinorField, SpinorOneForm,
};
pub use lattice::{Cochain, Lattice};
