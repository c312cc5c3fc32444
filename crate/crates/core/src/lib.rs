//! Pseudo-spectral solver for the hyperbolic artificial-compressibility
//! approximation of incompressible MHD on a periodic box, with the
//! diagnostics and experiment harness used to verify its singular limit.
//!
//! The approximating system, for compressibility parameter `ε > 0`, is
//!
//! ```text
//! ∂t u + ∇p = μΔu − (u·∇)u − ½(div u)u + curl B × B
//! ∂t B + ∇φ = ΔB + curl(u × B)
//! ε ∂t p + div u = 0
//! ε ∂t φ + div B = 0
//! ```
//!
//! and its limit is the incompressible MHD system with `Re = Rm = S = 1`.

pub mod calculus;
pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod io;
pub mod random;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{Axis, Field, Grid3, Representation, SobolevFlavor, VectorField};
