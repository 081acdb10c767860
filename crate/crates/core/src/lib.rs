//! Variational search for non-equilibrium steady states of Lindblad dynamics.
//!
//! A mixed state is prepared by a two-block circuit: a diagonal-distribution block
//! followed by a computational-basis dephasing and a basis-rotation block. The cost
//! `||L(rho)||_F^2` is evaluated exactly or estimated from classical shadows, and
//! minimized with shift-rule gradients.

pub mod ansatz;
pub mod error;
pub mod lindblad;
pub mod linalg;
pub mod models;
pub mod optimizer;
pub mod rng;
pub mod shadows;

pub use error::{Error, Result};
