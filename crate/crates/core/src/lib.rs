//! Resonant van der Waals potential, force and spontaneous decay rate of an
//! excited two-level atom above an absorbing magneto-electric slab backed by
//! a perfect mirror.
//!
//! Reduced units throughout: `c = ω₁₀ = 1`, lengths in `c/ω₁₀`, energies in
//! `ħΓ₀`, forces in `ħΓ₀ω₁₀/c`, rates in `Γ₀`.

pub mod analysis;
pub mod asymptotics;
pub mod error;
pub mod green;
pub mod ideal;
pub mod kernel;
pub mod observables;
pub mod quad;
pub mod spp;
pub mod units;

pub use error::{Error, Result};
