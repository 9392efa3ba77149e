//! Exact phase-space algebra for hybrid quantum-classical dynamics.

pub mod consistency;
pub mod dynamics;
pub mod expr;
pub mod products;
pub mod random;
pub mod scalar;

pub use expr::{Expression, Kind, Monomial, NumPoly, Poly, Sector, VariableId};
pub use products::{BracketForm, ProductSpec, SigmaSpec};
pub use scalar::{Coefficient, Scalar};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
