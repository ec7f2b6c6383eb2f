//! Exact linear algebra over Z/p^k.

mod howell;
mod matrix;
mod module;
mod ring;
mod smith;

pub use howell::{howell_form, kernel, preimage, Solver, Submodule};
pub use matrix::{axpy, scale_vec, MatrixR};
pub use module::{annihilator, DiagModule, ModuleMap, PresentedModule, Subquotient};
pub use ring::ResidueRing;
pub use smith::{cokernel_exponents, smith, Smith};
