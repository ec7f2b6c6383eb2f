//! Exact computation of Stark and Kolyvagin systems over Z/p^k in a synthetic duality model.

pub mod error;
pub mod exterior;
pub mod graph_sheaf;
pub mod local_model;
pub mod suites;
pub mod systems;
pub mod ring_linalg;
pub mod selmer_instance;

pub use error::{Error, Result};
pub use ring_linalg::{DiagModule, MatrixR, ModuleMap, PresentedModule, ResidueRing, Submodule, Subquotient};
