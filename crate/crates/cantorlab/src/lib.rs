//! Computable measures on Cantor space at finite depth: exact dyadic
//! arithmetic, orders, measure trees and oracles, monotone functionals,
//! resource-bounded complexity, and stage-driven constructions.

pub mod arith;
pub mod complexity;
pub mod constructions;
pub mod functionals;
pub mod measures;
pub mod orders;

pub use arith::{bs, BitString, Dyadic};
