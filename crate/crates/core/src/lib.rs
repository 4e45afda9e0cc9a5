//! Finite models of the amalgamated limit of a system of complete Boolean
//! algebras indexed by a distributive almost-lattice, and of its dual limit
//! of finite discrete spaces.
//!
//! Every finite Boolean algebra is the powerset of its atoms, and a complete
//! embedding `A <∘ B` is dual to a surjection from the atoms of `B` onto the
//! atoms of `A`. All constructions below work on that representation.

pub mod amal;
pub mod balg;
#[cfg(feature = "cli")]
pub mod cli;
pub mod diagram;
pub mod io;
pub mod oracle;
pub mod order;
pub mod stone_topo;
