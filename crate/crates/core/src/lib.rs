//! Exact topology, cell decompositions and cohomology of semilinear subsets of
//! `Γ∞^n`, where `Γ = (ℚ, <, +)` and `Γ∞ = Γ ∪ {∞}` carries the order topology.
//!
//! The crate is layered bottom-up:
//!
//! * [`qlin`]: exact rational linear arithmetic, Fourier–Motzkin projection and
//!   quantifier elimination.
//! * [`stratal`]: stratified sets over `Γ∞^n`, boolean algebra, closure and the
//!   topological predicates (closed, open, locally closed, definably compact).
//! * [`celldec`]: cylindrical cell decompositions, regular cell complexes and
//!   definably connected components.
//! * [`cohom`]: cohomology with and without compact supports, exactness and
//!   homotopy audits.
//! * [`family`]: tameness of one-parameter families.
//! * [`dsl`]: the script language, command runner and JSON reports.

pub mod celldec;
pub mod cohom;
pub mod dsl;
pub mod family;
pub mod linalg;
pub mod qlin;
pub mod stratal;

#[cfg(test)]
pub(crate) mod testutil;
