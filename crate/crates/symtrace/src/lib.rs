//! Symbolic-numeric toolkit for homogeneous constant-coefficient vectorial
//! differential operators: exact symbol algebra, classification into the
//! elliptic / cancelling / strongly cancelling / ℂ-elliptic classes with
//! certificates, Ahlfors-regular measure constructions, periodic grid
//! calculus, and a harness that runs the limiting trace-inequality ratio
//! tests and blow-up families at desk scale.

pub mod catalog;
pub mod classify;
pub mod fields;
pub mod harness;
pub mod measures;
pub mod multiindex;
pub mod numeric;
pub mod poly;
pub mod rational;
pub mod symbol;

pub use catalog::catalog as catalog_symbol;
pub use symbol::{HomogeneousSymbol, SymbolError};
