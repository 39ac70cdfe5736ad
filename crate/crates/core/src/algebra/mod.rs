//! Exact and floating polynomial algebra in the Mellin variable λ.

pub mod poly;
pub mod rational;
pub mod roots;

pub use poly::{crat, rat, CRat, Coeff, Poly, Rat};
pub use rational::RationalFamily;
pub use roots::{roots_exact, roots_numeric, Root, TOL_POLE};
