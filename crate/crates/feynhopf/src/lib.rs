//! Exact symbolic workbench for the renormalization Hopf algebra of Feynman
//! graphs: graph combinatorics, Green's functions, the Slavnov–Taylor Hopf
//! ideal, formal diffeomorphisms, Birkhoff renormalization with toy Feynman
//! rules, and BV master-equation constraints for Yang–Mills.
//!
//! All arithmetic is over exact rationals ([`Q`]).

pub mod bv;
pub mod diffeo;
pub mod graphs;
pub mod green;
pub mod groebner;
pub mod hopf;
pub mod poly;
pub mod rational;
pub mod renorm;
pub mod report;
pub mod theory;

pub use rational::{q, qi, Q};
