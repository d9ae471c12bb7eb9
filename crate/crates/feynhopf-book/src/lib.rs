//! The guide's chapters, compiled as doctests so every snippet in `book/`
//! runs against the current library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/theories.md")]
pub mod theories {}

#[doc = include_str!("../../../book/src/graphs.md")]
pub mod graphs {}

#[doc = include_str!("../../../book/src/hopf.md")]
pub mod hopf {}

#[doc = include_str!("../../../book/src/green.md")]
pub mod green {}

#[doc = include_str!("../../../book/src/diffeo.md")]
pub mod diffeo {}

#[doc = include_str!("../../../book/src/renorm.md")]
pub mod renorm {}

#[doc = include_str!("../../../book/src/bv.md")]
pub mod bv {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
