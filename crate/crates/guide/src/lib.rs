//! mdbook cannot run snippets that depend on workspace crates, so each
//! chapter is pulled in as a module doc and checked by `cargo test --doc`.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/groups.md")]
pub mod groups {}
#[doc = include_str!("../../../book/src/horizontal-calculus.md")]
pub mod horizontal_calculus {}
#[doc = include_str!("../../../book/src/singular-solutions.md")]
pub mod singular_solutions {}
#[doc = include_str!("../../../book/src/polar-curves.md")]
pub mod polar_curves {}
#[doc = include_str!("../../../book/src/integration.md")]
pub mod integration {}
#[doc = include_str!("../../../book/src/capacity.md")]
pub mod capacity {}
#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
