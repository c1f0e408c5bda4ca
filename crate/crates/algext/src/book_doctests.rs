//! Keeps the book's code blocks compiling and passing: each chapter is
//! included as a doc comment so `cargo test --doc` executes its snippets.

#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}

#[doc = include_str!("../../../book/src/finite-fields.md")]
mod finite_fields {}

#[doc = include_str!("../../../book/src/distributions.md")]
mod distributions {}

#[doc = include_str!("../../../book/src/varieties.md")]
mod varieties {}

#[doc = include_str!("../../../book/src/rank-extractors.md")]
mod rank_extractors {}

#[doc = include_str!("../../../book/src/low-bias.md")]
mod low_bias {}

#[doc = include_str!("../../../book/src/pipeline.md")]
mod pipeline_chapter {}

#[doc = include_str!("../../../book/src/affine.md")]
mod affine_chapter {}

#[doc = include_str!("../../../book/src/harness.md")]
mod harness_chapter {}
