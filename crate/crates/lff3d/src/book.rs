//! Compiles the guide's code fences as doc-tests so the book and the
//! public API cannot drift apart. Only built under `cfg(doctest)`.

#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}

#[doc = include_str!("../../../book/src/relative-state.md")]
mod relative_state {}

#[doc = include_str!("../../../book/src/kinematics.md")]
mod kinematics {}

#[doc = include_str!("../../../book/src/tracking-controller.md")]
mod tracking_controller {}

#[doc = include_str!("../../../book/src/safety-filter.md")]
mod safety_filter {}

#[doc = include_str!("../../../book/src/simulation.md")]
mod simulation {}

#[doc = include_str!("../../../book/src/cli.md")]
mod cli {}

#[doc = include_str!("../../../book/src/verification.md")]
mod verification {}
