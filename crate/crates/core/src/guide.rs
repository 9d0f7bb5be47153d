//! The guide in `book/`, kept here so that its examples run as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/states.md")]
pub mod states {}
#[doc = include_str!("../../../book/src/vertex.md")]
pub mod vertex {}
#[doc = include_str!("../../../book/src/n4.md")]
pub mod n4 {}
#[doc = include_str!("../../../book/src/zhu.md")]
pub mod zhu {}
#[doc = include_str!("../../../book/src/modules.md")]
pub mod modules {}
#[doc = include_str!("../../../book/src/a2.md")]
pub mod a2 {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
