#![doc = include_str!("../../../book/src/introduction.md")]

pub mod codec;
pub mod converse;
pub mod exactdist;
pub mod experiments;
pub mod ldbounds;
pub mod model;
pub mod numeric;
pub mod rdsolve;

/// The guide's chapters, compiled and run as doc-tests so that every
/// snippet in the book stays in sync with the library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/pairs.md")]
    mod pairs {}
    #[doc = include_str!("../../../book/src/rate-distortion.md")]
    mod rate_distortion {}
    #[doc = include_str!("../../../book/src/ball-probability.md")]
    mod ball_probability {}
    #[doc = include_str!("../../../book/src/codec.md")]
    mod codec {}
    #[doc = include_str!("../../../book/src/converse.md")]
    mod converse {}
    #[doc = include_str!("../../../book/src/straight-line.md")]
    mod straight_line {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
