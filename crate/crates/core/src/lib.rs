// `!(x > 0.0)` style guards are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bdg;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod models;
pub mod opalg;
pub mod probes;
pub mod sweep;

pub use error::{Error, Result};

/// Guide chapters, compiled as doc-tests so their examples stay current.
pub mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/operators.md")]
    pub mod operators {}
    #[doc = include_str!("../../../book/src/models.md")]
    pub mod models {}
    #[doc = include_str!("../../../book/src/bdg.md")]
    pub mod bdg {}
    #[doc = include_str!("../../../book/src/probes.md")]
    pub mod probes {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    pub mod dynamics {}
    #[doc = include_str!("../../../book/src/sweeps.md")]
    pub mod sweeps {}
}
