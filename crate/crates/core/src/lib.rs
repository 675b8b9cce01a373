//! Regularized Christoffel functions of weighted point clouds, their spectral
//! asymptotics, and the density and support estimates read off them.

pub mod densities;
pub mod density;
pub mod error;
pub mod gram;
pub mod kernel;
pub mod measure;
pub mod quad;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/christoffel.md")]
    mod christoffel {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    mod kernels {}
    #[doc = include_str!("../../../book/src/spectral.md")]
    mod spectral {}
    #[doc = include_str!("../../../book/src/density.md")]
    mod density {}
}
