//! A laboratory for completely integrable geodesic flows on compact Lie
//! groups, biquotients and glued manifolds: moment maps, Thimm integral
//! families, independence certificates and conservation along flows.

pub mod algebra;
pub mod catalog;
pub mod error;
pub mod expr;
pub mod flows;
pub mod independence;
pub mod integrals;
pub mod lab;
pub mod linalg;
pub mod moment;
pub mod quaternion;
pub mod sampling;

pub use error::{Error, Result};
