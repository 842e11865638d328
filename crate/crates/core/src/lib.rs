//! Bregman divergences generated by separable convex functions, the
//! Riemannian distances induced by their Hessians, and the best predictors
//! (d-means, d-conditional expectations) those distances lead to.
//!
//! Every shipped generator `φ` has a closed-form coordinate change `h` with
//! `h' = sqrt(φ'')`. In `h`-coordinates the induced metric is Euclidean, so
//! geodesics, distances, midpoints and d-means all reduce to straight lines
//! and arithmetic averages pulled back through `H = h⁻¹`.
//!
//! ```
//! use divgeo::{Generator, GeneratorKind, Point, geometry};
//!
//! let gen = Generator::new(GeneratorKind::NegLog).unwrap();
//! let x = Point::from(vec![1.0]);
//! let y = Point::from(vec![std::f64::consts::E.powi(2)]);
//! let d = geometry::distance(&gen, &x, &y).unwrap();
//! assert!((d - 2.0).abs() < 1e-12);
//! ```

// `!(a < b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod divergence;
pub mod error;
pub mod experiments;
pub mod finite_probability;
pub mod generators;
pub mod geometry;
pub mod numeric;
pub mod point;
pub mod prediction;
pub mod rng;

pub use error::{Error, Result};
pub use finite_probability::{FiniteProbSpace, Partition, RandomVector};
pub use generators::{DomainInterval, Generator, GeneratorKind};
pub use geometry::GeodesicPath;
pub use point::Point;
