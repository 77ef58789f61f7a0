//! Hilbert geometry of smooth strictly convex bodies: chords, Finsler norms,
//! Busemann densities, metric spheres and their volume entropy.
//!
//! ```
//! use hilbert_kit::{BodySpec, ConvexBody, MetricQuery, ToleranceConfig};
//!
//! let disk = ConvexBody::new(BodySpec::ball(2, 1.0)).unwrap();
//! let o = disk.point(&[0.0, 0.0]).unwrap();
//! let p = disk.point(&[0.5, 0.0]).unwrap();
//! let q = MetricQuery::new(disk, ToleranceConfig::default());
//! let d = q.hilbert_distance(&o, &p).unwrap();
//! assert!((d - 0.5 * 3f64.ln()).abs() < 1e-12);
//! ```

pub mod asymptotics;
pub mod body;
pub mod cli;
pub mod error;
pub mod metric;
pub mod numerics;
pub mod spheres;

pub use body::{BodySpec, BodySummary, ConvexBody, Direction, Family, Point};
pub use error::{Error, Result};
pub use metric::MetricQuery;
pub use numerics::{QuadratureRule, Sphere2Rule, SphereDim, ToleranceConfig};
