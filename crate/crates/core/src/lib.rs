//! Exact computations on bound quivers: homotopy relations, fundamental
//! groups, transvections and dilatations, the graph of homotopy relations,
//! and Galois coverings.

pub mod cover;
pub mod dsl;
pub mod gamma;
pub mod group;
pub mod homotopy;
pub mod ideal;
pub mod linalg;
pub mod quiver;
pub mod scalar;
pub mod serial;
pub mod transform;

pub use ideal::{ideals_equal, Ideal, Relation};
pub use quiver::{Bypass, Path, Quiver, Walk};
pub use scalar::{Field, Scalar};
