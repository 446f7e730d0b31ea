//! The parameter plane of a two-generator pair: contour bounds, normal forms and free-product tests.

pub mod free;
pub mod mobius;
pub mod omega;
pub mod svg;

pub use free::{free_test, Certificate, FreeOutcome, Verdict};
pub use mobius::{isometric_circles, normalize_generators, Circle, GeometryError, Mobius, MobiusPair};
pub use omega::{inside_contour, omega_point, OmegaBounds};
