//! The resonant manifold, its quadrature, and the collision operators built
//! on top of it.

pub mod manifold;
pub mod operators;
pub mod oracle;
pub mod sphere;

pub use manifold::{kernel_constant, manifold_constant, manifold_quadrature, ManifoldPoint};
pub use operators::{CollisionOperator, Reconstruction};
pub use oracle::{brute_force_oracle, OracleOutcome, OracleSpec};
pub use sphere::SphereRule;
