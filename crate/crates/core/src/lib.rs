pub mod adversary;
pub mod analysis;
pub mod codec;
pub mod geometry;
pub mod protocol;
pub mod rbcast;
pub mod scalar;
pub mod sim;

pub use scalar::Rational;

pub type Point = geometry::Point<Rational>;
pub type Polytope = geometry::Polytope<Rational>;
pub type WeightVector = geometry::WeightVector<Rational>;
