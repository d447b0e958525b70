pub mod error;
pub mod linalg;
pub mod quadrature;
pub mod rng;
pub mod states;
pub mod entropy;
pub mod bounds;
