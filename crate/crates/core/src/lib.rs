pub mod diophantine;
pub mod real;

pub use real::Real;
pub mod graph;
pub mod ggcc;
pub mod scenario;
pub mod quasimodes;
pub mod spectral;
pub mod wavesim;
