pub mod acceptance;
pub mod approx;
pub mod bump;
pub mod decomposition;
pub mod fourier;
pub mod harness;
pub mod lattice;
pub mod measures;
pub mod moments;
pub mod precise;
pub mod qi;
pub mod quadrature;
pub mod torus;
pub mod volume;
