//! Floquet–Bloch band structure of the Neumann Laplacian on thin periodic waveguides.

pub mod bands;
pub mod convergence;
pub mod cross_section;
pub mod effective_1d;
pub mod eigensolve;
pub mod fiber3d;
pub mod geometry;
