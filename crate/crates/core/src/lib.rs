pub mod error;
pub mod linalg;
pub mod symplectic;
pub mod flow;
pub mod index;
pub mod periodic;
pub mod iteration;
pub mod hamiltonian;
pub mod galerkin;
pub mod brake;
pub mod config;
pub mod report;
