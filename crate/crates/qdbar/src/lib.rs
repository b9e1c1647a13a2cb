//! Numerical model of the Toeplitz quantum ∂̄-operator on weighted disk and
//! annulus domains: Jacobi-type mode operators, their parametrices and
//! indices, the Fourier decomposition and APS boundary conditions.

pub mod aps;
pub mod cli;
pub mod fourier;
pub mod jacobi;
pub mod oracle;
pub mod weight_model;
