//! Numerical toolkit: dense linear algebra, a small LP solver, seeded
//! randomness and scalar special functions.

pub mod eigen;
pub mod lp;
pub mod matrix;
pub mod rng;
pub mod special;
pub mod stats;

pub use eigen::{
    eig_proxy_max, eig_proxy_min, eigenvalues, inverse_sqrt, matrix_exp, matrix_function, phi_gradient,
    phi_hessian_bound, phi_hessian_qform, psd_sqrt, sym_eig, SpectralDecomposition,
};
pub use lp::{lp_solve, LpSolution};
pub use matrix::{operator_norm, unit_vector, Matrix, SymMatrix, Vector};
pub use rng::{brownian_increment, gaussian_matrix, gaussian_vector, haar_orthogonal, uniform_sphere, RngStream, StreamId};
pub use special::{alpha_n, normal_cdf, normal_quantile, normal_sf};
