//! Finite-dimensional model of `S(R)` and its dual on the orthonormal Hermite
//! functions `h_k(x) = (2^k k! √π)^{-1/2} H_k(x) e^{-x²/2}`.

mod basis;
mod expm;
mod operators;
mod quadrature;
mod seminorm;

pub use basis::{
    evaluate_series, hermite_functions, pairing, BasisSpec, DualElement, HermiteBasis, TestFunction,
};
pub use expm::expm;
pub use operators::{derivative_op, heat_flow_h0, heat_matrix, laplacian_op, write_matrix_csv};
pub use quadrature::{GaussHermite, GaussLegendre};
pub use seminorm::{
    dual_norm, hs_norm, hs_tail_bound, seminorm, HsNorm, SeminormFamily, SeminormIndex,
};

pub(crate) use basis::dot;
pub(crate) use seminorm::weighted_norm;
