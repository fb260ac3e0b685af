//! Numerical realization of elliptic stable envelopes for the cyclic quiver
//! varieties of type `A^(1)_{N-1}`, together with their shuffle products, the
//! dynamical R-matrices they induce, Fock-representation coefficients of the
//! elliptic quantum toroidal algebra, K-theoretic vertex functions, Bethe
//! equations and the exchange scalars of the vertex operators.
//!
//! Every identity is checked at generic complex parameter points. Half powers
//! such as `z^{-1/2}` are never taken through a principal branch: theta
//! arguments are [`numeric::Monomial`]s over base variables whose logarithms
//! are fixed once per [`numeric::ParamPoint`].

pub mod acceptance;
pub mod combinatorics;
pub mod envelopes;
pub mod error;
pub mod fockrep;
pub mod numeric;
pub mod rmatrix;
pub mod scalars;
pub mod vertexfn;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
