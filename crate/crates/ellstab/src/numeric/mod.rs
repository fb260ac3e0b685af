//! Exact-exponent complex arithmetic and special functions.
//!
//! Theta arguments are [`Monomial`]s over base variables; half powers are
//! evaluated only through the logarithms fixed in a [`ParamPoint`], so two
//! algebraically equal expressions never disagree by a branch sign.

mod monomial;
mod param;
mod special;
mod theta;

pub use monomial::{Monomial, Var};
pub use param::{trunc_for, Annuli, ParamPoint, Slot};
pub use special::{
    gamma3, jacobi_theta1, modular_check, qpoch, qpoch2, qpoch3, qpoch_fin, qpoch_inf, theta_p, ModularResidual,
};
pub use theta::{phi_fn, theta, theta_star, CompiledTerm, GradedValue, Nome, ThetaTerm};
