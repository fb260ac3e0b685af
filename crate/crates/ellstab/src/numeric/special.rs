//! q-Pochhammer symbols, Jacobi theta functions and the triple Gamma function.

use std::f64::consts::PI;

use num_complex::Complex64 as C;

use super::param::trunc_for;
use crate::{Error, Result};

/// Relative size below which lattice terms of multiple products are dropped.
const MULTI_TOL: f64 = 1e-17;

/// `(z;q)_∞` truncated to `m` factors.
pub fn qpoch_inf(z: C, q: C, m: usize) -> Result<C> {
    if q.norm() >= 1.0 {
        return Err(Error::Domain(format!("|q| = {} is not below 1", q.norm())));
    }
    let mut r = C::new(1.0, 0.0);
    let mut zq = z;
    for _ in 0..m {
        r *= C::new(1.0, 0.0) - zq;
        zq *= q;
    }
    Ok(r)
}

/// `(z;q)_∞` with the default truncation for `q`.
pub fn qpoch(z: C, q: C) -> Result<C> {
    qpoch_inf(z, q, trunc_for(q))
}

/// Finite Pochhammer `(z;q)_d = (z;q)_∞/(zq^d;q)_∞` for any integer `d`.
///
/// For `d < 0` this is `1/(zq^d;q)_{-d}`, equivalently
/// `(-z)^d q^{d(d-1)/2} / (q/z;q)_{-d}`.
pub fn qpoch_fin(z: C, q: C, d: i32) -> Result<C> {
    let one = C::new(1.0, 0.0);
    if d >= 0 {
        let mut r = one;
        let mut zq = z;
        for _ in 0..d {
            r *= one - zq;
            zq *= q;
        }
        return Ok(r);
    }
    let den = qpoch_fin(z * q.powi(d), q, -d)?;
    if den == C::new(0.0, 0.0) {
        return Err(Error::Singular(format!("(z;q)_{d} has a vanishing denominator")));
    }
    Ok(one / den)
}

/// `θ_p(z) = (z;p)_∞ (p/z;p)_∞`.
pub fn theta_p(z: C, p: C, m: usize) -> Result<C> {
    Ok(qpoch_inf(z, p, m)? * qpoch_inf(p / z, p, m)?)
}

/// Double Pochhammer `(z;a,b)_∞ = Π_{i,j≥0} (1 - z a^i b^j)`.
pub fn qpoch2(z: C, a: C, b: C) -> Result<C> {
    if a.norm() >= 1.0 || b.norm() >= 1.0 {
        return Err(Error::Domain("double Pochhammer needs |a|,|b| < 1".into()));
    }
    let cut = MULTI_TOL.ln();
    let (la, lb) = (a.norm().ln(), b.norm().ln());
    let lz = z.norm().max(1.0).ln();
    let mut r = C::new(1.0, 0.0);
    let mut za = z;
    let mut i = 0.0;
    while lz + i * la >= cut {
        let mut zab = za;
        let mut j = 0.0;
        while lz + i * la + j * lb >= cut {
            r *= C::new(1.0, 0.0) - zab;
            zab *= b;
            j += 1.0;
        }
        za *= a;
        i += 1.0;
    }
    Ok(r)
}

/// Triple Pochhammer `(z;a,b,c)_∞ = Π_{i,j,k≥0} (1 - z a^i b^j c^k)`.
pub fn qpoch3(z: C, a: C, b: C, c: C) -> Result<C> {
    if a.norm() >= 1.0 || b.norm() >= 1.0 || c.norm() >= 1.0 {
        return Err(Error::Domain("triple Pochhammer needs |a|,|b|,|c| < 1".into()));
    }
    let cut = MULTI_TOL.ln();
    let (la, lb, lc) = (a.norm().ln(), b.norm().ln(), c.norm().ln());
    let lz = z.norm().max(1.0).ln();
    let one = C::new(1.0, 0.0);
    let mut r = one;
    let mut za = z;
    let mut i = 0.0;
    while lz + i * la >= cut {
        let mut zab = za;
        let mut j = 0.0;
        while lz + i * la + j * lb >= cut {
            let mut zabc = zab;
            let mut k = 0.0;
            while lz + i * la + j * lb + k * lc >= cut {
                r *= one - zabc;
                zabc *= c;
                k += 1.0;
            }
            zab *= b;
            j += 1.0;
        }
        za *= a;
        i += 1.0;
    }
    Ok(r)
}

/// Triple Gamma function `Γ(z;a,b,c) = (z;a,b,c)_∞ (abc/z;a,b,c)_∞`.
pub fn gamma3(z: C, a: C, b: C, c: C) -> Result<C> {
    if z == C::new(0.0, 0.0) {
        return Err(Error::Domain("triple Gamma at z = 0".into()));
    }
    Ok(qpoch3(z, a, b, c)? * qpoch3(a * b * c / z, a, b, c)?)
}

/// `ϑ₁(v|τ) = i Σ_{|n|≤nmax} (-1)^n e^{πiτ(n-1/2)^2} e^{2πiv(n-1/2)}`.
pub fn jacobi_theta1(v: C, tau: C, nmax: i32) -> C {
    let i = C::new(0.0, 1.0);
    let mut s = C::new(0.0, 0.0);
    for n in -nmax..=nmax {
        let h = f64::from(n) - 0.5;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * (i * PI * tau * h * h + 2.0 * i * PI * v * h).exp();
    }
    i * s
}

/// Residuals of the conjugate-modulus (`τ → -1/τ`) rewriting of the odd theta
/// function `θ(X) = -X^{-1/2} θ_p(X)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModularResidual {
    /// Right side as printed: `e^{-πi/4} τ^{1/2} p^{-1/8} ħ^{-(log X)^2/(2 log p)} ϑ₁`.
    pub printed: f64,
    /// Right side with `e` in place of `ħ` and the factor `-1/(p;p)_∞`.
    pub normalized: f64,
}

/// Compares `θ(X)` with its conjugate-modulus expression.
///
/// `log_x` fixes the branch of `log X`; `log_p` and `log_hbar` are the fixed
/// logarithms of the point. Residuals are relative unless `|θ(X)| < 1e-12`,
/// in which case they are absolute.
pub fn modular_check(log_x: C, log_p: C, log_hbar: C) -> Result<ModularResidual> {
    let p = log_p.exp();
    let x = log_x.exp();
    let m = trunc_for(p);
    let lhs = -(-0.5 * log_x).exp() * theta_p(x, p, m)?;
    let i = C::new(0.0, 1.0);
    let tau = -2.0 * PI * i / log_p;
    let th1 = jacobi_theta1(log_x / log_p, tau, 30);
    let common = (-0.25 * PI * i).exp() * tau.sqrt() * (-log_p / 8.0).exp() * th1;
    let quad = -log_x * log_x / (2.0 * log_p);
    let printed = common * (quad * log_hbar).exp();
    let normalized = -common * quad.exp() / qpoch_inf(p, p, m)?;
    let scale = if lhs.norm() < 1e-12 { 1.0 } else { lhs.norm() };
    Ok(ModularResidual { printed: (lhs - printed).norm() / scale, normalized: (lhs - normalized).norm() / scale })
}
