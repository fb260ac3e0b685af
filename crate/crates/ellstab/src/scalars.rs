//! Closed-form scalar kernels built from triple Gamma functions: the OPE
//! function `μ(u)`, the exchange scalars `μ_kl`, `μ*_kl`, `χ_kl`, the fusion
//! scalars `ρ⁺`, `ρ`, and the scalar consistency identity behind the RLL relation.
//!
//! Arguments are [`Slot`]s so that fractional powers `x^{η}` use a fixed
//! logarithm. All Gamma functions have bases `(t1^N, t2^N, c)` with `c`
//! either `ħ`, `p` or `p* = p/ħ`.

use std::f64::consts::PI;

use num_complex::Complex64 as C;

use crate::numeric::{gamma3, qpoch2, Annuli, ParamPoint, Slot};
use crate::{Error, Result};

/// `η_kl = [h_{Λ_k}, Λ_l] = k(N-l)/N` for `k ≤ l`, symmetric.
pub fn eta(n: usize, k: usize, l: usize) -> f64 {
    let (i, j) = if k <= l { (k, l) } else { (l, k) };
    (i * (n - j)) as f64 / n as f64
}

/// Full `η` table.
pub fn eta_table(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|k| (0..n).map(|l| eta(n, k, l)).collect()).collect()
}

/// The pair of elliptic nomes `(p, p*)`; [`Nomes::swapped`] exchanges them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Nomes {
    pub p: Slot,
    pub p_star: Slot,
}

impl Nomes {
    pub fn of(pp: &ParamPoint) -> Self {
        Self { p: pp.p, p_star: pp.p_star() }
    }

    pub fn swapped(self) -> Self {
        Self { p: self.p_star, p_star: self.p }
    }
}

/// Bases and logarithms shared by all kernels at one point.
struct Ctx {
    n: i32,
    lt1: C,
    lt2: C,
    lh: C,
}

impl Ctx {
    fn new(pp: &ParamPoint) -> Self {
        Self { n: pp.n as i32, lt1: pp.t1.log, lt2: pp.t2.log, lh: pp.log_hbar() }
    }

    fn a(&self) -> C {
        (f64::from(self.n) * self.lt1).exp()
    }

    fn b(&self) -> C {
        (f64::from(self.n) * self.lt2).exp()
    }

    /// `t1^{i} t2^{j} ħ^{h/2} · x` as a value.
    fn arg(&self, i: i32, j: i32, half_h: i32, x: Slot) -> C {
        (f64::from(i) * self.lt1 + f64::from(j) * self.lt2 + 0.5 * f64::from(half_h) * self.lh + x.log).exp()
    }

    /// `Γ(z; t1^N, t2^N, c)`.
    fn g(&self, z: C, c: C) -> Result<C> {
        gamma3(z, self.a(), self.b(), c)
    }
}

fn nonzero(v: C, what: &str) -> Result<C> {
    if v.norm() < 1e-300 || !v.is_finite() {
        Err(Error::Singular(format!("{what} vanishes or diverges")))
    } else {
        Ok(v)
    }
}

/// `x^{e}` through the fixed logarithm of `x`.
fn pow(x: Slot, e: f64) -> C {
    (e * x.log).exp()
}

fn inv(x: Slot) -> Slot {
    Slot::from_log(-x.log)
}

fn ensure_domain(pp: &ParamPoint, nomes: Nomes) -> Result<()> {
    for (name, q) in
        [("t1", pp.t1.val), ("t2", pp.t2.val), ("ħ", pp.hbar()), ("p", nomes.p.val), ("p*", nomes.p_star.val)]
    {
        if q.norm() >= 1.0 {
            return Err(Error::Domain(format!("|{name}| = {} is not below 1", q.norm())));
        }
    }
    Ok(())
}

/// Exchange scalar `μ(x)_kl` with `x = v/u`:
/// `x^{-η} [Γ(t2^{l-k}x) Γ(t1^{N+k-l}x) / (Γ(t1^N t2^{l-k}x) Γ(t1^N t2^N t1^{k-l}x))]_ħ / [ … ]_p`
/// for `k ≤ l`, and `1/μ(1/x)_lk` for `k > l`.
pub fn mu_ex(pp: &ParamPoint, nomes: Nomes, k: usize, l: usize, x: Slot) -> Result<C> {
    ensure_domain(pp, nomes)?;
    if k > l {
        return Ok(C::new(1.0, 0.0) / nonzero(mu_ex(pp, nomes, l, k, inv(x))?, "μ_lk")?);
    }
    let c = Ctx::new(pp);
    let d = k as i32 - l as i32;
    let n = c.n;
    let block = |base: C| -> Result<C> {
        let num = c.g(c.arg(0, -d, 0, x), base)? * c.g(c.arg(n + d, 0, 0, x), base)?;
        let den = c.g(c.arg(n, -d, 0, x), base)? * c.g(c.arg(n + d, n, 0, x), base)?;
        Ok(num / nonzero(den, "Γ product")?)
    };
    let h = block(pp.hbar())?;
    let p = nonzero(block(nomes.p.val)?, "Γ product at p")?;
    Ok(pow(x, -eta(pp.n, k, l)) * h / p)
}

/// Exchange scalar `μ*(x)_kl` with `x = u/v`:
/// `x^{η} [Γ(ħ t2^N t1^{l-k}x) Γ(ħ t1^N t2^N t2^{k-l}x) / (Γ(ħ t1^{l-k}x) Γ(ħ t2^N t2^{k-l}x))]_ħ`
/// `× [Γ(t2^N t1^{l-k}x) Γ(t1^N t2^N t2^{k-l}x) / (Γ(t1^{l-k}x) Γ(t2^N t2^{k-l}x))]_{p*}` for `k ≤ l`,
/// and `1/μ*(1/x)_lk` for `k > l`.
pub fn mu_star(pp: &ParamPoint, nomes: Nomes, k: usize, l: usize, x: Slot) -> Result<C> {
    ensure_domain(pp, nomes)?;
    if k > l {
        return Ok(C::new(1.0, 0.0) / nonzero(mu_star(pp, nomes, l, k, inv(x))?, "μ*_lk")?);
    }
    let c = Ctx::new(pp);
    let d = k as i32 - l as i32;
    let n = c.n;
    let block = |hh: i32, base: C| -> Result<C> {
        let num = c.g(c.arg(-d, n, hh, x), base)? * c.g(c.arg(n, n + d, hh, x), base)?;
        let den = c.g(c.arg(-d, 0, hh, x), base)? * c.g(c.arg(0, n + d, hh, x), base)?;
        Ok(num / nonzero(den, "Γ product")?)
    };
    Ok(pow(x, eta(pp.n, k, l)) * block(2, pp.hbar())? * block(0, nomes.p_star.val)?)
}

/// Exchange scalar `χ(x)_kl` with `x = u/v`, both printed branches.
pub fn chi(pp: &ParamPoint, k: usize, l: usize, x: Slot) -> Result<C> {
    let c = Ctx::new(pp);
    let d = k as i32 - l as i32;
    let n = c.n;
    let h = pp.hbar();
    let (num, den) = if k <= l {
        (
            c.g(c.arg(0, n + d, 1, x), h)? * c.g(c.arg(-d, 0, 1, x), h)?,
            c.g(c.arg(-d, n, 1, x), h)? * c.g(c.arg(n, n + d, 1, x), h)?,
        )
    } else {
        (
            c.g(c.arg(0, d, 1, x), h)? * c.g(c.arg(n - d, 0, 1, x), h)?,
            c.g(c.arg(n - d, n, 1, x), h)? * c.g(c.arg(n, d, 1, x), h)?,
        )
    };
    Ok(pow(x, -eta(pp.n, k, l)) * num / nonzero(den, "Γ product")?)
}

/// `ρ⁺(u) = Γ(1/u; t1^N, t2^N, p) / Γ(u; t1^N, t2^N, p)` at the nome `nomes.p`.
pub fn rho_plus(pp: &ParamPoint, nomes: Nomes, u: Slot) -> Result<C> {
    ensure_domain(pp, nomes)?;
    let c = Ctx::new(pp);
    let num = c.g(inv(u).val, nomes.p.val)?;
    Ok(num / nonzero(c.g(u.val, nomes.p.val)?, "Γ(u)")?)
}

/// `ρ⁺*(u)`, i.e. `ρ⁺` at `p*`.
pub fn rho_plus_star(pp: &ParamPoint, nomes: Nomes, u: Slot) -> Result<C> {
    rho_plus(pp, nomes.swapped(), u)
}

/// `ρ(u) = ρ⁺*(u)/ρ⁺(u)`.
pub fn rho(pp: &ParamPoint, nomes: Nomes, u: Slot) -> Result<C> {
    Ok(rho_plus_star(pp, nomes, u)? / nonzero(rho_plus(pp, nomes, u)?, "ρ⁺")?)
}

/// The OPE function `μ(u)` for framing weights given as `(color, weight)`:
/// `Π_{k ≤ l} Π_{i,j} (-ħ^{1/2}u^{(k)}_i)^{η_kl}`
/// `× (t1^N t1^{k-l} y; p, t1^N)/(t1^N t1^{k-l} y; ħ, t1^N) · (t2^{l-k} y; p, t2^N)/(t2^{l-k} y; ħ, t2^N)`
/// with `y = u^{(l)}_j/u^{(k)}_i`. For `k = l` the pairs run over all `(i, j)`;
/// the self pair `i = j` has the common vanishing factor `1 - y` removed.
pub fn mu_ope(pp: &ParamPoint, weights: &[(usize, Slot)]) -> Result<C> {
    let c = Ctx::new(pp);
    let (a, b, h, p) = (c.a(), c.b(), pp.hbar(), pp.p.val);
    let mut total = C::new(1.0, 0.0);
    for (ii, &(k, uk)) in weights.iter().enumerate() {
        for (jj, &(l, ul)) in weights.iter().enumerate() {
            if k > l {
                continue;
            }
            let d = k as i32 - l as i32;
            let y = Slot::from_log(ul.log - uk.log);
            let pre = (eta(pp.n, k, l) * (C::new(0.0, PI) + 0.5 * c.lh + uk.log)).exp();
            let z1 = c.arg(c.n + d, 0, 0, y);
            let z2 = c.arg(0, -d, 0, y);
            let f1 = qpoch2(z1, p, a)? / nonzero(qpoch2(z1, h, a)?, "double Pochhammer")?;
            let f2 = if ii == jj {
                // (y;q,b) with y = 1: drop the (0,0) factor, which is (1 - y) in both.
                (qpoch2(z2 * b, p, b)? * qpoch2(z2 * p, p, b)? / qpoch2(z2 * p * b, p, b)?)
                    / nonzero(
                        qpoch2(z2 * b, h, b)? * qpoch2(z2 * h, h, b)? / qpoch2(z2 * h * b, h, b)?,
                        "double Pochhammer",
                    )?
            } else {
                qpoch2(z2, p, b)? / nonzero(qpoch2(z2, h, b)?, "double Pochhammer")?
            };
            total *= pre * f1 * f2;
        }
    }
    Ok(total)
}

/// Residual of `ρ⁺(u)/ρ⁺*(u) = χ(ħ^{1/2}/u)_kk/χ(ħ^{1/2}u)_kk · μ(u)_kk/μ*(u)_kk`.
///
/// Requires `|p| < |ħ|` so that `|p*| < 1`.
pub fn rll_scalar_identity(pp: &ParamPoint, u: Slot, k: usize) -> Result<f64> {
    let nomes = Nomes::of(pp);
    let lhs = rho_plus(pp, nomes, u)? / nonzero(rho_plus_star(pp, nomes, u)?, "ρ⁺*")?;
    let half = 0.5 * pp.log_hbar();
    let a = Slot::from_log(half - u.log);
    let b = Slot::from_log(half + u.log);
    let rhs = chi(pp, k, k, a)? / nonzero(chi(pp, k, k, b)?, "χ")? * mu_ex(pp, nomes, k, k, u)?
        / nonzero(mu_star(pp, nomes, k, k, u)?, "μ*")?;
    Ok((lhs - rhs).norm() / lhs.norm().max(1e-300))
}

/// A point with `|t1|, |t2| ∈ [0.3, 0.7]` and `|p| < 0.9|ħ|`, so that both
/// nomes `p` and `p* = p/ħ` lie inside the unit disc.
///
/// Candidates are drawn from the seeds `1000·seed + i` until one qualifies.
pub fn scalar_point(n: usize, seed: u64) -> Result<ParamPoint> {
    let an = Annuli { t: (0.3, 0.7), ..Annuli::default() };
    for i in 0..1000 {
        let pp = ParamPoint::sample(n, 1, seed.wrapping_mul(1000).wrapping_add(i), &an)?;
        if pp.p.val.norm() < 0.9 * pp.hbar().norm() {
            return Ok(pp);
        }
    }
    Err(Error::Domain("no sampled point has |p| < 0.9|ħ|".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_point(seed: u64) -> ParamPoint {
        super::scalar_point(3, seed).unwrap()
    }

    #[test]
    fn eta_is_symmetric_with_known_values() {
        let t = eta_table(3);
        for k in 0..3 {
            for l in 0..3 {
                assert_eq!(t[k][l], t[l][k]);
            }
        }
        assert_eq!(t[0][2], 0.0);
        assert!((t[1][1] - 2.0 / 3.0).abs() < 1e-15);
        assert!((t[1][2] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn reciprocal_branches() {
        let pp = scalar_point(1);
        let nm = Nomes::of(&pp);
        let x = Slot::new(C::new(0.5, 0.3));
        let a = mu_ex(&pp, nm, 2, 0, x).unwrap() * mu_ex(&pp, nm, 0, 2, inv(x)).unwrap();
        assert!((a - 1.0).norm() < 1e-12);
        let b = mu_star(&pp, nm, 1, 0, x).unwrap() * mu_star(&pp, nm, 0, 1, inv(x)).unwrap();
        assert!((b - 1.0).norm() < 1e-12);
    }

    #[test]
    fn swapping_nomes_twice_is_identity() {
        let pp = scalar_point(2);
        let nm = Nomes::of(&pp);
        assert_eq!(nm.swapped().swapped(), nm);
        let u = Slot::new(C::new(0.4, -0.6));
        let r1 = rho_plus(&pp, nm, u).unwrap();
        let r2 = rho_plus(&pp, nm.swapped().swapped(), u).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn rho_is_ratio_of_plus_parts() {
        let pp = scalar_point(3);
        let nm = Nomes::of(&pp);
        let u = Slot::new(C::new(0.7, 0.2));
        let r = rho(&pp, nm, u).unwrap() * rho_plus(&pp, nm, u).unwrap();
        assert!((r - rho_plus_star(&pp, nm, u).unwrap()).norm() < 1e-12 * r.norm());
        // Γ(z) = Γ(abc/z) makes ρ⁺(u)ρ⁺(1/u) = 1.
        let s = rho_plus(&pp, nm, u).unwrap() * rho_plus(&pp, nm, inv(u)).unwrap();
        assert!((s - 1.0).norm() < 1e-10);
    }

    #[test]
    fn rll_identity_all_colors() {
        for seed in 0..4 {
            let pp = scalar_point(seed);
            for k in 0..3 {
                let u = Slot::new(C::from_polar(0.8, 0.3 + seed as f64));
                let r = rll_scalar_identity(&pp, u, k).unwrap();
                assert!(r < 1e-7, "seed {seed} k {k}: {r}");
            }
        }
    }

    #[test]
    fn single_weight_ope_has_no_cross_terms() {
        let pp = scalar_point(4);
        let u = Slot::new(C::new(1.2, 0.4));
        let one = mu_ope(&pp, &[(1, u)]).unwrap();
        let two = mu_ope(&pp, &[(1, u), (2, Slot::new(C::new(0.3, 0.1)))]).unwrap();
        assert!(one.is_finite() && two.is_finite());
        assert!((one - two).norm() > 1e-6);
    }

    #[test]
    fn p_star_domain_is_checked() {
        let mut pp = scalar_point(5);
        pp = pp.clone().with_p(Slot::new(pp.hbar() * 1.5));
        assert!(matches!(rll_scalar_identity(&pp, Slot::new(C::new(0.5, 0.0)), 0), Err(Error::Domain(_))));
    }
}
