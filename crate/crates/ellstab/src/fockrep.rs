//! Level-(0,-1) Fock representation: eigenvalues of `φ±_j(z)`, the matrix
//! coefficients `A±` of `x±_j(z)`, the vector representation `V^(k)(u)`, and
//! the `K`-eigenvalue sum rule.
//!
//! Coefficients are [`ThetaTerm`]s in the vacuum weight `U(0)` and the
//! spectral variable, which is stored as the Chern-root slot `X(0)`.
//! Distributions `δ(a/z)` are returned as a support point `a` with a coefficient.

use num_complex::Complex64 as C;

use crate::combinatorics::{addable_removable, ColoredPartition};
use crate::numeric::{qpoch, Monomial, ParamPoint, ThetaTerm, Var};
use crate::{Error, Result};

fn uvar() -> Monomial {
    Monomial::var(Var::U(0))
}

/// The spectral variable `z`.
pub fn zvar() -> Monomial {
    Monomial::var(Var::X(0))
}

/// `u_X = t1^{-y} t2^{-x} u` for the box `X = (x, y)`.
pub fn box_weight(cell: (usize, usize)) -> Monomial {
    &(&Monomial::var_pow(Var::T1, -(cell.1 as i32)) * &Monomial::var_pow(Var::T2, -(cell.0 as i32))) * &uvar()
}

fn ratio(num: Monomial, den: Monomial) -> ThetaTerm {
    let mut t = ThetaTerm::th(num);
    t.push(den, -1);
    t
}

/// `wt(λ)_j = |R_j(λ)| - |A_j(λ)|`.
pub fn weight(lam: &ColoredPartition, j: usize, n: usize) -> i32 {
    let (a, r) = addable_removable(lam, j, n);
    r.len() as i32 - a.len() as i32
}

/// Eigenvalue of `φ±_j(z)` on `|λ⟩`:
/// `Π_{R ∈ R_j} θ(u_R/z)/θ(ħu_R/z) · Π_{A ∈ A_j} θ(ħ²u_A/z)/θ(ħu_A/z)`.
pub fn phi_eigen(lam: &ColoredPartition, j: usize, n: usize) -> ThetaTerm {
    let (adds, rems) = addable_removable(lam, j, n);
    let z = zvar();
    let h = Monomial::hbar();
    let mut t = ThetaTerm::one();
    for r in rems {
        let w = &box_weight(r) / &z;
        t = t.times(&ratio(w.clone(), &h * &w));
    }
    for a in adds {
        let w = &box_weight(a) / &z;
        t = t.times(&ratio(&Monomial::hbar_pow(2) * &w, &h * &w));
    }
    t
}

/// The lowest weight `(θ(ħu/z)/θ(u/z))^{δ_jk}`.
pub fn lowest_weight(j: usize, k: usize) -> ThetaTerm {
    if j != k {
        return ThetaTerm::one();
    }
    let w = &uvar() / &zvar();
    ratio(&Monomial::hbar() * &w, w)
}

fn content(lam: &ColoredPartition, c: (usize, usize)) -> i64 {
    lam.content(c.0, c.1)
}

/// `A⁺_{λ,X}` in its two printed forms, with the addable boxes taken from
/// `λ` (first) and from `λ ∪ X` (second).
pub fn a_plus(lam: &ColoredPartition, x: (usize, usize), n: usize) -> Result<(ThetaTerm, ThetaTerm)> {
    let j = content(lam, x).rem_euclid(n as i64) as usize;
    let (adds, rems) = addable_removable(lam, j, n);
    if !adds.contains(&x) {
        return Err(Error::Invalid(format!("{x:?} is not addable to {lam}")));
    }
    let cx = content(lam, x);
    let ux = box_weight(x);
    let h = Monomial::hbar();
    let mut common = ThetaTerm::one();
    for r in rems.iter().filter(|r| content(lam, **r) < cx) {
        let q = &ux / &box_weight(*r);
        common = common.times(&ratio(&h * &q, q));
    }
    let addable_part = |list: &[(usize, usize)]| -> ThetaTerm {
        list.iter().filter(|a| content(lam, **a) < cx).fold(ThetaTerm::one(), |acc, a| {
            let q = &ux / &box_weight(*a);
            acc.times(&ratio(&h.inv() * &q, q))
        })
    };
    let (adds_grown, _) = addable_removable(&lam.with_cell(x.0, x.1), j, n);
    Ok((common.clone().times(&addable_part(&adds)), common.times(&addable_part(&adds_grown))))
}

/// `A⁻_{λ,X}` in its two printed forms, with the removable boxes taken from
/// `λ` (first) and from `λ \ X` (second).
pub fn a_minus(lam: &ColoredPartition, x: (usize, usize), n: usize) -> Result<(ThetaTerm, ThetaTerm)> {
    let j = content(lam, x).rem_euclid(n as i64) as usize;
    let (adds, rems) = addable_removable(lam, j, n);
    if !rems.contains(&x) {
        return Err(Error::Invalid(format!("{x:?} is not removable from {lam}")));
    }
    let cx = content(lam, x);
    let ux = box_weight(x);
    let h = Monomial::hbar();
    let mut common = ThetaTerm::one();
    for a in adds.iter().filter(|a| content(lam, **a) > cx) {
        let q = &box_weight(*a) / &ux;
        common = common.times(&ratio(&h * &q, q));
    }
    let removable_part = |list: &[(usize, usize)]| -> ThetaTerm {
        list.iter().filter(|r| content(lam, **r) > cx).fold(ThetaTerm::one(), |acc, r| {
            let q = &box_weight(*r) / &ux;
            acc.times(&ratio(&h.inv() * &q, q))
        })
    };
    let (_, rems_shrunk) = addable_removable(&lam.without_cell(x.0, x.1), j, n);
    Ok((common.clone().times(&removable_part(&rems)), common.times(&removable_part(&rems_shrunk))))
}

/// `C± = (pħ^{±1};p)_∞/(p;p)_∞`.
pub fn c_pm(pp: &ParamPoint) -> Result<(C, C)> {
    let p = pp.p.val;
    let h = pp.hbar();
    let pp_ = qpoch(p, p)?;
    Ok((qpoch(p * h, p)? / pp_, qpoch(p / h, p)? / pp_))
}

/// A term `coeff · δ(support/z)` acting as `[u]_m ↦ [u]_target`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaTerm {
    pub support: Monomial,
    pub coeff: C,
    pub target: i64,
}

/// Eigenvalue of `φ±_i(z)` on the basis vector `[u]^{(k)}_m` of `V^(k)(u)`.
pub fn vec_phi(i: usize, m: i64, k: usize, n: usize) -> ThetaTerm {
    let md = |a: i64| (a.rem_euclid(n as i64)) as usize;
    let base = &Monomial::var_pow(Var::T1, -(m as i32)) * &uvar();
    let z = zvar();
    if md(i as i64 + m) == k {
        ratio(&base / &(&Monomial::hbar() * &z), &base / &z)
    } else if md(i as i64 + m + 1) == k {
        ratio(&(&base * &Monomial::var(Var::T2)) / &z, &base / &(&Monomial::var(Var::T1) * &z))
    } else {
        ThetaTerm::one()
    }
}

/// `x⁺_i(z)[u]_m = C₊ δ(t1^{-m}u/(t1 z)) [u]_{m+1}` when `i + m + 1 ≡ k`.
pub fn vec_x_plus(pp: &ParamPoint, i: usize, m: i64, k: usize, n: usize) -> Result<Option<DeltaTerm>> {
    if (i as i64 + m + 1).rem_euclid(n as i64) as usize != k {
        return Ok(None);
    }
    let support = &Monomial::var_pow(Var::T1, -(m as i32) - 1) * &uvar();
    Ok(Some(DeltaTerm { support, coeff: c_pm(pp)?.0, target: m + 1 }))
}

/// `x⁻_i(z)[u]_m = C₋ δ(t1^{-m}u/z) [u]_{m-1}` when `i + m ≡ k`.
pub fn vec_x_minus(pp: &ParamPoint, i: usize, m: i64, k: usize, n: usize) -> Result<Option<DeltaTerm>> {
    if (i as i64 + m).rem_euclid(n as i64) as usize != k {
        return Ok(None);
    }
    let support = &Monomial::var_pow(Var::T1, -(m as i32)) * &uvar();
    Ok(Some(DeltaTerm { support, coeff: c_pm(pp)?.1, target: m - 1 }))
}

/// `Σ_j (|R_j| - |A_j|) = -1`.
pub fn k_eigen_check(lam: &ColoredPartition, n: usize) -> bool {
    (0..n).map(|j| weight(lam, j, n)).sum::<i32>() == -1
}

/// Relative difference of the two printed forms of `A±` at a parameter
/// point; `z` is irrelevant, `u` is `pp.u[0]`.
pub fn dual_form_residual(pp: &ParamPoint, pair: &(ThetaTerm, ThetaTerm)) -> Result<f64> {
    let a = pair.0.eval(pp, &[C::new(0.0, 0.0)])?;
    let b = pair.1.eval(pp, &[C::new(0.0, 0.0)])?;
    Ok((a - b).norm() / a.norm().max(1e-300))
}
