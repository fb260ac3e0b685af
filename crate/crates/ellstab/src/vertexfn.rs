//! K-theoretic vertex functions as truncated Jackson-integral series, their
//! normalization, and the Bethe equations governing the `p → 1` limit.
//!
//! A vertex series is indexed by per-box degrees `d_a ≥ 0` of the fixed point
//! `μ` that fixes the integration cycle `x_a = φ^μ_a p^{d_a}`. Coefficients are
//! computed from the closed form with finite Pochhammer symbols; the module
//! also provides an independent per-term evaluation from infinite products.
//!
//! Factors that vanish exactly at the fixed point (for example `(1;p)_d`) are
//! tracked symbolically through [`Tracked`], so zero coefficients are exact and
//! cancelling zeros never produce `0/0`.

use std::ops::{Div, Mul};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{fixed_points, DegreeRule, FixedPoint};
use crate::envelopes::{kahler_plain, ContourOpts, Envelope, Variant};
use crate::numeric::{Monomial, ParamPoint, Var};
use crate::scalars::mu_ope;
use crate::{Error, Result};

/// Largest number of degree vectors a single series may hold.
pub const TERM_BUDGET: usize = 200_000;

/// A complex number times `0^order`; `order < 0` is a pole.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tracked {
    pub value: C,
    pub order: i32,
}

impl Tracked {
    pub fn one() -> Self {
        Self { value: C::new(1.0, 0.0), order: 0 }
    }

    pub fn from_value(value: C) -> Self {
        Self { value, order: 0 }
    }

    /// The value, `0` for a zero and an error for a pole.
    pub fn resolve(self) -> Result<C> {
        match self.order {
            0 => Ok(self.value),
            o if o > 0 => Ok(C::new(0.0, 0.0)),
            o => Err(Error::Singular(format!("pole of order {}", -o))),
        }
    }
}

impl Mul for Tracked {
    type Output = Tracked;
    fn mul(self, o: Tracked) -> Tracked {
        Tracked { value: self.value * o.value, order: self.order + o.order }
    }
}

impl Div for Tracked {
    type Output = Tracked;
    fn div(self, o: Tracked) -> Tracked {
        Tracked { value: self.value / o.value, order: self.order - o.order }
    }
}

/// `(M;p)_∞` with the factor `1 - p^0` counted as a zero instead of multiplied.
pub fn qpoch_inf_tracked(m: &Monomial, pp: &ParamPoint) -> Tracked {
    let zero_at = m.p_power().filter(|&k| k <= 0).map(|k| (-k) as usize);
    let z = pp.eval_mono(m, &[]);
    let lp = pp.p.val.norm().ln();
    let extra = if z.norm() > 1.0 { (z.norm().ln() / -lp).ceil() as usize } else { 0 };
    let one = C::new(1.0, 0.0);
    let mut out = Tracked::one();
    let mut zq = z;
    for j in 0..pp.trunc + extra {
        if zero_at == Some(j) {
            out.order += 1;
        } else {
            out.value *= one - zq;
        }
        zq *= pp.p.val;
    }
    out
}

/// Finite Pochhammer `(M;p)_e` for any integer `e`, with exact zeros tracked.
pub fn qpoch_fin_tracked(m: &Monomial, e: i32, pp: &ParamPoint) -> Tracked {
    let z = pp.eval_mono(m, &[]);
    let one = C::new(1.0, 0.0);
    let pk = m.p_power();
    let factor = |k: i32| -> Tracked {
        if pk == Some(-k) {
            Tracked { value: one, order: 1 }
        } else {
            Tracked::from_value(one - z * pp.p.val.powi(k))
        }
    };
    let mut out = Tracked::one();
    if e >= 0 {
        for k in 0..e {
            out = out * factor(k);
        }
    } else {
        for k in e..0 {
            out = out / factor(k);
        }
    }
    out
}

/// How the `p`-power of the Kähler prefactor is formed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum KahlerExponent {
    /// `2 - 2v_k + v_{k+1} - 2w_k`, as in the closed form.
    #[default]
    Printed,
    /// `2 - 2v_k + (v_{k-1} + v_{k+1})/2 - 2w_k`, an exploratory symmetric variant.
    Symmetrized,
}

impl KahlerExponent {
    /// Doubled `p` exponent for color `k`.
    fn doubled(self, k: usize, v: &[usize], w: &[usize]) -> i32 {
        let n = v.len();
        let (vk, wk) = (v[k] as i32, w[k] as i32);
        let up = v[(k + 1) % n] as i32;
        let down = v[(k + n - 1) % n] as i32;
        match self {
            KahlerExponent::Printed => 2 * (2 - 2 * vk + up - 2 * wk),
            KahlerExponent::Symmetrized => 2 * (2 - 2 * vk - 2 * wk) + up + down,
        }
    }
}

/// Framing weights used in the `d`-dependent framing factors.
///
/// Since `φ^μ_a` contains `u_r`, the unshifted factor of a root box is
/// `(1;p)_d`, so only `d = 0` survives on the diagonal of the root boxes.
/// `InverseHbar` uses `ħ^{-1}u_r` there, turning the root factor into
/// `(ħ;p)_d/(p;p)_d` as for the usual K-theoretic vertex functions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum FramingShift {
    #[default]
    None,
    InverseHbar,
}

impl FramingShift {
    fn weight(self, r: usize) -> Monomial {
        let u = Monomial::var(Var::U(r as u16));
        match self {
            FramingShift::None => u,
            FramingShift::InverseHbar => &u * &hb().inv(),
        }
    }
}

/// Options for building a vertex series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VertexOpts {
    pub exponent: KahlerExponent,
    pub framing: FramingShift,
    pub rule: DegreeRule,
    pub contour: ContourOpts,
}

impl Default for VertexOpts {
    fn default() -> Self {
        Self {
            exponent: KahlerExponent::Printed,
            framing: FramingShift::None,
            rule: DegreeRule::Hat,
            contour: ContourOpts::default(),
        }
    }
}

fn hb() -> Monomial {
    Monomial::hbar()
}

fn pm(k: i32) -> Monomial {
    Monomial::var_pow(Var::P, k)
}

fn t2() -> Monomial {
    Monomial::var(Var::T2)
}

/// Box data of a fixed point: colors and unshifted weights `φ_a`.
struct Boxes {
    color: Vec<usize>,
    phi: Vec<Monomial>,
    /// Framings `(index, color)`.
    framings: Vec<(usize, usize)>,
}

impl Boxes {
    fn new(mu: &FixedPoint) -> Self {
        let bs = mu.boxes();
        Self {
            color: bs.iter().map(|&a| mu.color(a)).collect(),
            phi: bs.iter().map(|&a| mu.phi_weight(a)).collect(),
            framings: (0..mu.parts.len()).map(|r| (r, mu.framing_color(r))).collect(),
        }
    }

    fn framing_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.color.len()).flat_map(move |a| {
            self.framings.iter().filter(move |(_, c)| *c == self.color[a]).map(move |&(r, _)| (a, r))
        })
    }

    /// Ordered pairs `(a, b)` with `c_a + 1 ≡ c_b`.
    fn adjacent_pairs(&self, n: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let m = self.color.len();
        (0..m).flat_map(move |a| (0..m).filter(move |&b| (self.color[a] + 1) % n == self.color[b]).map(move |b| (a, b)))
    }

    /// Ordered pairs `a ≠ b` of equal color.
    fn same_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let m = self.color.len();
        (0..m).flat_map(move |a| (0..m).filter(move |&b| b != a && self.color[a] == self.color[b]).map(move |b| (a, b)))
    }
}

fn mono(m: &Monomial, pp: &ParamPoint) -> Tracked {
    Tracked::from_value(pp.eval_mono(m, &[]))
}

/// The bracketed product of the integrand (everything except `μ(u)` and the
/// envelope) at `x_a = φ^μ_a p^{d_a}`, from infinite products.
pub fn integrand_bracket(pp: &ParamPoint, mu: &FixedPoint, d: &[i32], shift: FramingShift) -> Result<Tracked> {
    let bx = Boxes::new(mu);
    if d.len() != bx.phi.len() {
        return Err(Error::Invalid(format!("{} degrees for {} boxes", d.len(), bx.phi.len())));
    }
    if pp.u.len() < bx.framings.len() {
        return Err(Error::Invalid("parameter point has too few framing weights".into()));
    }
    let x: Vec<Monomial> = bx.phi.iter().zip(d).map(|(f, &k)| f * &pm(k)).collect();
    let mut acc = Tracked::one();
    for (a, r) in bx.framing_pairs() {
        let y = &shift.weight(r) / &x[a];
        acc = acc * mono(&x[a], pp) * qpoch_inf_tracked(&(&pm(1) * &y), pp) / qpoch_inf_tracked(&(&hb() * &y), pp);
    }
    for (a, b) in bx.adjacent_pairs(mu.n) {
        let y = &(&t2() * &x[b]) / &x[a];
        let num = qpoch_inf_tracked(&(&(&pm(1) * &hb().inv()) * &y), pp);
        acc = acc * mono(&x[a].inv(), pp) * num / qpoch_inf_tracked(&y, pp);
    }
    for (a, b) in bx.same_pairs() {
        let y = &x[a] / &x[b];
        let pre = &(&x[a] * &x[b]) * &hb().inv_sqrt();
        acc = acc * mono(&pre, pp) * qpoch_inf_tracked(&(&hb() * &y), pp) / qpoch_inf_tracked(&(&pm(1) * &y), pp);
    }
    Ok(acc)
}

/// Normalization `N_μ = μ(u) · bracket|_{x = φ^μ}`.
///
/// At a fixed point the bracket has exact zeros and poles from neighbouring
/// boxes; they are returned in [`Tracked::order`] with the finite remainder in
/// [`Tracked::value`].
pub fn n_mu(pp: &ParamPoint, mu: &FixedPoint) -> Result<Tracked> {
    let weights: Vec<_> = (0..mu.parts.len()).map(|r| (mu.framing_color(r), pp.u[r])).collect();
    let pre = mu_ope(pp, &weights)?;
    Ok(Tracked::from_value(pre) * integrand_bracket(pp, mu, &vec![0; mu.size()], FramingShift::None)?)
}

/// Per-color sums `Σ_{c_a ≡ k} d_a`.
fn color_degrees(mu: &FixedPoint, d: &[i32]) -> Vec<i32> {
    let mut s = vec![0; mu.n];
    for (a, &k) in mu.boxes().iter().zip(d) {
        s[mu.color(*a)] += k;
    }
    s
}

/// `Π_k 𝔷_k^{-Σ_{c≡k} d}`: the quasi-periodicity multiplier of the hatted envelope.
pub fn qp_multiplier(pp: &ParamPoint, mu: &FixedPoint, d: &[i32]) -> C {
    let m = color_degrees(mu, d)
        .iter()
        .enumerate()
        .fold(Monomial::one(), |acc, (k, &s)| &acc * &Monomial::var_pow(Var::Z(k as u16), -s));
    pp.eval_mono(&m, &[])
}

/// The `d`-dependent part of the closed-form coefficient (all factors except
/// the envelope restriction).
pub fn closed_form_factor(pp: &ParamPoint, mu: &FixedPoint, d: &[i32], opts: &VertexOpts) -> Result<Tracked> {
    let bx = Boxes::new(mu);
    if d.len() != bx.phi.len() {
        return Err(Error::Invalid(format!("{} degrees for {} boxes", d.len(), bx.phi.len())));
    }
    let (v, w) = (mu.v(), mu.w());
    let mut kahler = Monomial::one();
    for (k, s) in color_degrees(mu, d).into_iter().enumerate() {
        let base = Monomial::from_doubled([
            (Var::T1, 2 * w[k] as i32),
            (Var::T2, 2 * w[k] as i32),
            (Var::P, opts.exponent.doubled(k, &v, &w)),
            (Var::Z(k as u16), 2),
        ]);
        kahler = &kahler * &base.pow(-s);
    }
    let ph = &pm(1) * &hb().inv();
    let mut acc = mono(&kahler, pp);
    for (a, r) in bx.framing_pairs() {
        let y = &bx.phi[a] / &opts.framing.weight(r);
        acc = acc * qpoch_fin_tracked(&y, d[a], pp) / qpoch_fin_tracked(&(&ph * &y), d[a], pp);
    }
    for (a, b) in bx.adjacent_pairs(mu.n) {
        let y = &(&t2() * &bx.phi[b]) / &bx.phi[a];
        let e = d[b] - d[a];
        acc = acc * qpoch_fin_tracked(&y, e, pp) / qpoch_fin_tracked(&(&ph * &y), e, pp);
    }
    for (a, b) in bx.same_pairs() {
        let y = &bx.phi[a] / &bx.phi[b];
        let e = d[a] - d[b];
        acc = acc * qpoch_fin_tracked(&(&pm(1) * &y), e, pp) / qpoch_fin_tracked(&(&hb() * &y), e, pp);
    }
    Ok(acc)
}

/// All degree vectors of length `m` with non-negative entries and total at
/// most `max_degree`, ordered by total degree then lexicographically.
pub fn degree_vectors(m: usize, max_degree: usize) -> Vec<Vec<i32>> {
    let mut out = Vec::new();
    for total in 0..=max_degree {
        let mut cur = vec![0i32; m];
        compositions(&mut cur, 0, total as i32, &mut out);
    }
    out
}

fn compositions(cur: &mut Vec<i32>, i: usize, left: i32, out: &mut Vec<Vec<i32>>) {
    if i == cur.len() {
        if left == 0 {
            out.push(cur.clone());
        }
        return;
    }
    for k in (0..=left).rev() {
        cur[i] = k;
        compositions(cur, i + 1, left - k, out);
    }
    cur[i] = 0;
}

/// Number of degree vectors `C(m + D, D)`.
pub fn term_count(m: usize, max_degree: usize) -> usize {
    (1..=max_degree).fold(1usize, |acc, k| acc.saturating_mul(m + k) / k)
}

/// Truncated vertex function `V_{λ,μ}`.
#[derive(Clone, Debug)]
pub struct VertexSeries {
    pub lambda: FixedPoint,
    pub mu: FixedPoint,
    pub max_degree: usize,
    pub exponent: KahlerExponent,
    pub framing: FramingShift,
    /// `Ŝtab(λ)|_μ`, the coefficient at `d = 0`.
    pub stab_mu: C,
    /// `(d, coefficient)` in the order of [`degree_vectors`].
    pub coefficients: Vec<(Vec<i32>, C)>,
}

impl VertexSeries {
    /// Builds all coefficients with `Σ d_a ≤ max_degree`.
    pub fn new(
        pp: &ParamPoint,
        lambda: &FixedPoint,
        mu: &FixedPoint,
        max_degree: usize,
        opts: &VertexOpts,
    ) -> Result<Self> {
        let count = term_count(mu.size(), max_degree);
        if count > TERM_BUDGET {
            return Err(Error::Budget(format!("{count} degree vectors exceed {TERM_BUDGET}")));
        }
        let stab_mu = restrict_stab(pp, lambda, mu, None, opts)?;
        let coefficients = degree_vectors(mu.size(), max_degree)
            .into_par_iter()
            .map(|d| {
                let c = closed_form_factor(pp, mu, &d, opts)?.resolve()? * stab_mu;
                Ok((d, c))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            lambda: lambda.clone(),
            mu: mu.clone(),
            max_degree,
            exponent: opts.exponent,
            framing: opts.framing,
            stab_mu,
            coefficients,
        })
    }

    /// Coefficient at `d`, if inside the truncation.
    pub fn coefficient(&self, d: &[i32]) -> Option<C> {
        self.coefficients.iter().find(|(k, _)| k.as_slice() == d).map(|(_, c)| *c)
    }

    /// Sum of all coefficients; the Kähler variables enter through the point.
    pub fn sum(&self) -> C {
        self.coefficients.iter().map(|(_, c)| c).sum()
    }

    /// Largest relative difference between each coefficient and
    /// [`jackson_term`], over the coefficients that do not vanish exactly.
    pub fn oracle_residual(&self, pp: &ParamPoint) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (d, c) in &self.coefficients {
            let o = jackson_term(pp, &self.mu, d, self.framing, self.stab_mu)?;
            let scale = c.norm().max(o.norm());
            if scale == 0.0 {
                continue;
            }
            worst = worst.max((c - o).norm() / scale);
        }
        Ok(worst)
    }
}

/// `Ŝtab(λ;𝔷)` restricted to `x_a = φ^μ_a p^{shift_a}`.
pub fn restrict_stab(
    pp: &ParamPoint,
    lambda: &FixedPoint,
    mu: &FixedPoint,
    shift: Option<&[i32]>,
    opts: &VertexOpts,
) -> Result<C> {
    let env = Envelope::new(lambda, Variant::Hat, &kahler_plain(lambda.n), opts.rule)?;
    env.restrict(pp, mu, shift, &opts.contour)
}

/// One term of the Jackson sum computed directly: the integrand at
/// `x_a = φ^μ_a p^{d_a}` divided by its value at `d = 0`, with the envelope
/// moved back to `μ` by its quasi-periodicity.
///
/// The `p^{d_a}` weight of the measure `d_p x_a` is not included; this is the
/// normalization under which the `d = 0` coefficient is the envelope itself.
pub fn jackson_term(pp: &ParamPoint, mu: &FixedPoint, d: &[i32], shift: FramingShift, stab_mu: C) -> Result<C> {
    let zero = vec![0; d.len()];
    let ratio = (integrand_bracket(pp, mu, d, shift)? / integrand_bracket(pp, mu, &zero, shift)?).resolve()?;
    Ok(ratio * qp_multiplier(pp, mu, d) * stab_mu)
}

/// Error of `Ŝtab|_{φ p^d} = 𝔷^{-Σd} Ŝtab|_φ`, both restrictions taken along
/// the same direction of approach.
///
/// The error is relative to the larger side, or to `|Ŝtab(λ)|_λ|` when that
/// is larger, so restrictions that vanish by support are measured at the
/// scale of the envelope rather than of rounding noise.
pub fn quasi_periodicity_residual(
    pp: &ParamPoint,
    lambda: &FixedPoint,
    mu: &FixedPoint,
    d: &[i32],
    opts: &VertexOpts,
) -> Result<f64> {
    let shifted = restrict_stab(pp, lambda, mu, Some(d), opts)?;
    let base = restrict_stab(pp, lambda, mu, None, opts)? * qp_multiplier(pp, mu, d);
    let diag = restrict_stab(pp, lambda, lambda, None, opts)?;
    let scale = shifted.norm().max(base.norm()).max(diag.norm());
    Ok(if scale == 0.0 { 0.0 } else { (shifted - base).norm() / scale })
}

/// Data of the Bethe equations of the cyclic quiver.
#[derive(Clone, Debug, PartialEq)]
pub struct BetheSystem {
    pub v: Vec<usize>,
    /// Framing weights grouped by color.
    pub u: Vec<Vec<C>>,
    pub t1: C,
    pub t2: C,
    pub z: Vec<C>,
}

impl BetheSystem {
    /// Takes `t1, t2, 𝔷` from the point and assigns its framing weights to
    /// colors in order: the first `w_0` to color 0, and so on.
    pub fn from_point(pp: &ParamPoint, v: &[usize], w: &[usize]) -> Result<Self> {
        if v.len() != pp.n || w.len() != pp.n {
            return Err(Error::Invalid("v and w need one entry per color".into()));
        }
        let total: usize = w.iter().sum();
        if pp.u.len() < total {
            return Err(Error::Invalid("parameter point has too few framing weights".into()));
        }
        let mut it = pp.u.iter();
        let u = w.iter().map(|&k| it.by_ref().take(k).map(|s| s.val).collect()).collect();
        Ok(Self { v: v.to_vec(), u, t1: pp.t1.val, t2: pp.t2.val, z: pp.z.iter().map(|s| s.val).collect() })
    }

    pub fn n(&self) -> usize {
        self.v.len()
    }

    fn hbar(&self) -> C {
        self.t1 * self.t2
    }

    fn unknowns(&self) -> usize {
        self.v.iter().sum()
    }

    /// Numerator and denominator of the left side for root `i` of color `k`.
    fn sides(&self, x: &[Vec<C>], k: usize, i: usize) -> (C, C) {
        let n = self.n();
        let (one, h) = (C::new(1.0, 0.0), self.hbar());
        let xi = x[k][i];
        let (mut num, mut den) = (one, one);
        for &u in &self.u[k] {
            num *= one - u / xi;
            den *= one - h * u / xi;
        }
        for &y in &x[(k + 1) % n] {
            num *= one - y / (self.t1 * xi);
            den *= one - self.t2 * y / xi;
        }
        for &y in &x[(k + n - 1) % n] {
            num *= one - self.t2 * xi / y;
            den *= one - xi / (self.t1 * y);
        }
        for (m, &y) in x[k].iter().enumerate() {
            if m != i {
                num *= one - h * y / xi;
                den *= one - y / (h * xi);
            }
        }
        (num, den)
    }

    fn rhs(&self, k: usize) -> C {
        self.z[k] * self.hbar().powi(self.v[k] as i32 - 1)
    }

    /// `LHS − 𝔷_k ħ^{v_k − 1}` for every color `k` and root `i`, in color-major order.
    pub fn residual(&self, x: &[Vec<C>]) -> Vec<C> {
        let mut out = Vec::with_capacity(self.unknowns());
        for k in 0..self.n() {
            for i in 0..self.v[k] {
                let (num, den) = self.sides(x, k, i);
                out.push(num / den - self.rhs(k));
            }
        }
        out
    }

    /// Cleared form `num − rhs · den`, smooth where the left side has poles.
    fn cleared(&self, x: &[Vec<C>]) -> Vec<C> {
        let mut out = Vec::with_capacity(self.unknowns());
        for k in 0..self.n() {
            for i in 0..self.v[k] {
                let (num, den) = self.sides(x, k, i);
                out.push(num - self.rhs(k) * den);
            }
        }
        out
    }

    fn unflatten(&self, y: &DVector<C>) -> Vec<Vec<C>> {
        let mut it = y.iter();
        self.v.iter().map(|&k| it.by_ref().take(k).map(|&yi| C::new(1.0, 0.0) / yi).collect()).collect()
    }

    /// Newton step in the inverse roots `1/x`, in which the one-variable case is linear.
    fn newton_step(&self, y: &DVector<C>) -> Option<DVector<C>> {
        let m = y.len();
        let f = DVector::from_vec(self.cleared(&self.unflatten(y)));
        let mut jac = DMatrix::<C>::zeros(m, m);
        for j in 0..m {
            let h = 1e-6 * y[j].norm().max(1e-3);
            let mut yp = y.clone();
            let mut ym = y.clone();
            yp[j] += h;
            ym[j] -= h;
            let fp = self.cleared(&self.unflatten(&yp));
            let fm = self.cleared(&self.unflatten(&ym));
            for i in 0..m {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        jac.lu().solve(&f)
    }

    fn max_residual(&self, x: &[Vec<C>]) -> f64 {
        self.residual(x).iter().map(|r| r.norm()).fold(0.0, f64::max)
    }
}

/// Outcome of [`bethe_solve`].
#[derive(Clone, Debug, PartialEq)]
pub struct BetheSolution {
    /// Roots grouped by color.
    pub x: Vec<Vec<C>>,
    /// Largest `|LHS − RHS|`.
    pub residual: f64,
    /// Newton iterations of the returned run.
    pub iterations: usize,
    pub restarts: usize,
    pub converged: bool,
}

/// Settings of the damped Newton iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonOpts {
    pub max_iter: usize,
    pub max_restarts: usize,
    pub tol: f64,
    /// Log-scale of the random perturbation of the starting roots.
    pub spread: f64,
}

impl Default for NewtonOpts {
    fn default() -> Self {
        Self { max_iter: 60, max_restarts: 20, tol: 1e-12, spread: 0.3 }
    }
}

/// Solves the Bethe equations by damped Newton iteration from randomized
/// starts near the `φ`-weights of the fixed points of `M(v, w)`.
///
/// Non-convergence is reported through [`BetheSolution::converged`].
pub fn bethe_solve(sys: &BetheSystem, w: &[usize], seed: u64, opts: &NewtonOpts) -> Result<BetheSolution> {
    let m = sys.unknowns();
    if m == 0 {
        return Ok(BetheSolution {
            x: vec![Vec::new(); sys.n()],
            residual: 0.0,
            iterations: 0,
            restarts: 0,
            converged: true,
        });
    }
    let starts = start_points(sys, w)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<BetheSolution> = None;
    for restart in 0..opts.max_restarts {
        let base = &starts[restart % starts.len()];
        let x0: Vec<Vec<C>> = base
            .iter()
            .map(|col| {
                col.iter()
                    .map(|&x| {
                        x * C::new(rng.gen_range(-opts.spread..opts.spread), rng.gen_range(-opts.spread..opts.spread))
                            .exp()
                    })
                    .collect()
            })
            .collect();
        let run = newton_run(sys, &x0, opts, restart);
        let better = best.as_ref().map_or(true, |b| run.residual < b.residual);
        let done = run.converged;
        if better {
            best = Some(run);
        }
        if done {
            break;
        }
    }
    Ok(best.expect("at least one restart"))
}

fn newton_run(sys: &BetheSystem, x0: &[Vec<C>], opts: &NewtonOpts, restarts: usize) -> BetheSolution {
    let mut y = DVector::from_vec(x0.iter().flatten().map(|&x| C::new(1.0, 0.0) / x).collect::<Vec<_>>());
    let merit = |y: &DVector<C>| -> f64 {
        let v = sys.cleared(&sys.unflatten(y)).iter().map(|r| r.norm_sqr()).sum::<f64>();
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut f = merit(&y);
    let mut iterations = 0;
    for it in 0..opts.max_iter {
        iterations = it + 1;
        let Some(step) = sys.newton_step(&y) else { break };
        let mut lam = 1.0;
        let mut accepted = false;
        while lam > 1e-4 {
            let cand = &y - &step * C::new(lam, 0.0);
            let fc = merit(&cand);
            if fc < f || fc == 0.0 {
                y = cand;
                f = fc;
                accepted = true;
                break;
            }
            lam *= 0.5;
        }
        let x = sys.unflatten(&y);
        if sys.max_residual(&x) < opts.tol || !accepted {
            break;
        }
    }
    let x = sys.unflatten(&y);
    let residual = sys.max_residual(&x);
    let residual = if residual.is_finite() { residual } else { f64::INFINITY };
    BetheSolution { x, residual, iterations, restarts, converged: residual < opts.tol.max(1e-10) }
}

/// Chern-root values `φ^μ_a` grouped by color, one set per fixed point.
fn start_points(sys: &BetheSystem, w: &[usize]) -> Result<Vec<Vec<Vec<C>>>> {
    let n = sys.n();
    let fps = fixed_points(&sys.v, w, n)?;
    let u_flat: Vec<C> = sys.u.iter().flatten().copied().collect();
    let out: Vec<Vec<Vec<C>>> = fps
        .iter()
        .map(|fp| {
            let mut cols = vec![Vec::new(); n];
            for a in fp.boxes() {
                let val = u_flat[a.r] * sys.t1.powi(1 - a.y as i32) * sys.t2.powi(1 - a.x as i32);
                cols[fp.color(a)].push(val);
            }
            cols
        })
        .collect();
    if out.is_empty() {
        return Err(Error::Invalid(format!("M(v, w) has no fixed points for v = {:?}", sys.v)));
    }
    Ok(out)
}

/// Bethe equations of the Jordan quiver (`gl_1`): for each root `x_a`,
/// `Π_j (1 − u_j/x_a)/(1 − ħu_j/x_a) · Π_{b≠a} (x_a − ħ^{-1}x_b)(x_a − t1x_b)(x_a − t2x_b)
/// / ((x_a − ħx_b)(x_a − t1^{-1}x_b)(x_a − t2^{-1}x_b)) − 𝔷`.
pub fn gl1_bethe_residual(u: &[C], t1: C, t2: C, z: C, x: &[C]) -> Vec<C> {
    let one = C::new(1.0, 0.0);
    let h = t1 * t2;
    x.iter()
        .enumerate()
        .map(|(a, &xa)| {
            let mut lhs = u.iter().map(|&uj| (one - uj / xa) / (one - h * uj / xa)).product::<C>();
            for (b, &xb) in x.iter().enumerate() {
                if b != a {
                    lhs *= (xa - xb / h) * (xa - t1 * xb) * (xa - t2 * xb)
                        / ((xa - h * xb) * (xa - xb / t1) * (xa - xb / t2));
                }
            }
            lhs - z
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::ColoredPartition;
    use crate::numeric::{qpoch, Annuli};

    fn fp(parts: &[(usize, &[usize])]) -> FixedPoint {
        FixedPoint::new(3, parts.iter().map(|(k, r)| ColoredPartition::new(r.to_vec(), *k).unwrap()).collect()).unwrap()
    }

    fn point(seed: u64) -> ParamPoint {
        ParamPoint::sample(3, 3, seed, &Annuli::default()).unwrap()
    }

    fn close(a: C, b: C, tol: f64) -> bool {
        (a - b).norm() <= tol * a.norm().max(b.norm()).max(1e-300)
    }

    #[test]
    fn tracked_finite_pochhammer_zeros() {
        let pp = point(1);
        let one = Monomial::one();
        assert_eq!(qpoch_fin_tracked(&one, 2, &pp).resolve().unwrap(), C::new(0.0, 0.0));
        let neg = qpoch_fin_tracked(&one, -2, &pp);
        assert_eq!(neg.order, 0);
        let p = pp.p.val;
        let want = C::new(1.0, 0.0) / ((1.0 - 1.0 / p) * (1.0 - 1.0 / (p * p)));
        assert!(close(neg.value, want, 1e-13));
        assert_eq!(qpoch_fin_tracked(&pm(-1), 3, &pp).order, 1);
    }

    #[test]
    fn tracked_infinite_pochhammer_matches_untracked() {
        let pp = point(2);
        let m = Monomial::var(Var::T1) * Monomial::var(Var::U(0));
        let t = qpoch_inf_tracked(&m, &pp);
        assert_eq!(t.order, 0);
        assert!(close(t.value, qpoch(pp.eval_mono(&m, &[]), pp.p.val).unwrap(), 1e-13));
        assert_eq!(qpoch_inf_tracked(&pm(-2), &pp).order, 1);
        assert_eq!(qpoch_inf_tracked(&pm(1), &pp).order, 0);
    }

    #[test]
    fn degree_vectors_count_and_order() {
        let ds = degree_vectors(3, 2);
        assert_eq!(ds.len(), term_count(3, 2));
        assert_eq!(ds.len(), 10);
        assert_eq!(ds[0], vec![0, 0, 0]);
        assert!(ds.windows(2).all(|w| w[0].iter().sum::<i32>() <= w[1].iter().sum::<i32>()));
    }

    #[test]
    fn n_mu_of_empty_point_is_mu_of_u() {
        let pp = point(3);
        let mu = fp(&[(0, &[]), (1, &[])]);
        let n = n_mu(&pp, &mu).unwrap();
        let want = mu_ope(&pp, &[(0, pp.u[0]), (1, pp.u[1])]).unwrap();
        assert_eq!(n.order, 0);
        assert!(close(n.value, want, 1e-14));
    }

    #[test]
    fn n_mu_single_box_is_one_framing_factor() {
        let pp = point(4);
        let mu = fp(&[(0, &[1])]);
        let n = n_mu(&pp, &mu).unwrap();
        let u = pp.u[0].val;
        let p = pp.p.val;
        let hand = mu_ope(&pp, &[(0, pp.u[0])]).unwrap() * u * qpoch(p, p).unwrap() / qpoch(pp.hbar(), p).unwrap();
        assert_eq!(n.order, 0);
        assert!(close(n.value, hand, 1e-12));
    }

    #[test]
    fn degree_zero_is_the_restriction() {
        let pp = point(5);
        let lam = fp(&[(0, &[1, 1])]);
        for mu in fixed_points(&lam.v(), &lam.w(), 3).unwrap() {
            let s = VertexSeries::new(&pp, &lam, &mu, 0, &VertexOpts::default()).unwrap();
            assert_eq!(s.coefficients.len(), 1);
            let r = restrict_stab(&pp, &lam, &mu, None, &VertexOpts::default()).unwrap();
            assert!(close(s.coefficients[0].1, r, 1e-12));
        }
    }

    #[test]
    fn root_box_degree_forces_zero() {
        let pp = point(6);
        let mu = fp(&[(0, &[2])]);
        let f = closed_form_factor(&pp, &mu, &[1, 0], &VertexOpts::default()).unwrap();
        assert!(f.order > 0);
    }

    #[test]
    fn closed_form_matches_jackson_terms() {
        let pp = point(7);
        for (lam, d) in [
            (fp(&[(0, &[1])]), 3),
            (fp(&[(0, &[2])]), 3),
            (fp(&[(0, &[1, 1])]), 3),
            (fp(&[(0, &[2, 1])]), 2),
            (fp(&[(0, &[1]), (1, &[1])]), 2),
        ] {
            for mu in fixed_points(&lam.v(), &lam.w(), 3).unwrap() {
                for framing in [FramingShift::None, FramingShift::InverseHbar] {
                    let opts = VertexOpts { framing, ..VertexOpts::default() };
                    let s = VertexSeries::new(&pp, &lam, &mu, d, &opts).unwrap();
                    let r = s.oracle_residual(&pp).unwrap();
                    assert!(r < 1e-10, "{lam} at {mu}, {framing:?}: {r}");
                }
            }
        }
    }

    #[test]
    fn symmetrized_exponent_disagrees_with_integrand() {
        let pp = point(8);
        let lam = fp(&[(0, &[2])]);
        let opts = VertexOpts {
            exponent: KahlerExponent::Symmetrized,
            framing: FramingShift::InverseHbar,
            ..VertexOpts::default()
        };
        let mu = lam.clone();
        let s = VertexSeries::new(&pp, &lam, &mu, 2, &opts).unwrap();
        assert!(s.oracle_residual(&pp).unwrap() > 1e-6);
    }

    #[test]
    fn unshifted_root_factor_truncates_the_series() {
        let pp = point(13);
        let mu = fp(&[(0, &[1])]);
        let s = VertexSeries::new(&pp, &mu, &mu, 3, &VertexOpts::default()).unwrap();
        assert!(s.coefficients[1..].iter().all(|(_, c)| *c == C::new(0.0, 0.0)));
    }

    #[test]
    fn shifted_single_box_is_the_basic_hypergeometric_series() {
        let pp = point(14);
        let mu = fp(&[(0, &[1])]);
        let opts = VertexOpts { framing: FramingShift::InverseHbar, ..VertexOpts::default() };
        let s = VertexSeries::new(&pp, &mu, &mu, 4, &opts).unwrap();
        let (h, p, z) = (pp.hbar(), pp.p.val, pp.z[0].val);
        // w = v = (1,0,0): the Kähler base is ħ p^{-2} 𝔷_0.
        let q = h * z / (p * p);
        for (d, c) in &s.coefficients {
            let k = d[0];
            let hand =
                crate::numeric::qpoch_fin(h, p, k).unwrap() / crate::numeric::qpoch_fin(p, p, k).unwrap() * q.powi(-k);
            assert!(close(*c, hand * s.stab_mu, 1e-12), "d = {k}");
        }
    }

    #[test]
    fn quasi_periodicity_of_hatted_envelope() {
        let pp = point(9);
        let lam = fp(&[(0, &[2, 1])]);
        for mu in fixed_points(&lam.v(), &lam.w(), 3).unwrap() {
            for d in degree_vectors(mu.size(), 2) {
                let r = quasi_periodicity_residual(&pp, &lam, &mu, &d, &VertexOpts::default()).unwrap();
                assert!(r < 1e-9, "{lam} at {mu}, d = {d:?}: {r}");
            }
        }
    }

    #[test]
    fn bethe_one_variable_closed_form() {
        let pp = point(10);
        let sys = BetheSystem::from_point(&pp, &[1, 0, 0], &[1, 0, 0]).unwrap();
        let (u, h, z) = (sys.u[0][0], pp.hbar(), sys.z[0]);
        let x = u * (1.0 - h * z) / (1.0 - z);
        let r = sys.residual(&[vec![x], vec![], vec![]]);
        assert_eq!(r.len(), 1);
        assert!(r[0].norm() < 1e-12);
        let sol = bethe_solve(&sys, &[1, 0, 0], 1, &NewtonOpts::default()).unwrap();
        assert!(sol.converged && sol.iterations <= 5, "{sol:?}");
        assert!(close(sol.x[0][0], x, 1e-10));
    }

    #[test]
    fn bethe_empty_system() {
        let pp = point(11);
        let sys = BetheSystem::from_point(&pp, &[0, 0, 0], &[1, 0, 0]).unwrap();
        assert!(sys.residual(&[vec![], vec![], vec![]]).is_empty());
        assert!(bethe_solve(&sys, &[1, 0, 0], 0, &NewtonOpts::default()).unwrap().converged);
    }

    #[test]
    fn bethe_three_roots_converge() {
        for seed in 0..3 {
            let pp = point(20 + seed);
            let sys = BetheSystem::from_point(&pp, &[1, 1, 1], &[1, 0, 0]).unwrap();
            let sol = bethe_solve(&sys, &[1, 0, 0], seed, &NewtonOpts::default()).unwrap();
            assert!(sol.converged && sol.residual < 1e-10, "{sol:?}");
        }
    }

    #[test]
    fn gl1_single_root_closed_form() {
        let pp = point(12);
        let (u, z) = (pp.u[0].val, pp.z[0].val);
        let x = u * (1.0 - pp.hbar() * z) / (1.0 - z);
        let r = gl1_bethe_residual(&[u], pp.t1.val, pp.t2.val, z, &[x]);
        assert!(r[0].norm() < 1e-12);
    }
}
