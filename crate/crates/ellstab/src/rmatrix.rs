//! Elliptic dynamical R-matrices as transition matrices between hatted
//! envelopes of opposite chambers, and the dynamical Yang–Baxter check.
//!
//! A tensor factor is a single framing `(color, u)`. For a pair of factors
//! the basis of a weight block `v` is the list of pairs `(α', α'')` of
//! colored partitions with total box vector `v`.
//!
//! Chamber `C` lists the framings as `(u₁, u₂)` with `|u₁| > |u₂|`; the opposite
//! chamber `C̄` lists them as `(u₂, u₁)`. Entries of a restriction matrix are
//! restrictions of `F·Ŝtab`, where `F` is the symmetric regularizer of
//! [`regularizer`]; `F` is common to both chambers, so it cancels in the
//! transition matrix while removing the poles of `Ŝtab` at fixed points.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{partitions, ColoredPartition, DegreeRule, FixedPoint};
use crate::envelopes::{random_slots, regularizer, restrict_terms, sym_sum, ContourOpts, Envelope, Variant};
use crate::numeric::{CompiledTerm, Monomial, Nome, ParamPoint, Slot, Var};
use crate::scalars::{mu_ex, Nomes};
use crate::{Error, Result};

/// One tensor factor: a Fock space of the given color with spectral parameter `u`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Factor {
    pub color: usize,
    pub u: Slot,
}

/// A basis state of a two-factor block.
pub type PairState = (ColoredPartition, ColoredPartition);

/// How `R̄` is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Route {
    /// `M_C̄ M_C⁻¹` from restriction matrices at the fixed points.
    Restriction,
    /// Least-squares fit of `Stab_C̄ = R̄ᵀ Stab_C` as functions at random Chern roots.
    Generic,
}

/// Condition-number gate for restriction matrices.
pub const COND_LIMIT: f64 = 1e8;

/// Default cap on the dimension of a basis.
pub const BASIS_BUDGET: usize = 64;

fn box_vector(n: usize, color: usize, lam: &ColoredPartition) -> Vec<usize> {
    let mut v = vec![0; n];
    for (x, y) in lam.cells() {
        v[(color + n * 64 + x - y) % n] += 1;
    }
    v
}

/// Weight `h_i = w_i - 2v_i + v_{i-1} + v_{i+1}` of a single-framing state.
pub fn state_weight(n: usize, color: usize, lam: &ColoredPartition) -> Vec<i32> {
    let v = box_vector(n, color, lam);
    (0..n)
        .map(|i| {
            let w = i32::from(i == color);
            w - 2 * v[i] as i32 + v[(i + n - 1) % n] as i32 + v[(i + 1) % n] as i32
        })
        .collect()
}

fn partitions_upto(n_boxes: usize) -> Vec<Vec<usize>> {
    (0..=n_boxes).flat_map(partitions).collect()
}

/// Basis of the block `v` of `V(k1) ⊗ V(k2)`, ordered by `|α'|`, then partitions.
pub fn pair_states(n: usize, k1: usize, k2: usize, v: &[usize]) -> Vec<PairState> {
    let total: usize = v.iter().sum();
    let mut out = Vec::new();
    for a in partitions_upto(total) {
        let la = ColoredPartition::new(a, k1).expect("partition");
        let va = box_vector(n, k1, &la);
        if va.iter().zip(v).any(|(x, y)| x > y) {
            continue;
        }
        for b in partitions(total - la.size()) {
            let lb = ColoredPartition::new(b, k2).expect("partition");
            let vb = box_vector(n, k2, &lb);
            if va.iter().zip(&vb).map(|(x, y)| x + y).eq(v.iter().copied()) {
                out.push((la.clone(), lb));
            }
        }
    }
    out
}

fn chamber_point(base: &ParamPoint, us: [Slot; 2]) -> ParamPoint {
    let mut pp = base.clone();
    pp.u = us.to_vec();
    pp
}

fn chamber_fps(n: usize, states: &[PairState], reversed: bool) -> Result<Vec<FixedPoint>> {
    states
        .iter()
        .map(|(a, b)| {
            let parts = if reversed { vec![b.clone(), a.clone()] } else { vec![a.clone(), b.clone()] };
            FixedPoint::new(n, parts)
        })
        .collect()
}

/// Settings shared by every R-matrix computation.
#[derive(Clone, Debug)]
pub struct RSettings {
    pub variant: Variant,
    pub rule: DegreeRule,
    pub route: Route,
    pub contour: ContourOpts,
    /// Kähler arguments `z_i^{sign}`; `-1` gives the inverted arguments of the type-II kernel.
    pub kahler_sign: i32,
    pub nome: Nome,
    pub basis_budget: usize,
    pub seed: u64,
}

impl Default for RSettings {
    fn default() -> Self {
        Self {
            variant: Variant::Hat,
            rule: DegreeRule::Hat,
            route: Route::Restriction,
            contour: ContourOpts::default(),
            kahler_sign: 1,
            nome: Nome::P,
            basis_budget: BASIS_BUDGET,
            seed: 7,
        }
    }
}

impl RSettings {
    /// Settings for `R̄*`: `S̃tab` at nome `p*` with inverted Kähler arguments.
    pub fn star() -> Self {
        Self { variant: Variant::Tilde, kahler_sign: -1, nome: Nome::PStar, ..Self::default() }
    }

    fn kahler(&self, shift: &[i32]) -> Vec<Monomial> {
        shift
            .iter()
            .enumerate()
            .map(|(i, &s)| &Monomial::var_pow(Var::Z(i as u16), self.kahler_sign) * &Monomial::hbar_pow(s))
            .collect()
    }

    fn terms(&self, fp: &FixedPoint, shift: &[i32]) -> Result<Vec<crate::numeric::ThetaTerm>> {
        let env = Envelope::new(fp, self.variant, &self.kahler(shift), self.rule)?.with_nome(self.nome);
        Ok(env.terms)
    }
}

/// A restriction matrix with its basis and condition number.
#[derive(Clone, Debug)]
pub struct RestrictionMatrix {
    pub basis: Vec<FixedPoint>,
    pub m: DMatrix<C>,
    pub cond: f64,
}

fn condition(m: &DMatrix<C>) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let (mx, mn) = sv.iter().fold((0.0f64, f64::INFINITY), |(a, b), &s| (a.max(s), b.min(s)));
    if mn == 0.0 {
        f64::INFINITY
    } else {
        mx / mn
    }
}

/// `M[β,γ] = (F·Stab(β))|_γ` over the given basis of one space.
pub fn restriction_matrix(
    pp: &ParamPoint,
    basis: &[FixedPoint],
    shift: &[i32],
    set: &RSettings,
) -> Result<RestrictionMatrix> {
    if basis.len() > set.basis_budget {
        return Err(Error::Budget(format!("basis of {} states exceeds {}", basis.len(), set.basis_budget)));
    }
    let rows: Vec<Vec<C>> = basis
        .par_iter()
        .map(|fb| -> Result<Vec<C>> {
            let mut reg = regularizer(fb, set.variant);
            for f in &mut reg.factors {
                f.2 = set.nome;
            }
            let terms: Vec<_> = set.terms(fb, shift)?.into_iter().map(|t| t.times(&reg)).collect();
            basis.iter().map(|fg| restrict_terms(&terms, fb, pp, fg, None, &set.contour)).collect()
        })
        .collect::<Result<_>>()?;
    let n = basis.len();
    let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let cond = condition(&m);
    Ok(RestrictionMatrix { basis: basis.to_vec(), m, cond })
}

/// `R̄` on one weight block of `V(k1,u1) ⊗ V(k2,u2)`.
#[derive(Clone, Debug)]
pub struct PairR {
    pub states: Vec<PairState>,
    /// `r[(α, β)] = R̄^β_α`: column `β` is the image of the basis vector `β`.
    pub r: DMatrix<C>,
    /// Condition number of `M_C` (restriction route) or fit residual (generic route).
    pub diagnostic: f64,
}

/// `R̄(u1, u2; z ħ^{shift})` on the block `v`.
pub fn rbar(base: &ParamPoint, f1: Factor, f2: Factor, v: &[usize], shift: &[i32], set: &RSettings) -> Result<PairR> {
    let n = base.n;
    let states = pair_states(n, f1.color, f2.color, v);
    if states.is_empty() {
        return Err(Error::Invalid(format!("no states with box vector {v:?}")));
    }
    let pc = chamber_point(base, [f1.u, f2.u]);
    let pcb = chamber_point(base, [f2.u, f1.u]);
    let fc = chamber_fps(n, &states, false)?;
    let fcb = chamber_fps(n, &states, true)?;
    match set.route {
        Route::Restriction => {
            let mc = restriction_matrix(&pc, &fc, shift, set)?;
            if mc.cond > COND_LIMIT {
                return Err(Error::Singular(format!("restriction matrix condition number {:.3e}", mc.cond)));
            }
            let mcb = restriction_matrix(&pcb, &fcb, shift, set)?;
            let inv = mc.m.clone().try_inverse().ok_or_else(|| Error::Singular("restriction matrix".into()))?;
            Ok(PairR { states, r: &mcb.m * inv, diagnostic: mc.cond })
        }
        Route::Generic => {
            let npts = states.len() + 3;
            let mut rng = ChaCha8Rng::seed_from_u64(set.seed);
            let pts: Vec<Vec<Vec<C>>> = (0..npts).map(|_| random_slots(v, &mut rng)).collect();
            let values = |pp: &ParamPoint, fps: &[FixedPoint]| -> Result<DMatrix<C>> {
                let rows: Vec<Vec<C>> = fps
                    .par_iter()
                    .map(|fp| -> Result<Vec<C>> {
                        let compiled: Vec<CompiledTerm> = set.terms(fp, shift)?.iter().map(|t| t.compile(pp)).collect();
                        let classes = crate::combinatorics::chern_assignment(fp);
                        pts.iter().map(|s| sym_sum(&compiled, &classes, s, crate::envelopes::SYM_BUDGET)).collect()
                    })
                    .collect::<Result<_>>()?;
                Ok(DMatrix::from_fn(fps.len(), npts, |i, j| rows[i][j]))
            };
            let mc = values(&pc, &fc)?;
            let mcb = values(&pcb, &fcb)?;
            let pinv = mc.clone().pseudo_inverse(1e-13).map_err(|e| Error::Singular(format!("pseudo-inverse: {e}")))?;
            let r = &mcb * pinv;
            let resid = max_abs(&(&r * &mc - &mcb)) / max_abs(&mcb).max(1e-300);
            Ok(PairR { states, r, diagnostic: resid })
        }
    }
}

/// Maximum modulus of the entries.
pub fn max_abs(m: &DMatrix<C>) -> f64 {
    m.iter().fold(0.0f64, |a, z| a.max(z.norm()))
}

/// `R = μ(u1/u2) R̄` where `μ = μ(u2/u1)_{k1 k2}` is the exchange scalar.
pub fn transition_r(base: &ParamPoint, f1: Factor, f2: Factor, v: &[usize], set: &RSettings) -> Result<PairR> {
    let mut r = rbar(base, f1, f2, v, &vec![0; base.n], set)?;
    let x = Slot::from_log(f2.u.log - f1.u.log);
    let mu = mu_ex(base, Nomes::of(base), f1.color, f2.color, x)?;
    r.r *= mu;
    Ok(r)
}

/// Box vectors `v` with `|v| = total`.
pub fn box_vectors(n: usize, k1: usize, k2: usize, total: usize) -> Vec<Vec<usize>> {
    let mut vs: Vec<Vec<usize>> = Vec::new();
    for a in partitions_upto(total) {
        let la = ColoredPartition::new(a, k1).expect("partition");
        for b in partitions(total - la.size()) {
            let lb = ColoredPartition::new(b, k2).expect("partition");
            let v: Vec<usize> = box_vector(n, k1, &la).iter().zip(box_vector(n, k2, &lb)).map(|(x, y)| x + y).collect();
            if !vs.contains(&v) {
                vs.push(v);
            }
        }
    }
    vs
}

/// Residual of `R̄(u1,u2)·P R̄(u2,u1) P = 1` on one block, where `P` swaps the
/// two tensor factors.
pub fn composition_residual(base: &ParamPoint, f1: Factor, f2: Factor, v: &[usize], set: &RSettings) -> Result<f64> {
    let z = vec![0; base.n];
    let fwd = rbar(base, f1, f2, v, &z, set)?;
    let back = rbar(base, f2, f1, v, &z, set)?;
    let pos: HashMap<(Vec<usize>, Vec<usize>), usize> =
        fwd.states.iter().enumerate().map(|(i, (a, b))| ((a.rows.clone(), b.rows.clone()), i)).collect();
    let n = fwd.states.len();
    let perm: Vec<usize> = back.states.iter().map(|(b, a)| pos[&(a.rows.clone(), b.rows.clone())]).collect();
    let mut back_p = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            back_p[(perm[i], perm[j])] = back.r[(i, j)];
        }
    }
    let prod = &fwd.r * back_p;
    Ok(max_abs(&(prod - DMatrix::identity(n, n))))
}

/// The full `R̄` on all blocks of total size `total`, assembled over the
/// union basis, and the largest entry connecting different weights.
pub fn weight_block_residual(base: &ParamPoint, f1: Factor, f2: Factor, total: usize, set: &RSettings) -> Result<f64> {
    let n = base.n;
    let mut basis: Vec<(Vec<i32>, PairState)> = Vec::new();
    let mut blocks = Vec::new();
    for v in box_vectors(n, f1.color, f2.color, total) {
        let r = rbar(base, f1, f2, &v, &vec![0; n], set)?;
        let off = basis.len();
        for (a, b) in &r.states {
            let wt: Vec<i32> =
                state_weight(n, f1.color, a).iter().zip(state_weight(n, f2.color, b)).map(|(x, y)| x + y).collect();
            basis.push((wt, (a.clone(), b.clone())));
        }
        blocks.push((off, r.r));
    }
    let dim = basis.len();
    let mut full = DMatrix::<C>::zeros(dim, dim);
    for (off, m) in &blocks {
        full.view_mut((*off, *off), (m.nrows(), m.ncols())).copy_from(m);
    }
    let mut worst = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            if basis[i].0 != basis[j].0 {
                worst = worst.max(full[(i, j)].norm());
            }
        }
    }
    Ok(worst)
}

/// Relative change of `R̄` under `(u1, u2) → (a u1, a u2)`.
pub fn scale_invariance_residual(
    base: &ParamPoint,
    f1: Factor,
    f2: Factor,
    v: &[usize],
    a: C,
    set: &RSettings,
) -> Result<f64> {
    let z = vec![0; base.n];
    let r1 = rbar(base, f1, f2, v, &z, set)?;
    let la = a.ln();
    let sc = |f: Factor| Factor { u: Slot::from_log(f.u.log + la), ..f };
    let r2 = rbar(base, sc(f1), sc(f2), v, &z, set)?;
    Ok(max_abs(&(&r1.r - &r2.r)) / max_abs(&r1.r).max(1e-300))
}

/// Relative change of `R̄` when `z` is shifted by `ħ^{h}` with `h` the total
/// weight of the block. Reported, not asserted.
pub fn shift_invariance_residual(
    base: &ParamPoint,
    f1: Factor,
    f2: Factor,
    v: &[usize],
    set: &RSettings,
) -> Result<f64> {
    let n = base.n;
    let states = pair_states(n, f1.color, f2.color, v);
    let (a, b) = states.first().ok_or_else(|| Error::Invalid("empty block".into()))?;
    let h: Vec<i32> =
        state_weight(n, f1.color, a).iter().zip(state_weight(n, f2.color, b)).map(|(x, y)| x + y).collect();
    let r0 = rbar(base, f1, f2, v, &vec![0; n], set)?;
    let r1 = rbar(base, f1, f2, v, &h, set)?;
    Ok(max_abs(&(&r0.r - &r1.r)) / max_abs(&r0.r).max(1e-300))
}

/// Relative difference between `R̄*(u1,u2)` and the transpose of the
/// opposite-ordering matrix, the relation used for the type-II exchange.
/// Reported, not asserted.
pub fn star_transpose_residual(base: &ParamPoint, f1: Factor, f2: Factor, v: &[usize]) -> Result<f64> {
    let set = RSettings::star();
    let z = vec![0; base.n];
    let r = rbar(base, f1, f2, v, &z, &set)?;
    let opp = RSettings { kahler_sign: 1, ..set };
    let ro = rbar(base, f1, f2, v, &z, &opp)?;
    Ok(max_abs(&(&r.r - ro.r.transpose())) / max_abs(&r.r).max(1e-300))
}

/// Residual of the dynamical Yang–Baxter equation
/// `R¹²(zħ^{h⁽³⁾}) R¹³(z) R²³(zħ^{h⁽¹⁾}) = R²³(z) R¹³(zħ^{h⁽²⁾}) R¹²(z)`
/// on the block of total box vector `v` of `V(k1,u1) ⊗ V(k2,u2) ⊗ V(k3,u3)`.
pub fn ybe_check(base: &ParamPoint, factors: [Factor; 3], v: &[usize], set: &RSettings) -> Result<f64> {
    let n = base.n;
    let total: usize = v.iter().sum();
    let mut states: Vec<[ColoredPartition; 3]> = Vec::new();
    for a in partitions_upto(total) {
        for b in partitions_upto(total - a.iter().sum::<usize>()) {
            let rest = total - a.iter().sum::<usize>() - b.iter().sum::<usize>();
            for c in partitions(rest) {
                let st = [
                    ColoredPartition::new(a.clone(), factors[0].color)?,
                    ColoredPartition::new(b.clone(), factors[1].color)?,
                    ColoredPartition::new(c, factors[2].color)?,
                ];
                let mut tv = vec![0; n];
                for (s, f) in st.iter().zip(&factors) {
                    for (t, x) in tv.iter_mut().zip(box_vector(n, f.color, s)) {
                        *t += x;
                    }
                }
                if tv == v {
                    states.push(st);
                }
            }
        }
    }
    let dim = states.len();
    if dim == 0 {
        return Ok(0.0);
    }
    let key = |st: &[ColoredPartition; 3]| -> Vec<Vec<usize>> { st.iter().map(|p| p.rows.clone()).collect() };
    let idx: HashMap<Vec<Vec<usize>>, usize> = states.iter().enumerate().map(|(i, s)| (key(s), i)).collect();
    let mut cache: HashMap<(usize, usize, Vec<usize>, Vec<i32>), PairR> = HashMap::new();
    let mut op = |i: usize, j: usize, shifted: bool| -> Result<DMatrix<C>> {
        let o = 3 - i - j;
        let mut m = DMatrix::<C>::zeros(dim, dim);
        for (col, st) in states.iter().enumerate() {
            let sh = if shifted { state_weight(n, factors[o].color, &st[o]) } else { vec![0; n] };
            let pv: Vec<usize> = box_vector(n, factors[i].color, &st[i])
                .iter()
                .zip(box_vector(n, factors[j].color, &st[j]))
                .map(|(x, y)| x + y)
                .collect();
            let k = (i, j, pv.clone(), sh.clone());
            if !cache.contains_key(&k) {
                let r = rbar(base, factors[i], factors[j], &pv, &sh, set)?;
                cache.insert(k.clone(), r);
            }
            let r = &cache[&k];
            let b = r.states.iter().position(|(x, y)| *x == st[i] && *y == st[j]).expect("state in its own block");
            for (a, (x, y)) in r.states.iter().enumerate() {
                let mut t = st.clone();
                t[i] = x.clone();
                t[j] = y.clone();
                m[(idx[&key(&t)], col)] += r.r[(a, b)];
            }
        }
        Ok(m)
    };
    let lhs = op(0, 1, true)? * op(0, 2, false)? * op(1, 2, true)?;
    let rhs = op(1, 2, false)? * op(0, 2, true)? * op(0, 1, false)?;
    Ok(max_abs(&(&lhs - &rhs)) / max_abs(&lhs).max(1e-300))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Annuli;

    fn setup(seed: u64) -> (ParamPoint, [Factor; 3]) {
        let pp = ParamPoint::sample(3, 3, seed, &Annuli::default()).unwrap();
        let f = [0, 1, 2].map(|i| Factor { color: 0, u: pp.u[i] });
        (pp, f)
    }

    #[test]
    fn one_box_basis_is_two_dimensional() {
        let st = pair_states(3, 0, 0, &[1, 0, 0]);
        assert_eq!(st.len(), 2);
        assert_eq!(pair_states(3, 0, 0, &[0, 0, 0]).len(), 1);
        assert_eq!(pair_states(3, 0, 0, &[2, 0, 0]).len(), 1);
        assert_eq!(pair_states(3, 0, 0, &[1, 0, 1]).len(), 2);
    }

    #[test]
    fn empty_block_is_identity() {
        let (pp, f) = setup(1);
        let r = rbar(&pp, f[0], f[1], &[0, 0, 0], &[0, 0, 0], &RSettings::default()).unwrap();
        assert_eq!(r.r.nrows(), 1);
        assert!((r.r[(0, 0)] - 1.0).norm() < 1e-12);
    }

    #[test]
    fn transition_matrices_compose_to_identity() {
        let (pp, f) = setup(2);
        let r = composition_residual(&pp, f[0], f[1], &[1, 0, 0], &RSettings::default()).unwrap();
        assert!(r < 1e-8, "{r}");
    }

    #[test]
    fn routes_agree_on_one_box() {
        let (pp, f) = setup(3);
        let a = rbar(&pp, f[0], f[1], &[1, 0, 0], &[0, 0, 0], &RSettings::default()).unwrap();
        let g = RSettings { route: Route::Generic, ..RSettings::default() };
        let b = rbar(&pp, f[0], f[1], &[1, 0, 0], &[0, 0, 0], &g).unwrap();
        assert!(b.diagnostic < 1e-10);
        assert!(max_abs(&(&a.r - &b.r)) / max_abs(&a.r) < 1e-8);
    }

    #[test]
    fn scale_invariance() {
        let (pp, f) = setup(4);
        let r =
            scale_invariance_residual(&pp, f[0], f[1], &[1, 0, 0], C::new(0.7, 0.4), &RSettings::default()).unwrap();
        assert!(r < 1e-8, "{r}");
    }

    #[test]
    fn ybe_one_box() {
        let (pp, f) = setup(5);
        let r = ybe_check(&pp, f, &[1, 0, 0], &RSettings::default()).unwrap();
        assert!(r < 1e-7, "{r}");
        assert_eq!(ybe_check(&pp, f, &[0, 0, 0], &RSettings::default()).unwrap(), 0.0);
    }
}
