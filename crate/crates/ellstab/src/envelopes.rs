//! Elliptic stable envelopes `Stab`, `Ŝtab`, `S̃tab`: their theta-function
//! building blocks, tree weights, symmetrization, restriction to fixed points
//! and the shuffle-product identity.
//!
//! An envelope is stored as a list of [`ThetaTerm`]s (one per tuple of
//! trees) in the Chern roots `X(a)` of the boxes of its fixed point. The
//! envelope itself is the sum of these terms over all color-preserving
//! permutations of the Chern-root values.

use itertools::Itertools;
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{
    chern_assignment, index_degrees, lambda_trees, rho_le_root, rho_lt, Cell, DegreeRule, FixedPoint,
};
use crate::numeric::{CompiledTerm, Monomial, Nome, ParamPoint, ThetaTerm, Var};
use crate::{Error, Result};

/// Which normalization of the envelope.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// `Stab`, holomorphic in the Chern roots.
    Plain,
    /// `Ŝtab`, the type-I normalization.
    Hat,
    /// `S̃tab`, the type-II normalization.
    Tilde,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Plain, Variant::Hat, Variant::Tilde];
}

/// Default cap on the number of color-preserving permutations.
pub const SYM_BUDGET: usize = 40_320;

fn x(a: usize) -> Monomial {
    Monomial::var(Var::X(a as u16))
}

fn u(r: usize) -> Monomial {
    Monomial::var(Var::U(r as u16))
}

fn t1() -> Monomial {
    Monomial::var(Var::T1)
}

fn t2() -> Monomial {
    Monomial::var(Var::T2)
}

fn hb() -> Monomial {
    Monomial::hbar()
}

/// `x_a/x_b · m`.
fn xr(a: usize, b: usize, m: &Monomial) -> Monomial {
    &(&x(a) / &x(b)) * m
}

fn ratio(num: Monomial, den: Monomial) -> ThetaTerm {
    let mut t = ThetaTerm::th(num);
    t.push(den, -1);
    t
}

struct Pairs {
    bs: Vec<Cell>,
}

impl Pairs {
    fn new(fp: &FixedPoint) -> Self {
        Self { bs: fp.boxes() }
    }

    /// Ordered pairs `(a, b)` with `c_a + 1 ≡ c_b`.
    fn adjacent<'a>(&'a self, fp: &'a FixedPoint) -> impl Iterator<Item = (usize, usize)> + 'a {
        let n = fp.n;
        (0..self.bs.len())
            .cartesian_product(0..self.bs.len())
            .filter(move |&(a, b)| (fp.color(self.bs[a]) + 1) % n == fp.color(self.bs[b]))
    }

    /// Ordered pairs `a ≠ b` of the same color.
    fn same<'a>(&'a self, fp: &'a FixedPoint) -> impl Iterator<Item = (usize, usize)> + 'a {
        (0..self.bs.len())
            .cartesian_product(0..self.bs.len())
            .filter(move |&(a, b)| a != b && fp.color(self.bs[a]) == fp.color(self.bs[b]))
    }

    /// Pairs `(r, a)` of a framing and a box of the framing's color.
    fn framing<'a>(&'a self, fp: &'a FixedPoint) -> impl Iterator<Item = (usize, usize)> + 'a {
        (0..fp.parts.len())
            .cartesian_product(0..self.bs.len())
            .filter(move |&(r, a)| fp.color(self.bs[a]) == fp.parts[r].color)
    }
}

/// The theta-function part `S_λ`, `Ŝ_λ` or `S̃_λ`.
pub fn s_factor(fp: &FixedPoint, variant: Variant) -> ThetaTerm {
    let pr = Pairs::new(fp);
    let bs = &pr.bs;
    let mut t = ThetaTerm::one();
    for (a, b) in pr.adjacent(fp) {
        let first = rho_lt(fp, bs[a], 1, bs[b]);
        let f1 = xr(a, b, &t1());
        let f2 = xr(b, a, &t2());
        t = match (variant, first) {
            (Variant::Plain, true) => t.times(&ThetaTerm::th(f1)),
            (Variant::Plain, false) => t.times(&ThetaTerm::th(f2)),
            (_, true) => t.times(&ratio(f1, f2).neg()),
            (_, false) => t.times(&ratio(f2, f1).neg()),
        };
    }
    for (r, a) in pr.framing(fp) {
        let le = rho_le_root(fp, bs[a], r);
        let xu = &x(a) / &u(r);
        let hux = &(&hb() * &u(r)) / &x(a);
        t = match (variant, le) {
            (Variant::Plain, true) => t.times(&ThetaTerm::th(xu)),
            (Variant::Plain, false) => t.times(&ThetaTerm::th(hux)),
            (Variant::Hat, false) => t.times(&ratio(hux, xu).neg()),
            (Variant::Tilde, true) => t.times(&ratio(xu, hux).neg()),
            _ => t,
        };
    }
    for (a, b) in pr.same(fp) {
        if !rho_lt(fp, bs[a], 0, bs[b]) {
            continue;
        }
        let ab = xr(a, b, &Monomial::one());
        let hab = xr(a, b, &hb());
        let ba = xr(b, a, &Monomial::one());
        let hba = xr(b, a, &hb());
        t = match variant {
            Variant::Plain => {
                let mut d = ThetaTerm::th(ab);
                d.push(hab, 1);
                t.over(&d)
            }
            Variant::Hat => t.times(&ratio(ba, hab)),
            Variant::Tilde => t.times(&ratio(hba, ab)),
        };
    }
    t
}

/// `K_I` (type `I`) or `K_II` (type `II`) with `S = (-1)^ε K_I Ŝ = (-1)^{ε*} K_II S̃`.
pub fn k_factor(fp: &FixedPoint, type_two: bool) -> ThetaTerm {
    let pr = Pairs::new(fp);
    let bs = &pr.bs;
    let mut t = ThetaTerm::one();
    for (a, b) in pr.adjacent(fp) {
        let m = if rho_lt(fp, bs[a], 1, bs[b]) { xr(b, a, &t2()) } else { xr(a, b, &t1()) };
        t.push(m, 1);
    }
    for (r, a) in pr.framing(fp) {
        let m = if type_two { &(&hb() * &u(r)) / &x(a) } else { &x(a) / &u(r) };
        t.push(m, 1);
    }
    for (a, b) in pr.same(fp) {
        let m = if type_two { xr(a, b, &hb()) } else { xr(a, b, &Monomial::one()) };
        t.push(m, -1);
    }
    t
}

/// Parities `ε` (type `I`) and `ε*` (type `II`).
pub fn eps_parity(fp: &FixedPoint, type_two: bool) -> usize {
    let pr = Pairs::new(fp);
    let adj = pr.adjacent(fp).count();
    let fr = pr.framing(fp).filter(|&(r, a)| rho_le_root(fp, pr.bs[a], r) == type_two).count();
    adj + fr
}

/// The symmetric regularizer `F = Π_r Π_{c_a ≡ k_r} θ(x_a/u_r)`.
pub fn f_regularizer(fp: &FixedPoint) -> ThetaTerm {
    regularizer(fp, Variant::Hat)
}

/// The framing part of `K_I` (plain and hatted variants) or of `K_II`
/// (tilde): a symmetric function whose zeros cancel the framing poles of the
/// envelope at fixed points.
pub fn regularizer(fp: &FixedPoint, variant: Variant) -> ThetaTerm {
    let pr = Pairs::new(fp);
    let mut t = ThetaTerm::one();
    for (r, a) in pr.framing(fp) {
        let m = if variant == Variant::Tilde { &(&hb() * &u(r)) / &x(a) } else { &x(a) / &u(r) };
        t.push(m, 1);
    }
    t
}

/// Kähler arguments `z_i ħ^{s_i}`.
pub fn kahler_shifted(shifts: &[i32]) -> Vec<Monomial> {
    shifts.iter().enumerate().map(|(i, &s)| &Monomial::var(Var::Z(i as u16)) * &Monomial::hbar_pow(s)).collect()
}

/// Unshifted Kähler arguments `z_i`.
pub fn kahler_plain(n: usize) -> Vec<Monomial> {
    kahler_shifted(&vec![0; n])
}

/// Tree weights `W`: one term per tuple of admissible trees (one tree per
/// nonempty framing), each a product of `φ` factors with sign `(-1)^κ`.
pub fn w_terms(fp: &FixedPoint, kahler: &[Monomial], degrees: &[i32]) -> Vec<ThetaTerm> {
    let idx = fp.box_index();
    let bs = fp.boxes();
    let mut per_framing: Vec<Vec<ThetaTerm>> = Vec::new();
    for (r, lam) in fp.parts.iter().enumerate() {
        if lam.size() == 0 {
            continue;
        }
        let id = |c: (usize, usize)| idx[&Cell { r, x: c.0, y: c.1 }];
        let mut opts = Vec::new();
        for tree in lambda_trees(lam) {
            let children = tree.children();
            let y_of = |c: (usize, usize)| -> Monomial {
                let mut m = Monomial::one();
                let mut stack = vec![c];
                while let Some(cur) = stack.pop() {
                    let a = id(cur);
                    m = &m * &kahler[fp.color(bs[a])];
                    m = &m * &Monomial::hbar_pow(degrees[a]);
                    if let Some(ch) = children.get(&cur) {
                        stack.extend(ch.iter().copied());
                    }
                }
                m
            };
            let sign = if tree.kappa() % 2 == 0 { 1.0 } else { -1.0 };
            let root = id((1, 1));
            let mut t = ThetaTerm::scalar(sign).times(&ThetaTerm::phi(&(&x(root) / &u(r)), &y_of((1, 1))));
            for (c, pa) in &tree.parent {
                let (h, tl) = (id(*c), id(*pa));
                let arg = &(&x(h) * &fp.phi_weight(bs[tl])) / &(&x(tl) * &fp.phi_weight(bs[h]));
                t = t.times(&ThetaTerm::phi(&arg, &y_of(*c)));
            }
            opts.push(t);
        }
        per_framing.push(opts);
    }
    let mut out = vec![ThetaTerm::one()];
    for opts in per_framing {
        out = out.iter().cartesian_product(opts.iter()).map(|(a, b)| a.clone().times(b)).collect();
    }
    out
}

/// An envelope attached to a fixed point, before symmetrization.
#[derive(Clone, Debug)]
pub struct Envelope {
    pub fp: FixedPoint,
    pub variant: Variant,
    pub kahler: Vec<Monomial>,
    pub degrees: Vec<i32>,
    pub terms: Vec<ThetaTerm>,
}

impl Envelope {
    /// Builds `S · Σ_t W_t` with Kähler arguments `kahler[i]` per color.
    pub fn new(fp: &FixedPoint, variant: Variant, kahler: &[Monomial], rule: DegreeRule) -> Result<Self> {
        if kahler.len() != fp.n {
            return Err(Error::Invalid("one Kähler argument per color is required".into()));
        }
        let degrees = index_degrees(fp, rule)?;
        let s = s_factor(fp, variant);
        let terms = w_terms(fp, kahler, &degrees).into_iter().map(|w| s.clone().times(&w)).collect();
        Ok(Self { fp: fp.clone(), variant, kahler: kahler.to_vec(), degrees, terms })
    }

    /// Replaces the nome of every theta factor (used for the type-II kernel at `p*`).
    pub fn with_nome(mut self, nome: Nome) -> Self {
        for t in &mut self.terms {
            for f in &mut t.factors {
                f.2 = nome;
            }
        }
        self
    }

    /// Value at Chern-root values given per color slot (`slot_logs[i][j]` is
    /// the logarithm of `x^(i)_j`), summed over all color-preserving permutations.
    pub fn eval_sym(&self, pp: &ParamPoint, slot_logs: &[Vec<C>]) -> Result<C> {
        let compiled: Vec<CompiledTerm> = self.terms.iter().map(|t| t.compile(pp)).collect();
        sym_sum(&compiled, &chern_assignment(&self.fp), slot_logs, SYM_BUDGET)
    }

    /// Restriction to the fixed point `mu`, `x_a = φ^μ_a p^{shift_a}`.
    pub fn restrict(&self, pp: &ParamPoint, mu: &FixedPoint, shift: Option<&[i32]>, opts: &ContourOpts) -> Result<C> {
        restrict_terms(&self.terms, &self.fp, pp, mu, shift, opts)
    }
}

/// Number of color-preserving permutations for the given classes.
pub fn sym_size(classes: &[Vec<usize>]) -> usize {
    classes.iter().map(|c| (1..=c.len()).product::<usize>()).product()
}

/// `Σ_σ Σ_terms term(x_σ)` where each color class of boxes takes the slot
/// values of that color in every order.
pub fn sym_sum(terms: &[CompiledTerm], classes: &[Vec<usize>], slot_logs: &[Vec<C>], budget: usize) -> Result<C> {
    if sym_size(classes) > budget {
        return Err(Error::Budget(format!("{} permutations exceed {budget}", sym_size(classes))));
    }
    let nbox: usize = classes.iter().map(Vec::len).sum();
    for (i, cl) in classes.iter().enumerate() {
        if slot_logs.get(i).map_or(0, Vec::len) != cl.len() {
            return Err(Error::Invalid(format!("color {i} needs {} slot values", cl.len())));
        }
    }
    let perms: Vec<Vec<Vec<usize>>> = classes
        .iter()
        .map(|cl| if cl.is_empty() { vec![Vec::new()] } else { (0..cl.len()).permutations(cl.len()).collect() })
        .collect();
    let mut xlog = vec![C::new(0.0, 0.0); nbox];
    let mut total = C::new(0.0, 0.0);
    let mut pos = vec![0usize; perms.len()];
    loop {
        for (i, &k) in pos.iter().enumerate() {
            for (j, &slot) in perms[i][k].iter().enumerate() {
                xlog[classes[i][j]] = slot_logs[i][slot];
            }
        }
        for t in terms {
            total += t.eval(&xlog)?;
        }
        let mut i = 0;
        while i < pos.len() {
            pos[i] += 1;
            if pos[i] < perms[i].len() {
                break;
            }
            pos[i] = 0;
            i += 1;
        }
        if i == pos.len() {
            break;
        }
    }
    Ok(total)
}

/// Parameters of the contour-mean restriction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourOpts {
    pub points: usize,
    pub radius: f64,
    pub seed: u64,
}

impl Default for ContourOpts {
    fn default() -> Self {
        Self { points: 24, radius: 0.08, seed: 11 }
    }
}

/// Logarithms `log φ^μ_a + s_a log p` per color slot of `mu`, plus the
/// direction of approach per slot.
fn restriction_slots(pp: &ParamPoint, mu: &FixedPoint, shift: Option<&[i32]>, seed: u64) -> (Vec<Vec<C>>, Vec<Vec<C>>) {
    let bs = mu.boxes();
    let ch = chern_assignment(mu);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs: Vec<C> = (0..bs.len()).map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let base = ch
        .iter()
        .map(|cl| {
            cl.iter()
                .map(|&b| {
                    let s = shift.map_or(0, |s| s[b]);
                    pp.log_mono(&mu.phi_weight(bs[b]), &[]) + f64::from(s) * pp.p.log
                })
                .collect()
        })
        .collect();
    let d = ch.iter().map(|cl| cl.iter().map(|&b| dirs[b]).collect()).collect();
    (base, d)
}

/// Restriction of `Sym(terms)` to `mu` as the mean over a small circle
/// `x_a = φ^μ_a p^{s_a} e^{ε c_a}`, `|ε| = radius`.
///
/// For a function holomorphic at the fixed point this is its value. Where the
/// hatted envelopes have poles it is the finite part along the seeded
/// direction `c`, which is what [`restrict_spread`] diagnoses.
pub fn restrict_terms(
    terms: &[ThetaTerm],
    fp: &FixedPoint,
    pp: &ParamPoint,
    mu: &FixedPoint,
    shift: Option<&[i32]>,
    opts: &ContourOpts,
) -> Result<C> {
    if mu.v() != fp.v() || mu.w() != fp.w() {
        return Err(Error::Invalid(format!("{mu} is not in the space of {fp}")));
    }
    let compiled: Vec<CompiledTerm> = terms.iter().map(|t| t.compile(pp)).collect();
    let classes = chern_assignment(fp);
    let (base, dirs) = restriction_slots(pp, mu, shift, opts.seed);
    let mut total = C::new(0.0, 0.0);
    for k in 0..opts.points {
        let ang = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / opts.points as f64;
        let eps = C::from_polar(opts.radius, ang);
        let slots: Vec<Vec<C>> =
            base.iter().zip(&dirs).map(|(b, d)| b.iter().zip(d).map(|(l, c)| l + eps * c).collect()).collect();
        total += sym_sum(&compiled, &classes, &slots, SYM_BUDGET)?;
    }
    Ok(total / opts.points as f64)
}

/// Relative spread of the restriction between two directions of approach;
/// small for a holomorphic restriction.
pub fn restrict_spread(
    terms: &[ThetaTerm],
    fp: &FixedPoint,
    pp: &ParamPoint,
    mu: &FixedPoint,
    opts: &ContourOpts,
) -> Result<(C, f64)> {
    let a = restrict_terms(terms, fp, pp, mu, None, opts)?;
    let other = ContourOpts { seed: opts.seed.wrapping_add(1_000_003), radius: opts.radius * 0.6, ..*opts };
    let b = restrict_terms(terms, fp, pp, mu, None, &other)?;
    let scale = a.norm().max(b.norm()).max(1e-300);
    Ok((a, (a - b).norm() / scale))
}

/// Random generic Chern-root logarithms per color slot.
pub fn random_slots(v: &[usize], rng: &mut ChaCha8Rng) -> Vec<Vec<C>> {
    v.iter().map(|&k| (0..k).map(|_| C::new(rng.gen_range(-0.4..0.4), rng.gen_range(-3.1..3.1))).collect()).collect()
}

/// Factors coupling the two halves of `(λ', λ'')` in the shuffle product.
pub fn cross_factor(fp1: &FixedPoint, fp2: &FixedPoint, variant: Variant) -> ThetaTerm {
    let full = fp1.concat(fp2);
    let bs = full.boxes();
    let n1 = fp1.size();
    let off = fp1.parts.len();
    let mut t = ThetaTerm::one();
    for a in 0..n1 {
        for b in n1..bs.len() {
            let (ca, cb) = (full.color(bs[a]), full.color(bs[b]));
            let n = full.n;
            match variant {
                Variant::Plain => {
                    if (ca + 1) % n == cb {
                        t.push(xr(a, b, &t1()), 1);
                    }
                    if (cb + 1) % n == ca {
                        t.push(xr(a, b, &t2()), 1);
                    }
                    if ca == cb {
                        t.push(xr(a, b, &Monomial::one()), -1);
                        t.push(xr(a, b, &hb()), -1);
                    }
                }
                _ => {
                    if (cb + 1) % n == ca {
                        t = t.times(&ratio(xr(a, b, &t2()), xr(b, a, &t1())).neg());
                    }
                    if (ca + 1) % n == cb {
                        t = t.times(&ratio(xr(a, b, &t1()), xr(b, a, &t2())).neg());
                    }
                    if ca == cb {
                        t = t.times(&if variant == Variant::Hat {
                            ratio(xr(b, a, &Monomial::one()), xr(a, b, &hb()))
                        } else {
                            ratio(xr(b, a, &hb()), xr(a, b, &Monomial::one()))
                        });
                    }
                }
            }
        }
    }
    for (r, lam) in fp1.parts.iter().enumerate() {
        for b in n1..bs.len() {
            if full.color(bs[b]) == lam.color && variant != Variant::Tilde {
                let f = &(&hb() * &u(r)) / &x(b);
                t = if variant == Variant::Plain {
                    t.times(&ThetaTerm::th(f))
                } else {
                    t.times(&ratio(f, &x(b) / &u(r)).neg())
                };
            }
        }
    }
    for (r2, lam) in fp2.parts.iter().enumerate() {
        let r = r2 + off;
        for a in 0..n1 {
            if full.color(bs[a]) == lam.color && variant != Variant::Hat {
                let f = &x(a) / &u(r);
                t = if variant == Variant::Plain {
                    t.times(&ThetaTerm::th(f))
                } else {
                    t.times(&ratio(f, &(&hb() * &u(r)) / &x(a)).neg())
                };
            }
        }
    }
    t
}

/// Which Kähler shifts to use in the shuffle product.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShiftConvention {
    /// Shifts matching [`DegreeRule::Hat`]:
    /// `s'_i = v''_i - v''_{i-1} - v''_{i+1}`, `s''_i = w'_i - v'_i + v'_{i-1} + v'_{i+1}`.
    Derived,
    /// Shifts as printed, matching [`DegreeRule::Dual`]:
    /// `s'_i = w''_i - v''_i + v''_{i+1}`, `s''_i = v'_i - v'_{i-1}`.
    Printed,
}

impl ShiftConvention {
    /// The convention whose shifts hold for the given degree rule.
    pub fn for_rule(rule: DegreeRule) -> Option<Self> {
        match rule {
            DegreeRule::Hat => Some(Self::Derived),
            DegreeRule::Dual => Some(Self::Printed),
            _ => None,
        }
    }
}

/// Kähler shifts `(s', s'')` for the sub-envelopes of `λ'` and `λ''`.
pub fn shuffle_shifts(fp1: &FixedPoint, fp2: &FixedPoint, conv: ShiftConvention) -> (Vec<i32>, Vec<i32>) {
    let n = fp1.n;
    let (v1, w1) = (fp1.v(), fp1.w());
    let (v2, w2) = (fp2.v(), fp2.w());
    let g = |v: &[usize], i: usize| v[i % n] as i32;
    let prev = |i: usize| (i + n - 1) % n;
    match conv {
        ShiftConvention::Derived => (
            (0..n).map(|i| g(&v2, i) - g(&v2, prev(i)) - g(&v2, i + 1)).collect(),
            (0..n).map(|i| g(&w1, i) - g(&v1, i) + g(&v1, prev(i)) + g(&v1, i + 1)).collect(),
        ),
        ShiftConvention::Printed => (
            (0..n).map(|i| g(&w2, i) - g(&v2, i) + g(&v2, i + 1)).collect(),
            (0..n).map(|i| g(&v1, i) - g(&v1, prev(i))).collect(),
        ),
    }
}

/// Right side of the shuffle formula: product terms `cross · T' · T''`
/// with the sub-envelopes embedded into the variables of `(λ', λ'')`.
pub fn shuffle_rhs_terms(
    fp1: &FixedPoint,
    fp2: &FixedPoint,
    variant: Variant,
    rule: DegreeRule,
    conv: ShiftConvention,
) -> Result<Vec<ThetaTerm>> {
    let (s1, s2) = shuffle_shifts(fp1, fp2, conv);
    let e1 = Envelope::new(fp1, variant, &kahler_shifted(&s1), rule)?;
    let e2 = Envelope::new(fp2, variant, &kahler_shifted(&s2), rule)?;
    let (uo, xo) = (fp1.parts.len() as u16, fp1.size() as u16);
    let t2: Vec<ThetaTerm> = e2.terms.iter().map(|t| t.map_monomials(|m| m.reindex(uo, xo))).collect();
    let cr = cross_factor(fp1, fp2, variant);
    Ok(e1.terms.iter().cartesian_product(t2.iter()).map(|(a, b)| cr.clone().times(a).times(b)).collect())
}

/// Maximum relative difference between `Stab((λ',λ''))` and the shuffle
/// product of `Stab(λ')` and `Stab(λ'')` over `samples` random Chern-root values.
pub fn shuffle_check(
    fp1: &FixedPoint,
    fp2: &FixedPoint,
    variant: Variant,
    rule: DegreeRule,
    conv: ShiftConvention,
    pp: &ParamPoint,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let full = fp1.concat(fp2);
    if pp.u.len() < full.parts.len() {
        return Err(Error::Invalid("parameter point lacks framing weights".into()));
    }
    let lhs_env = Envelope::new(&full, variant, &kahler_plain(full.n), rule)?;
    let rhs_terms = shuffle_rhs_terms(fp1, fp2, variant, rule, conv)?;
    let lhs_c: Vec<CompiledTerm> = lhs_env.terms.iter().map(|t| t.compile(pp)).collect();
    let rhs_c: Vec<CompiledTerm> = rhs_terms.iter().map(|t| t.compile(pp)).collect();
    let classes = chern_assignment(&full);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let slots = random_slots(&full.v(), &mut rng);
        let l = sym_sum(&lhs_c, &classes, &slots, SYM_BUDGET)?;
        let r = sym_sum(&rhs_c, &classes, &slots, SYM_BUDGET)?;
        worst = worst.max((l - r).norm() / l.norm().max(1e-300));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::ColoredPartition;
    use crate::numeric::Annuli;

    fn fp(parts: &[(usize, &[usize])]) -> FixedPoint {
        FixedPoint::new(3, parts.iter().map(|(k, r)| ColoredPartition::new(r.to_vec(), *k).unwrap()).collect()).unwrap()
    }

    fn point(seed: u64) -> ParamPoint {
        ParamPoint::sample(3, 3, seed, &Annuli::default()).unwrap()
    }

    #[test]
    fn empty_envelope_is_one() {
        let e = Envelope::new(&fp(&[(0, &[])]), Variant::Hat, &kahler_plain(3), DegreeRule::Hat).unwrap();
        let v = e.eval_sym(&point(1), &[vec![], vec![], vec![]]).unwrap();
        assert!((v - C::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn single_box_plain_is_theta_composition() {
        let pp = point(2);
        let f = fp(&[(0, &[1])]);
        let e = Envelope::new(&f, Variant::Plain, &kahler_plain(3), DegreeRule::Hat).unwrap();
        assert_eq!(s_factor(&f, Variant::Plain).factors.len(), 1);
        let lx = C::new(0.1, 0.7);
        let v = e.eval_sym(&pp, &[vec![lx], vec![], vec![]]).unwrap();
        let xu = Monomial::var(Var::X(0)) / Monomial::var(Var::U(0));
        let z = Monomial::var(Var::Z(0));
        let mut expect = ThetaTerm::th(&xu * &z);
        expect.push(Monomial::hbar(), 1);
        expect.push(z, -1);
        let w = expect.eval(&pp, &[lx]).unwrap();
        assert!((v - w).norm() / w.norm() < 1e-12);
    }

    #[test]
    fn factorizations_through_k() {
        let pp = point(3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for f in [fp(&[(0, &[2, 1])]), fp(&[(0, &[1]), (1, &[2])]), fp(&[(2, &[1, 1, 1])])] {
            let xs: Vec<C> =
                (0..f.size()).map(|_| C::new(rng.gen_range(-0.4..0.4), rng.gen_range(-3.0..3.0))).collect();
            let s = s_factor(&f, Variant::Plain).eval(&pp, &xs).unwrap();
            for (two, var) in [(false, Variant::Hat), (true, Variant::Tilde)] {
                let sign = if eps_parity(&f, two) % 2 == 0 { 1.0 } else { -1.0 };
                let rhs = sign * k_factor(&f, two).eval(&pp, &xs).unwrap() * s_factor(&f, var).eval(&pp, &xs).unwrap();
                assert!((s - rhs).norm() / s.norm() < 1e-10, "{f} {var:?}");
            }
        }
    }

    #[test]
    fn envelope_is_symmetric_per_color() {
        let pp = point(5);
        let f = fp(&[(0, &[3])]);
        let f2 = fp(&[(0, &[2, 2])]);
        for f in [f, f2] {
            let e = Envelope::new(&f, Variant::Hat, &kahler_plain(3), DegreeRule::Hat).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            let mut slots = random_slots(&f.v(), &mut rng);
            let a = e.eval_sym(&pp, &slots).unwrap();
            for s in slots.iter_mut() {
                s.reverse();
            }
            let b = e.eval_sym(&pp, &slots).unwrap();
            assert!((a - b).norm() / a.norm() < 1e-10);
        }
    }

    #[test]
    fn summands_have_integral_chern_root_powers() {
        let f = fp(&[(0, &[2, 1]), (1, &[1])]);
        for var in [Variant::Hat, Variant::Tilde] {
            let m = s_factor(&f, var).graded_monomial();
            assert!(m.iter().all(|(v, d)| matches!(v, Var::T1 | Var::T2) || d % 2 == 0), "{m}");
            let e = Envelope::new(&f, var, &kahler_plain(3), DegreeRule::Hat).unwrap();
            for t in &e.terms {
                let m = t.graded_monomial();
                assert!(m.iter().all(|(v, d)| !matches!(v, Var::X(_)) || d % 2 == 0), "{m}");
            }
        }
    }

    #[test]
    fn shuffle_one_box_each() {
        let pp = point(7);
        let a = fp(&[(0, &[1])]);
        for var in Variant::ALL {
            let r = shuffle_check(&a, &a, var, DegreeRule::Hat, ShiftConvention::Derived, &pp, 3, 1).unwrap();
            assert!(r < 1e-8, "{var:?} {r}");
        }
    }

    #[test]
    fn shuffle_with_empty_factor() {
        let pp = point(8);
        let a = fp(&[(0, &[2])]);
        let e = fp(&[(1, &[])]);
        let r = shuffle_check(&a, &e, Variant::Hat, DegreeRule::Hat, ShiftConvention::Derived, &pp, 3, 2).unwrap();
        assert!(r < 1e-10, "{r}");
    }

    #[test]
    fn printed_shifts_pair_with_dual_rule() {
        let pp = point(9);
        let a = fp(&[(0, &[1])]);
        let b = fp(&[(1, &[1, 1])]);
        let r = shuffle_check(&a, &b, Variant::Hat, DegreeRule::Dual, ShiftConvention::Printed, &pp, 3, 3).unwrap();
        assert!(r < 1e-8, "{r}");
    }

    #[test]
    fn plain_restriction_is_direction_independent() {
        let pp = point(10);
        let lam = fp(&[(0, &[2, 1])]);
        let mu = fp(&[(0, &[3])]);
        let e = Envelope::new(&lam, Variant::Plain, &kahler_plain(3), DegreeRule::Hat).unwrap();
        let (v, spread) = restrict_spread(&e.terms, &lam, &pp, &mu, &ContourOpts::default()).unwrap();
        assert!(v.norm() > 1e-6 && spread < 1e-10, "{v} {spread}");
        let (d, spread) = restrict_spread(&e.terms, &lam, &pp, &lam, &ContourOpts::default()).unwrap();
        assert!(d.norm() > 1e-6 && spread < 1e-10);
    }
}
