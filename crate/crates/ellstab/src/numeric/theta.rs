//! Graded theta functions and products of them.

use num_complex::Complex64 as C;

use super::monomial::{Monomial, Var};
use super::param::ParamPoint;
use super::special::theta_p;
use crate::{Error, Result};

/// A complex coefficient times a monomial that is materialized only through
/// the fixed logarithms of a [`ParamPoint`].
#[derive(Clone, Debug, PartialEq)]
pub struct GradedValue {
    pub mono: Monomial,
    pub coeff: C,
}

impl GradedValue {
    pub fn scalar(coeff: C) -> Self {
        Self { mono: Monomial::one(), coeff }
    }

    /// `coeff · exp(Σ e_v log v)`.
    pub fn materialize(&self, pp: &ParamPoint, xlog: &[C]) -> C {
        self.coeff * pp.eval_mono(&self.mono, xlog)
    }

    pub fn mul(&self, o: &GradedValue) -> GradedValue {
        GradedValue { mono: &self.mono * &o.mono, coeff: self.coeff * o.coeff }
    }

    pub fn div(&self, o: &GradedValue) -> Result<GradedValue> {
        if o.coeff == C::new(0.0, 0.0) {
            return Err(Error::Singular("division by a vanishing theta value".into()));
        }
        Ok(GradedValue { mono: &self.mono / &o.mono, coeff: self.coeff / o.coeff })
    }
}

/// Which nome a theta factor uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Nome {
    /// The elliptic nome `p`.
    P,
    /// The dual nome `p* = p/ħ`.
    PStar,
}

fn nome_value(pp: &ParamPoint, nome: Nome) -> C {
    match nome {
        Nome::P => pp.p.val,
        Nome::PStar => pp.p_star().val,
    }
}

fn trunc(pp: &ParamPoint, nome: Nome) -> usize {
    match nome {
        Nome::P => pp.trunc,
        Nome::PStar => super::param::trunc_for(pp.p_star().val),
    }
}

/// Odd theta `θ(m) = -m^{-1/2} θ_p(m)` as a graded value: mono `-m/2`,
/// coefficient `-θ_p(m)`.
pub fn theta(m: &Monomial, pp: &ParamPoint, xlog: &[C]) -> Result<GradedValue> {
    theta_nome(m, pp, xlog, Nome::P)
}

/// `θ*(m)`: the same with `p` replaced by `p*`.
pub fn theta_star(m: &Monomial, pp: &ParamPoint, xlog: &[C]) -> Result<GradedValue> {
    theta_nome(m, pp, xlog, Nome::PStar)
}

fn theta_nome(m: &Monomial, pp: &ParamPoint, xlog: &[C], nome: Nome) -> Result<GradedValue> {
    if !m.is_integral() {
        return Err(Error::Invalid(format!("theta argument {m} has half-integral exponents")));
    }
    let q = nome_value(pp, nome);
    let arg = pp.eval_mono(m, xlog);
    Ok(GradedValue { mono: m.inv_sqrt(), coeff: -theta_p(arg, q, trunc(pp, nome))? })
}

/// `φ(x,y) = θ(xy)θ(ħ)/(θ(x)θ(y))`.
pub fn phi_fn(x: &Monomial, y: &Monomial, pp: &ParamPoint, xlog: &[C]) -> Result<GradedValue> {
    let num = theta(&(x * y), pp, xlog)?.mul(&theta(&Monomial::hbar(), pp, xlog)?);
    let den = theta(x, pp, xlog)?.mul(&theta(y, pp, xlog)?);
    if den.coeff.norm() < 1e-300 {
        return Err(Error::Singular(format!("phi({x}, {y}) has a vanishing denominator")));
    }
    num.div(&den)
}

/// A formal product `coeff · pre · Π θ(m_i)^{e_i}` whose arguments may involve
/// Chern roots.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaTerm {
    pub coeff: C,
    pub pre: Monomial,
    pub factors: Vec<(Monomial, i32, Nome)>,
}

impl Default for ThetaTerm {
    fn default() -> Self {
        Self::one()
    }
}

impl ThetaTerm {
    pub fn one() -> Self {
        Self { coeff: C::new(1.0, 0.0), pre: Monomial::one(), factors: Vec::new() }
    }

    pub fn scalar(c: f64) -> Self {
        Self { coeff: C::new(c, 0.0), ..Self::one() }
    }

    /// A single factor `θ(m)`.
    pub fn th(m: Monomial) -> Self {
        Self { factors: vec![(m, 1, Nome::P)], ..Self::one() }
    }

    /// `φ(x,y)` as a formal product.
    pub fn phi(x: &Monomial, y: &Monomial) -> Self {
        let mut t = Self::th(x * y);
        t.push(Monomial::hbar(), 1);
        t.push(x.clone(), -1);
        t.push(y.clone(), -1);
        t
    }

    /// Multiplies by `θ(m)^e`.
    pub fn push(&mut self, m: Monomial, e: i32) {
        self.factors.push((m, e, Nome::P));
    }

    pub fn times(mut self, o: &ThetaTerm) -> Self {
        self.coeff *= o.coeff;
        self.pre = &self.pre * &o.pre;
        self.factors.extend(o.factors.iter().cloned());
        self
    }

    pub fn over(self, o: &ThetaTerm) -> Self {
        self.times(&o.inverse())
    }

    pub fn inverse(&self) -> Self {
        Self {
            coeff: C::new(1.0, 0.0) / self.coeff,
            pre: self.pre.inv(),
            factors: self.factors.iter().map(|(m, e, n)| (m.clone(), -e, *n)).collect(),
        }
    }

    pub fn neg(mut self) -> Self {
        self.coeff = -self.coeff;
        self
    }

    /// Applies `f` to every monomial (prefactor and theta arguments).
    pub fn map_monomials<F: Fn(&Monomial) -> Monomial>(&self, f: F) -> Self {
        Self {
            coeff: self.coeff,
            pre: f(&self.pre),
            factors: self.factors.iter().map(|(m, e, n)| (f(m), *e, *n)).collect(),
        }
    }

    /// Total monomial part `pre · Π m_i^{-e_i/2}` of the graded value.
    pub fn graded_monomial(&self) -> Monomial {
        self.factors.iter().fold(self.pre.clone(), |acc, (m, e, _)| &acc * &m.inv_sqrt().pow(*e))
    }

    /// Numerical value with Chern-root logarithms `xlog`.
    pub fn eval(&self, pp: &ParamPoint, xlog: &[C]) -> Result<C> {
        self.compile(pp).eval(xlog)
    }

    /// Precomputes the Chern-root independent parts for repeated evaluation.
    pub fn compile(&self, pp: &ParamPoint) -> CompiledTerm {
        let split = |m: &Monomial| -> (C, Vec<(u16, f64)>) {
            let mut c = C::new(0.0, 0.0);
            let mut xs = Vec::new();
            for (v, e) in m.iter() {
                match v {
                    Var::X(a) => xs.push((a, 0.5 * f64::from(e))),
                    _ => c += 0.5 * f64::from(e) * pp.log_var(v, &[]),
                }
            }
            (c, xs)
        };
        let (pc, px) = split(&self.pre);
        let factors = self
            .factors
            .iter()
            .map(|(m, e, n)| {
                let (c, xs) = split(m);
                CompiledFactor { log_const: c, xs, power: *e, nome: nome_value(pp, *n), trunc: trunc(pp, *n) }
            })
            .collect();
        CompiledTerm { coeff: self.coeff, pre_const: pc, pre_x: px, factors }
    }
}

/// One theta factor with its constant logarithm split from its Chern-root part.
#[derive(Clone, Debug)]
pub struct CompiledFactor {
    log_const: C,
    xs: Vec<(u16, f64)>,
    power: i32,
    nome: C,
    trunc: usize,
}

/// A [`ThetaTerm`] bound to a parameter point.
#[derive(Clone, Debug)]
pub struct CompiledTerm {
    coeff: C,
    pre_const: C,
    pre_x: Vec<(u16, f64)>,
    factors: Vec<CompiledFactor>,
}

fn lin(c: C, xs: &[(u16, f64)], xlog: &[C]) -> C {
    xs.iter().fold(c, |acc, (a, e)| acc + *e * xlog[*a as usize])
}

impl CompiledTerm {
    /// Evaluates the term; a vanishing theta in a denominator is an error.
    pub fn eval(&self, xlog: &[C]) -> Result<C> {
        let mut logsum = lin(self.pre_const, &self.pre_x, xlog);
        let mut val = self.coeff;
        for f in &self.factors {
            let l = lin(f.log_const, &f.xs, xlog);
            let t = theta_p(l.exp(), f.nome, f.trunc)?;
            logsum -= 0.5 * f64::from(f.power) * l;
            if f.power < 0 && t.norm() < 1e-300 {
                return Err(Error::Singular("theta factor in a denominator vanishes".into()));
            }
            let sign = if f.power % 2 == 0 { 1.0 } else { -1.0 };
            val *= sign * t.powi(f.power);
        }
        Ok(val * logsum.exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::param::Annuli;

    fn point() -> ParamPoint {
        ParamPoint::sample(3, 2, 11, &Annuli::default()).unwrap()
    }

    #[test]
    fn inversion_and_shift_laws() {
        let pp = point();
        let xlog = [C::new(0.2, 1.3)];
        let z = Monomial::var(Var::X(0)) * Monomial::var(Var::T1);
        let a = theta(&z, &pp, &xlog).unwrap().materialize(&pp, &xlog);
        let b = theta(&z.inv(), &pp, &xlog).unwrap().materialize(&pp, &xlog);
        assert!((a + b).norm() / a.norm() < 1e-12);
        let pz = &z * &Monomial::var(Var::P);
        let c = theta(&pz, &pp, &xlog).unwrap().materialize(&pp, &xlog);
        let pref = Monomial::from_doubled([(Var::P, -1)]) * z.inv();
        let d = -pp.eval_mono(&pref, &xlog) * a;
        assert!((c - d).norm() / d.norm() < 1e-12);
    }

    #[test]
    fn phi_is_symmetric_and_reassociates() {
        let pp = point();
        let xlog = [C::new(0.1, 0.4), C::new(-0.2, 2.0)];
        let x = Monomial::var(Var::X(0));
        let y = Monomial::var(Var::X(1)) * Monomial::var(Var::Z(1));
        let a = phi_fn(&x, &y, &pp, &xlog).unwrap();
        let b = phi_fn(&y, &x, &pp, &xlog).unwrap();
        assert!((a.materialize(&pp, &xlog) - b.materialize(&pp, &xlog)).norm() < 1e-12);
        assert_eq!(a.mono, Monomial::hbar().inv_sqrt());
        let c = ThetaTerm::phi(&x, &y).eval(&pp, &xlog).unwrap();
        assert!((a.materialize(&pp, &xlog) - c).norm() / c.norm() < 1e-12);
    }

    #[test]
    fn phi_with_unit_argument_is_singular() {
        let pp = point();
        let x = Monomial::var(Var::T1);
        assert!(phi_fn(&x, &Monomial::one(), &pp, &[]).is_err());
        assert!(ThetaTerm::phi(&x, &Monomial::one()).eval(&pp, &[]).is_err());
    }

    #[test]
    fn graded_monomial_tracks_half_powers() {
        let x = Monomial::var(Var::X(0));
        let y = Monomial::var(Var::Z(0));
        assert_eq!(ThetaTerm::phi(&x, &y).graded_monomial(), Monomial::hbar().inv_sqrt());
    }

    #[test]
    fn star_theta_uses_dual_nome() {
        let pp = point();
        let m = Monomial::var(Var::T2);
        let a = theta_star(&m, &pp, &[]).unwrap().materialize(&pp, &[]);
        let direct = -pp.t2.val.powf(-0.5) * theta_p(pp.t2.val, pp.p_star().val, 200).unwrap();
        let b = -(-0.5 * pp.t2.log).exp() * theta_p(pp.t2.val, pp.p_star().val, 200).unwrap();
        assert!((a - b).norm() / b.norm() < 1e-12);
        assert!((a.norm() - direct.norm()).abs() / b.norm() < 1e-12);
    }
}
