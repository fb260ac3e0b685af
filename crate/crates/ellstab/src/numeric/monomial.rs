//! Exact monomials over the base variables with half-integer exponents.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Div, Mul};

/// A base variable of the parameter space.
///
/// `Sigma` is the formal sign variable with value `-1` and logarithm `iπ`;
/// `X(a)` is the Chern root attached to box `a` of the fixed point under study.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Sigma,
    T1,
    T2,
    P,
    U(u16),
    Z(u16),
    X(u16),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Sigma => write!(f, "s"),
            Var::T1 => write!(f, "t1"),
            Var::T2 => write!(f, "t2"),
            Var::P => write!(f, "p"),
            Var::U(r) => write!(f, "u{r}"),
            Var::Z(i) => write!(f, "z{i}"),
            Var::X(a) => write!(f, "x{a}"),
        }
    }
}

/// Product of base variables; exponents are stored doubled so that half
/// powers stay exact.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    exps: BTreeMap<Var, i32>,
}

impl Monomial {
    /// The unit monomial.
    pub fn one() -> Self {
        Self::default()
    }

    /// A single variable to the first power.
    pub fn var(v: Var) -> Self {
        Self::var_pow(v, 1)
    }

    /// `v^k` for integer `k`.
    pub fn var_pow(v: Var, k: i32) -> Self {
        Self::from_doubled([(v, 2 * k)])
    }

    /// Builds a monomial from `(variable, doubled exponent)` pairs.
    pub fn from_doubled<I: IntoIterator<Item = (Var, i32)>>(it: I) -> Self {
        let mut m = Self::one();
        for (v, e) in it {
            m.add_doubled(v, e);
        }
        m
    }

    /// `ħ = t1 t2`.
    pub fn hbar() -> Self {
        Self::from_doubled([(Var::T1, 2), (Var::T2, 2)])
    }

    /// `ħ^k`.
    pub fn hbar_pow(k: i32) -> Self {
        Self::hbar().pow(k)
    }

    fn add_doubled(&mut self, v: Var, e: i32) {
        if e == 0 {
            return;
        }
        let slot = self.exps.entry(v).or_insert(0);
        *slot += e;
        if *slot == 0 {
            self.exps.remove(&v);
        }
    }

    /// Doubled exponent of `v`.
    pub fn doubled(&self, v: Var) -> i32 {
        self.exps.get(&v).copied().unwrap_or(0)
    }

    /// Exponent of `v` as a float (possibly half-integer).
    pub fn exponent(&self, v: Var) -> f64 {
        f64::from(self.doubled(v)) / 2.0
    }

    /// Iterates over `(variable, doubled exponent)` pairs in variable order.
    pub fn iter(&self) -> impl Iterator<Item = (Var, i32)> + '_ {
        self.exps.iter().map(|(v, e)| (*v, *e))
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    /// True when every exponent is an integer.
    pub fn is_integral(&self) -> bool {
        self.exps.values().all(|e| e % 2 == 0)
    }

    /// Integer power.
    pub fn pow(&self, k: i32) -> Self {
        Self::from_doubled(self.iter().map(|(v, e)| (v, e * k)))
    }

    /// `m^{-1/2}`. Requires integral exponents.
    pub fn inv_sqrt(&self) -> Self {
        debug_assert!(self.is_integral(), "inv_sqrt of a half-integral monomial");
        Self::from_doubled(self.iter().map(|(v, e)| (v, -e / 2)))
    }

    pub fn inv(&self) -> Self {
        self.pow(-1)
    }

    /// Replaces every Chern root `X(a)` by `f(a)`.
    pub fn subst_x<F: Fn(u16) -> Monomial>(&self, f: F) -> Self {
        let mut out = Self::one();
        for (v, e) in self.iter() {
            match v {
                Var::X(a) => {
                    debug_assert!(e % 2 == 0);
                    out = &out * &f(a).pow(e / 2);
                }
                _ => out.add_doubled(v, e),
            }
        }
        out
    }

    /// If the monomial equals `p^k` up to an even power of the sign variable,
    /// returns `k`. Such arguments are exact zeros of `θ_p`.
    pub fn p_power(&self) -> Option<i32> {
        let mut k = 0;
        for (v, e) in self.iter() {
            match v {
                Var::P if e % 2 == 0 => k = e / 2,
                Var::Sigma if e % 4 == 0 => {}
                _ => return None,
            }
        }
        Some(k)
    }

    /// True when the monomial involves some Chern root.
    pub fn has_x(&self) -> bool {
        self.exps.keys().any(|v| matches!(v, Var::X(_)))
    }

    /// Shifts framing and Chern-root indices, used to embed a factor of a
    /// tensor product into the full space.
    pub fn reindex(&self, u_off: u16, x_off: u16) -> Self {
        Self::from_doubled(self.iter().map(|(v, e)| {
            let w = match v {
                Var::U(r) => Var::U(r + u_off),
                Var::X(a) => Var::X(a + x_off),
                other => other,
            };
            (w, e)
        }))
    }
}

impl Mul for &Monomial {
    type Output = Monomial;
    fn mul(self, o: &Monomial) -> Monomial {
        let mut r = self.clone();
        for (v, e) in o.iter() {
            r.add_doubled(v, e);
        }
        r
    }
}

impl Mul for Monomial {
    type Output = Monomial;
    fn mul(self, o: Monomial) -> Monomial {
        &self * &o
    }
}

impl Div for &Monomial {
    type Output = Monomial;
    fn div(self, o: &Monomial) -> Monomial {
        let mut r = self.clone();
        for (v, e) in o.iter() {
            r.add_doubled(v, -e);
        }
        r
    }
}

impl Div for Monomial {
    type Output = Monomial;
    fn div(self, o: Monomial) -> Monomial {
        &self / &o
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .iter()
            .map(|(v, e)| {
                if e == 2 {
                    format!("{v}")
                } else if e % 2 == 0 {
                    format!("{v}^{}", e / 2)
                } else {
                    format!("{v}^({e}/2)")
                }
            })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_adds_exponents_and_drops_zeros() {
        let a = Monomial::var(Var::T1) * Monomial::var_pow(Var::T2, 2);
        let b = Monomial::var_pow(Var::T1, -1);
        let c = &a * &b;
        assert_eq!(c.doubled(Var::T1), 0);
        assert_eq!(c.exponent(Var::T2), 2.0);
        assert_eq!(c.iter().count(), 1);
    }

    #[test]
    fn inv_sqrt_gives_half_exponents() {
        let m = Monomial::var(Var::X(0)) / Monomial::var(Var::U(0));
        let h = m.inv_sqrt();
        assert_eq!(h.exponent(Var::X(0)), -0.5);
        assert_eq!(h.exponent(Var::U(0)), 0.5);
        assert!(!h.is_integral());
    }

    #[test]
    fn p_power_detects_exact_zeros() {
        assert_eq!(Monomial::one().p_power(), Some(0));
        assert_eq!(Monomial::var_pow(Var::P, -2).p_power(), Some(-2));
        assert_eq!(Monomial::var_pow(Var::Sigma, 2).p_power(), Some(0));
        assert_eq!(Monomial::var(Var::Sigma).p_power(), None);
        assert_eq!(Monomial::var(Var::T1).p_power(), None);
    }

    #[test]
    fn substitution_replaces_chern_roots() {
        let m = Monomial::var(Var::X(1)) / Monomial::var(Var::X(0));
        let s = m.subst_x(|a| {
            if a == 0 {
                Monomial::var(Var::U(0))
            } else {
                Monomial::var(Var::U(0)) * Monomial::var_pow(Var::T2, -1)
            }
        });
        assert_eq!(s, Monomial::var_pow(Var::T2, -1));
    }

    #[test]
    fn reindex_moves_framings_and_boxes() {
        let m = Monomial::var(Var::X(0)) / Monomial::var(Var::U(1));
        let r = m.reindex(2, 5);
        assert_eq!(r.doubled(Var::X(5)), 2);
        assert_eq!(r.doubled(Var::U(3)), -2);
    }
}
