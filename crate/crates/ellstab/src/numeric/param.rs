//! Parameter points: values and fixed logarithms of every base variable.

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::monomial::{Monomial, Var};
use crate::{Error, Result};

/// Moduli ranges used when sampling generic points.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Annuli {
    pub p: (f64, f64),
    pub t: (f64, f64),
    pub u: (f64, f64),
    pub z: (f64, f64),
}

impl Default for Annuli {
    fn default() -> Self {
        Self { p: (0.05, 0.15), t: (0.3, 0.9), u: (0.5, 2.5), z: (0.4, 0.8) }
    }
}

/// A variable value together with the logarithm fixed for it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Slot {
    pub val: C,
    pub log: C,
}

impl Slot {
    /// Uses the principal logarithm.
    pub fn new(val: C) -> Self {
        Self { val, log: val.ln() }
    }

    pub fn from_log(log: C) -> Self {
        Self { val: log.exp(), log }
    }

    fn polar(modulus: f64, phase: f64) -> Self {
        Self::from_log(C::new(modulus.ln(), phase))
    }
}

/// Fixed generic complex values and logarithms for `t1, t2, p`, the framing
/// weights `u_r` and the Kähler variables `z_i`.
///
/// Chern roots are not stored here; evaluators pass their logarithms
/// separately so that one point can serve many substitutions.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamPoint {
    pub n: usize,
    pub t1: Slot,
    pub t2: Slot,
    pub p: Slot,
    pub u: Vec<Slot>,
    pub z: Vec<Slot>,
    /// Number of factors kept in infinite products.
    pub trunc: usize,
    /// Relative tolerance for identity checks.
    pub tol: f64,
    pub seed: u64,
}

/// Truncation order for `(z;q)_∞`: `|q|^M` below machine precision, clamped to `[20, 4000]`.
pub fn trunc_for(q: C) -> usize {
    let r = q.norm();
    if r == 0.0 {
        return 20;
    }
    let m = ((1e-17f64).ln() / r.ln()).ceil();
    if !m.is_finite() || m > 4000.0 {
        4000
    } else {
        (m as usize).max(20)
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

fn phase(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(-PI..PI)
}

impl ParamPoint {
    /// Samples a point deterministically from `seed`.
    ///
    /// Moduli are log-uniform in `annuli`; `|t1| < |t2|`; framing moduli are
    /// strictly decreasing in framing order, so earlier framings dominate.
    pub fn sample(n: usize, n_framings: usize, seed: u64, annuli: &Annuli) -> Result<Self> {
        if n < 3 {
            return Err(Error::Invalid(format!("N must be at least 3, got {n}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = Slot::polar(log_uniform(&mut rng, annuli.p), phase(&mut rng));
        let mut a = log_uniform(&mut rng, annuli.t);
        let mut b = log_uniform(&mut rng, annuli.t);
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        let t1 = Slot::polar(a, phase(&mut rng));
        let t2 = Slot::polar(b, phase(&mut rng));
        let mut mods: Vec<f64> = (0..n_framings).map(|_| log_uniform(&mut rng, annuli.u)).collect();
        mods.sort_by(|x, y| y.partial_cmp(x).expect("finite moduli"));
        let u = mods.iter().map(|&m| Slot::polar(m, phase(&mut rng))).collect();
        let z = (0..n).map(|_| Slot::polar(log_uniform(&mut rng, annuli.z), phase(&mut rng))).collect();
        Ok(Self { n, t1, t2, p, u, z, trunc: trunc_for(p.val), tol: 1e-8, seed })
    }

    /// Replaces `p` and recomputes the truncation order.
    pub fn with_p(mut self, p: Slot) -> Self {
        self.p = p;
        self.trunc = trunc_for(p.val);
        self
    }

    /// Ensures there are at least `k` framing weights, appending sampled ones
    /// of decreasing modulus.
    pub fn ensure_framings(&mut self, k: usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x9e37_79b9);
        while self.u.len() < k {
            let last = self.u.last().map(|s| s.val.norm()).unwrap_or(2.0);
            let m = last * rng.gen_range(0.4..0.8);
            self.u.push(Slot::polar(m, phase(&mut rng)));
        }
    }

    /// `log ħ = log t1 + log t2`.
    pub fn log_hbar(&self) -> C {
        self.t1.log + self.t2.log
    }

    pub fn hbar(&self) -> C {
        self.log_hbar().exp()
    }

    /// `ħ^{1/2}` through the fixed logarithms.
    pub fn hbar_half(&self) -> C {
        (0.5 * self.log_hbar()).exp()
    }

    /// The dual nome `p* = p/ħ`.
    pub fn p_star(&self) -> Slot {
        Slot::from_log(self.p.log - self.log_hbar())
    }

    /// Logarithm of a base variable; Chern roots are read from `xlog`.
    pub fn log_var(&self, v: Var, xlog: &[C]) -> C {
        match v {
            Var::Sigma => C::new(0.0, PI),
            Var::T1 => self.t1.log,
            Var::T2 => self.t2.log,
            Var::P => self.p.log,
            Var::U(r) => self.u[r as usize].log,
            Var::Z(i) => self.z[i as usize].log,
            Var::X(a) => xlog[a as usize],
        }
    }

    /// Logarithm of a monomial.
    pub fn log_mono(&self, m: &Monomial, xlog: &[C]) -> C {
        m.iter().map(|(v, e)| 0.5 * f64::from(e) * self.log_var(v, xlog)).sum()
    }

    /// Value of a monomial.
    pub fn eval_mono(&self, m: &Monomial, xlog: &[C]) -> C {
        self.log_mono(m, xlog).exp()
    }

    /// The largest variable index referenced for framings and Kähler variables.
    pub fn check_covers(&self, m: &Monomial) -> Result<()> {
        for (v, _) in m.iter() {
            match v {
                Var::U(r) if r as usize >= self.u.len() => {
                    return Err(Error::Invalid(format!("no value for framing weight u{r}")))
                }
                Var::Z(i) if i as usize >= self.z.len() => {
                    return Err(Error::Invalid(format!("no value for Kähler variable z{i}")))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_is_deterministic_and_respects_annuli() {
        let a = ParamPoint::sample(3, 2, 7, &Annuli::default()).unwrap();
        let b = ParamPoint::sample(3, 2, 7, &Annuli::default()).unwrap();
        assert_eq!(a, b);
        assert!(a.p.val.norm() < 0.15 && a.p.val.norm() > 0.05);
        assert!(a.t1.val.norm() < a.t2.val.norm());
        assert!(a.u[0].val.norm() > a.u[1].val.norm());
    }

    #[test]
    fn half_hbar_squares_to_hbar() {
        let pp = ParamPoint::sample(4, 1, 3, &Annuli::default()).unwrap();
        let h = pp.hbar_half();
        assert!((h * h - pp.t1.val * pp.t2.val).norm() < 1e-14);
    }

    #[test]
    fn rejects_small_n() {
        assert!(ParamPoint::sample(2, 1, 0, &Annuli::default()).is_err());
    }

    #[test]
    fn truncation_is_clamped() {
        assert_eq!(trunc_for(C::new(1e-30, 0.0)), 20);
        assert_eq!(trunc_for(C::new(0.1, 0.0)), 17.max(20));
        assert_eq!(trunc_for(C::new(0.999999, 0.0)), 4000);
    }
}
