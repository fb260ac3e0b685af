//! Run configuration: an optional JSON file merged with command-line flags.

use std::path::Path;

use anyhow::{bail, Context};
use clap::ValueEnum;
use ellstab::combinatorics::{ColoredPartition, DegreeRule, FixedPoint};
use ellstab::envelopes::Variant;
use ellstab::numeric::{Annuli, ParamPoint, Slot};
use ellstab::rmatrix::Route;
use ellstab::vertexfn::{FramingShift, KahlerExponent};
use num_complex::Complex64 as C;
use serde::Deserialize;

/// Envelope normalization selectable from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantArg {
    Plain,
    Hat,
    Tilde,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Plain => Variant::Plain,
            VariantArg::Hat => Variant::Hat,
            VariantArg::Tilde => Variant::Tilde,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleArg {
    Hat,
    Plain,
    Dual,
    Polarization,
}

impl From<RuleArg> for DegreeRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Hat => DegreeRule::Hat,
            RuleArg::Plain => DegreeRule::Plain,
            RuleArg::Dual => DegreeRule::Dual,
            RuleArg::Polarization => DegreeRule::Polarization,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RouteArg {
    Restriction,
    Generic,
}

impl From<RouteArg> for Route {
    fn from(r: RouteArg) -> Self {
        match r {
            RouteArg::Restriction => Route::Restriction,
            RouteArg::Generic => Route::Generic,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExponentArg {
    Printed,
    Symmetrized,
}

impl From<ExponentArg> for KahlerExponent {
    fn from(e: ExponentArg) -> Self {
        match e {
            ExponentArg::Printed => KahlerExponent::Printed,
            ExponentArg::Symmetrized => KahlerExponent::Symmetrized,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FramingArg {
    None,
    InverseHbar,
}

impl From<FramingArg> for FramingShift {
    fn from(f: FramingArg) -> Self {
        match f {
            FramingArg::None => FramingShift::None,
            FramingArg::InverseHbar => FramingShift::InverseHbar,
        }
    }
}

/// A fixed point written as `[[color, [rows...]], ...]`.
pub type Label = Vec<(usize, Vec<usize>)>;

/// Explicit values replacing sampled parameters, each complex number as `[re, im]`.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub t1: Option<[f64; 2]>,
    pub t2: Option<[f64; 2]>,
    pub p: Option<[f64; 2]>,
    pub u: Option<Vec<[f64; 2]>>,
    pub z: Option<Vec<[f64; 2]>>,
}

impl Overrides {
    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

/// Everything a run depends on. Fields left out fall back to command defaults.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub annuli: Option<Annuli>,
    #[serde(default)]
    pub params: Overrides,
    pub v: Option<Vec<usize>>,
    pub w: Option<Vec<usize>>,
    pub lambda: Option<Label>,
    pub mu: Option<Label>,
    pub boxes: Option<Vec<usize>>,
    pub colors: Option<Vec<usize>>,
    #[serde(rename = "D")]
    pub max_degree: Option<usize>,
    #[serde(rename = "M")]
    pub trunc: Option<usize>,
    pub tol: Option<f64>,
    pub samples: Option<usize>,
    pub variant: Option<VariantArg>,
    pub rule: Option<RuleArg>,
    pub route: Option<RouteArg>,
    pub exponent: Option<ExponentArg>,
    pub framing_shift: Option<FramingArg>,
    pub only: Option<Vec<u8>>,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Fills every field of `self` that `flags` sets.
    pub fn merge(mut self, flags: RunConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $(if flags.$f.is_some() { self.$f = flags.$f; })* };
        }
        take!(
            n,
            seed,
            annuli,
            v,
            w,
            lambda,
            mu,
            boxes,
            colors,
            max_degree,
            trunc,
            tol,
            samples,
            variant,
            rule,
            route,
            exponent,
            framing_shift,
            only
        );
        self
    }

    pub fn n(&self) -> usize {
        self.n.unwrap_or(3)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(1)
    }

    pub fn tol(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    pub fn samples(&self, default: usize) -> usize {
        self.samples.unwrap_or(default)
    }

    /// Checks the fields that do not depend on the command.
    pub fn validate(&self) -> anyhow::Result<()> {
        let n = self.n();
        if n < 3 {
            bail!("N must be at least 3, got {n}");
        }
        for (name, vec) in [("v", &self.v), ("w", &self.w)] {
            if let Some(x) = vec {
                if x.len() != n {
                    bail!("{name} has {} entries but N = {n}", x.len());
                }
            }
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                bail!("tol must be positive, got {t}");
            }
        }
        for c in self.colors.iter().flatten() {
            if *c >= n {
                bail!("color {c} is not below N = {n}");
            }
        }
        Ok(())
    }

    pub fn required_v(&self) -> anyhow::Result<Vec<usize>> {
        self.v.clone().context("this command needs --v")
    }

    pub fn required_w(&self) -> anyhow::Result<Vec<usize>> {
        self.w.clone().context("this command needs --w")
    }

    pub fn lambda(&self) -> anyhow::Result<Option<FixedPoint>> {
        self.lambda.as_ref().map(|l| fixed_point(self.n(), l)).transpose()
    }

    pub fn mu(&self) -> anyhow::Result<Option<FixedPoint>> {
        self.mu.as_ref().map(|l| fixed_point(self.n(), l)).transpose()
    }

    /// Colors padded with zeros to `k` entries.
    pub fn colors(&self, k: usize) -> anyhow::Result<Vec<usize>> {
        let mut c = self.colors.clone().unwrap_or_default();
        if c.len() > k {
            bail!("expected at most {k} colors, got {}", c.len());
        }
        c.resize(k, 0);
        Ok(c)
    }

    /// Samples a point for `n_framings` framings, then applies the overrides.
    pub fn param_point(&self, n_framings: usize, seed: u64) -> anyhow::Result<ParamPoint> {
        let annuli = self.annuli.clone().unwrap_or_default();
        let pp = ParamPoint::sample(self.n(), n_framings, seed, &annuli)?;
        self.apply_overrides(pp, n_framings)
    }

    pub fn apply_overrides(&self, mut pp: ParamPoint, n_framings: usize) -> anyhow::Result<ParamPoint> {
        let o = &self.params;
        let slot = |c: [f64; 2]| Slot::new(C::new(c[0], c[1]));
        if let Some(c) = o.t1 {
            pp.t1 = slot(c);
        }
        if let Some(c) = o.t2 {
            pp.t2 = slot(c);
        }
        if let Some(c) = o.p {
            let s = slot(c);
            if !(s.val.norm() < 1.0 && s.val.norm() > 0.0) {
                bail!("|p| must lie in (0, 1)");
            }
            pp = pp.with_p(s);
        }
        if let Some(u) = &o.u {
            if u.len() < n_framings {
                bail!("params.u has {} entries, this command needs {n_framings}", u.len());
            }
            pp.u = u.iter().copied().map(slot).collect();
        }
        if let Some(z) = &o.z {
            if z.len() != pp.n {
                bail!("params.z has {} entries but N = {}", z.len(), pp.n);
            }
            pp.z = z.iter().copied().map(slot).collect();
        }
        if let Some(m) = self.trunc {
            if m == 0 {
                bail!("M must be positive");
            }
            pp.trunc = m;
        }
        if let Some(t) = self.tol {
            pp.tol = t;
        }
        Ok(pp)
    }
}

/// Builds a fixed point from its label.
pub fn fixed_point(n: usize, label: &Label) -> anyhow::Result<FixedPoint> {
    let parts = label
        .iter()
        .map(|(c, rows)| {
            if *c >= n {
                bail!("color {c} is not below N = {n}");
            }
            Ok(ColoredPartition::new(rows.clone(), *c)?)
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(FixedPoint::new(n, parts)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_fields_parse() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"N": 4, "seed": 9, "v": [1,0,0,0], "lambda": [[0,[2,1]]], "variant": "tilde",
                "framing_shift": "inverse-hbar", "params": {"t1": [0.3, 0.1]}}"#,
        )
        .unwrap();
        assert_eq!(cfg.n(), 4);
        assert_eq!(cfg.variant, Some(VariantArg::Tilde));
        assert_eq!(cfg.framing_shift, Some(FramingArg::InverseHbar));
        assert_eq!(cfg.lambda, Some(vec![(0, vec![2, 1])]));
        assert!(!cfg.params.is_empty());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"n": 3}"#).is_err());
    }

    #[test]
    fn flags_win_over_file() {
        let file = RunConfig { n: Some(4), seed: Some(2), ..Default::default() };
        let flags = RunConfig { seed: Some(5), ..Default::default() };
        let m = file.merge(flags);
        assert_eq!((m.n(), m.seed()), (4, 5));
    }

    #[test]
    fn overrides_replace_sampled_values() {
        let cfg = RunConfig { params: Overrides { p: Some([0.1, 0.0]), ..Default::default() }, ..Default::default() };
        let pp = cfg.param_point(1, 3).unwrap();
        assert_eq!(pp.p.val, C::new(0.1, 0.0));
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn validation_catches_bad_lengths() {
        let cfg = RunConfig { v: Some(vec![1, 0]), ..Default::default() };
        assert!(cfg.validate().is_err());
    }
}
