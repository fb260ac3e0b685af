//! One function per subcommand. Each returns the result payload together with
//! the checks that decide the exit code.

use anyhow::{bail, Context};
use ellstab::acceptance::{self, IDS};
use ellstab::combinatorics::{
    fixed_points, partitions, weight_identity_check, ColoredPartition, DegreeRule, FixedPoint,
};
use ellstab::envelopes::{
    kahler_plain, random_slots, restrict_spread, shuffle_check, ContourOpts, Envelope, ShiftConvention, Variant,
};
use ellstab::fockrep::{a_minus, a_plus, c_pm, dual_form_residual, k_eigen_check, weight};
use ellstab::numeric::{modular_check, ParamPoint, Slot};
use ellstab::rmatrix::{composition_residual, rbar, weight_block_residual, ybe_check, Factor, RSettings};
use ellstab::scalars::{eta_table, rll_scalar_identity, scalar_point};
use ellstab::vertexfn::{
    bethe_solve, degree_vectors, quasi_periodicity_residual, restrict_stab, BetheSystem, NewtonOpts, VertexOpts,
    VertexSeries,
};
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{RuleArg, RunConfig, VariantArg};
use crate::json::{complex, complex_list, label, matrix, param_point, partition};

/// A residual compared against its tolerance.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.value < self.tol
    }
}

/// What a command produced.
#[derive(Debug)]
pub struct Outcome {
    pub pp: Option<ParamPoint>,
    pub result: Value,
    pub checks: Vec<Check>,
    /// Diagnostics that do not decide the exit code.
    pub reported: Vec<(String, f64)>,
    /// Wall times of sub-steps in seconds.
    pub timings: Vec<(String, f64)>,
}

impl Outcome {
    fn new(pp: Option<ParamPoint>, result: Value) -> Self {
        Self { pp, result, checks: Vec::new(), reported: Vec::new(), timings: Vec::new() }
    }

    fn check(mut self, name: &str, value: f64, tol: f64) -> Self {
        let value = if value.is_nan() { f64::INFINITY } else { value };
        self.checks.push(Check { name: name.into(), value, tol });
        self
    }

    fn report(mut self, name: &str, value: f64) -> Self {
        self.reported.push((name.into(), value));
        self
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn param_point_json(&self) -> Value {
        self.pp.as_ref().map_or(Value::Null, param_point)
    }
}

fn rel(a: C, b: C) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

fn rule(cfg: &RunConfig) -> DegreeRule {
    cfg.rule.unwrap_or(RuleArg::Hat).into()
}

/// The fixed point given by `--lambda`, or every fixed point of `(v, w)`.
fn targets(cfg: &RunConfig) -> anyhow::Result<Vec<FixedPoint>> {
    if let Some(fp) = cfg.lambda()? {
        return Ok(vec![fp]);
    }
    let fps = fixed_points(&cfg.required_v()?, &cfg.required_w()?, cfg.n())?;
    if fps.is_empty() {
        bail!("the space with these v and w has no fixed points");
    }
    Ok(fps)
}

pub fn fixed_points_cmd(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let n = cfg.n();
    let (v, w) = (cfg.required_v()?, cfg.required_w()?);
    let fps = fixed_points(&v, &w, n)?;
    let failures = fps.iter().flat_map(|fp| &fp.parts).filter(|part| weight_identity_check(part, n).is_err()).count();
    let points: Vec<Value> =
        fps.iter().map(|fp| json!({ "label": label(fp), "size": fp.size(), "v": fp.v(), "w": fp.w() })).collect();
    let result = json!({ "N": n, "v": v, "w": w, "count": fps.len(), "points": points });
    Ok(Outcome::new(None, result).check("weight_identity_failures", failures as f64, 0.5))
}

pub fn stab(cfg: &RunConfig, seed: u64) -> anyhow::Result<Outcome> {
    let fps = targets(cfg)?;
    let pp = cfg.param_point(fps[0].parts.len(), seed)?;
    let variant: Variant = cfg.variant.unwrap_or(VariantArg::Plain).into();
    let kahler = kahler_plain(cfg.n());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_sym: f64 = 0.0;
    let mut entries = Vec::new();
    for fp in &fps {
        let env = Envelope::new(fp, variant, &kahler, rule(cfg))?;
        let mut evals = Vec::new();
        for _ in 0..cfg.samples(3) {
            let slots = random_slots(&fp.v(), &mut rng);
            let value = env.eval_sym(&pp, &slots)?;
            let mut permuted = slots.clone();
            for col in &mut permuted {
                let k = col.len().min(1);
                col.rotate_left(k);
            }
            worst_sym = worst_sym.max(rel(value, env.eval_sym(&pp, &permuted)?));
            let x_log: Vec<Value> = slots.iter().map(|col| complex_list(col)).collect();
            evals.push(json!({ "x_log": x_log, "value": complex(value) }));
        }
        entries.push(json!({ "label": label(fp), "evaluations": evals }));
    }
    let result = json!({ "variant": format!("{variant:?}"), "envelopes": entries });
    Ok(Outcome::new(Some(pp), result).check("symmetry", worst_sym, cfg.tol(1e-9)))
}

pub fn restrict(cfg: &RunConfig, seed: u64) -> anyhow::Result<Outcome> {
    let n = cfg.n();
    let rows = targets(cfg)?;
    let basis = fixed_points(&rows[0].v(), &rows[0].w(), n)?;
    let pp = cfg.param_point(rows[0].parts.len(), seed)?;
    let variant: Variant = cfg.variant.unwrap_or(VariantArg::Plain).into();
    let kahler = kahler_plain(n);
    let contour = ContourOpts::default();
    let values: Vec<Vec<(C, f64)>> = rows
        .par_iter()
        .map(|lam| -> anyhow::Result<Vec<(C, f64)>> {
            let env = Envelope::new(lam, variant, &kahler, rule(cfg))?;
            basis.iter().map(|mu| Ok(restrict_spread(&env.terms, lam, &pp, mu, &contour)?)).collect()
        })
        .collect::<anyhow::Result<_>>()?;
    // Per-entry spreads are relative; rescale them by the largest entry of the row.
    let spread = values.iter().fold(0.0f64, |m, row| {
        let scale = row.iter().fold(0.0f64, |s, v| s.max(v.0.norm())).max(1e-300);
        row.iter().fold(m, |m, v| m.max(v.1 * v.0.norm() / scale))
    });
    let result = json!({
        "variant": format!("{variant:?}"),
        "rows": rows.iter().map(label).collect::<Vec<_>>(),
        "columns": basis.iter().map(label).collect::<Vec<_>>(),
        "matrix": matrix(rows.len(), basis.len(), |i, j| values[i][j].0),
    });
    Ok(Outcome::new(Some(pp), result).report("direction_spread", spread))
}

fn single_framing(n: usize, size: usize, color: usize) -> anyhow::Result<Vec<FixedPoint>> {
    partitions(size)
        .into_iter()
        .map(|rows| Ok(FixedPoint::new(n, vec![ColoredPartition::new(rows, color)?])?))
        .collect()
}

pub fn shuffle(cfg: &RunConfig, seed: u64) -> anyhow::Result<Outcome> {
    let n = cfg.n();
    let boxes = cfg.boxes.clone().context("shuffle-check needs --boxes a,b")?;
    let [a, b] = boxes[..] else { bail!("--boxes takes exactly two sizes") };
    let colors = cfg.colors(2)?;
    let rule = rule(cfg);
    let conv = ShiftConvention::for_rule(rule).context("shuffle shifts are known only for the hat and dual rules")?;
    let variants: Vec<Variant> = cfg.variant.map_or(Variant::ALL.to_vec(), |v| vec![v.into()]);
    let pp = cfg.param_point(2, seed)?;
    let (left, right) = (single_framing(n, a, colors[0])?, single_framing(n, b, colors[1])?);
    let mut cases: Vec<(&FixedPoint, &FixedPoint, Variant)> = Vec::new();
    for l in &left {
        for r in &right {
            cases.extend(variants.iter().map(|&v| (l, r, v)));
        }
    }
    let samples = cfg.samples(5);
    let residuals: Vec<f64> = cases
        .par_iter()
        .map(|(l, r, v)| shuffle_check(l, r, *v, rule, conv, &pp, samples, seed))
        .collect::<ellstab::Result<_>>()?;
    let worst = residuals.iter().fold(0.0f64, |m, &r| m.max(r));
    let entries: Vec<Value> = cases
        .iter()
        .zip(&residuals)
        .map(|((l, r, v), res)| {
            json!({ "left": label(l), "right": label(r), "variant": format!("{v:?}"), "residual": res })
        })
        .collect();
    let result = json!({ "convention": format!("{conv:?}"), "samples": samples, "cases": entries });
    Ok(Outcome::new(Some(pp), result).check("max_relative", worst, cfg.tol(1e-8)))
}

fn r_settings(cfg: &RunConfig, seed: u64) -> RSettings {
    let mut set = RSettings { rule: rule(cfg), seed, ..RSettings::default() };
    if let Some(v) = cfg.variant {
        set.variant = v.into();
    }
    if let Some(r) = cfg.route {
        set.route = r.into();
    }
    set
}

fn factors(pp: &ParamPoint, colors: &[usize]) -> Vec<Factor> {
    colors.iter().zip(&pp.u).map(|(&color, &u)| Factor { color, u }).collect()
}

pub fn rmatrix(cfg: &RunConfig, seed: u64) -> anyhow::Result<Outcome> {
    let n = cfg.n();
    let v = cfg.required_v()?;
    let colors = cfg.colors(2)?;
    let pp = cfg.param_point(2, seed)?;
    let set = r_settings(cfg, seed);
    let f = factors(&pp, &colors);
    let pr = rbar(&pp, f[0], f[1], &v, &vec![0; n], &set)?;
    let comp = composition_residual(&pp, f[0], f[1], &v, &set)?;
    let block = weight_block_residual(&pp, f[0], f[1], v.iter().sum(), &set)?;
    let states: Vec<Value> = pr.states.iter().map(|(a, b)| json!([partition(a), partition(b)])).collect();
    let result = json!({
        "colors": colors,
        "v": v,
        "route": format!("{:?}", set.route),
        "states": states,
        "matrix": matrix(pr.r.nrows(), pr.r.ncols(), |i, j| pr.r[(i, j)]),
    });
    Ok(Outcome::new(Some(pp), result)
        .check("composition", comp, cfg.tol(1e-8))
        .check("off_weight", block, cfg.tol(1e-8))
        .report("diagnostic", pr.diagnostic))
}

pub fn ybe(cfg: &RunConfig, seed: u64) -> anyhow::Result<Outcome> {
    let v = cfg.required_v()?;
    let colors = cfg.colors(3)?;
    let pp = cfg.param_point(3, seed)?;
    let set = r_settings(cfg, seed);
    let f = factors(&pp, &colors);
    let r = ybe_check(&pp, [f[0], f[1], f[2]], &v, &set)?;
    let result = json!({ "colors": colors, "v": v, "residual": r });
    Ok(Outcome::new(Some(pp), result).check("dybe", r, cfg.tol(1e-6)))
}

pub fn fock(cfg: &RunConfig, seed: u64) -> anyhow::Result<Outcome> {
    let n = cfg.n();
    let fp = cfg.lambda()?.context("fock needs --lambda with one colored partition")?;
    let [lam] = &fp.parts[..] else { bail!("fock takes a single colored partition") };
    let pp = cfg.param_point(1, seed)?;
    let origin = [C::new(0.0, 0.0)];
    let mut worst: f64 = 0.0;
    let mut coefficients = |boxes: Vec<(usize, usize)>, plus: bool| -> anyhow::Result<Vec<Value>> {
        boxes
            .into_iter()
            .map(|x| {
                let pair = if plus { a_plus(lam, x, n)? } else { a_minus(lam, x, n)? };
                let r = dual_form_residual(&pp, &pair)?;
                worst = worst.max(r);
                let forms = [pair.0.eval(&pp, &origin)?, pair.1.eval(&pp, &origin)?];
                Ok(json!({ "box": [x.0, x.1], "forms": complex_list(&forms), "residual": r }))
            })
            .collect()
    };
    let plus = coefficients(lam.addable(), true)?;
    let minus = coefficients(lam.removable(), false)?;
    let (cp, cm) = c_pm(&pp)?;
    let weights: Vec<i32> = (0..n).map(|j| weight(lam, j, n)).collect();
    let k_ok = k_eigen_check(lam, n);
    let identity_ok = weight_identity_check(lam, n).is_ok();
    let result = json!({
        "partition": partition(lam),
        "weights": weights,
        "a_plus": plus,
        "a_minus": minus,
        "c_plus": complex(cp),
        "c_minus": complex(cm),
    });
    Ok(Outcome::new(Some(pp), result)
        .check("dual_forms", worst, cfg.tol(1e-10))
        .check("k_eigenvalue_failures", f64::from(u8::from(!k_ok)), 0.5)
        .check("weight_identity_failures", f64::from(u8::from(!identity_ok)), 0.5))
}

pub fn vertex(cfg: &RunConfig, seed: u64) -> anyhow::Result<Outcome> {
    let n = cfg.n();
    let lambdas = targets(cfg)?;
    let mus = match cfg.mu()? {
        Some(mu) => vec![mu],
        None => fixed_points(&lambdas[0].v(), &lambdas[0].w(), n)?,
    };
    let pp = cfg.param_point(lambdas[0].parts.len(), seed)?;
    let mut opts = VertexOpts { rule: rule(cfg), ..VertexOpts::default() };
    if let Some(e) = cfg.exponent {
        opts.exponent = e.into();
    }
    if let Some(f) = cfg.framing_shift {
        opts.framing = f.into();
    }
    let max_degree = cfg.max_degree.unwrap_or(2);
    let pairs: Vec<(&FixedPoint, &FixedPoint)> = lambdas.iter().flat_map(|l| mus.iter().map(move |m| (l, m))).collect();
    let series: Vec<(Value, [f64; 3])> = pairs
        .par_iter()
        .map(|(lam, mu)| -> anyhow::Result<(Value, [f64; 3])> {
            let direct = restrict_stab(&pp, lam, mu, None, &opts)?;
            let s = VertexSeries::new(&pp, lam, mu, max_degree, &opts)?;
            let c0 = s.coefficient(&vec![0; mu.size()]).context("the series lacks d = 0")?;
            let d0 = (c0 - direct).norm() / direct.norm().max(1e-300);
            let oracle = s.oracle_residual(&pp)?;
            let mut qp: f64 = 0.0;
            for d in degree_vectors(mu.size(), 1) {
                qp = qp.max(quasi_periodicity_residual(&pp, lam, mu, &d, &opts)?);
            }
            let coefficients: Vec<Value> =
                s.coefficients.iter().map(|(d, c)| json!({ "d": d, "value": complex(*c) })).collect();
            let entry = json!({
                "lambda": label(lam),
                "mu": label(mu),
                "stab_restriction": complex(direct),
                "coefficients": coefficients,
                "sum": complex(s.sum()),
                "residuals": { "d0": d0, "oracle": oracle, "quasi_periodicity": qp },
            });
            Ok((entry, [d0, oracle, qp]))
        })
        .collect::<anyhow::Result<_>>()?;
    let worst = series.iter().fold([0.0f64; 3], |m, (_, r)| [m[0].max(r[0]), m[1].max(r[1]), m[2].max(r[2])]);
    let result = json!({
        "D": max_degree,
        "exponent": format!("{:?}", opts.exponent),
        "framing_shift": format!("{:?}", opts.framing),
        "series": series.into_iter().map(|(v, _)| v).collect::<Vec<_>>(),
    });
    Ok(Outcome::new(Some(pp), result)
        .check("d0", worst[0], cfg.tol(1e-10))
        .check("oracle", worst[1], cfg.tol(1e-8))
        .check("quasi_periodicity", worst[2], cfg.tol(1e-8)))
}

pub fn bethe(cfg: &RunConfig, seed: u64) -> anyhow::Result<Outcome> {
    let (v, w) = (cfg.required_v()?, cfg.required_w()?);
    let pp = cfg.param_point(w.iter().sum(), seed)?;
    let sys = BetheSystem::from_point(&pp, &v, &w)?;
    let sol = bethe_solve(&sys, &w, seed, &NewtonOpts::default())?;
    let result = json!({
        "v": v,
        "w": w,
        "x": sol.x.iter().map(|col| complex_list(col)).collect::<Vec<_>>(),
        "iterations": sol.iterations,
        "restarts": sol.restarts,
        "converged": sol.converged,
    });
    let r = if sol.converged { sol.residual } else { f64::INFINITY };
    Ok(Outcome::new(Some(pp), result).check("newton", r, cfg.tol(1e-10)))
}

pub fn scalars(cfg: &RunConfig, seed: u64) -> anyhow::Result<Outcome> {
    let n = cfg.n();
    let pp = cfg.apply_overrides(scalar_point(n, seed)?, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut rll_worst, mut norm_worst, mut printed_worst) = (0.0f64, 0.0f64, 0.0f64);
    let mut rll = Vec::new();
    let mut modular = Vec::new();
    for _ in 0..cfg.samples(5) {
        let u = Slot::new(C::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(-3.1..3.1)));
        for k in 0..n {
            let r = rll_scalar_identity(&pp, u, k)?;
            rll_worst = rll_worst.max(r);
            rll.push(json!({ "u": complex(u.val), "color": k, "residual": r }));
        }
        let log_x = C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-3.0..3.0));
        let m = modular_check(log_x, pp.p.log, pp.log_hbar())?;
        norm_worst = norm_worst.max(m.normalized);
        printed_worst = printed_worst.max(m.printed);
        modular.push(json!({ "log_x": complex(log_x), "normalized": m.normalized, "printed": m.printed }));
    }
    let result = json!({ "eta": eta_table(n), "rll": rll, "modular": modular });
    Ok(Outcome::new(Some(pp), result)
        .check("rll", rll_worst, cfg.tol(1e-7))
        .check("modular_normalized", norm_worst, cfg.tol(1e-8))
        .report("modular_printed", printed_worst))
}

pub fn acceptance_cmd(cfg: &RunConfig, seed: u64) -> anyhow::Result<Outcome> {
    let ids = cfg.only.clone().unwrap_or_else(|| IDS.to_vec());
    if let Some(bad) = ids.iter().find(|id| !IDS.contains(id)) {
        bail!("unknown criterion {bad}");
    }
    let criteria: Vec<_> = ids.iter().map(|&id| acceptance::run(id, seed)).collect();
    let mut out = Outcome::new(None, Value::Null);
    let mut table = Vec::new();
    for c in &criteria {
        eprintln!("{}", c.line());
        for p in &c.parts {
            out = out.check(&format!("{}:{}", c.id, p.label), if p.passed() { p.worst } else { f64::INFINITY }, p.tol);
        }
        out = out.check(&format!("{}:verdict", c.id), f64::from(u8::from(!c.passed())), 0.5);
        out.timings.push((format!("criterion_{}", c.id), c.seconds));
        let mut v = serde_json::to_value(c)?;
        if let Some(obj) = v.as_object_mut() {
            obj.remove("seconds");
            obj.insert("passed".into(), json!(c.passed()));
        }
        table.push(v);
    }
    out.result = json!({ "criteria": table });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(json: &str) -> RunConfig {
        serde_json::from_str(json).unwrap()
    }

    #[test]
    fn three_points_for_the_small_space() {
        let out = fixed_points_cmd(&cfg(r#"{"v": [1,1,1], "w": [1,0,0]}"#)).unwrap();
        assert_eq!(out.result["count"], 3);
        assert!(out.passed());
    }

    #[test]
    fn shuffle_of_single_boxes_passes() {
        let out = shuffle(&cfg(r#"{"boxes": [1,1]}"#), 7).unwrap();
        assert!(out.passed(), "{:?}", out.checks);
    }

    #[test]
    fn vertex_d0_matches_restriction() {
        let out = vertex(&cfg(r#"{"v": [1,1,1], "w": [1,0,0], "D": 1}"#), 3).unwrap();
        assert!(out.passed(), "{:?}", out.checks);
        let first = &out.result["series"][0];
        assert_eq!(first["coefficients"][0]["d"], json!([0, 0, 0]));
        let c = |v: &Value| C::new(v[0].as_f64().unwrap(), v[1].as_f64().unwrap());
        assert!(rel(c(&first["coefficients"][0]["value"]), c(&first["stab_restriction"])) < 1e-10);
    }

    #[test]
    fn fock_rejects_two_framings() {
        assert!(fock(&cfg(r#"{"lambda": [[0,[1]],[1,[]]]}"#), 1).is_err());
    }

    #[test]
    fn unknown_criterion_is_a_config_error() {
        assert!(acceptance_cmd(&cfg(r#"{"only": [12]}"#), 1).is_err());
    }
}
