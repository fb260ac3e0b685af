//! Property tests for the invariants of the library.

use std::cmp::Ordering;

use ellstab::combinatorics::{box_order_cmp, weight_identity_check, ColoredPartition, DegreeRule, FixedPoint};
use ellstab::envelopes::{kahler_plain, random_slots, Envelope, Variant};
use ellstab::fockrep::k_eigen_check;
use ellstab::numeric::{gamma3, qpoch_fin, theta, theta_p, Annuli, Monomial, ParamPoint, Var};
use num_complex::Complex64 as C;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn close(a: C, b: C, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1e-300)
}

fn polar(r: f64, a: f64) -> C {
    C::from_polar(r, a)
}

/// Partitions as weakly decreasing rows.
fn partition(max_rows: usize, max_len: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0..=max_len, 0..=max_rows).prop_map(|mut v| {
        v.sort_unstable_by(|a, b| b.cmp(a));
        v.retain(|&k| k > 0);
        v
    })
}

fn fixed_point() -> impl Strategy<Value = FixedPoint> {
    (3usize..=5, prop::collection::vec((partition(3, 3), 0usize..5), 1..=2)).prop_map(|(n, parts)| {
        let parts =
            parts.into_iter().map(|(rows, c)| ColoredPartition::new(rows, c % n).expect("valid partition")).collect();
        FixedPoint::new(n, parts).expect("valid fixed point")
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn box_order_is_a_total_order(fp in fixed_point()) {
        let bs = fp.boxes();
        for &a in &bs {
            prop_assert_eq!(box_order_cmp(&fp, a, a), Ordering::Equal);
            for &b in &bs {
                let ab = box_order_cmp(&fp, a, b);
                prop_assert_eq!(ab, box_order_cmp(&fp, b, a).reverse());
                if a != b {
                    prop_assert_ne!(ab, Ordering::Equal);
                }
                for &c in &bs {
                    if ab == Ordering::Less && box_order_cmp(&fp, b, c) == Ordering::Less {
                        prop_assert_eq!(box_order_cmp(&fp, a, c), Ordering::Less);
                    }
                }
            }
        }
    }

    #[test]
    fn weight_identity_and_k_eigenvalues(rows in partition(5, 5), n in 3usize..=5, c in 0usize..5) {
        let lam = ColoredPartition::new(rows, c % n).unwrap();
        prop_assert_eq!(weight_identity_check(&lam, n), Ok(()));
        prop_assert!(k_eigen_check(&lam, n));
    }

    #[test]
    fn finite_pochhammer_is_additive(
        r in 0.2f64..3.0, a in -3.1f64..3.1, q in 0.05f64..0.6, b in -3.1f64..3.1,
        d in -4i32..=4, e in -4i32..=4,
    ) {
        let (z, q) = (polar(r, a), polar(q, b));
        let lhs = qpoch_fin(z, q, d + e).unwrap();
        let rhs = qpoch_fin(z, q, d).unwrap() * qpoch_fin(z * q.powi(d), q, e).unwrap();
        prop_assert!(close(lhs, rhs, 1e-9), "{lhs} vs {rhs}");
    }

    #[test]
    fn theta_laws(seed in 0u64..10_000, r in 0.3f64..3.0, a in -3.1f64..3.1) {
        let pp = ParamPoint::sample(3, 1, seed, &Annuli::default()).unwrap();
        let x = Monomial::var(Var::X(0));
        let xlog = [C::new(r.ln(), a)];
        let th = |m: &Monomial| theta(m, &pp, &xlog).unwrap().materialize(&pp, &xlog);
        prop_assert!(close(th(&x.inv()), -th(&x), 1e-10));
        let px = &Monomial::var(Var::P) * &x;
        let want = -(-0.5 * pp.p.log).exp() / polar(r, a) * th(&x);
        prop_assert!(close(th(&px), want, 1e-10));
        let z = polar(r, a);
        let tp = |w: C| theta_p(w, pp.p.val, pp.trunc).unwrap();
        prop_assert!(close(tp(pp.p.val / z), tp(z), 1e-10));
    }

    #[test]
    fn triple_gamma_symmetry_and_reflection(
        r in 0.3f64..2.0, a in -3.1f64..3.1,
        qs in prop::collection::vec((0.1f64..0.5, -3.1f64..3.1), 3),
    ) {
        let z = polar(r, a);
        let [x, y, w]: [C; 3] = [polar(qs[0].0, qs[0].1), polar(qs[1].0, qs[1].1), polar(qs[2].0, qs[2].1)];
        let g = gamma3(z, x, y, w).unwrap();
        prop_assert!(close(g, gamma3(z, y, w, x).unwrap(), 1e-9));
        prop_assert!(close(g, gamma3(z, w, x, y).unwrap(), 1e-9));
        prop_assert!(close(g, gamma3(x * y * w / z, x, y, w).unwrap(), 1e-9));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn envelopes_are_symmetric_in_each_color(fp in fixed_point(), seed in 0u64..10_000, variant in 0usize..3) {
        prop_assume!(fp.size() <= 5);
        let mut pp = ParamPoint::sample(fp.n, fp.parts.len(), seed, &Annuli::default()).unwrap();
        pp.ensure_framings(fp.parts.len());
        let env = Envelope::new(&fp, Variant::ALL[variant], &kahler_plain(fp.n), DegreeRule::Hat).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let slots = random_slots(&fp.v(), &mut rng);
        let base = env.eval_sym(&pp, &slots).unwrap();
        let mut swapped = slots.clone();
        for col in &mut swapped {
            col.reverse();
            if col.len() > 2 {
                col.rotate_left(1);
            }
        }
        let other = env.eval_sym(&pp, &swapped).unwrap();
        prop_assert!(close(base, other, 1e-9), "{base} vs {other}");
    }
}
