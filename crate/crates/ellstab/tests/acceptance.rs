//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Tolerances are pinned here independently of the library's own defaults.

use ellstab::acceptance::{run, Criterion};

const SEED: u64 = 1;

/// `(criterion, part label, pinned tolerance)`.
const PINNED: &[(u8, &str, f64)] = &[
    (1, "mismatches", 0.5),
    (2, "rel", 1e-10),
    (3, "type I", 1e-10),
    (3, "type II", 1e-10),
    (4, "rel", 1e-8),
    (5, "rel", 1e-10),
    (6, "R·R' - 1", 1e-8),
    (6, "off-weight", 1e-8),
    (7, "1-box", 1e-7),
    (7, "2-box", 1e-6),
    (8, "d=0", 1e-10),
    (8, "oracle", 1e-8),
    (8, "quasi-periodicity", 1e-8),
    (9, "closed form", 1e-12),
    (9, "Newton", 1e-10),
    (10, "rel", 1e-7),
    (11, "normalized", 1e-8),
];

fn check(c: &Criterion) -> bool {
    let pinned: Vec<_> = PINNED.iter().filter(|(id, _, _)| *id == c.id).collect();
    let parts_ok = pinned.len() == c.parts.len()
        && pinned
            .iter()
            .all(|(_, label, tol)| c.parts.iter().any(|p| p.label == *label && p.checks > 0 && p.worst < *tol));
    parts_ok && c.passed()
}

#[test]
fn acceptance_criteria() {
    let mut failed = Vec::new();
    for id in 1..=11u8 {
        let c = run(id, SEED);
        let ok = check(&c);
        println!("{}", c.line());
        if !ok {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
