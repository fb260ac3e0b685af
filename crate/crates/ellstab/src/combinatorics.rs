//! Colored partitions, torus fixed points, the canonical box order, λ-trees
//! and the index degrees entering the Kähler arguments.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::numeric::{Monomial, Var};
use crate::{Error, Result};

/// A partition whose boxes carry contents shifted by the color `k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ColoredPartition {
    pub rows: Vec<usize>,
    pub color: usize,
}

impl ColoredPartition {
    pub fn new(rows: Vec<usize>, color: usize) -> Result<Self> {
        if rows.windows(2).any(|w| w[0] < w[1]) || rows.contains(&0) {
            return Err(Error::Invalid(format!("{rows:?} is not a partition")));
        }
        Ok(Self { rows, color })
    }

    pub fn empty(color: usize) -> Self {
        Self { rows: Vec::new(), color }
    }

    pub fn size(&self) -> usize {
        self.rows.iter().sum()
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= 1 && y >= 1 && x <= self.rows.len() && y <= self.rows[x - 1]
    }

    /// Cells `(x, y)` in row-major order, `x` the row and `y` the column.
    pub fn cells(&self) -> Vec<(usize, usize)> {
        self.rows.iter().enumerate().flat_map(|(i, &r)| (1..=r).map(move |y| (i + 1, y))).collect()
    }

    /// Content `c = x - y + k`.
    pub fn content(&self, x: usize, y: usize) -> i64 {
        x as i64 - y as i64 + self.color as i64
    }

    /// Cells that can be added keeping a partition.
    pub fn addable(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for x in 1..=self.rows.len() + 1 {
            let y = self.rows.get(x - 1).copied().unwrap_or(0) + 1;
            let above = if x == 1 { usize::MAX } else { self.rows[x - 2] };
            if y <= above {
                out.push((x, y));
            }
        }
        out
    }

    /// Cells that can be removed keeping a partition.
    pub fn removable(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, &r) in self.rows.iter().enumerate() {
            let below = self.rows.get(i + 1).copied().unwrap_or(0);
            if r > below {
                out.push((i + 1, r));
            }
        }
        out
    }

    /// The partition with the cell `(x, y)` added; it must be addable.
    pub fn with_cell(&self, x: usize, y: usize) -> Self {
        let mut rows = self.rows.clone();
        if x > rows.len() {
            rows.push(1);
        } else {
            rows[x - 1] += 1;
        }
        debug_assert_eq!(rows[x - 1], y);
        Self { rows, color: self.color }
    }

    /// The partition with the cell `(x, y)` removed; it must be removable.
    pub fn without_cell(&self, x: usize, y: usize) -> Self {
        let mut rows = self.rows.clone();
        debug_assert_eq!(rows[x - 1], y);
        rows[x - 1] -= 1;
        if rows[x - 1] == 0 {
            rows.pop();
        }
        Self { rows, color: self.color }
    }
}

impl fmt::Display for ColoredPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}_{}", self.rows, self.color)
    }
}

/// Addable and removable cells of residue `i` (content `≡ i mod n`).
pub fn addable_removable(lam: &ColoredPartition, i: usize, n: usize) -> (Vec<(usize, usize)>, Vec<(usize, usize)>) {
    let res = |&(x, y): &(usize, usize)| lam.content(x, y).rem_euclid(n as i64) as usize == i;
    (lam.addable().into_iter().filter(res).collect(), lam.removable().into_iter().filter(res).collect())
}

/// Content profile `v_i = #{boxes with c ≡ i}`.
pub fn profile(lam: &ColoredPartition, n: usize) -> Vec<usize> {
    let mut v = vec![0; n];
    for (x, y) in lam.cells() {
        v[lam.content(x, y).rem_euclid(n as i64) as usize] += 1;
    }
    v
}

/// Checks `|R_i| - |A_i| = -δ_{ik} + Σ_j a_ij v_j` for the affine Cartan
/// matrix and `Σ_i (|R_i| - |A_i|) = -1`. On failure returns the offending
/// residue (`n` stands for the sum rule).
pub fn weight_identity_check(lam: &ColoredPartition, n: usize) -> std::result::Result<(), usize> {
    let v = profile(lam, n);
    let mut total = 0i64;
    for i in 0..n {
        let (a, r) = addable_removable(lam, i, n);
        let lhs = r.len() as i64 - a.len() as i64;
        total += lhs;
        let delta = i64::from(i == lam.color % n);
        let cartan = 2 * v[i] as i64 - v[(i + 1) % n] as i64 - v[(i + n - 1) % n] as i64;
        if lhs != cartan - delta {
            return Err(i);
        }
    }
    if total != -1 {
        return Err(n);
    }
    Ok(())
}

/// A torus fixed point: colored partitions listed in chamber order.
///
/// Position `r` in the list is the framing weight `u_r`; earlier framings
/// have larger `|u|`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FixedPoint {
    pub n: usize,
    pub parts: Vec<ColoredPartition>,
}

/// A box of a fixed point: framing position `r` and coordinates `(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub r: usize,
    pub x: usize,
    pub y: usize,
}

impl FixedPoint {
    pub fn new(n: usize, parts: Vec<ColoredPartition>) -> Result<Self> {
        if n < 3 {
            return Err(Error::Invalid(format!("N must be at least 3, got {n}")));
        }
        if let Some(p) = parts.iter().find(|p| p.color >= n) {
            return Err(Error::Invalid(format!("color {} out of range", p.color)));
        }
        Ok(Self { n, parts })
    }

    /// Boxes in framing order, row-major inside each partition.
    pub fn boxes(&self) -> Vec<Cell> {
        self.parts
            .iter()
            .enumerate()
            .flat_map(|(r, p)| p.cells().into_iter().map(move |(x, y)| Cell { r, x, y }))
            .collect()
    }

    pub fn size(&self) -> usize {
        self.parts.iter().map(ColoredPartition::size).sum()
    }

    pub fn content(&self, a: Cell) -> i64 {
        self.parts[a.r].content(a.x, a.y)
    }

    /// Residue `c mod N`.
    pub fn color(&self, a: Cell) -> usize {
        self.content(a).rem_euclid(self.n as i64) as usize
    }

    pub fn framing_color(&self, r: usize) -> usize {
        self.parts[r].color
    }

    /// Dimension vector `v`.
    pub fn v(&self) -> Vec<usize> {
        let mut v = vec![0; self.n];
        for a in self.boxes() {
            v[self.color(a)] += 1;
        }
        v
    }

    /// Framing vector `w`.
    pub fn w(&self) -> Vec<usize> {
        let mut w = vec![0; self.n];
        for p in &self.parts {
            w[p.color] += 1;
        }
        w
    }

    /// Index of a box in [`FixedPoint::boxes`].
    pub fn box_index(&self) -> BTreeMap<Cell, usize> {
        self.boxes().into_iter().enumerate().map(|(i, a)| (a, i)).collect()
    }

    /// `φ_a = u_r t1^{1-y} t2^{1-x}`.
    pub fn phi_weight(&self, a: Cell) -> Monomial {
        Monomial::var(Var::U(a.r as u16))
            * Monomial::var_pow(Var::T1, 1 - a.y as i32)
            * Monomial::var_pow(Var::T2, 1 - a.x as i32)
    }

    /// Swaps the order of the framings, which switches to the opposite chamber.
    pub fn reversed(&self) -> Self {
        Self { n: self.n, parts: self.parts.iter().rev().cloned().collect() }
    }

    /// Concatenation `(λ', λ'')` with the framings of `self` first.
    pub fn concat(&self, o: &FixedPoint) -> Self {
        Self { n: self.n, parts: self.parts.iter().chain(&o.parts).cloned().collect() }
    }

    /// Self-describing label: list of `(color, rows)`.
    pub fn label(&self) -> Vec<(usize, Vec<usize>)> {
        self.parts.iter().map(|p| (p.color, p.rows.clone())).collect()
    }
}

impl fmt::Display for FixedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.parts.iter().map(ToString::to_string).collect();
        write!(f, "({})", s.join(", "))
    }
}

fn h(a: Cell) -> i64 {
    a.x as i64 + a.y as i64 - 2
}

/// Canonical order: framing position, then `(c, -h)` lexicographically.
pub fn box_order_cmp(fp: &FixedPoint, a: Cell, b: Cell) -> Ordering {
    (a.r, fp.content(a), -h(a)).cmp(&(b.r, fp.content(b), -h(b)))
}

/// Decides `ρ_a + shift < ρ_b`; an exact tie is an error.
pub fn rho_shift_lt(fp: &FixedPoint, a: Cell, shift: i64, b: Cell) -> Result<bool> {
    if a.r != b.r {
        return Ok(a.r < b.r);
    }
    let ka = (fp.content(a) + shift, -h(a));
    let kb = (fp.content(b), -h(b));
    match ka.cmp(&kb) {
        Ordering::Less => Ok(true),
        Ordering::Greater => Ok(false),
        Ordering::Equal => Err(Error::Invalid(format!("tie in rho comparison of {a:?} and {b:?}"))),
    }
}

pub(crate) fn rho_lt(fp: &FixedPoint, a: Cell, shift: i64, b: Cell) -> bool {
    rho_shift_lt(fp, a, shift, b).expect("distinct boxes never tie")
}

/// `ρ_a ≤ ρ_r` for the root of framing `r`.
pub fn rho_le_root(fp: &FixedPoint, a: Cell, r: usize) -> bool {
    if a.r != r {
        return a.r < r;
    }
    (fp.content(a), -h(a)) <= (fp.parts[r].color as i64, 0)
}

/// Per color, the boxes of that residue in canonical order (indices into
/// [`FixedPoint::boxes`]). Slot `j` of color `i` is the Chern root `x^(i)_j`.
pub fn chern_assignment(fp: &FixedPoint) -> Vec<Vec<usize>> {
    let bs = fp.boxes();
    let mut order: Vec<usize> = (0..bs.len()).collect();
    order.sort_by(|&i, &j| box_order_cmp(fp, bs[i], bs[j]));
    let mut out = vec![Vec::new(); fp.n];
    for i in order {
        out[fp.color(bs[i])].push(i);
    }
    out
}

/// All partitions of `n`, largest parts first.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, maxp: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 0 {
            out.push(acc.clone());
            return;
        }
        for first in (1..=n.min(maxp)).rev() {
            acc.push(first);
            rec(n - first, first, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

/// All fixed points with dimension vector `v` and framing `w`; framings are
/// ordered by color, and points in lexicographic order of their partitions.
pub fn fixed_points(v: &[usize], w: &[usize], n: usize) -> Result<Vec<FixedPoint>> {
    if v.len() != n || w.len() != n {
        return Err(Error::Invalid(format!("v and w must have length N = {n}")));
    }
    let colors: Vec<usize> = (0..n).flat_map(|k| std::iter::repeat_n(k, w[k])).collect();
    let total: usize = v.iter().sum();
    let mut out = Vec::new();
    fn rec(
        i: usize,
        colors: &[usize],
        acc: &mut Vec<ColoredPartition>,
        left: usize,
        v: &[usize],
        n: usize,
        out: &mut Vec<FixedPoint>,
    ) {
        if i == colors.len() {
            if left == 0 {
                let fp = FixedPoint { n, parts: acc.clone() };
                if fp.v() == v {
                    out.push(fp);
                }
            }
            return;
        }
        for m in 0..=left {
            for rows in partitions(m) {
                let p = ColoredPartition { rows, color: colors[i] };
                let prof = profile(&p, n);
                if prof.iter().zip(v).any(|(a, b)| a > b) {
                    continue;
                }
                acc.push(p);
                rec(i + 1, colors, acc, left - m, v, n, out);
                acc.pop();
            }
        }
    }
    rec(0, &colors, &mut Vec::new(), total, v, n, &mut out);
    Ok(out)
}

/// A rooted spanning tree of a Young diagram: `parent[c]` for every non-root cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaTree {
    pub parent: BTreeMap<(usize, usize), (usize, usize)>,
}

impl LambdaTree {
    /// `κ(t)`: edges pointing (away from the root) to smaller `y`, plus those to smaller `x`.
    pub fn kappa(&self) -> usize {
        self.parent.iter().map(|(c, pa)| usize::from(c.1 < pa.1) + usize::from(c.0 < pa.0)).sum()
    }

    /// Children lists.
    pub fn children(&self) -> BTreeMap<(usize, usize), Vec<(usize, usize)>> {
        let mut ch: BTreeMap<_, Vec<_>> = BTreeMap::new();
        for (c, pa) in &self.parent {
            ch.entry(*pa).or_default().push(*c);
        }
        ch
    }
}

/// Admissibility predicate on the edge set of a spanning tree.
pub type TreeFilter = fn(&ColoredPartition, &BTreeSet<((usize, usize), (usize, usize))>) -> bool;

/// Rejects trees in which some cell is joined both to the cell above it and to
/// the cell to its right (an L-shaped corner).
pub fn no_l_shape(lam: &ColoredPartition, edges: &BTreeSet<((usize, usize), (usize, usize))>) -> bool {
    let has = |a: (usize, usize), b: (usize, usize)| edges.contains(&(a.min(b), a.max(b)));
    !lam.cells().into_iter().any(|(x, y)| x > 1 && has((x, y), (x - 1, y)) && has((x, y), (x, y + 1)))
}

/// Accepts every spanning tree.
pub fn all_trees(_: &ColoredPartition, _: &BTreeSet<((usize, usize), (usize, usize))>) -> bool {
    true
}

/// Spanning trees of the adjacency graph of `lam` rooted at `(1,1)` that pass `filter`.
pub fn lambda_trees_with(lam: &ColoredPartition, filter: TreeFilter) -> Vec<LambdaTree> {
    let cells = lam.cells();
    if cells.is_empty() {
        return vec![LambdaTree { parent: BTreeMap::new() }];
    }
    let mut edges = Vec::new();
    for &(x, y) in &cells {
        if lam.contains(x + 1, y) {
            edges.push(((x, y), (x + 1, y)));
        }
        if lam.contains(x, y + 1) {
            edges.push(((x, y), (x, y + 1)));
        }
    }
    let mut out = Vec::new();
    for sub in edges.iter().copied().combinations(cells.len() - 1) {
        let set: BTreeSet<_> = sub.iter().copied().collect();
        let mut adj: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
        for &(a, b) in &sub {
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
        let mut parent = BTreeMap::new();
        let mut seen = BTreeSet::from([(1, 1)]);
        let mut stack = vec![(1, 1)];
        while let Some(c) = stack.pop() {
            for &nb in adj.get(&c).map(Vec::as_slice).unwrap_or(&[]) {
                if seen.insert(nb) {
                    parent.insert(nb, c);
                    stack.push(nb);
                }
            }
        }
        if seen.len() == cells.len() && filter(lam, &set) {
            out.push(LambdaTree { parent });
        }
    }
    out
}

/// Trees with the default admissibility rule [`no_l_shape`].
pub fn lambda_trees(lam: &ColoredPartition) -> Vec<LambdaTree> {
    lambda_trees_with(lam, no_l_shape)
}

/// Convention for the integers `d_a` that shift Kähler arguments by `ħ^{d_a}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DegreeRule {
    /// Signed count over adjacent-color and same-color boxes and framings,
    /// counting both ρ orders. With it the hatted envelope is quasi-periodic
    /// with multiplier exactly `𝔷^{-1}` per box.
    Hat,
    /// As [`DegreeRule::Hat`] but counting only the first ρ order for adjacent colors.
    Plain,
    /// `-n + w` with `n` from [`DegreeRule::Plain`]; matches the printed shuffle shifts.
    Dual,
    /// Restriction of the polarization `T^{1/2}` to attracting weights.
    Polarization,
}

fn n_rule(fp: &FixedPoint, hat: bool) -> Vec<i32> {
    let bs = fp.boxes();
    let n = fp.n;
    bs.iter()
        .map(|&a| {
            let ca = fp.color(a);
            let mut s = 0;
            for &b in &bs {
                let cb = fp.color(b);
                if (ca + 1) % n == cb {
                    s += if rho_lt(fp, a, 1, b) { -1 } else { i32::from(hat) };
                }
                if (cb + 1) % n == ca {
                    s += if rho_lt(fp, b, 1, a) { 1 } else { -i32::from(hat) };
                }
                if b != a && cb == ca {
                    s += if rho_lt(fp, a, 0, b) { 1 } else { -1 };
                }
            }
            for r in 0..fp.parts.len() {
                if fp.parts[r].color == ca && !rho_le_root(fp, a, r) {
                    s += 1;
                }
            }
            s
        })
        .collect()
}

fn polarization_rule(fp: &FixedPoint) -> Result<Vec<i32>> {
    let bs = fp.boxes();
    let n = fp.n;
    let mut ex = vec![0i32; bs.len()];
    // A-torus weight of a monomial: framing rank first, then the t1/t2 balance.
    let sign = |m: &Monomial| -> Result<i32> {
        let fr: i32 = m
            .iter()
            .filter_map(|(v, e)| match v {
                Var::U(r) => Some(e / 2 * i32::from(r)),
                _ => None,
            })
            .sum();
        let kp = m.doubled(Var::T1) / 2 - m.doubled(Var::T2) / 2;
        Ok(match (fr, kp).cmp(&(0, 0)) {
            Ordering::Greater => 1,
            Ordering::Less => -1,
            Ordering::Equal => 0,
        })
    };
    let mut terms: Vec<(i32, Monomial, Option<usize>, usize)> = Vec::new();
    for (r, p) in fp.parts.iter().enumerate() {
        for (ib, &b) in bs.iter().enumerate() {
            if fp.color(b) == p.color {
                terms.push((1, Monomial::var(Var::U(r as u16)), None, ib));
            }
        }
    }
    for (ia, &a) in bs.iter().enumerate() {
        for (ib, &b) in bs.iter().enumerate() {
            if fp.color(a) == (fp.color(b) + 1) % n {
                terms.push((1, Monomial::var_pow(Var::T1, -1), Some(ia), ib));
            }
            if ia != ib && fp.color(a) == fp.color(b) {
                terms.push((-1, Monomial::one(), Some(ia), ib));
            }
        }
    }
    for (sg, pre, a, b) in terms {
        let mut m = pre;
        if let Some(ia) = a {
            m = &m * &fp.phi_weight(bs[ia]);
        }
        m = &m / &fp.phi_weight(bs[b]);
        if sign(&m)? <= 0 {
            continue;
        }
        if let Some(ia) = a {
            ex[ia] += sg;
        }
        ex[b] -= sg;
    }
    Ok(ex.into_iter().map(|e| -e).collect())
}

/// Index degrees `d_a`, one per box of [`FixedPoint::boxes`].
pub fn index_degrees(fp: &FixedPoint, rule: DegreeRule) -> Result<Vec<i32>> {
    let bs = fp.boxes();
    let w = fp.w();
    Ok(match rule {
        DegreeRule::Hat => n_rule(fp, true),
        DegreeRule::Plain => n_rule(fp, false),
        DegreeRule::Dual => n_rule(fp, false).into_iter().zip(&bs).map(|(e, &a)| w[fp.color(a)] as i32 - e).collect(),
        DegreeRule::Polarization => polarization_rule(fp)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cp(rows: &[usize], k: usize) -> ColoredPartition {
        ColoredPartition::new(rows.to_vec(), k).unwrap()
    }

    #[test]
    fn example_one_order_of_color_zero() {
        let fp = FixedPoint::new(3, vec![cp(&[6, 5, 4, 1], 0)]).unwrap();
        let bs = fp.boxes();
        let ch = chern_assignment(&fp);
        let got: Vec<(usize, usize)> = ch[0].iter().map(|&i| (bs[i].x, bs[i].y)).collect();
        assert_eq!(got, vec![(2, 5), (1, 4), (3, 3), (2, 2), (1, 1), (4, 1)]);
        assert_eq!(fp.v(), vec![6, 5, 5]);
    }

    #[test]
    fn example_two_last_root_of_color_two() {
        let fp = FixedPoint::new(3, vec![cp(&[6, 5, 4, 1], 0)]).unwrap();
        let bs = fp.boxes();
        let ch = chern_assignment(&fp);
        let last = bs[*ch[2].last().unwrap()];
        assert_eq!((last.x, last.y), (3, 1));
        assert_eq!(ch[2].len(), 5);
    }

    #[test]
    fn framing_order_dominates() {
        let fp = FixedPoint::new(3, vec![cp(&[1], 0), cp(&[1], 0)]).unwrap();
        let a = Cell { r: 0, x: 1, y: 1 };
        let b = Cell { r: 1, x: 1, y: 1 };
        assert_eq!(box_order_cmp(&fp, a, b), Ordering::Less);
        assert_eq!(box_order_cmp(&fp, a, a), Ordering::Equal);
        assert!(rho_shift_lt(&fp, a, 1, b).unwrap());
    }

    #[test]
    fn rho_shift_examples() {
        let fp = FixedPoint::new(3, vec![cp(&[2, 1], 0)]).unwrap();
        let c11 = Cell { r: 0, x: 1, y: 1 };
        let c12 = Cell { r: 0, x: 1, y: 2 };
        let c21 = Cell { r: 0, x: 2, y: 1 };
        assert!(!rho_shift_lt(&fp, c11, 0, c12).unwrap());
        assert!(!rho_shift_lt(&fp, c21, 1, c12).unwrap());
        assert!(rho_shift_lt(&fp, c11, 0, c11).is_err());
    }

    #[test]
    fn addable_removable_examples() {
        let e = ColoredPartition::empty(1);
        let (a, r) = addable_removable(&e, 1, 3);
        assert_eq!(a, vec![(1, 1)]);
        assert!(r.is_empty());
        let one = cp(&[1], 0);
        assert_eq!(addable_removable(&one, 0, 3).1, vec![(1, 1)]);
        assert_eq!(addable_removable(&one, 1, 3).0, vec![(2, 1)]);
        assert_eq!(addable_removable(&one, 2, 3).0, vec![(1, 2)]);
        let l = cp(&[2, 1], 0);
        assert_eq!(addable_removable(&l, 2, 3), (vec![(3, 1)], vec![(1, 2)]));
        assert_eq!(addable_removable(&l, 1, 3), (vec![(1, 3)], vec![(2, 1)]));
        assert_eq!(addable_removable(&l, 0, 3), (vec![(2, 2)], vec![]));
    }

    #[test]
    fn weight_identity_small_cases() {
        assert!(weight_identity_check(&ColoredPartition::empty(2), 3).is_ok());
        assert!(weight_identity_check(&cp(&[1], 0), 3).is_ok());
        assert!(weight_identity_check(&cp(&[6, 5, 4, 1], 1), 4).is_ok());
    }

    #[test]
    fn fixed_point_counts() {
        assert_eq!(fixed_points(&[0, 0, 0], &[1, 1, 0], 3).unwrap().len(), 1);
        let fps = fixed_points(&[1, 1, 1], &[1, 0, 0], 3).unwrap();
        let rows: Vec<_> = fps.iter().map(|f| f.parts[0].rows.clone()).collect();
        assert_eq!(rows, vec![vec![3], vec![2, 1], vec![1, 1, 1]]);
        let big = fixed_points(&[6, 5, 5], &[1, 0, 0], 3).unwrap();
        assert!(big.iter().any(|f| f.parts[0].rows == vec![6, 5, 4, 1]));
    }

    #[test]
    fn phi_weights() {
        let fp = FixedPoint::new(3, vec![cp(&[1, 1], 1)]).unwrap();
        assert_eq!(fp.phi_weight(Cell { r: 0, x: 1, y: 1 }), Monomial::var(Var::U(0)));
        assert_eq!(fp.phi_weight(Cell { r: 0, x: 2, y: 1 }), Monomial::var(Var::U(0)) * Monomial::var_pow(Var::T2, -1));
    }

    #[test]
    fn tree_counts() {
        assert_eq!(lambda_trees(&cp(&[1], 0)).len(), 1);
        let row = lambda_trees(&cp(&[4], 0));
        assert_eq!(row.len(), 1);
        assert_eq!(row[0].kappa(), 0);
        assert_eq!(lambda_trees_with(&cp(&[2, 2], 0), all_trees).len(), 4);
        assert_eq!(lambda_trees(&cp(&[2, 2], 0)).len(), 2);
        assert_eq!(lambda_trees(&cp(&[2, 2, 1], 0)).len(), 2);
        assert_eq!(lambda_trees(&cp(&[2, 2, 2], 0)).len(), 4);
    }

    #[test]
    fn degrees_of_empty_point() {
        let fp = FixedPoint::new(3, vec![ColoredPartition::empty(0)]).unwrap();
        for rule in [DegreeRule::Hat, DegreeRule::Plain, DegreeRule::Dual, DegreeRule::Polarization] {
            assert!(index_degrees(&fp, rule).unwrap().is_empty());
        }
    }

    #[test]
    fn single_box_degrees() {
        let fp = FixedPoint::new(3, vec![cp(&[1], 0)]).unwrap();
        assert_eq!(index_degrees(&fp, DegreeRule::Hat).unwrap(), vec![0]);
        assert_eq!(index_degrees(&fp, DegreeRule::Dual).unwrap(), vec![1]);
    }

    #[test]
    fn column_and_row_degrees_differ() {
        let col = FixedPoint::new(3, vec![cp(&[1, 1], 0)]).unwrap();
        let row = FixedPoint::new(3, vec![cp(&[2], 0)]).unwrap();
        assert_eq!(index_degrees(&col, DegreeRule::Hat).unwrap(), vec![1, -1]);
        assert_eq!(index_degrees(&row, DegreeRule::Hat).unwrap(), vec![1, -1]);
        assert_eq!(index_degrees(&col, DegreeRule::Dual).unwrap(), vec![1, 0]);
        assert_eq!(index_degrees(&row, DegreeRule::Dual).unwrap(), vec![0, 1]);
        assert_eq!(index_degrees(&row, DegreeRule::Polarization).unwrap(), vec![0, 0]);
    }
}
