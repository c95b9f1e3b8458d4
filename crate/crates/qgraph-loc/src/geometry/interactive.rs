//! Interactivity (PI/FI), related points, and separability of cube pairs.

use super::{projections, separability_radius, BoxSpec};
use crate::error::GeometryError;

/// Sup-norm distance from `u ∈ Z^{nd}` to the diagonal
/// `D = {(x,…,x) : x ∈ Z^d}`, computed by exact finite search: the
/// objective splits over axes, and each axis minimum is attained inside
/// the bounding range of the particle coordinates.
pub fn diag_distance(u: &[i64], n: usize, d: usize) -> u64 {
    debug_assert_eq!(u.len(), n * d);
    let mut worst_axis = 0i64;
    for a in 0..d {
        let coords: Vec<i64> = (0..n).map(|j| u[j * d + a]).collect();
        let lo = *coords.iter().min().unwrap();
        let hi = *coords.iter().max().unwrap();
        let mut best = i64::MAX;
        for x in lo..=hi {
            let v = coords.iter().map(|&c| (c - x).abs()).max().unwrap();
            best = best.min(v);
        }
        worst_axis = worst_axis.max(best);
    }
    worst_axis as u64
}

/// `dist(u_J, u_{J^c}) = min {|u_i - u_j| : i ∈ J, j ∈ J^c}` over d-chunks.
pub fn partition_distance(u: &[i64], d: usize, j_set: &[usize], jc_set: &[usize]) -> u64 {
    let chunk = |j: usize| &u[(j - 1) * d..j * d];
    let mut best = u64::MAX;
    for &i in j_set {
        for &j in jc_set {
            let dist = chunk(i)
                .iter()
                .zip(chunk(j))
                .map(|(&a, &b)| (a - b).unsigned_abs())
                .max()
                .unwrap();
            best = best.min(dist);
        }
    }
    best
}

/// Classification of a cube as partially or fully interactive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Interactivity {
    /// Far from the diagonal; carries a decomposing partition `J`
    /// (1-based indices) with `dist(u_J, u_{J^c}) >= 2L + r_0`.
    Pi { witness: Vec<usize> },
    Fi,
}

/// PI iff `dist(u, D) >= (n-1)(2L + r_0)`. A 1-particle cube is FI by
/// convention (the predicate is vacuous and the MSA never branches on it).
pub fn classify_interactive(spec: &BoxSpec, r0: u64) -> Result<Interactivity, GeometryError> {
    if !spec.is_cube() {
        return Err(GeometryError::InvalidBox("interactivity needs a cube".into()));
    }
    let (n, d) = (spec.n, spec.d);
    if n == 1 {
        return Ok(Interactivity::Fi);
    }
    let l = spec.sides[0] as u64;
    let threshold = (n as u64 - 1) * (2 * l + r0);
    if diag_distance(&spec.center, n, d) < threshold {
        return Ok(Interactivity::Fi);
    }
    // A decomposing partition exists for every PI cube; exhaustive search
    // over proper nonempty subsets containing particle 1.
    let mut witness = None;
    'outer: for mask in 1u32..(1 << n) - 1 {
        let j_set: Vec<usize> = (1..=n).filter(|&j| mask & (1 << (j - 1)) != 0).collect();
        let jc_set: Vec<usize> = (1..=n).filter(|&j| mask & (1 << (j - 1)) == 0).collect();
        if partition_distance(&spec.center, d, &j_set, &jc_set) >= 2 * l + r0 {
            witness = Some(j_set);
            break 'outer;
        }
    }
    match witness {
        Some(w) => Ok(Interactivity::Pi { witness: w }),
        None => Err(GeometryError::InvalidBox(
            "PI cube without decomposing partition; decomposability lemma violated".into(),
        )),
    }
}

/// All tuples with coordinates drawn from `{x_1, …, x_n}` (d-chunks);
/// contains `x` itself and has cardinality `k_x^n <= n^n`.
pub fn related_points(x: &[i64], n: usize, d: usize) -> Vec<Vec<i64>> {
    debug_assert_eq!(x.len(), n * d);
    let mut distinct: Vec<&[i64]> = Vec::new();
    for j in 0..n {
        let c = &x[j * d..(j + 1) * d];
        if !distinct.contains(&c) {
            distinct.push(c);
        }
    }
    let k = distinct.len();
    let total = k.pow(n as u32);
    let mut out = Vec::with_capacity(total);
    for mut code in 0..total {
        let mut p = Vec::with_capacity(n * d);
        for _ in 0..n {
            p.extend_from_slice(distinct[code % k]);
            code /= k;
        }
        out.push(p);
    }
    out
}

/// Outcome of the pairwise separability tests for equal-sided cubes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparabilityReport {
    /// `Some((from_first, J))` when one cube is J-pre-separable from the
    /// other; `from_first` tells which orientation witnessed it.
    pub pre_separable: Option<(bool, Vec<usize>)>,
    pub separable: bool,
    pub completely_separated: bool,
    pub r_nl: u64,
    /// `|u - v|` sup distance of the centers.
    pub center_dist: u64,
}

fn j_pre_separable(a: &BoxSpec, b: &BoxSpec, j_set: &[usize]) -> bool {
    let jc_set: Vec<usize> = (1..=a.n).filter(|j| !j_set.contains(j)).collect();
    let pj = projections(a, j_set).expect("indices valid");
    let pjc = projections(a, &jc_set).expect("indices valid");
    let pb = super::full_projection(b);
    pj.iter()
        .all(|x| pjc.iter().all(|y| !x.overlaps(y)) && pb.iter().all(|y| !x.overlaps(y)))
}

/// Definition-level separability tests for two equal-sided cubes.
pub fn separability(a: &BoxSpec, b: &BoxSpec, r0: u64) -> Result<SeparabilityReport, GeometryError> {
    if a.n != b.n || a.d != b.d {
        return Err(GeometryError::InvalidBox("mismatched n or d".into()));
    }
    if !a.is_cube() || !b.is_cube() || a.sides[0] != b.sides[0] {
        return Err(GeometryError::InvalidBox(
            "separability is defined for equal-sided cubes".into(),
        ));
    }
    let n = a.n;
    let l = a.sides[0] as u64;
    let r_nl = separability_radius(n as u32, l, r0);
    let center_dist = a
        .center
        .iter()
        .zip(&b.center)
        .map(|(&x, &y)| (x - y).unsigned_abs())
        .max()
        .unwrap();

    let mut pre = None;
    'search: for mask in 1u32..(1 << n) {
        let j_set: Vec<usize> = (1..=n).filter(|&j| mask & (1 << (j - 1)) != 0).collect();
        if j_pre_separable(a, b, &j_set) {
            pre = Some((true, j_set));
            break 'search;
        }
        if j_pre_separable(b, a, &j_set) {
            pre = Some((false, j_set));
            break 'search;
        }
    }

    let separable = pre.is_some() && center_dist >= r_nl;
    // Completely separated: the full projections are disjoint, plus the
    // distance condition.
    let full_mask: Vec<usize> = (1..=n).collect();
    let fully_disjoint = j_pre_separable(a, b, &full_mask);
    let completely_separated = fully_disjoint && center_dist >= r_nl;

    Ok(SeparabilityReport {
        pre_separable: pre,
        separable,
        completely_separated,
        r_nl,
        center_dist,
    })
}

/// Sufficient condition for pre-separability: `y` outside every
/// `Λ_{2nL}(x^(j))` over the related points of `x`.
pub fn sufficient_preseparable(x: &[i64], y: &[i64], l: u64, n: usize, d: usize) -> bool {
    let radius = (2 * n as u64 * l) as i64;
    related_points(x, n, d).iter().all(|xr| {
        xr.iter()
            .zip(y)
            .map(|(&a, &b)| (a - b).abs())
            .max()
            .unwrap()
            >= radius
    })
}

/// Sufficient condition for separability: `y` outside every
/// `Λ_{r_{n,L}}(x^(j))`.
pub fn sufficient_separable(x: &[i64], y: &[i64], l: u64, r0: u64, n: usize, d: usize) -> bool {
    let radius = separability_radius(n as u32, l, r0) as i64;
    related_points(x, n, d).iter().all(|xr| {
        xr.iter()
            .zip(y)
            .map(|(&a, &b)| (a - b).abs())
            .max()
            .unwrap()
            >= radius
    })
}
