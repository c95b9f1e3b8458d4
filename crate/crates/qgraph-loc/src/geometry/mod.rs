//! Exact combinatorics of the n-particle cube complex over `Z^d` and its
//! finite sub-boxes: edge/cube enumeration, projections, interactivity and
//! separability predicates, cube clustering, and DOF gluing.
//!
//! Everything here is integer arithmetic over the sup norm; geometry never
//! touches floating point.

mod cluster;
mod dof;
mod interactive;

pub use cluster::{cluster_cubes, is_r_connected, max_pair_dist, ClusterCube};
pub use dof::{glue_box, glue_nodes, AxisNode, DofMap, NodeKey};
pub use interactive::{
    classify_interactive, diag_distance, related_points, separability, sufficient_preseparable,
    sufficient_separable, Interactivity, SeparabilityReport,
};

use crate::error::GeometryError;
use serde::{Deserialize, Serialize};

/// A unit edge of the lattice graph: the segment from `base` to
/// `base + h_dir`, with `dir` a 1-based axis index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeId {
    pub base: Vec<i64>,
    pub dir: u8,
}

impl EdgeId {
    pub fn new(base: Vec<i64>, dir: u8) -> Self {
        debug_assert!(dir >= 1 && (dir as usize) <= base.len());
        Self { base, dir }
    }

    /// 0-based axis index.
    #[inline]
    pub fn axis(&self) -> usize {
        self.dir as usize - 1
    }

    /// Stable textual address, used for CSV replay files.
    pub fn address(&self) -> String {
        let coords: Vec<String> = self.base.iter().map(|c| c.to_string()).collect();
        format!("({};{})", coords.join(","), self.dir)
    }

    pub fn parse_address(s: &str) -> Option<Self> {
        let inner = s.strip_prefix('(')?.strip_suffix(')')?;
        let (coords, dir) = inner.rsplit_once(';')?;
        let base: Option<Vec<i64>> = coords.split(',').map(|c| c.trim().parse().ok()).collect();
        Some(Self {
            base: base?,
            dir: dir.trim().parse().ok()?,
        })
    }
}

/// An n-cube of the complex, addressed by its ordered edge tuple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CubeId {
    pub edges: Vec<EdgeId>,
}

impl CubeId {
    pub fn new(edges: Vec<EdgeId>) -> Self {
        debug_assert!(!edges.is_empty());
        Self { edges }
    }

    pub fn n(&self) -> usize {
        self.edges.len()
    }
}

/// An n-rectangle `Λ_L(u) = Π_j Λ_{L_j}(u_j)` with integer center and
/// half-sides; open in `R^{nd}`, sup-norm geometry.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoxSpec {
    /// Flattened center, length `n * d`; chunk `j` is `u_j ∈ Z^d`.
    pub center: Vec<i64>,
    /// Per-particle half-sides, length `n`.
    pub sides: Vec<u32>,
    pub n: usize,
    pub d: usize,
}

impl BoxSpec {
    pub fn new(center: Vec<i64>, sides: Vec<u32>, n: usize, d: usize) -> Result<Self, GeometryError> {
        if n == 0 || d == 0 {
            return Err(GeometryError::InvalidBox(format!("n={n}, d={d} must be >= 1")));
        }
        if center.len() != n * d {
            return Err(GeometryError::InvalidBox(format!(
                "center length {} != n*d = {}",
                center.len(),
                n * d
            )));
        }
        if sides.len() != n {
            return Err(GeometryError::InvalidBox(format!(
                "sides length {} != n = {n}",
                sides.len()
            )));
        }
        if sides.iter().any(|&l| l == 0) {
            return Err(GeometryError::InvalidBox("all half-sides must be >= 1".into()));
        }
        Ok(Self { center, sides, n, d })
    }

    /// Cube with equal half-sides.
    pub fn cube(center: Vec<i64>, l: u32, n: usize, d: usize) -> Result<Self, GeometryError> {
        Self::new(center, vec![l; n], n, d)
    }

    #[inline]
    pub fn particle_center(&self, j: usize) -> &[i64] {
        &self.center[j * self.d..(j + 1) * self.d]
    }

    pub fn is_cube(&self) -> bool {
        self.sides.iter().all(|&l| l == self.sides[0])
    }

    /// Lebesgue volume |Λ| = Π_j (2 L_j)^d.
    pub fn volume(&self) -> f64 {
        self.sides
            .iter()
            .map(|&l| (2.0 * l as f64).powi(self.d as i32))
            .product()
    }

    /// Centered shrink Λ_{L-t}; half-sides must stay >= 1.
    pub fn shrink(&self, t: u32) -> Result<Self, GeometryError> {
        let sides: Vec<u32> = self
            .sides
            .iter()
            .map(|&l| l.checked_sub(t).filter(|&x| x >= 1))
            .collect::<Option<_>>()
            .ok_or_else(|| GeometryError::InvalidBox(format!("cannot shrink by {t}")))?;
        Self::new(self.center.clone(), sides, self.n, self.d)
    }

    /// Does the open rectangle contain the lattice point `x ∈ Z^{nd}`?
    pub fn contains_lattice(&self, x: &[i64]) -> bool {
        debug_assert_eq!(x.len(), self.n * self.d);
        (0..self.n).all(|j| {
            let l = self.sides[j] as i64;
            (0..self.d).all(|a| (x[j * self.d + a] - self.center[j * self.d + a]).abs() < l)
        })
    }

    /// All lattice points of `B_L(u) = Λ ∩ Z^{nd}` (flattened).
    pub fn lattice_points(&self) -> Vec<Vec<i64>> {
        let mut ranges: Vec<Vec<i64>> = Vec::with_capacity(self.n * self.d);
        for j in 0..self.n {
            let l = self.sides[j] as i64;
            for a in 0..self.d {
                let c = self.center[j * self.d + a];
                ranges.push(((c - l + 1)..=(c + l - 1)).collect());
            }
        }
        cartesian(&ranges)
    }

    /// Lattice points of the out-layer `B_L^out = (Λ_L \ Λ_{L-6}) ∩ Z^{nd}`.
    /// Requires a cube with L >= 7.
    pub fn out_layer(&self) -> Result<Vec<Vec<i64>>, GeometryError> {
        if !self.is_cube() || self.sides[0] < 7 {
            return Err(GeometryError::InvalidBox(
                "out-layer needs an equal-sided cube with L >= 7".into(),
            ));
        }
        let inner = self.shrink(6)?;
        Ok(self
            .lattice_points()
            .into_iter()
            .filter(|x| !inner.contains_lattice(x))
            .collect())
    }
}

fn cartesian(ranges: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = vec![Vec::new()];
    for r in ranges {
        let mut next = Vec::with_capacity(out.len() * r.len());
        for prefix in &out {
            for &v in r {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Number of lattice edges meeting the open 1-box of half-side `L`:
/// `d (2L) (2L-1)^{d-1}`.
pub fn count_edges(d: u32, l: u64) -> Result<u128, GeometryError> {
    if d == 0 || l == 0 {
        return Err(GeometryError::InvalidBox("need d >= 1 and L >= 1".into()));
    }
    let err = || GeometryError::Overflow {
        what: "count_edges",
        d: d as usize,
        sides: vec![l],
    };
    let two_l = (l as u128).checked_mul(2).ok_or_else(err)?;
    let mut acc = (d as u128).checked_mul(two_l).ok_or_else(err)?;
    for _ in 0..(d - 1) {
        acc = acc.checked_mul(two_l - 1).ok_or_else(err)?;
    }
    Ok(acc)
}

/// Number of n-cubes meeting an n-rectangle: `Π_j d (2L_j)(2L_j-1)^{d-1}`.
pub fn count_cubes(n: u32, d: u32, sides: &[u64]) -> Result<u128, GeometryError> {
    if n == 0 || sides.len() != n as usize {
        return Err(GeometryError::InvalidBox(format!(
            "need n >= 1 and {} side lengths",
            n
        )));
    }
    let mut acc: u128 = 1;
    for &l in sides {
        let f = count_edges(d, l)?;
        acc = acc.checked_mul(f).ok_or(GeometryError::Overflow {
            what: "count_cubes",
            d: d as usize,
            sides: sides.to_vec(),
        })?;
    }
    Ok(acc)
}

/// All edges of `Γ^(1) ∩ Λ_L(u)` under the closure convention: an edge
/// belongs to the subgraph iff its open segment meets the open box.
pub fn enumerate_edges(u: &[i64], l: u32, d: usize) -> Vec<EdgeId> {
    debug_assert_eq!(u.len(), d);
    let l = l as i64;
    let mut edges = Vec::new();
    for dir in 1..=d {
        let axis = dir - 1;
        let mut ranges: Vec<Vec<i64>> = Vec::with_capacity(d);
        for (a, &ua) in u.iter().enumerate() {
            if a == axis {
                ranges.push(((ua - l)..=(ua + l - 1)).collect());
            } else {
                ranges.push(((ua - l + 1)..=(ua + l - 1)).collect());
            }
        }
        for base in cartesian(&ranges) {
            edges.push(EdgeId::new(base, dir as u8));
        }
    }
    edges
}

/// All n-cubes of `Γ^(n) ∩ Λ`: exactly the tuples `(e_1, …, e_n)` with
/// `e_j` an edge of the j-th projected 1-box.
pub fn enumerate_cubes(spec: &BoxSpec) -> Vec<CubeId> {
    let per_axis: Vec<Vec<EdgeId>> = (0..spec.n)
        .map(|j| enumerate_edges(spec.particle_center(j), spec.sides[j], spec.d))
        .collect();
    let mut out: Vec<Vec<EdgeId>> = vec![Vec::new()];
    for list in &per_axis {
        let mut next = Vec::with_capacity(out.len() * list.len());
        for prefixix in &out {
            for e in list {
                let mut p = prefixix.clone();
                p.push(e.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out.into_iter().map(CubeId::new).collect()
}

/// A 1-box of the projection union `Π_J Λ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Box1 {
    pub center: Vec<i64>,
    pub half: u32,
}

impl Box1 {
    /// Open sup-norm boxes overlap iff centers are closer than the sum of
    /// half-sides on every axis.
    pub fn overlaps(&self, other: &Box1) -> bool {
        self.center
            .iter()
            .zip(&other.center)
            .all(|(&a, &b)| (a - b).abs() < self.half as i64 + other.half as i64)
    }
}

/// `Π_J Λ = ∪_{j∈J} Λ_{L_j}(u_j)` as a deduplicated set of 1-boxes.
/// Indices in `j_set` are 1-based; the empty set yields the empty union.
pub fn projections(spec: &BoxSpec, j_set: &[usize]) -> Result<Vec<Box1>, GeometryError> {
    let mut out: Vec<Box1> = Vec::with_capacity(j_set.len());
    for &j in j_set {
        if j == 0 || j > spec.n {
            return Err(GeometryError::IndexOutOfRange { index: j, n: spec.n });
        }
        let b = Box1 {
            center: spec.particle_center(j - 1).to_vec(),
            half: spec.sides[j - 1],
        };
        if !out.contains(&b) {
            out.push(b);
        }
    }
    out.sort();
    Ok(out)
}

/// Full projection `Π Λ`.
pub fn full_projection(spec: &BoxSpec) -> Vec<Box1> {
    let all: Vec<usize> = (1..=spec.n).collect();
    projections(spec, &all).expect("full index set is valid")
}

/// `r_{n,L} = 4(n-1)(2L + r_0) + 2L`, the separability radius.
pub fn separability_radius(n: u32, l: u64, r0: u64) -> u64 {
    4 * (n as u64 - 1) * (2 * l + r0) + 2 * l
}

#[cfg(test)]
mod tests;
