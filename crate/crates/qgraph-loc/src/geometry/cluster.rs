//! Cube clustering (the enlargement-and-merge construction) and
//! R-connectivity of point families.

use crate::error::GeometryError;

/// One enclosing cube produced by [`cluster_cubes`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterCube {
    pub center: Vec<i64>,
    /// Half-side `l_j = n_j (L + 7)`.
    pub half: u64,
    /// Number of input cubes swallowed.
    pub count: usize,
    /// Indices of the swallowed inputs.
    pub members: Vec<usize>,
}

const ENLARGE: i64 = 7;

struct Item {
    center: Vec<i64>,
    half: i64,
    count: usize,
    members: Vec<usize>,
}

fn open_overlap(a: &Item, b: &Item) -> bool {
    a.center
        .iter()
        .zip(&b.center)
        .all(|(&x, &y)| (x - y).abs() < a.half + b.half)
}

/// Groups `k` equal-sided cubes `Λ_L(u_r)` into pairwise disjoint enclosing
/// cubes with half-sides `n_j (L+7)` summing to `k (L+7)`, whose 7-shrinks
/// cover every input. Components are ordered by their lexicographically
/// smallest member center and each enclosing cube is centered at the integer
/// floor of its component's bounding-box midpoint, so the output is
/// deterministic.
pub fn cluster_cubes(
    centers: &[Vec<i64>],
    l: u64,
    dim: usize,
) -> Result<Vec<ClusterCube>, GeometryError> {
    let k = centers.len();
    if k == 0 {
        return Err(GeometryError::InvalidBox("need at least one cube".into()));
    }
    let mut items: Vec<Item> = centers
        .iter()
        .enumerate()
        .map(|(i, c)| {
            debug_assert_eq!(c.len(), dim);
            Item {
                center: c.clone(),
                half: l as i64 + ENLARGE,
                count: 1,
                members: vec![i],
            }
        })
        .collect();

    let mut rounds = 0usize;
    loop {
        rounds += 1;
        if rounds > k + 1 {
            return Err(GeometryError::ClusterNoTermination(rounds));
        }
        // Union-find over the open-overlap graph.
        let m = items.len();
        let mut parent: Vec<usize> = (0..m).collect();
        fn find(parent: &mut Vec<usize>, i: usize) -> usize {
            if parent[i] != i {
                let r = find(parent, parent[i]);
                parent[i] = r;
            }
            parent[i]
        }
        let mut merged_any = false;
        for i in 0..m {
            for j in (i + 1)..m {
                if open_overlap(&items[i], &items[j]) {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[ri.max(rj)] = ri.min(rj);
                        merged_any = true;
                    }
                }
            }
        }
        if !merged_any {
            break;
        }
        // Collect components, ordered by lexicographic smallest member center.
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut root_of: Vec<usize> = Vec::new();
        for i in 0..m {
            let r = find(&mut parent, i);
            match root_of.iter().position(|&x| x == r) {
                Some(g) => groups[g].push(i),
                None => {
                    root_of.push(r);
                    groups.push(vec![i]);
                }
            }
        }
        groups.sort_by(|ga, gb| {
            let ka = ga.iter().map(|&i| &items[i].center).min().unwrap();
            let kb = gb.iter().map(|&i| &items[i].center).min().unwrap();
            ka.cmp(kb)
        });
        let mut next: Vec<Item> = Vec::with_capacity(groups.len());
        for g in groups {
            let count: usize = g.iter().map(|&i| items[i].count).sum();
            let mut members: Vec<usize> = g.iter().flat_map(|&i| items[i].members.clone()).collect();
            members.sort_unstable();
            let mut center = Vec::with_capacity(dim);
            for a in 0..dim {
                let lo = g.iter().map(|&i| items[i].center[a] - items[i].half).min().unwrap();
                let hi = g.iter().map(|&i| items[i].center[a] + items[i].half).max().unwrap();
                center.push((lo + hi).div_euclid(2));
            }
            next.push(Item {
                center,
                half: count as i64 * (l as i64 + ENLARGE),
                count,
                members,
            });
        }
        items = next;
    }

    let out: Vec<ClusterCube> = items
        .into_iter()
        .map(|it| ClusterCube {
            center: it.center,
            half: it.half as u64,
            count: it.count,
            members: it.members,
        })
        .collect();

    // Output clauses, asserted on every call.
    for (i, a) in out.iter().enumerate() {
        if a.half != a.count as u64 * (l + ENLARGE as u64) {
            return Err(GeometryError::ClusterClause("side arithmetic l_j = n_j (L+7)"));
        }
        for b in out.iter().skip(i + 1) {
            let disjoint = a
                .center
                .iter()
                .zip(&b.center)
                .any(|(&x, &y)| (x - y).unsigned_abs() >= a.half + b.half);
            if !disjoint {
                return Err(GeometryError::ClusterClause("pairwise disjointness"));
            }
        }
    }
    let total: u64 = out.iter().map(|c| c.half).sum();
    if total != k as u64 * (l + ENLARGE as u64) {
        return Err(GeometryError::ClusterClause("Σ l_j = k (L+7)"));
    }
    for (r, u) in centers.iter().enumerate() {
        let covered = out.iter().any(|c| {
            c.half >= ENLARGE as u64 + l
                && c.center
                    .iter()
                    .zip(u)
                    .all(|(&cc, &uu)| (cc - uu).abs() + l as i64 <= c.half as i64 - ENLARGE)
        });
        if !covered {
            return Err(GeometryError::ClusterClause("7-shrink covering of inputs"));
        }
        let _ = r;
    }
    Ok(out)
}

/// Is `∪_j Λ_R(y_j)` a connected subset of `R^d`? Open sup-norm boxes of
/// equal radius overlap iff centers are closer than `2R`; the union is
/// connected iff the overlap graph is.
pub fn is_r_connected(points: &[Vec<i64>], r: u64) -> bool {
    let k = points.len();
    if k == 0 {
        return false;
    }
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    for i in 0..k {
        for j in (i + 1)..k {
            let dist = points[i]
                .iter()
                .zip(&points[j])
                .map(|(&a, &b)| (a - b).unsigned_abs())
                .max()
                .unwrap();
            if dist < 2 * r {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let root = find(&mut parent, 0);
    let connected = (1..k).all(|i| find(&mut parent, i) == root);
    if connected && k >= 2 {
        debug_assert!(max_pair_dist(points) < (k as u64 - 1) * 2 * r);
    }
    connected
}

/// Largest pairwise sup distance; the appendix bound for an R-connected
/// family is `< (#J - 1)(2R)`.
pub fn max_pair_dist(points: &[Vec<i64>]) -> u64 {
    let mut best = 0u64;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let dist = points[i]
                .iter()
                .zip(&points[j])
                .map(|(&a, &b)| (a - b).unsigned_abs())
                .max()
                .unwrap();
            best = best.max(dist);
        }
    }
    best
}
