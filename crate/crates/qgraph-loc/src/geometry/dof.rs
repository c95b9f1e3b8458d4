//! Gluing of per-cube grids into a global degree-of-freedom map.
//!
//! Each n-cube carries an (M+1)^n tensor grid. A local grid coordinate at
//! t=0 or t=M collapses to the underlying lattice vertex, so cubes sharing
//! a face or vertex share those DOFs; interior grid nodes stay private to
//! their edge/cube. NodeKey equality is exactly the gluing relation of the
//! complex, and coincides with equality of scaled geometric positions
//! (points of the embedded complex are uniquely addressed).

use super::{BoxSpec, CubeId, EdgeId};
use std::collections::BTreeMap;

/// One axis entry of a node: either a lattice vertex or an interior grid
/// point of an edge (0 < t < M).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AxisNode {
    Vertex(Vec<i64>),
    EdgePoint { edge: EdgeId, t: u32 },
}

/// Global node address: an n-tuple of axis entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeKey {
    pub coords: Vec<AxisNode>,
}

impl NodeKey {
    /// Geometric position scaled by M: an integer vector in `Z^{nd}` whose
    /// components are `M * position`. This is the canonical encoding; DOFs
    /// are ordered lexicographically by it.
    pub fn scaled_position(&self, m: u32, d: usize) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.coords.len() * d);
        for c in &self.coords {
            match c {
                AxisNode::Vertex(v) => out.extend(v.iter().map(|&x| x * m as i64)),
                AxisNode::EdgePoint { edge, t } => {
                    let mut p: Vec<i64> = edge.base.iter().map(|&x| x * m as i64).collect();
                    p[edge.axis()] += *t as i64;
                    out.extend(p);
                }
            }
        }
        out
    }
}

/// The assembled DOF map of a glued complex.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub m: u32,
    pub n: usize,
    pub d: usize,
    /// DOF index -> node key, in canonical (lexicographic) order.
    pub keys: Vec<NodeKey>,
    /// DOF index -> scaled position (M * geometric position).
    pub scaled: Vec<Vec<i64>>,
    index: BTreeMap<Vec<i64>, usize>,
    /// The cubes the map was built from.
    pub cubes: Vec<CubeId>,
}

impl DofMap {
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn index_of_scaled(&self, scaled: &[i64]) -> Option<usize> {
        self.index.get(scaled).copied()
    }

    /// Geometric position of a DOF in `R^{nd}`.
    pub fn position(&self, i: usize) -> Vec<f64> {
        self.scaled[i]
            .iter()
            .map(|&q| q as f64 / self.m as f64)
            .collect()
    }

    /// Sup norm |x| of the DOF position (exact rational, rounded once).
    pub fn position_sup_norm(&self, i: usize) -> f64 {
        let q = self.scaled[i].iter().map(|&q| q.abs()).max().unwrap_or(0);
        q as f64 / self.m as f64
    }

    /// Cell assignment: the nearest lattice point to the DOF position,
    /// ties broken toward the lexicographically smaller center (per-axis
    /// round-half-down). Partitions the DOFs.
    pub fn cell_of(&self, i: usize) -> Vec<i64> {
        let m = self.m as i64;
        self.scaled[i]
            .iter()
            .map(|&q| {
                // nearest integer to q/m with half-ties rounded down
                let lo = q.div_euclid(m);
                let rem = q - lo * m; // 0 <= rem < m
                if 2 * rem > m {
                    lo + 1
                } else {
                    lo
                }
            })
            .collect()
    }

    /// Indices of all DOFs assigned to the cell at lattice point `x`.
    pub fn dofs_in_cell(&self, x: &[i64]) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.cell_of(i) == x).collect()
    }

    /// Indices of DOFs whose cell lies in the cellular set `cells`.
    pub fn dofs_in_cells(&self, cells: &[Vec<i64>]) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| {
                let c = self.cell_of(i);
                cells.contains(&c)
            })
            .collect()
    }

    /// Cell -> DOF indices for the whole map (one pass).
    pub fn cell_partition(&self) -> std::collections::HashMap<Vec<i64>, Vec<usize>> {
        let mut map: std::collections::HashMap<Vec<i64>, Vec<usize>> =
            std::collections::HashMap::new();
        for i in 0..self.len() {
            map.entry(self.cell_of(i)).or_default().push(i);
        }
        map
    }

    /// Global indices of the (M+1)^n local grid of `cube`, in local
    /// lexicographic order (last axis fastest).
    pub fn cube_local_to_global(&self, cube: &CubeId) -> Vec<usize> {
        let m = self.m;
        let n = self.n;
        let total = (m as usize + 1).pow(n as u32);
        let mut out = Vec::with_capacity(total);
        let mut t = vec![0u32; n];
        loop {
            let key = node_key_for(cube, &t, m);
            let scaled = key.scaled_position(m, self.d);
            let idx = self
                .index_of_scaled(&scaled)
                .expect("cube node must be in the map");
            out.push(idx);
            // increment multi-index, last axis fastest
            let mut axis = n;
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                if t[axis] < m {
                    t[axis] += 1;
                    for tt in t.iter_mut().skip(axis + 1) {
                        *tt = 0;
                    }
                    break;
                }
            }
        }
    }
}

fn node_key_for(cube: &CubeId, t: &[u32], m: u32) -> NodeKey {
    let coords = cube
        .edges
        .iter()
        .zip(t)
        .map(|(e, &ti)| {
            if ti == 0 {
                AxisNode::Vertex(e.base.clone())
            } else if ti == m {
                let mut v = e.base.clone();
                v[e.axis()] += 1;
                AxisNode::Vertex(v)
            } else {
                AxisNode::EdgePoint {
                    edge: e.clone(),
                    t: ti,
                }
            }
        })
        .collect();
    NodeKey { coords }
}

/// Builds the DOF map of an explicit cube collection with M subdivisions
/// per unit edge (M >= 2).
pub fn glue_nodes(cubes: &[CubeId], m: u32) -> DofMap {
    assert!(m >= 2, "mesh must have M >= 2 subdivisions");
    assert!(!cubes.is_empty());
    let n = cubes[0].n();
    let d = cubes[0].edges[0].base.len();
    let mut index: BTreeMap<Vec<i64>, NodeKey> = BTreeMap::new();
    for cube in cubes {
        debug_assert_eq!(cube.n(), n);
        let mut t = vec![0u32; n];
        'grid: loop {
            let key = node_key_for(cube, &t, m);
            let scaled = key.scaled_position(m, d);
            index.entry(scaled).or_insert(key);
            let mut axis = n;
            loop {
                if axis == 0 {
                    break 'grid;
                }
                axis -= 1;
                if t[axis] < m {
                    t[axis] += 1;
                    for tt in t.iter_mut().skip(axis + 1) {
                        *tt = 0;
                    }
                    break;
                }
            }
        }
    }
    let mut keys = Vec::with_capacity(index.len());
    let mut scaled = Vec::with_capacity(index.len());
    let mut pos_index = BTreeMap::new();
    for (i, (s, k)) in index.into_iter().enumerate() {
        pos_index.insert(s.clone(), i);
        scaled.push(s);
        keys.push(k);
    }
    DofMap {
        m,
        n,
        d,
        keys,
        scaled,
        index: pos_index,
        cubes: cubes.to_vec(),
    }
}

/// Glues the full subgraph complex of a box.
pub fn glue_box(spec: &BoxSpec, m: u32) -> DofMap {
    glue_nodes(&super::enumerate_cubes(spec), m)
}
