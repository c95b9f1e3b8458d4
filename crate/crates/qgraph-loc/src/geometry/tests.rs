use super::interactive::partition_distance;
use super::*;

// ---------- independent oracles ----------

/// Open-interval intersection on integers scaled by 2 (so centers and
/// endpoints stay integral): (a0,a1) ∩ (b0,b1) ≠ ∅ iff max lo < min hi.
fn open_intersects(a0: i64, a1: i64, b0: i64, b1: i64) -> bool {
    a0.max(b0) < a1.min(b1)
}

/// Edge-in-box predicate straight from the definition: the open segment
/// meets the open box. Everything scaled by 2 to keep integers.
fn oracle_edge_in_box(base: &[i64], dir_axis: usize, u: &[i64], l: i64) -> bool {
    for (a, (&m, &ua)) in base.iter().zip(u).enumerate() {
        let (e0, e1) = if a == dir_axis {
            (2 * m, 2 * m + 2)
        } else {
            // degenerate: the segment has constant coordinate m on axis a;
            // point-in-open-interval test
            if !(2 * ua - 2 * l < 2 * m && 2 * m < 2 * ua + 2 * l) {
                return false;
            }
            continue;
        };
        if !open_intersects(e0, e1, 2 * ua - 2 * l, 2 * ua + 2 * l) {
            return false;
        }
    }
    true
}

fn oracle_enumerate_edges(u: &[i64], l: i64, d: usize) -> Vec<EdgeId> {
    let mut out = Vec::new();
    for axis in 0..d {
        // superset of candidate bases
        let mut ranges: Vec<Vec<i64>> = Vec::new();
        for &ua in u {
            ranges.push(((ua - l - 2)..=(ua + l + 2)).collect());
        }
        for base in super::cartesian(&ranges) {
            if oracle_edge_in_box(&base, axis, u, l) {
                out.push(EdgeId::new(base, (axis + 1) as u8));
            }
        }
    }
    out.sort();
    out
}

// ---------- counts and enumeration ----------

#[test]
fn count_edges_paper_values() {
    assert_eq!(count_edges(1, 5).unwrap(), 10);
    assert_eq!(count_edges(2, 1).unwrap(), 4);
    assert_eq!(count_edges(3, 2).unwrap(), 108);
    assert!(count_edges(3, u64::MAX / 2).is_err());
}

#[test]
fn count_cubes_examples() {
    assert_eq!(count_cubes(2, 1, &[2, 3]).unwrap(), 24);
    assert_eq!(count_cubes(1, 1, &[1]).unwrap(), 2);
    assert_eq!(count_cubes(2, 2, &[1, 1]).unwrap(), 16);
}

#[test]
fn enumeration_matches_oracle_and_formula() {
    for d in 1..=3usize {
        for l in 1..=3i64 {
            let u: Vec<i64> = (0..d as i64).map(|a| a - 1).collect();
            let mut got = enumerate_edges(&u, l as u32, d);
            got.sort();
            let want = oracle_enumerate_edges(&u, l, d);
            assert_eq!(got, want, "d={d} l={l}");
            assert_eq!(got.len() as u128, count_edges(d as u32, l as u64).unwrap());
        }
    }
}

#[test]
fn enumerate_cubes_unit_interval() {
    let spec = BoxSpec::cube(vec![0], 1, 1, 1).unwrap();
    let cubes = enumerate_cubes(&spec);
    assert_eq!(cubes.len(), 2);
    let bases: Vec<i64> = cubes.iter().map(|c| c.edges[0].base[0]).collect();
    assert_eq!(bases, vec![-1, 0]);
}

#[test]
fn enumerate_cubes_counts_match_product() {
    let spec = BoxSpec::new(vec![0, 0], vec![1, 1], 2, 1).unwrap();
    let cubes = enumerate_cubes(&spec);
    assert_eq!(cubes.len(), 4);
    // 50 random boxes, n <= 3, d <= 2, L <= 3
    let mut seed = 99u64;
    let mut rnd = move || {
        seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        seed >> 33
    };
    for _ in 0..50 {
        let n = 1 + (rnd() % 3) as usize;
        let d = 1 + (rnd() % 2) as usize;
        let sides: Vec<u32> = (0..n).map(|_| 1 + (rnd() % 3) as u32).collect();
        let center: Vec<i64> = (0..n * d).map(|_| (rnd() % 9) as i64 - 4).collect();
        let spec = BoxSpec::new(center, sides.clone(), n, d).unwrap();
        let count = count_cubes(n as u32, d as u32, &sides.iter().map(|&s| s as u64).collect::<Vec<_>>()).unwrap();
        if count <= 20_000 {
            assert_eq!(enumerate_cubes(&spec).len() as u128, count);
        }
    }
}

// ---------- gluing ----------

#[test]
fn glue_chain_dof_count() {
    // d=1, L=2, M=2: 4 edges x 3 nodes - 3 shared interior vertices,
    // plus the 2 boundary vertices = 9
    let spec = BoxSpec::cube(vec![0], 2, 1, 1).unwrap();
    let dofs = glue_box(&spec, 2);
    assert_eq!(dofs.len(), 9);
}

#[test]
fn glue_single_square_no_sharing() {
    let e1 = EdgeId::new(vec![0], 1);
    let e2 = EdgeId::new(vec![5], 1);
    let cube = CubeId::new(vec![e1, e2]);
    let dofs = glue_nodes(&[cube], 2);
    assert_eq!(dofs.len(), 9);
}

#[test]
fn degree_four_vertex_shared_by_four_edge_grids() {
    // d=2, n=1: the four edges around the origin all carry the vertex DOF.
    let spec = BoxSpec::cube(vec![0, 0], 2, 1, 2).unwrap();
    let dofs = glue_box(&spec, 2);
    let origin_scaled = vec![0i64, 0];
    let idx = dofs.index_of_scaled(&origin_scaled).expect("origin vertex present");
    assert!(matches!(&dofs.keys[idx].coords[0], AxisNode::Vertex(v) if v == &vec![0, 0]));
    let sharing = dofs
        .cubes
        .iter()
        .filter(|c| dofs.cube_local_to_global(c).contains(&idx))
        .count();
    assert_eq!(sharing, 4);
}

#[test]
fn dof_positions_and_cells() {
    let spec = BoxSpec::cube(vec![0], 2, 1, 1).unwrap();
    let dofs = glue_box(&spec, 2);
    // positions: -2, -1.5, -1, ..., 2
    let positions: Vec<f64> = (0..dofs.len()).map(|i| dofs.position(i)[0]).collect();
    let want: Vec<f64> = (0..9).map(|i| -2.0 + 0.5 * i as f64).collect();
    assert_eq!(positions, want);
    // cells partition with half-ties rounded down
    let cells: Vec<i64> = (0..dofs.len()).map(|i| dofs.cell_of(i)[0]).collect();
    assert_eq!(cells, vec![-2, -2, -1, -1, 0, 0, 1, 1, 2]);
}

// ---------- projections ----------

#[test]
fn projection_cases() {
    let spec = BoxSpec::new(vec![0, 10], vec![2, 2], 2, 1).unwrap();
    assert!(projections(&spec, &[]).unwrap().is_empty());
    let p1 = projections(&spec, &[1]).unwrap();
    assert_eq!(p1, vec![Box1 { center: vec![0], half: 2 }]);
    assert!(projections(&spec, &[3]).is_err());
    // n=3 full projection merges duplicates
    let spec3 = BoxSpec::new(vec![0, 0, 7], vec![2, 2, 2], 3, 1).unwrap();
    let full = full_projection(&spec3);
    assert_eq!(full.len(), 2);
}

// ---------- interactivity ----------

fn oracle_diag_distance(u: &[i64], n: usize, d: usize, span: i64) -> u64 {
    // joint brute force over x in a wide box
    let lo: Vec<i64> = (0..d)
        .map(|a| (0..n).map(|j| u[j * d + a]).min().unwrap() - span)
        .collect();
    let hi: Vec<i64> = (0..d)
        .map(|a| (0..n).map(|j| u[j * d + a]).max().unwrap() + span)
        .collect();
    let ranges: Vec<Vec<i64>> = (0..d).map(|a| (lo[a]..=hi[a]).collect()).collect();
    let mut best = u64::MAX;
    for x in super::cartesian(&ranges) {
        let v = (0..n)
            .map(|j| {
                (0..d)
                    .map(|a| (u[j * d + a] - x[a]).unsigned_abs())
                    .max()
                    .unwrap()
            })
            .max()
            .unwrap();
        best = best.min(v);
    }
    best
}

#[test]
fn diag_distance_matches_brute_force() {
    let mut seed = 7u64;
    let mut rnd = move || {
        seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        (seed >> 33) as i64
    };
    for _ in 0..200 {
        let n = 2 + (rnd() % 2) as usize;
        let d = 1 + (rnd() % 2) as usize;
        let u: Vec<i64> = (0..n * d).map(|_| rnd() % 21 - 10).collect();
        assert_eq!(
            diag_distance(&u, n, d),
            oracle_diag_distance(&u, n, d, 2),
            "u={u:?} n={n} d={d}"
        );
    }
}

#[test]
fn classify_interactive_examples() {
    // n=2, d=1, u=(0,100), L=10, r0=1: dist 50 >= 21 -> PI with J={1}
    let spec = BoxSpec::cube(vec![0, 100], 10, 2, 1).unwrap();
    match classify_interactive(&spec, 1).unwrap() {
        Interactivity::Pi { witness } => {
            assert_eq!(partition_distance(&spec.center, 1, &witness, &[2]), 100);
        }
        Interactivity::Fi => panic!("expected PI"),
    }
    // u=(0,5): dist 3 < 21 -> FI
    let spec = BoxSpec::cube(vec![0, 5], 10, 2, 1).unwrap();
    assert_eq!(classify_interactive(&spec, 1).unwrap(), Interactivity::Fi);
    // on the diagonal -> FI
    let spec = BoxSpec::cube(vec![3, 3], 10, 2, 1).unwrap();
    assert_eq!(classify_interactive(&spec, 1).unwrap(), Interactivity::Fi);
    // n=1 -> FI by convention
    let spec = BoxSpec::cube(vec![0], 4, 1, 1).unwrap();
    assert_eq!(classify_interactive(&spec, 1).unwrap(), Interactivity::Fi);
}

#[test]
fn pi_always_carries_decomposing_witness() {
    let mut seed = 5u64;
    let mut rnd = move || {
        seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        (seed >> 33) as i64
    };
    for _ in 0..500 {
        let n = 2 + (rnd() % 2) as usize;
        let d = 1 + (rnd() % 2) as usize;
        let l = 1 + (rnd() % 4) as u32;
        let r0 = 1 + (rnd() % 3) as u64;
        let u: Vec<i64> = (0..n * d).map(|_| rnd() % 81 - 40).collect();
        let spec = BoxSpec::cube(u.clone(), l, n, d).unwrap();
        if let Interactivity::Pi { witness } = classify_interactive(&spec, r0).unwrap() {
            let jc: Vec<usize> = (1..=n).filter(|j| !witness.contains(j)).collect();
            assert!(partition_distance(&u, d, &witness, &jc) >= 2 * l as u64 + r0);
        }
    }
}

#[test]
fn related_points_examples() {
    // d=1, (1,5) -> {(1,1),(1,5),(5,1),(5,5)}
    let mut pts = related_points(&[1, 5], 2, 1);
    pts.sort();
    assert_eq!(pts, vec![vec![1, 1], vec![1, 5], vec![5, 1], vec![5, 5]]);
    // (a,a) -> single point
    assert_eq!(related_points(&[4, 4], 2, 1), vec![vec![4, 4]]);
    // n=3 distinct -> 27 = K(3)
    assert_eq!(related_points(&[0, 3, 9], 3, 1).len(), 27);
    // always contains x, cardinality k_x^n: here k_x = 2, n = 3
    let x = vec![2, 2, 7];
    let pts = related_points(&x, 3, 1);
    assert!(pts.contains(&x));
    assert_eq!(pts.len(), 8);
}

// ---------- separability ----------

#[test]
fn separability_radius_paper_value() {
    assert_eq!(separability_radius(3, 5, 2), 106);
}

#[test]
fn identical_cubes_not_preseparable() {
    let a = BoxSpec::cube(vec![0, 0], 2, 2, 1).unwrap();
    let rep = separability(&a, &a, 1).unwrap();
    assert!(rep.pre_separable.is_none());
    assert!(!rep.separable);
}

#[test]
fn sufficient_conditions_never_contradict_definition_small_grid() {
    // d=1, n=2, L=2, r0=1, centers in [-12,12]^2 x [-12,12]^2
    let l = 2u32;
    let r0 = 1u64;
    let range = 12i64;
    for u1 in -range..=range {
        for u2 in -range..=range {
            let a = BoxSpec::cube(vec![u1, u2], l, 2, 1).unwrap();
            for v1 in -range..=range {
                for v2 in -range..=range {
                    let b = BoxSpec::cube(vec![v1, v2], l, 2, 1).unwrap();
                    let rep = separability(&a, &b, r0).unwrap();
                    if sufficient_preseparable(&a.center, &b.center, l as u64, 2, 1) {
                        assert!(rep.pre_separable.is_some(), "u=({u1},{u2}) v=({v1},{v2})");
                    }
                    if sufficient_separable(&a.center, &b.center, l as u64, r0, 2, 1) {
                        assert!(rep.separable, "u=({u1},{u2}) v=({v1},{v2})");
                    }
                    if rep.separable {
                        // Lemma: separable FI cubes are completely separated
                        let fi_a = classify_interactive(&a, r0).unwrap() == Interactivity::Fi;
                        let fi_b = classify_interactive(&b, r0).unwrap() == Interactivity::Fi;
                        if fi_a && fi_b {
                            assert!(rep.completely_separated);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn lemma_three_seven_three_restated() {
    // y outside Λ_{2r}(0), x inside Λ_r(0) => separable; d=1, n=2, L=2.
    let l = 2u32;
    let r0 = 1u64;
    let r = separability_radius(2, l as u64, r0) as i64; // 24
    assert_eq!(r, 24);
    for y1 in (-2 * r - 4)..=(2 * r + 4) {
        for y2 in [-2 * r - 3, -r, 0, r, 2 * r + 1, 2 * r + 5] {
            let y = vec![y1, y2];
            let outside = y.iter().map(|c| c.abs()).max().unwrap() >= 2 * r;
            if !outside {
                continue;
            }
            for x1 in [-r + 1, -5, 0, 9, r - 1] {
                for x2 in [-r + 1, 0, r - 1] {
                    let a = BoxSpec::cube(y.clone(), l, 2, 1).unwrap();
                    let b = BoxSpec::cube(vec![x1, x2], l, 2, 1).unwrap();
                    let rep = separability(&a, &b, r0).unwrap();
                    assert!(rep.separable, "y={y:?} x=({x1},{x2})");
                }
            }
        }
    }
}

// ---------- clustering ----------

#[test]
fn cluster_single_cube() {
    let out = cluster_cubes(&[vec![3, -1]], 5, 2).unwrap();
    assert_eq!(out.len(), 1);
    assert_eq!(out[0].half, 12);
    assert_eq!(out[0].center, vec![3, -1]);
}

#[test]
fn cluster_two_far_apart() {
    let out = cluster_cubes(&[vec![0], vec![100]], 5, 1).unwrap();
    assert_eq!(out.len(), 2);
    assert!(out.iter().all(|c| c.half == 12));
}

#[test]
fn cluster_three_overlapping_chain() {
    // d=1, centers 0, L, 2L with side L: one cube of side 3(L+7)
    let l = 5u64;
    let out = cluster_cubes(&[vec![0], vec![5], vec![10]], l, 1).unwrap();
    assert_eq!(out.len(), 1);
    assert_eq!(out[0].half, 3 * (l + 7));
    assert_eq!(out[0].count, 3);
}

#[test]
fn cluster_clauses_hold_on_random_inputs() {
    let mut seed = 2024u64;
    let mut rnd = move || {
        seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        (seed >> 33) as i64
    };
    for trial in 0..1000 {
        let d = 1 + (rnd() % 2) as usize;
        let n = 1 + (rnd() % 2) as usize;
        let dim = n * d;
        let k = 1 + (rnd() % 6) as usize;
        let l = 1 + (rnd() % 6) as u64;
        let centers: Vec<Vec<i64>> = (0..k)
            .map(|_| (0..dim).map(|_| rnd() % 121 - 60).collect())
            .collect();
        // cluster_cubes asserts all four output clauses internally
        let out = cluster_cubes(&centers, l, dim);
        assert!(out.is_ok(), "trial {trial}: {:?}", out.err());
    }
}

// ---------- R-connectivity ----------

/// d=1 oracle: merge open intervals and count components.
fn oracle_connected_1d(points: &[i64], r: i64) -> bool {
    let mut iv: Vec<(i64, i64)> = points.iter().map(|&p| (p - r, p + r)).collect();
    iv.sort();
    let mut components = 0;
    let mut cur_hi = i64::MIN;
    for (lo, hi) in iv {
        if lo >= cur_hi {
            components += 1;
        }
        cur_hi = cur_hi.max(hi);
    }
    components == 1
}

#[test]
fn r_connected_cases() {
    assert!(is_r_connected(&[vec![7]], 1));
    assert!(!is_r_connected(&[vec![0], vec![3]], 1));
    assert!(is_r_connected(&[vec![0], vec![1], vec![2]], 1));
    assert!(max_pair_dist(&[vec![0], vec![1], vec![2]]) < 2 * (2 * 1));
}

#[test]
fn r_connected_matches_interval_oracle() {
    let mut seed = 11u64;
    let mut rnd = move || {
        seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        (seed >> 33) as i64
    };
    for _ in 0..500 {
        let k = 1 + (rnd() % 4) as usize;
        let r = 1 + (rnd() % 3) as u64;
        let pts: Vec<Vec<i64>> = (0..k).map(|_| vec![rnd() % 15 - 7]).collect();
        let flat: Vec<i64> = pts.iter().map(|p| p[0]).collect();
        assert_eq!(
            is_r_connected(&pts, r),
            oracle_connected_1d(&flat, r as i64),
            "pts={flat:?} r={r}"
        );
    }
}
