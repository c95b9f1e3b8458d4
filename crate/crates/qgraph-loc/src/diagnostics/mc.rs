//! Seeded Monte Carlo estimators over the disorder: Wegner (one and two
//! volumes), Lifshitz-tail scarcity, the initial-length-scale gap event,
//! and the two-cube DS probability. Trial i is a pure function of
//! `trial_seed(base, i)`; aggregation is counting.

use super::{edges_of_box, energy_grid, McEstimate, OperatorFactory};
use crate::assembly::Mesh;
use crate::error::DiagnosticsError;
use crate::geometry::{count_edges, separability, separability_radius, BoxSpec};
use crate::random::{sample_omega, trial_seed, InteractionSpec, PotentialLaw};
use crate::spectral::{dist_to_spectrum, lowest_eigs, EIG_TOL};
use rayon::prelude::*;
use serde::Serialize;

/// Ceiling handed to spectral-distance certificates in the MC loops; the
/// desk boxes are small enough for the dense path, where it is unused.
fn mc_ceiling(e: f64) -> f64 {
    e + 64.0
}

#[derive(Debug, Clone, Serialize)]
pub struct WegnerOneResult {
    pub estimate: McEstimate,
    pub energy: f64,
    pub eps: f64,
    /// |Λ| · |Π_1 Λ| · s(μ, 2ε), the scaling side of the bound.
    pub rhs_factor: f64,
    /// p̂ / rhs_factor.
    pub ratio: f64,
}

/// Estimates P{ dist(σ(H_Λ(ω)), E) < ε } over fresh disorder per trial.
#[allow(clippy::too_many_arguments)]
pub fn mc_wegner_one(
    law: &PotentialLaw,
    interaction: &InteractionSpec,
    mesh: Mesh,
    cube: &BoxSpec,
    energy: f64,
    eps: f64,
    trials: u64,
    base_seed: u64,
) -> Result<WegnerOneResult, DiagnosticsError> {
    assert!(eps > 0.0);
    let edges = edges_of_box(cube);
    let hits: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let omega = sample_omega(law, &edges, trial_seed(base_seed, t)).expect("edges nonempty");
            let factory = OperatorFactory {
                omega: &omega,
                interaction: *interaction,
                mesh,
            };
            let op = factory.assemble(cube).expect("assembly");
            let sd = dist_to_spectrum(&op, energy, mc_ceiling(energy), t).expect("distance");
            sd.dist < eps
        })
        .collect();
    let successes = hits.iter().filter(|&&h| h).count() as u64;
    let estimate = McEstimate::from_counts(trials, successes, base_seed);
    let proj = (2.0 * cube.sides[0] as f64).powi(cube.d as i32);
    let rhs_factor = cube.volume() * proj * law.concentration(2.0 * eps);
    Ok(WegnerOneResult {
        estimate,
        energy,
        eps,
        rhs_factor,
        ratio: estimate.p_hat / rhs_factor,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct WegnerTwoResult {
    pub estimate: McEstimate,
    pub eps: f64,
    pub interval: (f64, f64),
    pub rhs_factor: f64,
    pub ratio: f64,
}

/// Estimates P{ dist(σ_I(H_Λ(u)), σ_I(H_Λ(v))) < ε } for a pre-separable
/// pair sharing one disorder realization. Trials where either cube has no
/// spectrum in I contribute no success.
#[allow(clippy::too_many_arguments)]
pub fn mc_wegner_two(
    law: &PotentialLaw,
    interaction: &InteractionSpec,
    mesh: Mesh,
    box_a: &BoxSpec,
    box_b: &BoxSpec,
    interval: (f64, f64),
    eps: f64,
    trials: u64,
    base_seed: u64,
) -> Result<WegnerTwoResult, DiagnosticsError> {
    let rep = separability(box_a, box_b, interaction.r0).map_err(DiagnosticsError::Geometry)?;
    if rep.pre_separable.is_none() {
        return Err(DiagnosticsError::NotPreSeparable);
    }
    let mut edges = edges_of_box(box_a);
    edges.extend(edges_of_box(box_b));
    edges.sort();
    edges.dedup();
    let (lo, hi) = interval;
    let hits: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let omega = sample_omega(law, &edges, trial_seed(base_seed, t)).expect("edges");
            let factory = OperatorFactory {
                omega: &omega,
                interaction: *interaction,
                mesh,
            };
            let sig = |spec: &BoxSpec| -> Vec<f64> {
                let op = factory.assemble(spec).expect("assembly");
                crate::linalg::dense::dense_generalized_eigenvalues(&op.a, &op.b)
                    .expect("dense")
                    .into_iter()
                    .filter(|&e| e >= lo && e <= hi)
                    .collect()
            };
            let sa = sig(box_a);
            let sb = sig(box_b);
            let mut dist = f64::INFINITY;
            for a in &sa {
                for b in &sb {
                    dist = dist.min((a - b).abs());
                }
            }
            dist < eps
        })
        .collect();
    let successes = hits.iter().filter(|&&h| h).count() as u64;
    let estimate = McEstimate::from_counts(trials, successes, base_seed);
    let proj = |b: &BoxSpec| {
        b.sides
            .iter()
            .map(|&l| (2.0 * l as f64).powi(b.d as i32))
            .fold(0.0f64, f64::max)
    };
    let pi0 = proj(box_a).max(proj(box_b));
    let rhs_factor = box_a.volume() * box_b.volume() * pi0 * law.concentration(2.0 * eps);
    Ok(WegnerTwoResult {
        estimate,
        eps,
        interval,
        rhs_factor,
        ratio: estimate.p_hat / rhs_factor,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LifshitzCell {
    pub l: u64,
    pub n_l: u128,
    pub threshold: f64,
    pub estimate: McEstimate,
    /// -log p̂ (rule-of-three surrogate for zero-success cells).
    pub neg_log_p: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LifshitzResult {
    pub cells: Vec<LifshitzCell>,
    /// Least-squares slope γ̂ of -log p̂ against n_l over cells with
    /// successes (needs at least two such cells).
    pub gamma_hat: Option<f64>,
}

/// Estimates P{ E_1(H_{Λ_l}) <= n q_- + n b n_l^{-2} } on a grid of
/// half-sides. For n = 1 this is the single-particle scarcity event; the
/// n-particle variant uses the n-scaled threshold.
#[allow(clippy::too_many_arguments)]
pub fn mc_lifshitz(
    law: &PotentialLaw,
    interaction: &InteractionSpec,
    mesh: Mesh,
    n_particles: u32,
    d: u32,
    l_grid: &[u64],
    b: f64,
    trials: u64,
    base_seed: u64,
) -> Result<LifshitzResult, DiagnosticsError> {
    assert!(b > 0.0);
    let mut cells = Vec::with_capacity(l_grid.len());
    for &l in l_grid {
        let n_l = count_edges(d, l).map_err(DiagnosticsError::Geometry)?;
        let nf = n_particles as f64;
        let threshold = nf * law.q_minus + nf * b / (n_l as f64 * n_l as f64);
        let center = vec![0i64; (n_particles * d) as usize];
        let cube = BoxSpec::cube(center, l as u32, n_particles as usize, d as usize)
            .map_err(DiagnosticsError::Geometry)?;
        let edges = edges_of_box(&cube);
        let hits: Vec<bool> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let omega =
                    sample_omega(law, &edges, trial_seed(base_seed ^ l, t)).expect("edges");
                let factory = OperatorFactory {
                    omega: &omega,
                    interaction: *interaction,
                    mesh,
                };
                let op = factory.assemble(&cube).expect("assembly");
                let e1 = lowest_eigs(&op, 1, EIG_TOL, t).expect("eigs").eigenvalues[0];
                e1 <= threshold
            })
            .collect();
        let successes = hits.iter().filter(|&&h| h).count() as u64;
        let estimate = McEstimate::from_counts(trials, successes, base_seed ^ l);
        let neg_log_p = if successes > 0 {
            -estimate.p_hat.ln()
        } else {
            -(3.0 / trials as f64).ln()
        };
        cells.push(LifshitzCell {
            l,
            n_l,
            threshold,
            estimate,
            neg_log_p,
        });
    }
    // γ̂ from the cells that actually observed the event
    let pts: Vec<(f64, f64)> = cells
        .iter()
        .filter(|c| c.estimate.successes > 0)
        .map(|c| (c.n_l as f64, c.neg_log_p))
        .collect();
    let gamma_hat = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let denom = n * sxx - sx * sx;
        (denom > 0.0).then(|| (n * sxy - sx * sy) / denom)
    } else {
        None
    };
    Ok(LifshitzResult { cells, gamma_hat })
}

#[derive(Debug, Clone, Serialize)]
pub struct IlsResult {
    pub l0: u64,
    pub eps0: f64,
    pub mass: f64,
    /// Gap event P{ s_ω - n q_- <= L_0^{β-1} } (the proven sufficient
    /// condition for singularity in the window).
    pub gap_estimate: McEstimate,
    /// Optional direct scan: P{ ∃E on the I_n grid with Λ (E, m_{L_0})-S },
    /// flagged grid-approximate by construction.
    pub scan_estimate: Option<McEstimate>,
    pub scan_grid_points: usize,
}

/// The initial-length-scale events at base scale L_0 with β = 1/2:
/// ε_0 = L_0^{-1/2}/2, m_{L_0} = L_0^{-1/4}/3.
#[allow(clippy::too_many_arguments)]
pub fn mc_ils(
    law: &PotentialLaw,
    interaction: &InteractionSpec,
    mesh: Mesh,
    n_particles: u32,
    d: u32,
    l0: u64,
    trials: u64,
    base_seed: u64,
    direct_scan: bool,
) -> Result<IlsResult, DiagnosticsError> {
    let beta = 0.5f64;
    let eps0 = 0.5 * (l0 as f64).powf(beta - 1.0);
    let mass = (l0 as f64).powf((beta - 1.0) / 2.0) / 3.0;
    let nq = n_particles as f64 * law.q_minus;
    let gap_threshold = (l0 as f64).powf(beta - 1.0);
    let center = vec![0i64; (n_particles * d) as usize];
    let cube = BoxSpec::cube(center, l0 as u32, n_particles as usize, d as usize)
        .map_err(DiagnosticsError::Geometry)?;
    let edges = edges_of_box(&cube);

    let gaps: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let omega = sample_omega(law, &edges, trial_seed(base_seed, t)).expect("edges");
            let factory = OperatorFactory {
                omega: &omega,
                interaction: *interaction,
                mesh,
            };
            let op = factory.assemble(&cube).expect("assembly");
            let e1 = lowest_eigs(&op, 1, EIG_TOL, t).expect("eigs").eigenvalues[0];
            e1 - nq <= gap_threshold
        })
        .collect();
    let successes = gaps.iter().filter(|&&h| h).count() as u64;
    let gap_estimate = McEstimate::from_counts(trials, successes, base_seed);

    let (scan_estimate, scan_grid_points) = if direct_scan {
        let spacing = (-(l0 as f64).powf(beta)).exp() / 4.0;
        let grid = energy_grid(nq - 0.5, nq + eps0, spacing.max(1e-6));
        let count = grid.len();
        let hits: Vec<bool> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let omega = sample_omega(law, &edges, trial_seed(base_seed, t)).expect("edges");
                let factory = OperatorFactory {
                    omega: &omega,
                    interaction: *interaction,
                    mesh,
                };
                grid.iter().any(|&e| {
                    let rep = super::classify_ns(&factory, &cube, e, mass, mc_ceiling(e), t);
                    matches!(rep, Ok(r) if !r.is_ns())
                })
            })
            .collect();
        let s = hits.iter().filter(|&&h| h).count() as u64;
        (Some(McEstimate::from_counts(trials, s, base_seed)), count)
    } else {
        (None, 0)
    };

    Ok(IlsResult {
        l0,
        eps0,
        mass,
        gap_estimate,
        scan_estimate,
        scan_grid_points,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DsResult {
    pub l_k: u64,
    pub mass: f64,
    pub estimate: McEstimate,
    /// The DS target bound L_k^{-2 p_n (1+θ)^k} (asymptotic; reported,
    /// never asserted).
    pub target_bound: f64,
    pub margin: f64,
    pub grid_points: usize,
}

/// Estimates the pair-singularity probability
/// P{ ∃E on the I_n grid : both cubes are (E, m)-S } for a separable pair,
/// and reports it against the DS target bound.
#[allow(clippy::too_many_arguments)]
pub fn mc_ds(
    law: &PotentialLaw,
    interaction: &InteractionSpec,
    mesh: Mesh,
    cube_u: &BoxSpec,
    cube_v: &BoxSpec,
    mass: f64,
    interval: (f64, f64),
    target_bound: f64,
    trials: u64,
    base_seed: u64,
) -> Result<DsResult, DiagnosticsError> {
    let rep = separability(cube_u, cube_v, interaction.r0).map_err(DiagnosticsError::Geometry)?;
    if !rep.separable {
        return Err(DiagnosticsError::GeometryPrecondition(
            "DS pairs must be separable".into(),
        ));
    }
    let l_k = cube_u.sides[0] as u64;
    let beta = 0.5f64;
    let spacing = ((-(l_k as f64).powf(beta)).exp() / 4.0).max(1e-7);
    let grid = energy_grid(interval.0, interval.1, spacing);
    let mut edges = edges_of_box(cube_u);
    edges.extend(edges_of_box(cube_v));
    edges.sort();
    edges.dedup();

    let hits: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let omega = sample_omega(law, &edges, trial_seed(base_seed, t)).expect("edges");
            let factory = OperatorFactory {
                omega: &omega,
                interaction: *interaction,
                mesh,
            };
            grid.iter().any(|&e| {
                let su = super::classify_ns(&factory, cube_u, e, mass, mc_ceiling(e), t);
                let singular_u = matches!(su, Ok(r) if !r.is_ns());
                if !singular_u {
                    return false;
                }
                let sv = super::classify_ns(&factory, cube_v, e, mass, mc_ceiling(e), t);
                matches!(sv, Ok(r) if !r.is_ns())
            })
        })
        .collect();
    let successes = hits.iter().filter(|&&h| h).count() as u64;
    let estimate = McEstimate::from_counts(trials, successes, base_seed);
    Ok(DsResult {
        l_k,
        mass,
        estimate,
        target_bound,
        margin: target_bound - estimate.p_hat,
        grid_points: grid.len(),
    })
}

/// A separable pair of cube centers produced by the sufficient-condition
/// generator: v = u + (2 r_{n,L} + 1) along every coordinate, which puts v
/// outside every related-point ball of radius r_{n,L}.
pub fn separable_pair_centers(n: usize, d: usize, l: u64, r0: u64) -> (Vec<i64>, Vec<i64>) {
    let r = separability_radius(n as u32, l, r0) as i64;
    let u = vec![0i64; n * d];
    let v = vec![2 * r + 1; n * d];
    (u, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoxSpec;
    use crate::random::OmegaSample;

    fn unit_mesh() -> Mesh {
        Mesh::new(2).unwrap()
    }

    #[test]
    fn wegner_one_impossible_below_bottom() {
        let law = PotentialLaw::default_uniform();
        let cube = BoxSpec::cube(vec![0], 4, 1, 1).unwrap();
        let r = mc_wegner_one(
            &law,
            &InteractionSpec::none(),
            unit_mesh(),
            &cube,
            -1.0,
            0.5,
            200,
            42,
        )
        .unwrap();
        assert_eq!(r.estimate.successes, 0);
        assert!(r.estimate.rule_of_three.is_some());
    }

    #[test]
    fn wegner_one_saturates_for_huge_eps() {
        let law = PotentialLaw::default_uniform();
        let cube = BoxSpec::cube(vec![0], 3, 1, 1).unwrap();
        let r = mc_wegner_one(
            &law,
            &InteractionSpec::none(),
            unit_mesh(),
            &cube,
            0.5,
            50.0,
            100,
            7,
        )
        .unwrap();
        assert_eq!(r.estimate.successes, 100);
        assert!(r.ratio.is_finite());
    }

    #[test]
    fn wegner_one_deterministic_across_pool_sizes() {
        let law = PotentialLaw::default_uniform();
        let cube = BoxSpec::cube(vec![0], 4, 1, 1).unwrap();
        let run = |threads: usize| {
            super::super::with_pool(threads, || {
                mc_wegner_one(
                    &law,
                    &InteractionSpec::none(),
                    unit_mesh(),
                    &cube,
                    0.4,
                    0.05,
                    400,
                    99,
                )
                .unwrap()
                .estimate
                .successes
            })
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn wegner_two_contract_and_independence_consistency() {
        let law = PotentialLaw::default_uniform();
        let l = 2u32;
        let r0 = 1u64;
        // identical cubes rejected
        let a = BoxSpec::cube(vec![0], l, 1, 1).unwrap();
        assert!(matches!(
            mc_wegner_two(
                &law,
                &InteractionSpec::none(),
                unit_mesh(),
                &a,
                &a,
                (0.0, 2.0),
                0.1,
                10,
                1
            ),
            Err(DiagnosticsError::NotPreSeparable)
        ));
        // completely separated boxes: joint estimate consistent with the
        // product-sampling oracle
        let (u, v) = separable_pair_centers(1, 1, l as u64, r0);
        let b = BoxSpec::cube(v.clone(), l, 1, 1).unwrap();
        let a = BoxSpec::cube(u, l, 1, 1).unwrap();
        let rep = separability(&a, &b, r0).unwrap();
        assert!(rep.completely_separated);
        let eps = 0.05;
        let trials = 3000u64;
        let joint = mc_wegner_two(
            &law,
            &InteractionSpec::none(),
            unit_mesh(),
            &a,
            &b,
            (0.0, 3.0),
            eps,
            trials,
            5,
        )
        .unwrap();
        // independence oracle: sample the two spectra with unrelated seeds
        let edges_a = edges_of_box(&a);
        let edges_b = edges_of_box(&b);
        let mut hits = 0u64;
        for t in 0..trials {
            let oa = sample_omega(&law, &edges_a, trial_seed(0xaaaa, t)).unwrap();
            let ob = sample_omega(&law, &edges_b, trial_seed(0xbbbb, t)).unwrap();
            let fa = OperatorFactory {
                omega: &oa,
                interaction: InteractionSpec::none(),
                mesh: unit_mesh(),
            };
            let fb = OperatorFactory {
                omega: &ob,
                interaction: InteractionSpec::none(),
                mesh: unit_mesh(),
            };
            let ea: Vec<f64> =
                crate::linalg::dense::dense_generalized_eigenvalues(&fa.assemble(&a).unwrap().a, &fa.assemble(&a).unwrap().b)
                    .unwrap()
                    .into_iter()
                    .filter(|&e| (0.0..=3.0).contains(&e))
                    .collect();
            let eb: Vec<f64> =
                crate::linalg::dense::dense_generalized_eigenvalues(&fb.assemble(&b).unwrap().a, &fb.assemble(&b).unwrap().b)
                    .unwrap()
                    .into_iter()
                    .filter(|&e| (0.0..=3.0).contains(&e))
                    .collect();
            let mut dist = f64::INFINITY;
            for x in &ea {
                for y in &eb {
                    dist = dist.min((x - y).abs());
                }
            }
            if dist < eps {
                hits += 1;
            }
        }
        let oracle = McEstimate::from_counts(trials, hits, 0);
        // Wilson intervals of the two estimates overlap
        assert!(
            joint.estimate.wilson_lo <= oracle.wilson_hi
                && oracle.wilson_lo <= joint.estimate.wilson_hi,
            "joint {:?} vs oracle {:?}",
            joint.estimate,
            oracle
        );
    }

    #[test]
    fn wegner_two_eps_to_zero_vanishes() {
        let law = PotentialLaw::default_uniform();
        let (u, v) = separable_pair_centers(1, 1, 2, 1);
        let a = BoxSpec::cube(u, 2, 1, 1).unwrap();
        let b = BoxSpec::cube(v, 2, 1, 1).unwrap();
        let r = mc_wegner_two(
            &law,
            &InteractionSpec::none(),
            unit_mesh(),
            &a,
            &b,
            (0.0, 3.0),
            1e-12,
            300,
            3,
        )
        .unwrap();
        assert_eq!(r.estimate.successes, 0);
    }

    #[test]
    fn lifshitz_formula_and_monotone_first_step() {
        let law = PotentialLaw::default_uniform();
        // n_l(l=3, d=2) = 60
        assert_eq!(count_edges(2, 3).unwrap(), 60);
        let r = mc_lifshitz(
            &law,
            &InteractionSpec::none(),
            unit_mesh(),
            1,
            1,
            &[1, 2],
            0.5,
            4000,
            11,
        )
        .unwrap();
        // p̂ strictly decreases from l=1 to l=2 (zero-success cells count
        // as a decrease when the previous cell observed successes)
        let p1 = r.cells[0].estimate.p_hat;
        let p2 = r.cells[1].estimate.p_hat;
        assert!(r.cells[0].estimate.successes > 0, "l=1 must see events");
        assert!(p2 < p1, "p1 = {p1}, p2 = {p2}");
        assert_eq!(r.cells[0].threshold, 0.5 / 4.0);
    }

    #[test]
    fn lifshitz_b_zero_rejected() {
        let law = PotentialLaw::default_uniform();
        let res = std::panic::catch_unwind(|| {
            mc_lifshitz(
                &law,
                &InteractionSpec::none(),
                unit_mesh(),
                1,
                1,
                &[1],
                0.0,
                10,
                1,
            )
        });
        assert!(res.is_err());
    }

    #[test]
    fn ils_gap_event_certain_at_bottom_potential() {
        // deterministic ω ≡ q_-: E1 = q_- exactly (free ground state is
        // the constant), so the gap event always occurs
        let cube = BoxSpec::cube(vec![0], 9, 1, 1).unwrap();
        let edges = edges_of_box(&cube);
        let omega = OmegaSample::constant(&edges, 0.25);
        let factory = OperatorFactory {
            omega: &omega,
            interaction: InteractionSpec::none(),
            mesh: unit_mesh(),
        };
        let op = factory.assemble(&cube).unwrap();
        let e1 = lowest_eigs(&op, 1, EIG_TOL, 1).unwrap().eigenvalues[0];
        assert!((e1 - 0.25).abs() < 1e-10);
        assert!(e1 - 0.25 <= (9.0f64).powf(-0.5));
    }

    #[test]
    fn ils_mass_formula_l0_81() {
        let law = PotentialLaw::default_uniform();
        let r = mc_ils(
            &law,
            &InteractionSpec::none(),
            unit_mesh(),
            1,
            1,
            81,
            10,
            3,
            false,
        )
        .unwrap();
        assert!((r.mass - 1.0 / 9.0).abs() < 1e-12);
        assert!((r.eps0 - 0.5 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn ils_gap_estimate_decreases_with_scale() {
        let law = PotentialLaw::default_uniform();
        let mut prev = f64::INFINITY;
        for l0 in [9u64, 16, 25] {
            let r = mc_ils(
                &law,
                &InteractionSpec::none(),
                unit_mesh(),
                1,
                1,
                l0,
                2000,
                17,
                false,
            )
            .unwrap();
            assert!(
                r.gap_estimate.p_hat <= prev,
                "gap estimate must not increase: {} then {}",
                prev,
                r.gap_estimate.p_hat
            );
            prev = r.gap_estimate.p_hat;
        }
    }

    #[test]
    fn ds_report_with_separable_pair() {
        let law = PotentialLaw::default_uniform();
        let (u, v) = separable_pair_centers(1, 1, 8, 1);
        let a = BoxSpec::cube(u, 8, 1, 1).unwrap();
        let b = BoxSpec::cube(v, 8, 1, 1).unwrap();
        // strong-ish disorder desk run, few trials: p̂ small, bound reported
        let r = mc_ds(
            &law,
            &InteractionSpec::none(),
            unit_mesh(),
            &a,
            &b,
            0.2,
            (-0.5, 0.05),
            20f64.powf(-8.0),
            4,
            123,
        )
        .unwrap();
        assert_eq!(r.grid_points > 1, true);
        assert!((r.target_bound - 3.90625e-11).abs() < 1e-16);
        // non-separable pair rejected
        let c = BoxSpec::cube(vec![1], 8, 1, 1).unwrap();
        assert!(mc_ds(
            &law,
            &InteractionSpec::none(),
            unit_mesh(),
            &a,
            &c,
            0.2,
            (-0.5, 0.05),
            1e-10,
            2,
            1
        )
        .is_err());
    }
}
