//! Deterministic estimate checks: the Combes-Thomas resolvent bound, the
//! Davies-Gaffney semigroup bound, the geometric resolvent inequalities
//! (audited with empirical constants), and the Cheeger gap of the
//! Kirchhoff Laplacian.

use super::OperatorFactory;
use crate::assembly::{factor_boxes, Mesh};
use crate::error::DiagnosticsError;
use crate::geometry::{classify_interactive, count_edges, BoxSpec, Interactivity};
use crate::random::{InteractionSpec, OmegaSample};
use crate::spectral::{
    cell_distance, dist_to_spectrum, lowest_eigs, weyl_constant, ResolventContext,
    SemigroupEngine, EIG_TOL,
};
use serde::Serialize;

/// The explicit resolvent envelope below the spectral bottom:
///   sqrt(π/2) (√δ / η^{3/4} + 3 / (8 √δ η^{5/4})) e^{-δ √η}.
pub fn ct_bound(delta: f64, eta: f64) -> f64 {
    assert!(delta >= 1.0 && eta > 0.0);
    (std::f64::consts::PI / 2.0).sqrt()
        * (delta.sqrt() / eta.powf(0.75) + 3.0 / (8.0 * delta.sqrt() * eta.powf(1.25)))
        * (-delta * eta.sqrt()).exp()
}

/// One pair of the Combes-Thomas sweep.
#[derive(Debug, Clone, Serialize)]
pub struct CtCase {
    pub x: Vec<i64>,
    pub y: Vec<i64>,
    pub delta: f64,
    pub eta: f64,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Measures block norms at E = s_ω - η against the envelope for every cell
/// pair given; each pair must have cell distance >= 1.
pub fn verify_combes_thomas(
    factory: &OperatorFactory,
    cube: &BoxSpec,
    eta: f64,
    pairs: &[(Vec<i64>, Vec<i64>)],
    seed: u64,
) -> Result<Vec<CtCase>, DiagnosticsError> {
    let op = factory.assemble(cube)?;
    let bottom = lowest_eigs(&op, 1, EIG_TOL, seed)?.eigenvalues[0];
    let energy = bottom - eta;
    let ctx = ResolventContext::new_uncertified(&op, energy, eta)?;
    let mut out = Vec::with_capacity(pairs.len());
    for (x, y) in pairs {
        let delta = cell_distance(x, y);
        if delta < 1.0 {
            return Err(DiagnosticsError::GeometryPrecondition(format!(
                "cells {x:?}, {y:?} are closer than distance 1"
            )));
        }
        let measured = ctx.block_norm(x, y)?.norm;
        let bound = ct_bound(delta, eta);
        out.push(CtCase {
            x: x.clone(),
            y: y.clone(),
            delta,
            eta,
            measured,
            bound,
            pass: measured <= bound,
        });
    }
    Ok(out)
}

/// One (pair, t) case of the Davies-Gaffney sweep.
#[derive(Debug, Clone, Serialize)]
pub struct DgCase {
    pub x: Vec<i64>,
    pub y: Vec<i64>,
    pub t: f64,
    pub delta: f64,
    pub measured: f64,
    pub error_bound: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Checks |⟨e^{-tH} f, g⟩| <= e^{-t s_ω} e^{-δ²/4t} ||f|| ||g|| for
/// indicator-type vectors supported on the given cells, folding the
/// semigroup error bound into the comparison (measured + err <= rhs).
pub fn verify_davies_gaffney(
    factory: &OperatorFactory,
    cube: &BoxSpec,
    t_grid: &[f64],
    pairs: &[(Vec<i64>, Vec<i64>)],
    seed: u64,
) -> Result<Vec<DgCase>, DiagnosticsError> {
    let op = factory.assemble(cube)?;
    let bottom = lowest_eigs(&op, 1, EIG_TOL, seed)?.eigenvalues[0];
    let engine = SemigroupEngine::new(&op)?;
    let partition = op.dofmap.cell_partition();
    let mut out = Vec::new();
    for (x, y) in pairs {
        let delta = cell_distance(x, y);
        if delta < 1.0 {
            return Err(DiagnosticsError::SupportsTooClose);
        }
        let dofs_x = partition.get(x).cloned().unwrap_or_default();
        let dofs_y = partition.get(y).cloned().unwrap_or_default();
        if dofs_x.is_empty() || dofs_y.is_empty() {
            return Err(DiagnosticsError::GeometryPrecondition(format!(
                "cells {x:?} or {y:?} carry no DOFs"
            )));
        }
        let n = op.dofs();
        let mut f = vec![0.0; n];
        for &i in &dofs_x {
            f[i] = 1.0;
        }
        let mut g = vec![0.0; n];
        for &i in &dofs_y {
            g[i] = 1.0;
        }
        let fn_ = engine.b_norm(&f);
        let gn = engine.b_norm(&g);
        for &t in t_grid {
            let pairing = engine
                .pair(&f, &g, t, 1e-11)
                .map_err(DiagnosticsError::Solve)?;
            let rhs = (-t * bottom).exp() * (-delta * delta / (4.0 * t)).exp() * fn_ * gn;
            let measured = pairing.value.abs();
            out.push(DgCase {
                x: x.clone(),
                y: y.clone(),
                t,
                delta,
                measured,
                error_bound: pairing.error_bound,
                rhs,
                pass: measured + pairing.error_bound <= rhs,
            });
        }
    }
    let _ = seed;
    Ok(out)
}

/// Audit record of the two-scale geometric resolvent inequality.
#[derive(Debug, Clone, Serialize)]
pub struct Gri2Report {
    pub energy: f64,
    pub lhs: f64,
    pub rhs_factor: f64,
    pub empirical_c: f64,
    pub max_inner: f64,
    pub max_outer: f64,
    pub out_layer_count: usize,
}

/// Computes ||G_{Λ_L}(u, y; E)|| against
/// |B_l^out|² max_w ||G_{Λ_l}(u, w; E)|| max_z ||G_{Λ_L}(z, y; E)||,
/// reporting the empirical constant lhs/rhs. Geometry preconditions:
/// u ∈ Λ_{l-7}, Λ_l ⊂ Λ_{L-7}, y ∈ B_L^out.
pub fn verify_gri2(
    factory: &OperatorFactory,
    small: &BoxSpec,
    big: &BoxSpec,
    energy: f64,
    u: &[i64],
    y: &[i64],
    ceiling: f64,
    seed: u64,
) -> Result<Gri2Report, DiagnosticsError> {
    let l = small.sides[0];
    let big_l = big.sides[0];
    if l < 8 || big_l < l + 7 {
        return Err(DiagnosticsError::GeometryPrecondition(
            "need l >= 8 and L >= l + 7".into(),
        ));
    }
    // u ∈ Λ_{l-7}(small center)
    let inner = small.shrink(7).map_err(DiagnosticsError::Geometry)?;
    if !inner.contains_lattice(u) {
        return Err(DiagnosticsError::GeometryPrecondition(format!(
            "u = {u:?} outside the (l-7)-shrink of the small cube"
        )));
    }
    // Λ_l ⊂ Λ_{L-7}
    for j in 0..small.n {
        let off = small.particle_center(j)
            .iter()
            .zip(big.particle_center(j))
            .map(|(&a, &b)| (a - b).abs())
            .max()
            .unwrap();
        if off + l as i64 > (big_l - 7) as i64 {
            return Err(DiagnosticsError::GeometryPrecondition(
                "small cube not contained in the 7-shrink of the big cube".into(),
            ));
        }
    }
    let out_big = big.out_layer().map_err(DiagnosticsError::Geometry)?;
    if !out_big.iter().any(|p| p == y) {
        return Err(DiagnosticsError::GeometryPrecondition(format!(
            "y = {y:?} not in B_L^out"
        )));
    }

    let op_big = factory.assemble(big)?;
    let op_small = factory.assemble(small)?;
    let sd_big = dist_to_spectrum(&op_big, energy, ceiling, seed)?;
    let sd_small = dist_to_spectrum(&op_small, energy, ceiling, seed)?;
    if sd_big.dist <= 1e-12 || sd_small.dist <= 1e-12 {
        return Err(DiagnosticsError::Solve(crate::error::SolveError::Resonance {
            energy,
            dist: sd_big.dist.min(sd_small.dist),
        }));
    }
    let ctx_big = ResolventContext::new_uncertified(&op_big, energy, sd_big.dist)?;
    let ctx_small = ResolventContext::new_uncertified(&op_small, energy, sd_small.dist)?;

    let lhs = ctx_big.block_norm(u, y)?.norm;
    let out_small = small.out_layer().map_err(DiagnosticsError::Geometry)?;
    let mut max_inner = 0.0f64;
    let mut max_outer = 0.0f64;
    for w in &out_small {
        max_inner = max_inner.max(ctx_small.block_norm(u, w)?.norm);
        max_outer = max_outer.max(ctx_big.block_norm(w, y)?.norm);
    }
    let count = out_small.len();
    let rhs_factor = (count * count) as f64 * max_inner * max_outer;
    Ok(Gri2Report {
        energy,
        lhs,
        rhs_factor,
        empirical_c: lhs / rhs_factor,
        max_inner,
        max_outer,
        out_layer_count: count,
    })
}

/// Audit record of the tensor-decomposition resolvent inequality.
#[derive(Debug, Clone, Serialize)]
pub struct Gri3Report {
    pub energy: f64,
    pub s_param: f64,
    pub m1: f64,
    pub m1_capped: usize,
    pub lhs: f64,
    pub max_shifted_norm: f64,
    pub tail_term: f64,
    pub rhs: f64,
    pub resonant_shifts: usize,
}

/// For a decomposable cube and lattice points x, y with
/// δ1 = |x_{J^c} - y_{J^c}| > 2, computes both sides of
///   ||G(x,y;E)|| <= M1 max_{a<=M1} ||G''(x_{J^c}, y_{J^c}; E - λ_a)||
///                   + |Λ'| e^{-δ1 S},
/// with M1 from the explicit Weyl constant at (4S)² + E - n q_-.
#[allow(clippy::too_many_arguments)]
pub fn verify_gri3(
    factory: &OperatorFactory,
    cube: &BoxSpec,
    energy: f64,
    x: &[i64],
    y: &[i64],
    s_param: f64,
    q_minus: f64,
    ceiling: f64,
    seed: u64,
) -> Result<Gri3Report, DiagnosticsError> {
    let witness = match classify_interactive(cube, factory.interaction.r0)
        .map_err(DiagnosticsError::Geometry)?
    {
        Interactivity::Pi { witness } => witness,
        Interactivity::Fi => {
            return Err(DiagnosticsError::GeometryPrecondition(
                "GRI.3 needs a decomposable cube".into(),
            ))
        }
    };
    let d = cube.d;
    let n = cube.n;
    let (box1, box2) = factor_boxes(cube, &witness)?;
    let jc: Vec<usize> = (1..=n).filter(|j| !witness.contains(j)).collect();
    let pick = |p: &[i64], idx: &[usize]| -> Vec<i64> {
        let mut out = Vec::with_capacity(idx.len() * d);
        for &j in idx {
            out.extend_from_slice(&p[(j - 1) * d..j * d]);
        }
        out
    };
    let x2 = pick(x, &jc);
    let y2 = pick(y, &jc);
    let delta1 = x2
        .iter()
        .zip(&y2)
        .map(|(&a, &b)| (a - b).abs())
        .max()
        .unwrap() as f64;
    if delta1 <= 2.0 {
        return Err(DiagnosticsError::GeometryPrecondition(format!(
            "need |x_Jc - y_Jc| > 2, got {delta1}"
        )));
    }

    let op_full = factory.assemble(cube)?;
    let sd = dist_to_spectrum(&op_full, energy, ceiling, seed)?;
    if sd.dist <= 1e-12 {
        return Err(DiagnosticsError::Solve(crate::error::SolveError::Resonance {
            energy,
            dist: sd.dist,
        }));
    }
    let ctx_full = ResolventContext::new_uncertified(&op_full, energy, sd.dist)?;
    let lhs = ctx_full.block_norm(x, y)?.norm;

    // M1 from the explicit Weyl constant of the J-factor
    let n1 = box1.n as u32;
    let weyl_s = (4.0 * s_param).powi(2) + energy - n as f64 * q_minus;
    let c1 = weyl_constant(n1, d as u32, weyl_s + n as f64 * q_minus, n as f64 * q_minus);
    let m1 = c1 * box1.volume();
    let op1 = factory.assemble(&box1)?;
    let avail = op1.dofs();
    let m1_capped = (m1 as usize).min(avail);

    let eigs1 = lowest_eigs(&op1, m1_capped, EIG_TOL, seed)?;
    let op2 = factory.assemble(&box2)?;
    let mut max_shifted = 0.0f64;
    let mut resonant = 0usize;
    for &lam in &eigs1.eigenvalues {
        let shift = energy - lam;
        let sd2 = dist_to_spectrum(&op2, shift, ceiling, seed)?;
        if sd2.dist <= 1e-12 {
            resonant += 1;
            max_shifted = f64::INFINITY;
            continue;
        }
        let ctx2 = ResolventContext::new_uncertified(&op2, shift, sd2.dist)?;
        max_shifted = max_shifted.max(ctx2.block_norm(&x2, &y2)?.norm);
    }
    let tail = box1.volume() * (-delta1 * s_param).exp();
    Ok(Gri3Report {
        energy,
        s_param,
        m1,
        m1_capped,
        lhs,
        max_shifted_norm: max_shifted,
        tail_term: tail,
        rhs: m1 * max_shifted + tail,
        resonant_shifts: resonant,
    })
}

/// Cheeger-gap check of the Kirchhoff Laplacian: the discrete E_2 is a
/// Galerkin upper bound of the true one, so E_2 >= n_l^{-2} is a literal
/// inequality test.
#[derive(Debug, Clone, Serialize)]
pub struct CheegerReport {
    pub d: u32,
    pub l: u64,
    pub n_l: u128,
    pub e1: f64,
    pub e2: f64,
    pub threshold: f64,
    pub pass: bool,
}

pub fn cheeger_gap_check(d: u32, l: u64, mesh: Mesh) -> Result<CheegerReport, DiagnosticsError> {
    let spec = BoxSpec::cube(vec![0; d as usize], l as u32, 1, d as usize)
        .map_err(DiagnosticsError::Geometry)?;
    let edges = super::edges_of_box(&spec);
    let omega = OmegaSample::constant(&edges, 0.0);
    let factory = OperatorFactory {
        omega: &omega,
        interaction: InteractionSpec::none(),
        mesh,
    };
    let op = factory.assemble(&spec)?;
    let res = lowest_eigs(&op, 2, EIG_TOL, 1)?;
    let n_l = count_edges(d, l).map_err(DiagnosticsError::Geometry)?;
    let threshold = 1.0 / (n_l as f64 * n_l as f64);
    Ok(CheegerReport {
        d,
        l,
        n_l,
        e1: res.eigenvalues[0],
        e2: res.eigenvalues[1],
        threshold,
        pass: res.eigenvalues[1] >= threshold,
    })
}
