//! Spectral operations on assembled pencils: lowest eigenpairs, spectral
//! distances with ceiling certificates, Green's-function cell blocks in the
//! B-weighted metric, semigroup pairings, spectral projectors, and
//! dynamical moments.
//!
//! Everything at or below [`DENSE_THRESHOLD`] DOFs goes through the full
//! dense generalized eigensolver, which doubles as the oracle for the
//! sparse paths.

use crate::assembly::AssembledOperator;
use crate::error::SolveError;
use crate::linalg::banded::BandedLu;
use crate::linalg::dense::{dense_generalized_eigenvalues, dense_generalized_eigs};
use crate::linalg::expm::semigroup_apply;
use crate::linalg::lanczos::{lowest_generalized_eigs, LanczosOptions};
use nalgebra::DMatrix;

/// At or below this many DOFs the dense eigensolver is both the
/// implementation and the oracle.
pub const DENSE_THRESHOLD: usize = 500;

/// Default residual tolerance for eigenpairs.
pub const EIG_TOL: f64 = 1e-9;
/// Relative residual tolerance for shifted linear solves.
pub const SOLVE_TOL: f64 = 1e-11;

/// Γ(n/2) for the particle counts supported here.
pub fn gamma_half(n: u32) -> f64 {
    match n {
        1 => std::f64::consts::PI.sqrt(),
        2 => 1.0,
        3 => 0.5 * std::f64::consts::PI.sqrt(),
        _ => panic!("n = {n} outside supported range 1..=3"),
    }
}

/// The explicit Weyl constant: the count of eigenvalues <= S is bounded by
/// (⌊d^n (S - n q_-)^{n/2} / ((4π)^{n/2} Γ(n/2))⌋ + 1) · |Λ|.
pub fn weyl_constant(n: u32, d: u32, s: f64, n_q_minus: f64) -> f64 {
    let gap = s - n_q_minus;
    assert!(gap > 0.0, "Weyl bound needs S above n q_-");
    let raw = (d as f64).powi(n as i32) * gap.powf(n as f64 / 2.0)
        / ((4.0 * std::f64::consts::PI).powf(n as f64 / 2.0) * gamma_half(n));
    raw.floor() + 1.0
}

/// Eigenpairs of the pencil, ascending; eigenvectors are B-orthonormal.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
    pub residual_norms: Vec<f64>,
}

/// k lowest eigenpairs. Dense below the threshold; shift-invert Lanczos
/// with the shift one unit below the rigorous spectral bottom otherwise.
pub fn lowest_eigs(
    op: &AssembledOperator,
    k: usize,
    tol: f64,
    seed: u64,
) -> Result<SpectralResult, SolveError> {
    let n = op.dofs();
    if k == 0 || k > n {
        return Err(SolveError::Dimension(format!("k = {k} of {n} DOFs")));
    }
    if n <= DENSE_THRESHOLD {
        let (eigs, vecs) = dense_generalized_eigs(&op.a, &op.b)?;
        let mut residuals = Vec::with_capacity(k);
        let mut vectors = Vec::with_capacity(k);
        for j in 0..k {
            let x: Vec<f64> = vecs.column(j).iter().copied().collect();
            let ax = op.a.matvec_alloc(&x);
            let bx = op.b.matvec_alloc(&x);
            let mut r = 0.0;
            let mut xn = 0.0;
            for i in 0..n {
                r += (ax[i] - eigs[j] * bx[i]).powi(2);
                xn += x[i] * x[i];
            }
            residuals.push(r.sqrt() / xn.sqrt().max(f64::MIN_POSITIVE));
            vectors.push(x);
        }
        return Ok(SpectralResult {
            eigenvalues: eigs[..k].to_vec(),
            eigenvectors: vectors,
            residual_norms: residuals,
        });
    }
    let opts = LanczosOptions {
        tol,
        shift: op.meta.w_min - 1.0,
        seed,
        max_subspace: (4 * k + 80).min(n),
    };
    let (eigs, vecs, res) = lowest_generalized_eigs(&op.a, &op.b, k, &opts)?;
    Ok(SpectralResult {
        eigenvalues: eigs,
        eigenvectors: vecs,
        residual_norms: res,
    })
}

/// Eigenpairs with eigenvalue in [lo, hi], certified complete by computing
/// past `hi` (or exhausting the pencil).
pub fn eig_block_in_interval(
    op: &AssembledOperator,
    lo: f64,
    hi: f64,
    tol: f64,
    seed: u64,
) -> Result<SpectralResult, SolveError> {
    let n = op.dofs();
    let mut k = 16usize.min(n);
    loop {
        let res = lowest_eigs(op, k, tol, seed)?;
        if *res.eigenvalues.last().unwrap() > hi || k == n {
            let idx: Vec<usize> = (0..k)
                .filter(|&j| res.eigenvalues[j] >= lo && res.eigenvalues[j] <= hi)
                .collect();
            return Ok(SpectralResult {
                eigenvalues: idx.iter().map(|&j| res.eigenvalues[j]).collect(),
                eigenvectors: idx.iter().map(|&j| res.eigenvectors[j].clone()).collect(),
                residual_norms: idx.iter().map(|&j| res.residual_norms[j]).collect(),
            });
        }
        k = (2 * k).min(n);
    }
}

/// Distance from E to the pencil spectrum. On the dense path the whole
/// spectrum is known; on the sparse path eigenvalues are computed upward
/// until the last one clears E by more than the candidate distance, which
/// certifies that nothing uncomputed can be closer.
#[derive(Debug, Clone, Copy)]
pub struct SpectrumDistance {
    pub dist: f64,
    pub nearest: f64,
    pub count_computed: usize,
}

pub fn dist_to_spectrum(
    op: &AssembledOperator,
    energy: f64,
    ceiling: f64,
    seed: u64,
) -> Result<SpectrumDistance, SolveError> {
    let n = op.dofs();
    let scan = |eigs: &[f64]| {
        let (mut dist, mut nearest) = (f64::INFINITY, f64::NAN);
        for &e in eigs {
            let d = (e - energy).abs();
            if d < dist {
                dist = d;
                nearest = e;
            }
        }
        (dist, nearest)
    };
    if n <= DENSE_THRESHOLD {
        let eigs = dense_generalized_eigenvalues(&op.a, &op.b)?;
        let (dist, nearest) = scan(&eigs);
        return Ok(SpectrumDistance {
            dist,
            nearest,
            count_computed: eigs.len(),
        });
    }
    if energy >= ceiling {
        return Err(SolveError::CeilingTooLow { ceiling, energy });
    }
    let mut k = 16usize.min(n);
    loop {
        let res = lowest_eigs(op, k, EIG_TOL, seed)?;
        let (dist, nearest) = scan(&res.eigenvalues);
        let top = *res.eigenvalues.last().unwrap();
        if top - energy > dist || k == n {
            return Ok(SpectrumDistance {
                dist,
                nearest,
                count_computed: k,
            });
        }
        if top > ceiling {
            return Err(SolveError::CeilingTooLow { ceiling, energy });
        }
        k = (2 * k).min(n);
    }
}

/// A Green's-function cell block χ_x (H - E)^{-1} χ_y with its B-weighted
/// operator norm.
#[derive(Debug, Clone)]
pub struct GreenBlock {
    pub source: Vec<i64>,
    pub target: Vec<i64>,
    pub energy: f64,
    pub norm: f64,
}

/// Sup-norm distance between the open unit-radius cells at lattice points
/// x and y: max(|x - y| - 2, 0).
pub fn cell_distance(x: &[i64], y: &[i64]) -> f64 {
    let d = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| (a - b).abs())
        .max()
        .unwrap_or(0);
    ((d - 2).max(0)) as f64
}

/// Shared factorization of (A - E B) for repeated Green-block evaluations
/// at one energy, plus the cell partition of the DOFs.
pub struct ResolventContext<'a> {
    pub op: &'a AssembledOperator,
    pub energy: f64,
    pub dist: f64,
    lu: BandedLu,
    cells: std::collections::HashMap<Vec<i64>, Vec<usize>>,
}

impl<'a> ResolventContext<'a> {
    /// Requires E off the spectrum; `resonance_tol` is the smallest
    /// admissible spectral distance.
    pub fn new(
        op: &'a AssembledOperator,
        energy: f64,
        ceiling: f64,
        seed: u64,
        resonance_tol: f64,
    ) -> Result<Self, SolveError> {
        let sd = dist_to_spectrum(op, energy, ceiling, seed)?;
        if sd.dist <= resonance_tol {
            return Err(SolveError::Resonance {
                energy,
                dist: sd.dist,
            });
        }
        Self::new_uncertified(op, energy, sd.dist)
    }

    /// Builds the context from an externally certified spectral distance.
    pub fn new_uncertified(
        op: &'a AssembledOperator,
        energy: f64,
        dist: f64,
    ) -> Result<Self, SolveError> {
        let shifted = op.a.add_scaled(-energy, &op.b);
        let lu = BandedLu::factor(&shifted)?;
        Ok(Self {
            op,
            energy,
            dist,
            lu,
            cells: op.dofmap.cell_partition(),
        })
    }

    pub fn cell_dofs(&self, x: &[i64]) -> &[usize] {
        self.cells.get(x).map(|v| v.as_slice()).unwrap_or(&[])
    }

    fn apply_shifted(&self, w: &[f64]) -> Vec<f64> {
        let aw = self.op.a.matvec_alloc(w);
        let bw = self.op.b.matvec_alloc(w);
        (0..w.len()).map(|i| aw[i] - self.energy * bw[i]).collect()
    }

    /// ||Q_x (A - EB)^{-1} B Q_y||_B, the discrete surrogate of the block
    /// norm: Q_* are the B-orthogonal projections onto the coefficient
    /// subspaces of the cell partition, so the self-adjoint resolvent
    /// bound (norm <= 1/dist) and the swap symmetry hold exactly.
    pub fn block_norm(&self, target_x: &[i64], source_y: &[i64]) -> Result<GreenBlock, SolveError> {
        let s = self.cell_dofs(source_y).to_vec();
        let t = self.cell_dofs(target_x).to_vec();
        if s.is_empty() || t.is_empty() {
            return Ok(GreenBlock {
                source: source_y.to_vec(),
                target: target_x.to_vec(),
                energy: self.energy,
                norm: 0.0,
            });
        }
        let n = self.op.dofs();
        let mut w_cols: Vec<Vec<f64>> = Vec::with_capacity(s.len());
        for &sj in &s {
            let mut rhs = vec![0.0f64; n];
            for (j, v) in self.op.b.row(sj) {
                rhs[j] = v;
            }
            let mut w = self.lu.solve(&rhs);
            let mut r = rel_residual(&self.apply_shifted(&w), &rhs);
            if r > SOLVE_TOL {
                // one step of iterative refinement
                let back = self.apply_shifted(&w);
                let corr: Vec<f64> = (0..n).map(|i| rhs[i] - back[i]).collect();
                let dw = self.lu.solve(&corr);
                for i in 0..n {
                    w[i] += dw[i];
                }
                r = rel_residual(&self.apply_shifted(&w), &rhs);
                if r > SOLVE_TOL {
                    return Err(SolveError::Accuracy {
                        requested: SOLVE_TOL,
                        achieved: r,
                    });
                }
            }
            w_cols.push(w);
        }
        // Z = E_T^T B W  (|T| x |S|)
        let mut z = DMatrix::zeros(t.len(), s.len());
        for (ti, &trow) in t.iter().enumerate() {
            for (k, w) in w_cols.iter().enumerate() {
                let mut acc = 0.0;
                for (j, v) in self.op.b.row(trow) {
                    acc += v * w[j];
                }
                z[(ti, k)] = acc;
            }
        }
        // norm = sigma_max( C_T^{-1} Z C_S^{-T} ) with B_TT = C_T C_T^T.
        let c_t = block_cholesky_l(&self.op.b, &t)?;
        let c_s = block_cholesky_l(&self.op.b, &s)?;
        let _ = c_t.solve_lower_triangular_mut(&mut z); // z <- C_T^{-1} Z
        let mut zt = z.transpose();
        let _ = c_s.solve_lower_triangular_mut(&mut zt); // zt <- C_S^{-1} Z^T C_T^{-T}
        let sv = zt.singular_values();
        let norm = sv.iter().fold(0.0f64, |m, &v| m.max(v));
        Ok(GreenBlock {
            source: source_y.to_vec(),
            target: target_x.to_vec(),
            energy: self.energy,
            norm,
        })
    }
}

fn rel_residual(back: &[f64], rhs: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..back.len() {
        num += (back[i] - rhs[i]).powi(2);
        den += rhs[i] * rhs[i];
    }
    (num / den.max(f64::MIN_POSITIVE)).sqrt()
}

fn block_cholesky_l(
    b: &crate::linalg::CsrMatrix,
    idx: &[usize],
) -> Result<DMatrix<f64>, SolveError> {
    let k = idx.len();
    let mut m = DMatrix::zeros(k, k);
    for (i, &gi) in idx.iter().enumerate() {
        for (j, &gj) in idx.iter().enumerate() {
            m[(i, j)] = b.get(gi, gj);
        }
    }
    Ok(m
        .cholesky()
        .ok_or_else(|| SolveError::Factorization("cell mass block not PD".into()))?
        .l())
}

/// Semigroup pairings ⟨e^{-tH} f, g⟩ against one shared mass
/// factorization.
pub struct SemigroupEngine<'a> {
    pub op: &'a AssembledOperator,
    b_lu: BandedLu,
}

#[derive(Debug, Clone, Copy)]
pub struct SemigroupPairing {
    pub value: f64,
    /// Certified absolute error of the pairing (Krylov stabilization error
    /// times the B-norm of g, by Cauchy-Schwarz).
    pub error_bound: f64,
}

impl<'a> SemigroupEngine<'a> {
    pub fn new(op: &'a AssembledOperator) -> Result<Self, SolveError> {
        let b_lu = BandedLu::factor(&op.b)?;
        Ok(Self { op, b_lu })
    }

    /// ⟨e^{-tH} f, g⟩ in the B-weighted (discrete L²) inner product.
    pub fn pair(&self, f: &[f64], g: &[f64], t: f64, tol: f64) -> Result<SemigroupPairing, SolveError> {
        if t < 0.0 {
            return Err(SolveError::Dimension("negative time".into()));
        }
        let res = semigroup_apply(&self.op.a, &self.op.b, &self.b_lu, f, t, tol)?;
        let value = self.op.b.bilinear(&res.vector, g);
        let gnorm = self.op.b.bilinear(g, g).sqrt();
        Ok(SemigroupPairing {
            value,
            error_bound: res.error_bound * gnorm,
        })
    }

    pub fn b_norm(&self, f: &[f64]) -> f64 {
        self.op.b.bilinear(f, f).sqrt()
    }
}

/// Spectral projector onto [lo, hi] applied to v:
/// Σ_{E_j ∈ I} ⟨v, v_j⟩_B v_j.
pub fn spectral_projector_apply(
    op: &AssembledOperator,
    lo: f64,
    hi: f64,
    v: &[f64],
    seed: u64,
) -> Result<Vec<f64>, SolveError> {
    let block = eig_block_in_interval(op, lo, hi, EIG_TOL, seed)?;
    let bv = op.b.matvec_alloc(v);
    let mut out = vec![0.0f64; v.len()];
    for vec_j in &block.eigenvectors {
        let c: f64 = vec_j.iter().zip(&bv).map(|(a, b)| a * b).sum();
        for (o, &x) in out.iter_mut().zip(vec_j) {
            *o += c * x;
        }
    }
    Ok(out)
}

/// Squared Hilbert-Schmidt norm of X^{s/2} f(H) E(I) χ_K in the
/// B-weighted metric, from the eigenpair block of I. X is the diagonal
/// sup-norm-position weight on DOFs; χ_K projects (B-orthogonally) onto
/// the coefficient subspace of the cellular set K.
pub fn dyn_moment(
    op: &AssembledOperator,
    lo: f64,
    hi: f64,
    cells: &[Vec<i64>],
    s_exp: f64,
    f: impl Fn(f64) -> f64,
    seed: u64,
) -> Result<f64, SolveError> {
    let block = eig_block_in_interval(op, lo, hi, EIG_TOL, seed)?;
    let m = block.eigenvalues.len();
    if m == 0 {
        return Ok(0.0);
    }
    let n = op.dofs();
    // K-DOF index set from the cell partition
    let partition = op.dofmap.cell_partition();
    let mut k_dofs: Vec<usize> = Vec::new();
    for c in cells {
        if let Some(list) = partition.get(c) {
            k_dofs.extend_from_slice(list);
        }
    }
    k_dofs.sort_unstable();
    if k_dofs.is_empty() {
        return Ok(0.0);
    }
    let c_k = block_cholesky_l(&op.b, &k_dofs)?;

    // weights |x_i|^{s/2} (s = 0 gives the identity)
    let xw: Vec<f64> = (0..n)
        .map(|i| {
            if s_exp == 0.0 {
                1.0
            } else {
                op.dofmap.position_sup_norm(i).powf(s_exp / 2.0)
            }
        })
        .collect();

    // a_j = X^{s/2} v_j ; Gram in B
    let mut ga = DMatrix::zeros(m, m);
    let a_list: Vec<Vec<f64>> = block
        .eigenvectors
        .iter()
        .map(|v| v.iter().zip(&xw).map(|(x, w)| x * w).collect())
        .collect();
    for j in 0..m {
        let baj = op.b.matvec_alloc(&a_list[j]);
        for k in j..m {
            let val: f64 = a_list[k].iter().zip(&baj).map(|(x, y)| x * y).sum();
            ga[(j, k)] = val;
            ga[(k, j)] = val;
        }
    }
    // b_j = Q_K v_j ; ⟨b_j, b_k⟩_B = y_j^T B_KK^{-1} y_k, y_j = E_K^T B v_j
    let mut ys = DMatrix::zeros(k_dofs.len(), m);
    for j in 0..m {
        let bv = op.b.matvec_alloc(&block.eigenvectors[j]);
        for (r, &gi) in k_dofs.iter().enumerate() {
            ys[(r, j)] = bv[gi];
        }
    }
    let _ = c_k.solve_lower_triangular_mut(&mut ys); // ys <- C_K^{-1} Y
    let gb = ys.transpose() * &ys; // Y^T B_KK^{-1} Y

    let mut total = 0.0;
    for j in 0..m {
        let fj = f(block.eigenvalues[j]);
        for k in 0..m {
            total += fj * f(block.eigenvalues[k]) * ga[(j, k)] * gb[(j, k)];
        }
    }
    Ok(total)
}
