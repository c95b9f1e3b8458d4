//! Exponential-decay mass estimation for eigenfunctions: least-squares
//! slope of log cell norm against sup distance from the peak cell.

use crate::assembly::AssembledOperator;
use crate::error::DiagnosticsError;
use crate::spectral::{eig_block_in_interval, EIG_TOL};
use nalgebra::DMatrix;
use serde::Serialize;

/// Fitted decay of one vector.
#[derive(Debug, Clone, Serialize)]
pub struct MassFit {
    pub eigenvalue: Option<f64>,
    pub m_hat: f64,
    pub r2: f64,
    pub points: usize,
    pub x_max: Vec<i64>,
}

/// Relative floor under which cell norms are dropped from the fit (they
/// sit at the solver noise level).
const NORM_FLOOR_REL: f64 = 1e-12;

/// Per-cell B-weighted norms of a coefficient vector.
fn cell_norms(op: &AssembledOperator, v: &[f64]) -> Vec<(Vec<i64>, f64)> {
    let partition = op.dofmap.cell_partition();
    let mut out = Vec::with_capacity(partition.len());
    for (cell, dofs) in partition {
        let k = dofs.len();
        let mut bloc = DMatrix::zeros(k, k);
        for (i, &gi) in dofs.iter().enumerate() {
            for (j, &gj) in dofs.iter().enumerate() {
                bloc[(i, j)] = op.b.get(gi, gj);
            }
        }
        let vloc = nalgebra::DVector::from_iterator(k, dofs.iter().map(|&g| v[g]));
        let norm2 = (&bloc * &vloc).dot(&vloc);
        out.push((cell, norm2.max(0.0).sqrt()));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// Least-squares fit of log ||χ_x v|| against |x - x_max| over cells above
/// the noise floor; m̂ is minus the slope.
pub fn mass_fit_vector(op: &AssembledOperator, v: &[f64]) -> Result<MassFit, DiagnosticsError> {
    let norms = cell_norms(op, v);
    let (x_max, peak) = norms
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(c, n)| (c.clone(), *n))
        .ok_or_else(|| DiagnosticsError::GeometryPrecondition("no cells".into()))?;
    if peak <= 0.0 {
        return Err(DiagnosticsError::GeometryPrecondition(
            "zero vector has no decay mass".into(),
        ));
    }
    let floor = peak * NORM_FLOOR_REL;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (cell, norm) in &norms {
        if *norm <= floor {
            continue;
        }
        let dist = cell
            .iter()
            .zip(&x_max)
            .map(|(&a, &b)| (a - b).abs())
            .max()
            .unwrap() as f64;
        xs.push(dist);
        ys.push(norm.ln());
    }
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    if denom <= 0.0 {
        return Err(DiagnosticsError::GeometryPrecondition(
            "degenerate fit: all cells at one distance".into(),
        ));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean_y).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (intercept + slope * x)).powi(2))
        .sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(MassFit {
        eigenvalue: None,
        m_hat: -slope,
        r2,
        points: xs.len(),
        x_max,
    })
}

/// Mass fits for every eigenpair with eigenvalue in [lo, hi].
pub fn eigenfunction_mass(
    op: &AssembledOperator,
    lo: f64,
    hi: f64,
    seed: u64,
) -> Result<Vec<MassFit>, DiagnosticsError> {
    let block = eig_block_in_interval(op, lo, hi, EIG_TOL, seed)?;
    if block.eigenvalues.is_empty() {
        return Err(DiagnosticsError::EmptyInterval(lo, hi));
    }
    let mut out = Vec::with_capacity(block.eigenvalues.len());
    for (j, v) in block.eigenvectors.iter().enumerate() {
        let mut fit = mass_fit_vector(op, v)?;
        fit.eigenvalue = Some(block.eigenvalues[j]);
        out.push(fit);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble, Mesh};
    use crate::diagnostics::edges_of_box;
    use crate::geometry::BoxSpec;
    use crate::random::{sample_omega, InteractionSpec, OmegaSample, PotentialLaw};

    #[test]
    fn synthetic_exponential_fits_mass_one() {
        let spec = BoxSpec::cube(vec![0], 30, 1, 1).unwrap();
        let edges = edges_of_box(&spec);
        let omega = OmegaSample::constant(&edges, 0.0);
        let op = assemble(&spec, &omega, &InteractionSpec::none(), Mesh::new(2).unwrap()).unwrap();
        let v: Vec<f64> = (0..op.dofs())
            .map(|i| (-op.dofmap.position_sup_norm(i)).exp())
            .collect();
        let fit = mass_fit_vector(&op, &v).unwrap();
        assert!((fit.m_hat - 1.0).abs() < 0.01, "m_hat = {}", fit.m_hat);
        assert!(fit.r2 > 0.999);
        assert_eq!(fit.x_max, vec![0]);
    }

    #[test]
    fn free_ground_state_has_no_mass() {
        let spec = BoxSpec::cube(vec![0], 20, 1, 1).unwrap();
        let edges = edges_of_box(&spec);
        let omega = OmegaSample::constant(&edges, 0.0);
        let op = assemble(&spec, &omega, &InteractionSpec::none(), Mesh::new(2).unwrap()).unwrap();
        let fits = eigenfunction_mass(&op, -1e-9, 1e-9, 1).unwrap();
        assert_eq!(fits.len(), 1);
        assert!(fits[0].m_hat.abs() < 0.05, "m_hat = {}", fits[0].m_hat);
    }

    #[test]
    fn strong_disorder_localizes_lowest_states() {
        let spec = BoxSpec::cube(vec![0], 40, 1, 1).unwrap();
        let edges = edges_of_box(&spec);
        let law = PotentialLaw::uniform(0.0, 10.0).unwrap();
        let omega = sample_omega(&law, &edges, 2024).unwrap();
        let op = assemble(&spec, &omega, &InteractionSpec::none(), Mesh::new(2).unwrap()).unwrap();
        let res = crate::spectral::lowest_eigs(&op, 3, 1e-9, 3).unwrap();
        let fits = eigenfunction_mass(&op, res.eigenvalues[0], res.eigenvalues[2], 3).unwrap();
        assert!(fits.len() >= 3);
        for f in &fits {
            assert!(f.m_hat > 0.0, "fit {f:?}");
            assert!(f.r2 > 0.8, "fit {f:?}");
        }
    }

    #[test]
    fn empty_interval_is_an_error() {
        let spec = BoxSpec::cube(vec![0], 5, 1, 1).unwrap();
        let edges = edges_of_box(&spec);
        let omega = OmegaSample::constant(&edges, 0.0);
        let op = assemble(&spec, &omega, &InteractionSpec::none(), Mesh::new(2).unwrap()).unwrap();
        assert!(matches!(
            eigenfunction_mass(&op, -5.0, -4.0, 1),
            Err(DiagnosticsError::EmptyInterval(_, _))
        ));
    }
}
