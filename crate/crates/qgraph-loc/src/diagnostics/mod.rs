//! Localization diagnostics: per-sample MSA predicates (NS/NR/CNR/NT/HNR,
//! goodness), deterministic estimate checks (Combes-Thomas,
//! Davies-Gaffney, Weyl, geometric resolvent audits, Cheeger gap), and
//! seeded Monte Carlo estimators (Wegner, Lifshitz, ILS, DS).
//!
//! Monte Carlo determinism contract: trial i draws its disorder from
//! `trial_seed(base, i)`, trials land in an ordered vector, and
//! aggregation is counting, so results are identical for any worker count.

mod bounds;
mod mass;
mod mc;
mod predicates;

pub use bounds::{
    cheeger_gap_check, ct_bound, verify_combes_thomas, verify_davies_gaffney, verify_gri2,
    verify_gri3, CheegerReport, CtCase, DgCase, Gri2Report, Gri3Report,
};
pub use mass::{eigenfunction_mass, mass_fit_vector, MassFit};
pub use mc::{
    mc_ds, mc_ils, mc_lifshitz, mc_wegner_one, mc_wegner_two, separable_pair_centers, DsResult,
    IlsResult, LifshitzCell, LifshitzResult, WegnerOneResult, WegnerTwoResult,
};
pub use predicates::{
    check_goodness, check_nr_cnr, check_nt_hnr, classify_ns, GoodnessReport, NrCnrReport,
    NsReport, NsStatus, NtHnrReport,
};

use crate::assembly::{assemble, AssembledOperator, Mesh};
use crate::error::AssembleError;
use crate::geometry::{enumerate_edges, BoxSpec, EdgeId};
use crate::random::{InteractionSpec, OmegaSample};
use serde::Serialize;

/// Assembles operators for a fixed disorder realization; sub-box
/// restrictions are fresh assemblies on the shared omega, never submatrix
/// extractions.
pub struct OperatorFactory<'a> {
    pub omega: &'a OmegaSample,
    pub interaction: InteractionSpec,
    pub mesh: Mesh,
}

impl<'a> OperatorFactory<'a> {
    pub fn assemble(&self, spec: &BoxSpec) -> Result<AssembledOperator, AssembleError> {
        assemble(spec, self.omega, &self.interaction, self.mesh)
    }
}

/// Every edge needed to assemble on `spec` (union of the projections).
pub fn edges_of_box(spec: &BoxSpec) -> Vec<EdgeId> {
    let mut edges = Vec::new();
    for j in 0..spec.n {
        edges.extend(enumerate_edges(spec.particle_center(j), spec.sides[j], spec.d));
    }
    edges.sort();
    edges.dedup();
    edges
}

/// A Monte Carlo proportion with its 95% Wilson interval; zero-success
/// cells additionally carry the rule-of-three upper bound 3/n.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct McEstimate {
    pub trials: u64,
    pub successes: u64,
    pub p_hat: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub rule_of_three: Option<f64>,
    pub seed: u64,
}

impl McEstimate {
    pub fn from_counts(trials: u64, successes: u64, seed: u64) -> Self {
        assert!(trials > 0 && successes <= trials);
        let n = trials as f64;
        let p = successes as f64 / n;
        let z = 1.959963984540054_f64;
        let z2 = z * z;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        // clamp against roundoff at the extremes so the interval always
        // contains the point estimate
        Self {
            trials,
            successes,
            p_hat: p,
            wilson_lo: (center - half).max(0.0).min(p),
            wilson_hi: (center + half).min(1.0).max(p),
            rule_of_three: (successes == 0).then_some(3.0 / n),
            seed,
        }
    }
}

/// Uniform grid over [lo, hi] with spacing <= max_spacing, endpoints
/// included. Used for the grid-approximate "∃E ∈ I" events.
pub fn energy_grid(lo: f64, hi: f64, max_spacing: f64) -> Vec<f64> {
    assert!(hi >= lo && max_spacing > 0.0);
    let steps = (((hi - lo) / max_spacing).ceil() as usize).max(1);
    (0..=steps)
        .map(|i| {
            if i == steps {
                hi
            } else {
                lo + (hi - lo) * i as f64 / steps as f64
            }
        })
        .collect()
}

/// Runs `work` inside a dedicated rayon pool of `threads` workers
/// (0 = default parallelism). Results must not depend on the pool size;
/// the determinism acceptance check calls this with different sizes.
pub fn with_pool<T: Send>(threads: usize, work: impl FnOnce() -> T + Send) -> T {
    if threads == 0 {
        return work();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("pool")
        .install(work)
}
