//! Finite-volume spectral diagnostics for multi-particle random quantum
//! graphs over the `Z^d` lattice.
//!
//! The configuration space of an `n`-particle system on the lattice quantum
//! graph is a complex of `n`-dimensional unit cubes glued along faces. This
//! crate builds finite-volume restrictions of the random Hamiltonian
//! `-Δ + U + W_ω` on such complexes with continuous multilinear elements,
//! and exposes the machinery needed to audit localization estimates at desk
//! scale: Green's-function cell blocks, Combes–Thomas and Davies–Gaffney
//! bounds, Weyl counts, Wegner and Lifshitz Monte Carlo estimators, and the
//! deterministic bookkeeping of the multiscale analysis.
//!
//! Modules follow the pipeline:
//!
//! * [`geometry`] — exact combinatorics of the cube complex and its finite
//!   sub-boxes (edges, cubes, projections, separability, clustering);
//! * [`random`] — disorder laws, per-edge samples, interaction potentials;
//! * [`assembly`] — sparse stiffness/mass assembly on the glued complex;
//! * [`spectral`] — eigenpairs, Green blocks, semigroup pairings, moments;
//! * [`diagnostics`] — per-sample predicates and Monte Carlo estimators;
//! * [`schedule`] — multiscale length/mass/exponent sequences;
//! * [`cli`] — the experiment orchestrator behind the `qgraph-loc` binary.

pub mod assembly;
pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod random;
pub mod report;
pub mod schedule;
pub mod spectral;

pub use error::{
    AssembleError, ConfigError, DiagnosticsError, GeometryError, RandomError, ScheduleError,
    SolveError,
};
