//! Minimal sparse/banded linear algebra used by the assembly and spectral
//! layers: symmetric CSR matrices, banded LU with partial pivoting for
//! shifted solves, a dense generalized eigensolver (the oracle path), a
//! shift-invert Lanczos for lowest eigenpairs, and a Krylov approximation
//! of the semigroup action.

pub mod banded;
pub mod dense;
pub mod expm;
pub mod lanczos;
pub mod sparse;

pub use banded::BandedLu;
pub use dense::dense_generalized_eigs;
pub use expm::semigroup_apply;
pub use lanczos::{lowest_generalized_eigs, LanczosOptions};
pub use sparse::{CooBuilder, CsrMatrix};
