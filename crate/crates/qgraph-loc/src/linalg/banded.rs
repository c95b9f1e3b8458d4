//! Banded LU factorization with partial pivoting.
//!
//! Shifted FEM matrices A - E·B are symmetric but indefinite for E inside
//! the spectrum, so Cholesky is not an option; row pivoting keeps the
//! factorization stable at any resolvent energy. Row interchanges widen the
//! upper band from `ku` to `ku + kl`, the storage is sized accordingly.

use super::sparse::CsrMatrix;
use crate::error::SolveError;

#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize, // effective upper bandwidth after fill: ku_orig + kl
    /// Column-major band storage: entry (i, j) lives at
    /// `data[j * ldab + (i - j + ku)]` for `j - ku <= i <= j + kl`.
    data: Vec<f64>,
    ldab: usize,
    ipiv: Vec<usize>,
}

impl BandedLu {
    /// Factorizes `M` (taken as a general banded matrix).
    pub fn factor(m: &CsrMatrix) -> Result<Self, SolveError> {
        let kb = m.bandwidth();
        Self::factor_with_band(m, kb, kb)
    }

    pub fn factor_with_band(m: &CsrMatrix, kl: usize, ku_orig: usize) -> Result<Self, SolveError> {
        let n = m.dim();
        if n == 0 {
            return Err(SolveError::Dimension("empty matrix".into()));
        }
        let ku = ku_orig + kl;
        let ldab = kl + ku + 1;
        let mut data = vec![0.0f64; ldab * n];
        for i in 0..n {
            for (j, v) in m.row(i) {
                if i.abs_diff(j) > kl.max(ku_orig) {
                    return Err(SolveError::Dimension(format!(
                        "entry ({i},{j}) outside declared band kl={kl}, ku={ku_orig}"
                    )));
                }
                data[j * ldab + (i + ku - j)] += v;
            }
        }
        let mut ipiv = vec![0usize; n];

        // Right-looking elimination over columns with partial pivoting.
        for k in 0..n {
            let pmax = (k + kl).min(n - 1);
            let mut piv_row = k;
            let mut piv_val = data[k * ldab + ku].abs();
            for i in (k + 1)..=pmax {
                let v = data[k * ldab + (i + ku - k)].abs();
                if v > piv_val {
                    piv_val = v;
                    piv_row = i;
                }
            }
            if piv_val == 0.0 {
                return Err(SolveError::Factorization(format!(
                    "exactly singular at column {k}"
                )));
            }
            ipiv[k] = piv_row;
            let jmax = (k + ku).min(n - 1);
            if piv_row != k {
                for j in k..=jmax {
                    let a = j * ldab + (k + ku - j);
                    let b = j * ldab + (piv_row + ku - j);
                    data.swap(a, b);
                }
            }
            let pivot = data[k * ldab + ku];
            for i in (k + 1)..=pmax {
                let li = k * ldab + (i + ku - k);
                let l = data[li] / pivot;
                data[li] = l;
                if l != 0.0 {
                    for j in (k + 1)..=jmax {
                        let akj = data[j * ldab + (k + ku - j)];
                        if akj != 0.0 {
                            data[j * ldab + (i + ku - j)] -= l * akj;
                        }
                    }
                }
            }
        }
        Ok(Self {
            n,
            kl,
            ku,
            data,
            ldab,
            ipiv,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// In-place solve of M x = b.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let (n, kl, ku, ldab) = (self.n, self.kl, self.ku, self.ldab);
        for k in 0..n {
            let p = self.ipiv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                let imax = (k + kl).min(n - 1);
                for i in (k + 1)..=imax {
                    b[i] -= self.data[k * ldab + (i + ku - k)] * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let jmax = (k + ku).min(n - 1);
            let mut acc = b[k];
            for j in (k + 1)..=jmax {
                acc -= self.data[j * ldab + (k + ku - j)] * b[j];
            }
            b[k] = acc / self.data[k * ldab + ku];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sparse::CooBuilder;

    fn rng_seq(seed: u64, count: usize) -> Vec<f64> {
        let mut s = seed;
        (0..count)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
            })
            .collect()
    }

    #[test]
    fn solves_indefinite_banded_system() {
        let n = 60;
        let bw = 3;
        let mut coo = CooBuilder::new(n);
        let vals = rng_seq(7, n * (bw + 1));
        let mut k = 0;
        for i in 0..n {
            coo.push(i, i, 4.0 * vals[k].signum() + vals[k]);
            k += 1;
            for off in 1..=bw {
                if i + off < n {
                    coo.push_sym(i, i + off, vals[k]);
                    k += 1;
                }
            }
        }
        let m = coo.build();
        let lu = BandedLu::factor(&m).unwrap();
        let x_true = rng_seq(13, n);
        let b = m.matvec_alloc(&x_true);
        let x = lu.solve(&b);
        for i in 0..n {
            assert!((x[i] - x_true[i]).abs() < 1e-9, "i={i}");
        }
    }

    #[test]
    fn rejects_singular() {
        let mut coo = CooBuilder::new(2);
        coo.push(0, 0, 1.0);
        coo.push(0, 1, 1.0);
        coo.push(1, 0, 1.0);
        coo.push(1, 1, 1.0);
        let m = coo.build();
        assert!(BandedLu::factor(&m).is_err());
    }
}
