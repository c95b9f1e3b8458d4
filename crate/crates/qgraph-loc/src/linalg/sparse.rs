//! Symmetric sparse matrices in triplet and CSR form.

use nalgebra::DMatrix;

/// Accumulates (i, j, v) triplets; duplicate entries are summed on build.
#[derive(Debug, Clone)]
pub struct CooBuilder {
    n: usize,
    entries: Vec<(u32, u32, f64)>,
}

impl CooBuilder {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            entries: Vec::new(),
        }
    }

    #[inline]
    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        if v != 0.0 {
            self.entries.push((i as u32, j as u32, v));
        }
    }

    /// Adds the symmetric pair (i, j) and (j, i); the diagonal once.
    #[inline]
    pub fn push_sym(&mut self, i: usize, j: usize, v: f64) {
        self.push(i, j, v);
        if i != j {
            self.push(j, i, v);
        }
    }

    pub fn build(mut self) -> CsrMatrix {
        // Canonical accumulation: sort triplets by (i, j, value) so
        // duplicate keys are summed in a reproducible order that is also
        // identical for the (i, j) and (j, i) groups of symmetric pushes.
        self.entries.sort_unstable_by(|a, b| {
            (a.0, a.1).cmp(&(b.0, b.1)).then_with(|| a.2.total_cmp(&b.2))
        });
        let n = self.n;
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx: Vec<u32> = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        row_ptr.push(0u32);
        let mut cur_row = 0usize;
        for (i, j, v) in self.entries {
            let i = i as usize;
            while cur_row < i {
                row_ptr.push(col_idx.len() as u32);
                cur_row += 1;
            }
            if let (Some(&last_j), true) = (col_idx.last(), cur_row == i) {
                if last_j == j && row_ptr[cur_row] as usize != col_idx.len() {
                    *values.last_mut().unwrap() += v;
                    continue;
                }
            }
            col_idx.push(j);
            values.push(v);
        }
        while cur_row < n {
            row_ptr.push(col_idx.len() as u32);
            cur_row += 1;
        }
        CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }
}

/// Square sparse matrix, compressed row storage.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<u32>,
    col_idx: Vec<u32>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_ptr[i] as usize;
        let hi = self.row_ptr[i + 1] as usize;
        self.col_idx[lo..hi]
            .iter()
            .zip(&self.values[lo..hi])
            .map(|(&j, &v)| (j as usize, v))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i)
            .find(|&(c, _)| c == j)
            .map(|(_, v)| v)
            .unwrap_or(0.0)
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            let mut acc = 0.0;
            for (j, v) in self.row(i) {
                acc += v * x[j];
            }
            y[i] = acc;
        }
    }

    pub fn matvec_alloc(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y
    }

    /// x^T (self) y
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            let mut row_acc = 0.0;
            for (j, v) in self.row(i) {
                row_acc += v * y[j];
            }
            acc += x[i] * row_acc;
        }
        acc
    }

    /// Largest |i - j| over stored entries.
    pub fn bandwidth(&self) -> usize {
        let mut bw = 0usize;
        for i in 0..self.n {
            for (j, _) in self.row(i) {
                bw = bw.max(i.abs_diff(j));
            }
        }
        bw
    }

    /// max |A[i][j] - A[j][i]| over stored entries.
    pub fn max_asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m = m.max((v - self.get(j, i)).abs());
            }
        }
        m
    }

    /// self + c * other, pattern union.
    pub fn add_scaled(&self, c: f64, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!(self.n, other.n);
        let mut coo = CooBuilder::new(self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                coo.push(i, j, v);
            }
            for (j, v) in other.row(i) {
                coo.push(i, j, c * v);
            }
        }
        coo.build()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] += v;
            }
        }
        m
    }

    /// Triplet dump (row, col, value) in row-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                out.push((i, j, v));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coo_accumulates_duplicates() {
        let mut c = CooBuilder::new(3);
        c.push(0, 1, 1.0);
        c.push(0, 1, 2.0);
        c.push(2, 2, 5.0);
        let m = c.build();
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.get(2, 2), 5.0);
        assert_eq!(m.get(1, 0), 0.0);
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn matvec_matches_dense() {
        let mut c = CooBuilder::new(4);
        c.push_sym(0, 1, 2.0);
        c.push_sym(1, 2, -1.0);
        c.push(3, 3, 4.0);
        c.push(0, 0, 1.0);
        let m = c.build();
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = m.matvec_alloc(&x);
        let yd = m.to_dense() * nalgebra::DVector::from_column_slice(&x);
        for i in 0..4 {
            assert!((y[i] - yd[i]).abs() < 1e-14);
        }
        assert_eq!(m.max_asymmetry(), 0.0);
        assert_eq!(m.bandwidth(), 1);
    }
}
