//! Sparse symmetric matrix storage for the assembled systems.
//!
//! Only the lower triangle is stored (row-compressed). The pattern is built
//! symbolically from dof cliques before any numeric work, so scatter-adds are
//! binary searches and assembly order cannot change the pattern.

#[derive(Debug, Clone)]
pub struct SymmetricCsr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    /// Column indices, j <= i within row i, strictly increasing per row.
    pub col_idx: Vec<u32>,
    pub values: Vec<f64>,
}

impl SymmetricCsr {
    /// Build the zero matrix whose lower-triangle pattern is the union of all
    /// dof cliques (every clique couples all pairs of its dofs).
    pub fn from_cliques<I>(n: usize, cliques: I) -> SymmetricCsr
    where
        I: IntoIterator,
        I::Item: AsRef<[usize]>,
    {
        let mut rows: Vec<Vec<u32>> = vec![Vec::new(); n];
        for clique in cliques {
            let dofs = clique.as_ref();
            for &i in dofs {
                let row = &mut rows[i];
                for &j in dofs {
                    if j <= i {
                        row.push(j as u32);
                    }
                }
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        for row in &mut rows {
            row.sort_unstable();
            row.dedup();
            col_idx.extend_from_slice(row);
            row_ptr.push(col_idx.len());
            row.clear();
            row.shrink_to_fit();
        }
        let values = vec![0.0; col_idx.len()];
        SymmetricCsr {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nnz_lower(&self) -> usize {
        self.col_idx.len()
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.col_idx[lo..hi]
            .binary_search(&(j as u32))
            .ok()
            .map(|k| lo + k)
    }

    /// Add to entry (i, j) of the symmetric matrix; only the lower-triangle
    /// representative is touched.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if j <= i { (i, j) } else { (j, i) };
        let slot = self
            .slot(r, c)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside the symbolic pattern"));
        self.values[slot] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if j <= i { (i, j) } else { (j, i) };
        self.slot(r, c).map_or(0.0, |s| self.values[s])
    }

    /// y = A x with A the full symmetric matrix.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k] as usize;
                let v = self.values[k];
                y[i] += v * x[j];
                if j != i {
                    y[j] += v * x[i];
                }
            }
        }
        y
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k] as usize;
                let v = self.values[k];
                acc += if j == i { v * x[i] * x[i] } else { 2.0 * v * x[i] * x[j] };
            }
        }
        acc
    }

    /// Dense expansion for small tests.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.n]; self.n];
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k] as usize;
                a[i][j] = self.values[k];
                a[j][i] = self.values[k];
            }
        }
        a
    }
}
