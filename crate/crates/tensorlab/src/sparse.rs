use crate::error::{Result, TensorError};
use crate::tensor::Tensor;

/// Constant CSR matrix used for message passing over block-diagonal
/// adjacency and for segment reductions.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from `(row, col, value)` triplets. Duplicates are summed.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        for &(r, c, _) in &sorted {
            if r >= rows || c >= cols {
                return Err(TensorError::Dimension {
                    op: "sparse_from_triplets",
                    lhs: (rows, cols),
                    rhs: (r, c),
                });
            }
        }
        sorted.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0; rows + 1];
        let mut indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().expect("duplicate follows an entry") += v;
                continue;
            }
            last = Some((r, c));
            indices.push(c);
            values.push(v);
            indptr[r + 1] += 1;
        }
        for i in 0..rows {
            indptr[i + 1] += indptr[i];
        }
        Ok(SparseMatrix {
            rows,
            cols,
            indptr,
            indices,
            values,
        })
    }

    /// Dense 0/1 (or weighted) matrix to CSR, skipping zeros.
    pub fn from_dense(t: &Tensor) -> Self {
        let mut trip = Vec::new();
        for i in 0..t.rows() {
            for (j, &v) in t.row(i).iter().enumerate() {
                if v != 0.0 {
                    trip.push((i, j, v));
                }
            }
        }
        Self::from_triplets(t.rows(), t.cols(), &trip).expect("indices come from the tensor shape")
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_entries(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[i]..self.indptr[i + 1];
        self.indices[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    /// `S · x`.
    pub fn matmul_dense(&self, x: &Tensor) -> Result<Tensor> {
        if x.rows() != self.cols {
            return Err(TensorError::Dimension {
                op: "sparse_matmul",
                lhs: self.shape(),
                rhs: x.shape(),
            });
        }
        let c = x.cols();
        let mut out = Tensor::zeros(self.rows, c);
        for i in 0..self.rows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                let v = self.values[k];
                let src = x.row(self.indices[k]);
                let dst = out.row_mut(i);
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += v * s;
                }
            }
        }
        Ok(out)
    }

    /// `Sᵀ · g`.
    pub fn transpose_matmul_dense(&self, g: &Tensor) -> Result<Tensor> {
        if g.rows() != self.rows {
            return Err(TensorError::Dimension {
                op: "sparse_transpose_matmul",
                lhs: self.shape(),
                rhs: g.shape(),
            });
        }
        let c = g.cols();
        let mut out = Tensor::zeros(self.cols, c);
        for i in 0..self.rows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                let v = self.values[k];
                let j = self.indices[k];
                for col in 0..c {
                    let gv = g.get(i, col);
                    let cur = out.get(j, col);
                    out.set(j, col, cur + v * gv);
                }
            }
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> Tensor {
        let mut t = Tensor::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for (j, v) in self.row_entries(i) {
                t.set(i, j, v);
            }
        }
        t
    }
}
