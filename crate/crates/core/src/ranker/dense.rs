use crate::vectorizer::SparseVector;

/// Row-major `d x d` matrix initialized to the identity.
#[derive(Debug, Clone, PartialEq)]
pub(super) struct DenseW {
    pub(super) dim: usize,
    pub(super) data: Vec<f64>,
}

impl DenseW {
    pub(super) fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        DenseW { dim, data }
    }

    pub(super) fn row_dot(&self, row: usize, b: &SparseVector) -> f64 {
        let r = &self.data[row * self.dim..(row + 1) * self.dim];
        b.iter().map(|(j, v)| r[j as usize] * v).sum()
    }

    pub(super) fn score(&self, a: &SparseVector, b: &SparseVector) -> f64 {
        let mut acc = 0.0;
        for (i, ai) in a.iter() {
            acc += ai * self.row_dot(i as usize, b);
        }
        acc
    }

    /// `W += tau * left * right^T`.
    pub(super) fn add_outer(&mut self, tau: f64, left: &SparseVector, right: &SparseVector) {
        for (i, li) in left.iter() {
            let row = i as usize * self.dim;
            let scale = tau * li;
            for (j, rj) in right.iter() {
                self.data[row + j as usize] += scale * rj;
            }
        }
    }
}
