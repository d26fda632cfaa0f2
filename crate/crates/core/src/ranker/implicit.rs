use serde::{Deserialize, Serialize};

use crate::vectorizer::SparseVector;

/// One rank-1 correction `tau * query * diff^T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankOneTerm {
    pub tau: f64,
    pub query: SparseVector,
    pub diff: SparseVector,
}

/// `W = I + sum_t tau_t * s_t * diff_t^T`, never materialized.
///
/// Feature-wise postings over the terms' `s_t` and `diff_t` let a score
/// touch only the terms that share support with its arguments.
#[derive(Debug, Clone)]
pub(super) struct ImplicitW {
    pub(super) terms: Vec<RankOneTerm>,
    query_postings: Vec<Vec<(u32, f64)>>,
    diff_postings: Vec<Vec<(u32, f64)>>,
}

impl ImplicitW {
    pub(super) fn identity(dim: usize) -> Self {
        ImplicitW {
            terms: Vec::new(),
            query_postings: vec![Vec::new(); dim],
            diff_postings: vec![Vec::new(); dim],
        }
    }

    pub(super) fn push(&mut self, term: RankOneTerm) {
        let t = self.terms.len() as u32;
        for (i, v) in term.query.iter() {
            self.query_postings[i as usize].push((t, v));
        }
        for (i, v) in term.diff.iter() {
            self.diff_postings[i as usize].push((t, v));
        }
        self.terms.push(term);
    }

    fn project(postings: &[Vec<(u32, f64)>], v: &SparseVector, out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for (i, vi) in v.iter() {
            for &(t, w) in &postings[i as usize] {
                out[t as usize] += vi * w;
            }
        }
    }

    /// Scores `a` against each of `bs`, sharing the projection of `a`.
    pub(super) fn scores(&self, a: &SparseVector, bs: &[&SparseVector]) -> Vec<f64> {
        if self.terms.is_empty() {
            return bs.iter().map(|b| a.dot(b)).collect();
        }
        let n = self.terms.len();
        let mut alpha = vec![0.0; n];
        Self::project(&self.query_postings, a, &mut alpha);
        let mut beta = vec![0.0; n];
        bs.iter()
            .map(|b| {
                Self::project(&self.diff_postings, b, &mut beta);
                let correction: f64 = self
                    .terms
                    .iter()
                    .zip(alpha.iter().zip(&beta))
                    .map(|(term, (x, y))| term.tau * x * y)
                    .sum();
                a.dot(b) + correction
            })
            .collect()
    }
}
