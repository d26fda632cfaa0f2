//! Online match/no-match classifier over description pairs.
//!
//! A pair `(u, v)` is featurized as `|u - v|` followed by `u ⊙ v`, which is
//! symmetric in its arguments. The weights start at zero and follow PA-I
//! updates on labeled pairs. A zero score means no-match.

use serde::{Deserialize, Serialize};

use crate::codec;
use crate::online::{pa_step, Step};
use crate::ranker::DEFAULT_C;
use crate::vectorizer::SparseVector;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Match,
    NoMatch,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Match => 1.0,
            Label::NoMatch => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairExample {
    pub u: SparseVector,
    pub v: SparseVector,
    pub label: Label,
}

/// `|u - v| ⊕ u ⊙ v`, of dimension `2d`.
pub fn pair_features(u: &SparseVector, v: &SparseVector) -> Result<SparseVector> {
    u.check_dim(v)?;
    Ok(u.abs_diff(v).concat(&u.hadamard(v)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairClassifier {
    dim: usize,
    c: f64,
    updates: u64,
    weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSnapshot {
    pub v: u32,
    /// Dimension of the pair members; the weight vector has `2 * dim`.
    pub dim: usize,
    pub c: f64,
    pub updates: u64,
    pub weights: SparseVector,
}

const SNAPSHOT_VERSION: u32 = 1;
const SNAPSHOT_MAGIC: &[u8; 4] = b"LMPC";

impl PairClassifier {
    pub fn new(dim: usize, c: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("C must be positive, got {c}")));
        }
        Ok(PairClassifier {
            dim,
            c,
            updates: 0,
            weights: vec![0.0; 2 * dim],
        })
    }

    pub fn with_default_c(dim: usize) -> Result<Self> {
        Self::new(dim, DEFAULT_C)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    fn features(&self, u: &SparseVector, v: &SparseVector) -> Result<SparseVector> {
        if u.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: u.dim(),
            });
        }
        pair_features(u, v)
    }

    fn raw_score(&self, phi: &SparseVector) -> f64 {
        phi.iter().map(|(i, x)| self.weights[i as usize] * x).sum()
    }

    pub fn score(&self, u: &SparseVector, v: &SparseVector) -> Result<f64> {
        Ok(self.raw_score(&self.features(u, v)?))
    }

    /// Score and label; ties at 0 are no-match.
    pub fn classify(&self, u: &SparseVector, v: &SparseVector) -> Result<(f64, Label)> {
        let s = self.score(u, v)?;
        Ok((s, if s > 0.0 { Label::Match } else { Label::NoMatch }))
    }

    pub fn update(&mut self, example: &PairExample) -> Result<Step> {
        let phi = self.features(&example.u, &example.v)?;
        let y = example.label.sign();
        let loss = (1.0 - y * self.raw_score(&phi)).max(0.0);
        let step = pa_step(loss, phi.norm_sq(), self.c);
        if let Step::Active { tau, .. } = step {
            for (i, x) in phi.iter() {
                self.weights[i as usize] += tau * y * x;
            }
            self.updates += 1;
        }
        Ok(step)
    }

    pub fn to_snapshot(&self) -> ClassifierSnapshot {
        ClassifierSnapshot {
            v: SNAPSHOT_VERSION,
            dim: self.dim,
            c: self.c,
            updates: self.updates,
            weights: SparseVector::from_dense(&self.weights),
        }
    }

    pub fn from_snapshot(snap: ClassifierSnapshot) -> Result<Self> {
        if snap.v != SNAPSHOT_VERSION {
            return Err(Error::Snapshot(format!("unsupported classifier version {}", snap.v)));
        }
        let mut clf = Self::new(snap.dim, snap.c).map_err(|e| Error::Snapshot(e.to_string()))?;
        if snap.weights.dim() != 2 * snap.dim {
            return Err(Error::Snapshot("weight vector has the wrong dimension".into()));
        }
        for (i, x) in snap.weights.iter() {
            clf.weights[i as usize] = x;
        }
        clf.updates = snap.updates;
        Ok(clf)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        codec::encode(SNAPSHOT_MAGIC, &self.to_snapshot())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::from_snapshot(codec::decode(SNAPSHOT_MAGIC, bytes)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_snapshot()).expect("classifier serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_snapshot(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: &[f64]) -> SparseVector {
        SparseVector::from_dense(x)
    }

    #[test]
    fn features_by_hand() {
        let phi = pair_features(&v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap();
        assert_eq!(phi.to_dense(), [1.0, 1.0, 0.0, 0.0]);
        let x = v(&[0.5, -2.0]);
        assert_eq!(pair_features(&x, &x).unwrap().to_dense(), [0.0, 0.0, 0.25, 4.0]);
        assert!(pair_features(&v(&[1.0]), &x).is_err());
    }

    #[test]
    fn fresh_classifier_says_no_match() {
        let clf = PairClassifier::with_default_c(2).unwrap();
        assert_eq!(clf.classify(&v(&[1.0, 0.0]), &v(&[1.0, 0.0])).unwrap(), (0.0, Label::NoMatch));
    }

    #[test]
    fn single_positive_step() {
        // phi = (1, 1 | 0, 0), |phi|^2 = 2, loss 1, tau 0.5, w.phi = 1 afterwards.
        let mut clf = PairClassifier::new(2, 100.0).unwrap();
        let ex = PairExample {
            u: v(&[1.0, 0.0]),
            v: v(&[0.0, 1.0]),
            label: Label::Match,
        };
        let step = clf.update(&ex).unwrap();
        assert_eq!(step, Step::Active { loss: 1.0, tau: 0.5, capped: false });
        assert_eq!(clf.score(&ex.u, &ex.v).unwrap(), 1.0);
        assert_eq!(clf.classify(&ex.v, &ex.u).unwrap().1, Label::Match);
        assert_eq!(clf.update(&ex).unwrap(), Step::Passive);
    }

    #[test]
    fn identical_pair_learns_match() {
        let mut clf = PairClassifier::with_default_c(2).unwrap();
        let x = v(&[1.0, 1.0]);
        let ex = PairExample { u: x.clone(), v: x.clone(), label: Label::Match };
        assert!(matches!(clf.update(&ex).unwrap(), Step::Active { capped: true, .. }));
        assert!(clf.score(&x, &x).unwrap() > 0.0);
    }

    #[test]
    fn zero_features_are_degenerate() {
        let mut clf = PairClassifier::with_default_c(2).unwrap();
        let ex = PairExample { u: v(&[0.0, 0.0]), v: v(&[0.0, 0.0]), label: Label::Match };
        assert_eq!(clf.update(&ex).unwrap(), Step::Degenerate { loss: 1.0 });
        assert_eq!(clf.updates(), 0);
    }

    #[test]
    fn snapshot_roundtrip() {
        let mut clf = PairClassifier::with_default_c(3).unwrap();
        clf.update(&PairExample {
            u: v(&[1.0, 0.0, 2.0]),
            v: v(&[0.0, 1.0, 1.0]),
            label: Label::NoMatch,
        })
        .unwrap();
        let back = PairClassifier::from_bytes(&clf.to_bytes()).unwrap();
        assert_eq!(back, clf);
        assert_eq!(PairClassifier::from_json(&clf.to_json()).unwrap(), clf);
        assert!(PairClassifier::from_bytes(&clf.to_bytes()[..10]).is_err());
    }

    fn vec3() -> impl Strategy<Value = SparseVector> {
        prop::collection::vec(-2.0f64..2.0, 3).prop_map(|x| v(&x))
    }

    proptest! {
        #[test]
        fn symmetric_and_margin_one(u in vec3(), w in vec3(), pos in any::<bool>(), c in 0.01f64..10.0) {
            let mut clf = PairClassifier::new(3, c).unwrap();
            let label = if pos { Label::Match } else { Label::NoMatch };
            let ex = PairExample { u: u.clone(), v: w.clone(), label };
            let step = clf.update(&ex).unwrap();
            prop_assert_eq!(clf.score(&u, &w).unwrap(), clf.score(&w, &u).unwrap());
            match step {
                Step::Active { tau, capped: false, .. } => {
                    prop_assert!(tau > 0.0 && tau <= c);
                    let m = label.sign() * clf.score(&u, &w).unwrap();
                    prop_assert!((m - 1.0).abs() <= 1e-9);
                }
                Step::Active { tau, capped: true, .. } => prop_assert_eq!(tau, c),
                _ => {}
            }
        }
    }
}
