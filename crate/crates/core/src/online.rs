//! The passive-aggressive step shared by the ranker and the pair classifier.

use serde::{Deserialize, Serialize};

/// Result of offering one example to an online learner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Step {
    /// Loss was zero; the model is untouched.
    Passive,
    /// The model moved by `tau` along the example's update direction.
    Active { loss: f64, tau: f64, capped: bool },
    /// Positive loss but a zero update direction; skipped.
    Degenerate { loss: f64 },
}

impl Step {
    pub fn is_active(&self) -> bool {
        matches!(self, Step::Active { .. })
    }

    pub fn loss(&self) -> f64 {
        match *self {
            Step::Passive => 0.0,
            Step::Active { loss, .. } | Step::Degenerate { loss } => loss,
        }
    }

    pub fn tau(&self) -> f64 {
        match *self {
            Step::Active { tau, .. } => tau,
            _ => 0.0,
        }
    }
}

/// PA-I step size: `min(c, loss / norm_sq)`, or the passive/degenerate case.
pub fn pa_step(loss: f64, norm_sq: f64, c: f64) -> Step {
    if loss.is_nan() || loss <= 0.0 {
        return Step::Passive;
    }
    if norm_sq.is_nan() || norm_sq <= 0.0 {
        return Step::Degenerate { loss };
    }
    let uncapped = loss / norm_sq;
    if uncapped >= c {
        Step::Active {
            loss,
            tau: c,
            capped: true,
        }
    } else {
        Step::Active {
            loss,
            tau: uncapped,
            capped: false,
        }
    }
}
