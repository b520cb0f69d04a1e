//! Weighted point clouds serving as discrete measures on model spaces and
//! warped products.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("measure has zero total mass")]
    ZeroMass,
    #[error("negative atom weight {0}")]
    NegativeWeight(f64),
}

/// Finitely supported nonnegative measure: a list of (point, weight) atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure<P> {
    pub atoms: Vec<(P, f64)>,
}

impl<P> DiscreteMeasure<P> {
    pub fn new(atoms: Vec<(P, f64)>) -> Result<Self, MeasureError> {
        if let Some(&(_, w)) = atoms.iter().find(|(_, w)| *w < 0.0) {
            return Err(MeasureError::NegativeWeight(w));
        }
        Ok(Self { atoms })
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.atoms.iter().map(|(_, w)| w).sum()
    }

    /// Rescale weights to total mass one.
    pub fn normalize(mut self) -> Result<Self, MeasureError> {
        let total = self.total();
        if !(total > 0.0) {
            return Err(MeasureError::ZeroMass);
        }
        for (_, w) in &mut self.atoms {
            *w /= total;
        }
        Ok(self)
    }

    /// Drop atoms with weight below `cutoff` (keeps masses comparable across
    /// grid resolutions when tails are negligible).
    pub fn prune(mut self, cutoff: f64) -> Self {
        self.atoms.retain(|(_, w)| *w > cutoff);
        self
    }

    pub fn weights(&self) -> Vec<f64> {
        self.atoms.iter().map(|(_, w)| *w).collect()
    }

    pub fn points(&self) -> impl Iterator<Item = &P> {
        self.atoms.iter().map(|(p, _)| p)
    }
}
