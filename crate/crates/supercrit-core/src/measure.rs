//! Weighted discrete measures `μ = Σ_j w_j δ_{y_j}` on `R^n`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use crate::float::FloatExt;

use crate::error::{Error, Result};
use crate::geom;

/// A finitely supported nonnegative measure: points with weights.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    /// Flattened points, `len = dim * count`.
    points: Vec<f64>,
    /// One nonnegative weight per point.
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Builds a measure from flattened points and weights.
    ///
    /// Validates: consistent lengths, `dim >= 1`, finite coordinates, and
    /// nonnegative finite weights.
    pub fn new(dim: usize, points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter {
                name: "dim",
                constraint: "must be at least 1",
            });
        }
        if points.len() != dim * weights.len() {
            return Err(Error::DimensionMismatch {
                expected: dim * weights.len(),
                got: points.len(),
            });
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "points",
                constraint: "coordinates must be finite",
            });
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter {
                name: "weights",
                constraint: "must be finite and nonnegative",
            });
        }
        Ok(Self {
            dim,
            points,
            weights,
        })
    }

    /// Measure with unit weight at each given point.
    pub fn unit_weights(dim: usize, points: Vec<f64>) -> Result<Self> {
        if dim == 0 || points.len() % dim != 0 {
            return Err(Error::BadGrid {
                reason: "point buffer length is not a multiple of dim",
            });
        }
        let count = points.len() / dim;
        Self::new(dim, points, alloc::vec![1.0; count])
    }

    /// Ambient dimension.
    #[inline]
    #[must_use]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of atoms.
    #[inline]
    #[must_use]
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    /// True when the measure has no atoms.
    #[inline]
    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Flattened points.
    #[inline]
    #[must_use]
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Weights.
    #[inline]
    #[must_use]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Iterates `(point, weight)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.points
            .chunks_exact(self.dim)
            .zip(self.weights.iter().copied())
    }

    /// Total mass `μ(R^n)`.
    #[must_use]
    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Mass inside the closed ball `B_r(x)`.
    pub fn mass_in_ball(&self, x: &[f64], r: f64) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(self
            .iter()
            .filter(|(y, _)| geom::dist(y, x) <= r)
            .map(|(_, w)| w)
            .sum())
    }

    /// Restriction to the closed ball `B_r(x)` as a new measure.
    ///
    /// Fails with [`Error::EmptyRestriction`] when no atom lies inside.
    pub fn restrict_to_ball(&self, x: &[f64], r: f64) -> Result<Self> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (y, w) in self.iter() {
            if geom::dist(y, x) <= r {
                points.extend_from_slice(y);
                weights.push(w);
            }
        }
        if weights.is_empty() {
            return Err(Error::EmptyRestriction);
        }
        Ok(Self {
            dim: self.dim,
            points,
            weights,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn construction_validates() {
        assert!(DiscreteMeasure::new(2, vec![0.0, 0.0], vec![1.0]).is_ok());
        // Length mismatch.
        assert!(DiscreteMeasure::new(2, vec![0.0, 0.0, 1.0], vec![1.0]).is_err());
        // Negative weight.
        assert!(DiscreteMeasure::new(1, vec![0.0], vec![-1.0]).is_err());
        // Non-finite coordinate.
        assert!(DiscreteMeasure::new(1, vec![f64::NAN], vec![1.0]).is_err());
    }

    #[test]
    fn restriction_and_mass() {
        let mu = DiscreteMeasure::new(
            2,
            vec![0.0, 0.0, 3.0, 0.0, 0.5, 0.5],
            vec![1.0, 2.0, 4.0],
        )
        .unwrap();
        assert_eq!(mu.total_mass(), 7.0);
        assert_eq!(mu.mass_in_ball(&[0.0, 0.0], 1.0).unwrap(), 5.0);
        let r = mu.restrict_to_ball(&[0.0, 0.0], 1.0).unwrap();
        assert_eq!(r.len(), 2);
        assert!(matches!(
            mu.restrict_to_ball(&[10.0, 10.0], 0.5),
            Err(Error::EmptyRestriction)
        ));
    }
}
