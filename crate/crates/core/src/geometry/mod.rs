//! Smooth convex bodies of class C²₊: exact support functions, the inverse
//! Gauss map `u ↦ x(u)`, curvatures and membership.

mod body;
mod curve;
mod validate;

pub use body::Body;
pub use curve::SupportCurve;
pub use validate::{validate_body, ValidationReport};

use crate::error::{Error, Result};
use crate::vector::{norm, Coords};
use serde::{Deserialize, Serialize};

/// Unit vector in ℝⁿ, n ≥ 2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Direction(Coords);

impl Direction {
    /// Normalizes `coords`. Fails for the zero vector, non-finite input and
    /// n < 2.
    pub fn new(coords: &[f64]) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::Contract(format!(
                "directions need n >= 2, got n = {}",
                coords.len()
            )));
        }
        let r = norm(coords);
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::Contract(format!("cannot normalize {coords:?}")));
        }
        Ok(Direction(coords.iter().map(|c| c / r).collect()))
    }

    /// Wraps an already normalized vector.
    pub(crate) fn from_unit(coords: Coords) -> Self {
        debug_assert!((norm(&coords) - 1.0).abs() < 1e-9);
        Direction(coords)
    }

    /// `(cos θ, sin θ)`.
    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Direction(smallvec::smallvec![c, s])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Polar angle of a planar direction.
    pub fn angle(&self) -> f64 {
        self.0[1].atan2(self.0[0])
    }
}

impl AsRef<[f64]> for Direction {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// A boundary location with its outer normal and curvature data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub x: Coords,
    /// Outer unit normal `N(x)`.
    pub u: Direction,
    /// Gaussian curvature, product of the principal curvatures.
    pub kappa: f64,
    /// Mean curvature, normalized as (sum of principal curvatures)/(n−1).
    pub mean_curv: f64,
    /// `h_K(u) = ⟨x, N(x)⟩`.
    pub support: f64,
}

impl BoundaryPoint {
    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// The normalization of the mean curvature. Only [`MeanCurvature::AverageOverTangent`]
/// satisfies Minkowski's integral formula `∫ h H dA = A`; the other
/// convention exists to demonstrate that.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum MeanCurvature {
    /// (sum of principal curvatures) / (n − 1). Unit sphere: H = 1.
    #[default]
    AverageOverTangent,
    /// (sum of principal curvatures) / n.
    AverageOverAmbient,
}

impl MeanCurvature {
    /// Converts a mean curvature stored in the default normalization.
    pub fn apply(self, mean_curv: f64, n: usize) -> f64 {
        match self {
            MeanCurvature::AverageOverTangent => mean_curv,
            MeanCurvature::AverageOverAmbient => mean_curv * (n as f64 - 1.0) / n as f64,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direction_normalizes() {
        let u = Direction::new(&[3.0, 4.0]).unwrap();
        assert_eq!(u.coords(), &[0.6, 0.8]);
        assert!(Direction::new(&[0.0, 0.0]).is_err());
        assert!(Direction::new(&[1.0]).is_err());
        assert!(Direction::new(&[f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn ambient_convention_scales_mean_curvature() {
        assert_eq!(MeanCurvature::AverageOverAmbient.apply(1.0, 3), 2.0 / 3.0);
        assert_eq!(MeanCurvature::AverageOverTangent.apply(1.0, 3), 1.0);
    }
}
