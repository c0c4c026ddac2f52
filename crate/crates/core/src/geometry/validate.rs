use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::body::CURVE_GRID;
use super::Body;
use crate::error::{Error, Result};
use crate::integration::probe_directions;

/// Outcome of probing a body for strictly positive curvature and an interior
/// origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub probes: usize,
    pub min_curvature: f64,
    pub min_support: f64,
}

/// Checks positivity of curvature and of the support function on a probe
/// grid (4096 angles in the plane). Rejects the body, listing failing
/// probes, on any violation.
pub fn validate_body(body: &Body) -> Result<ValidationReport> {
    let mut failures = Vec::new();
    match body {
        Body::Ball { radius, dim } => {
            if !(*radius > 0.0 && radius.is_finite()) || *dim < 2 {
                return Err(Error::InvalidBody {
                    reason: format!("ball needs radius > 0 and n >= 2, got r={radius}, n={dim}"),
                    failures,
                });
            }
        }
        Body::Ellipsoid { semi_axes } => {
            if semi_axes.len() < 2 || semi_axes.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
                return Err(Error::InvalidBody {
                    reason: format!("ellipsoid needs n >= 2 positive semi-axes, got {semi_axes:?}"),
                    failures,
                });
            }
        }
        Body::SupportCurve(_) => {}
    }

    let mut min_curvature = f64::INFINITY;
    let mut min_support = f64::INFINITY;
    let mut probes = 0;
    let mut check = |label: String, kappa: f64, support: f64, failures: &mut Vec<String>| {
        probes += 1;
        min_curvature = min_curvature.min(kappa);
        min_support = min_support.min(support);
        if !(kappa > 0.0 && kappa.is_finite()) {
            failures.push(format!("{label}: curvature {kappa}"));
        } else if !(support > 0.0) {
            failures.push(format!("{label}: support {support}"));
        }
    };

    match body {
        Body::SupportCurve(c) => {
            for i in 0..CURVE_GRID {
                let theta = TAU * i as f64 / CURVE_GRID as f64;
                let (h, _, d2) = c.eval(theta);
                let r = h + d2;
                // κ = 1/(h + h''); report the radius sign directly.
                let kappa = if r > 0.0 { 1.0 / r } else { r };
                check(format!("theta={theta:.6}"), kappa, h, &mut failures);
            }
        }
        _ => {
            for u in probe_directions(body.dim(), 4096) {
                let p = body.point_at(&u);
                check(
                    format!("u={:?}", u.coords()),
                    p.kappa,
                    p.support,
                    &mut failures,
                );
            }
        }
    }

    if failures.is_empty() {
        Ok(ValidationReport {
            probes,
            min_curvature,
            min_support,
        })
    } else {
        let count = failures.len();
        failures.truncate(16);
        Err(Error::InvalidBody {
            reason: format!("{count} of {probes} probes violate positivity"),
            failures,
        })
    }
}
