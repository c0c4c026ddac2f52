use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::Result;

/// A planar convex curve given by the Fourier series of its support function,
/// `h(θ) = a0 + Σ_k (a_k cos kθ + b_k sin kθ)`.
///
/// JSON form: `{"a0": 1.0, "harmonics": [[3, 0.1, 0.0]]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportCurve {
    pub a0: f64,
    /// `(k, a_k, b_k)` triples.
    #[serde(default)]
    pub harmonics: Vec<(u32, f64, f64)>,
}

impl SupportCurve {
    pub fn new(a0: f64, harmonics: Vec<(u32, f64, f64)>) -> Self {
        SupportCurve { a0, harmonics }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("support curve serializes")
    }

    /// `(h, h', h'')` at angle θ.
    pub fn eval(&self, theta: f64) -> (f64, f64, f64) {
        let mut h = self.a0;
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        for &(k, a, b) in &self.harmonics {
            let kf = k as f64;
            let (s, c) = (kf * theta).sin_cos();
            let v = a * c + b * s;
            h += v;
            d1 += kf * (b * c - a * s);
            d2 -= kf * kf * v;
        }
        (h, d1, d2)
    }

    /// Radius of curvature `h + h''`.
    pub fn radius_of_curvature(&self, theta: f64) -> f64 {
        let (h, _, d2) = self.eval(theta);
        h + d2
    }

    /// Boundary point with outer normal `(cos θ, sin θ)`: `x = h u + h' v`.
    pub fn point(&self, theta: f64) -> [f64; 2] {
        let (h, d1, _) = self.eval(theta);
        let (s, c) = theta.sin_cos();
        [h * c - d1 * s, h * s + d1 * c]
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        SupportCurve {
            a0: self.a0 * lambda,
            harmonics: self
                .harmonics
                .iter()
                .map(|&(k, a, b)| (k, a * lambda, b * lambda))
                .collect(),
        }
    }

    /// Upper bound for `max h` from the coefficients.
    pub fn support_bound(&self) -> f64 {
        self.a0.abs()
            + self
                .harmonics
                .iter()
                .map(|&(_, a, b)| a.hypot(b))
                .sum::<f64>()
    }

    /// Normal angle θ whose boundary point lies on the ray with polar angle
    /// `psi`. The polar angle `φ(θ)` of `x(θ)` is increasing with
    /// `dφ/dθ = h (h + h'') / |x|²` and stays within π/2 of θ, which brackets
    /// the root.
    pub fn normal_angle_on_ray(&self, psi: f64) -> f64 {
        let residual = |theta: f64| {
            let p = self.point(theta);
            wrap(p[1].atan2(p[0]) - psi)
        };
        let mut lo = psi - 0.5 * PI;
        let mut hi = psi + 0.5 * PI;
        let mut theta = psi;
        for _ in 0..100 {
            let r = residual(theta);
            if r.abs() < 1e-15 {
                return theta;
            }
            if r > 0.0 {
                hi = theta;
            } else {
                lo = theta;
            }
            let (h, _, d2) = self.eval(theta);
            let p = self.point(theta);
            let slope = h * (h + d2) / (p[0] * p[0] + p[1] * p[1]);
            let newton = theta - r / slope;
            theta = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo < 1e-15 {
                break;
            }
        }
        theta
    }
}

/// Wraps an angle into `(-π, π]`.
pub(crate) fn wrap(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}
