//! Integration over the boundary of a body.
//!
//! Boundary integrals are pulled back to the sphere through the inverse
//! Gauss map: `∫_{∂K} w dH = ∫_{S^{n−1}} w(x(u)) / κ(x(u)) du`. In the plane
//! this is a periodic integral over the normal angle and a trapezoid rule
//! converges spectrally; in three dimensions a Gauss–Legendre × trapezoid
//! product rule does the same; otherwise uniform Monte Carlo on the sphere.

mod density;
mod sphere;

pub use density::{sample_boundary, BoundarySampler, CustomWeight, DensityKind, DensitySpec};
pub use sphere::{probe_directions, sample_unit_sphere};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geometry::{Body, BoundaryPoint, Direction};
use crate::rng;
use crate::special::{ball_volume, gauss_legendre, sphere_area};

/// Samples per independent random stream. Monte Carlo work is split into
/// chunks of this size so that the reduction order is fixed.
pub const CHUNK: usize = 4096;

const STREAM_BOUNDARY: u64 = 0xB0_0DA7;

/// A numerical estimate with its standard error. Deterministic rules report
/// a zero standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

impl MonteCarloEstimate {
    pub fn exact(value: f64) -> Self {
        MonteCarloEstimate {
            value,
            std_error: 0.0,
            samples: 1,
            seed: 0,
        }
    }

    /// `|value − target| ≤ max(k·stderr, rel_floor·|target|)`.
    pub fn agrees_with(&self, target: f64, k: f64, rel_floor: f64) -> bool {
        (self.value - target).abs() <= (k * self.std_error).max(rel_floor * target.abs())
    }

    pub fn scaled(self, s: f64) -> Self {
        MonteCarloEstimate {
            value: self.value * s,
            std_error: self.std_error * s.abs(),
            ..self
        }
    }
}

/// Running mean and sum of squared deviations; merges are order-sensitive,
/// so partial results are always combined in a fixed order.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Accumulator {
    pub count: usize,
    pub mean: f64,
    pub m2: f64,
}

impl Accumulator {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Accumulator) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let d = other.mean - self.mean;
        self.mean += d * other.count as f64 / n;
        self.m2 += other.m2 + d * d * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }

    pub fn estimate(&self, seed: u64) -> MonteCarloEstimate {
        MonteCarloEstimate {
            value: self.mean,
            std_error: self.std_error(),
            samples: self.count,
            seed,
        }
    }
}

impl FromIterator<f64> for Accumulator {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Accumulator::default();
        for x in iter {
            acc.push(x);
        }
        acc
    }
}

/// How a boundary integral is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum IntegrationMethod {
    /// Uniform directions on the sphere, rescaled by `ω_n`.
    MonteCarlo { samples: usize, seed: u64 },
    /// Composite trapezoid over the normal angle (n = 2).
    Quad2D { nodes: usize },
    /// Gauss–Legendre in the polar cosine × trapezoid in azimuth (n = 3).
    SphereQuad { polar: usize },
}

impl IntegrationMethod {
    /// Deterministic rule for n ≤ 3, Monte Carlo with 10⁶ samples beyond.
    pub fn deterministic_default(n: usize) -> Self {
        match n {
            2 => IntegrationMethod::Quad2D { nodes: 4096 },
            3 => IntegrationMethod::SphereQuad { polar: 128 },
            _ => IntegrationMethod::MonteCarlo {
                samples: 1_000_000,
                seed: 0x5eed,
            },
        }
    }
}

fn check_finite(v: f64, u: &Direction) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteWeight {
            value: v,
            direction: u.coords().to_vec(),
        })
    }
}

/// Integrates a function on the sphere `S^{n−1}` with respect to the
/// spherical measure.
pub fn sphere_integral<F>(n: usize, g: F, method: IntegrationMethod) -> Result<MonteCarloEstimate>
where
    F: Fn(&Direction) -> f64 + Sync,
{
    match method {
        IntegrationMethod::Quad2D { nodes } => {
            if n != 2 {
                return Err(Error::Contract(format!("Quad2D needs n = 2, got n = {n}")));
            }
            let step = TAU / nodes as f64;
            let mut sum = 0.0;
            for i in 0..nodes {
                let u = Direction::from_angle(step * i as f64);
                sum += check_finite(g(&u), &u)?;
            }
            Ok(MonteCarloEstimate {
                value: sum * step,
                std_error: 0.0,
                samples: nodes,
                seed: 0,
            })
        }
        IntegrationMethod::SphereQuad { polar } => {
            if n != 3 {
                return Err(Error::Contract(format!(
                    "SphereQuad needs n = 3, got n = {n}"
                )));
            }
            let (z, w) = gauss_legendre(polar);
            let azimuth = 2 * polar;
            let step = TAU / azimuth as f64;
            let mut sum = 0.0;
            for (zi, wi) in z.iter().zip(&w) {
                let r = (1.0 - zi * zi).sqrt();
                let mut ring = 0.0;
                for j in 0..azimuth {
                    let (s, c) = (step * j as f64).sin_cos();
                    let u = Direction::from_unit(smallvec::smallvec![r * c, r * s, *zi]);
                    ring += check_finite(g(&u), &u)?;
                }
                sum += wi * ring * step;
            }
            Ok(MonteCarloEstimate {
                value: sum,
                std_error: 0.0,
                samples: polar * azimuth,
                seed: 0,
            })
        }
        IntegrationMethod::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(Error::Contract(
                    "Monte Carlo needs at least one sample".into(),
                ));
            }
            let chunks = samples.div_ceil(CHUNK);
            let partial: Vec<Result<Accumulator>> = (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut rng = rng::stream(seed, &[STREAM_BOUNDARY, c as u64]);
                    let len = CHUNK.min(samples - c * CHUNK);
                    let mut acc = Accumulator::default();
                    for _ in 0..len {
                        let u = sample_unit_sphere(&mut rng, n);
                        acc.push(check_finite(g(&u), &u)?);
                    }
                    Ok(acc)
                })
                .collect();
            let mut acc = Accumulator::default();
            for p in partial {
                acc.merge(&p?);
            }
            Ok(acc.estimate(seed).scaled(sphere_area(n)))
        }
    }
}

/// `∫_{∂K} w(x) dH^{n−1}(x)`, evaluated as `∫_{S^{n−1}} w(x(u)) / κ(x(u)) du`.
pub fn boundary_integral<F>(
    body: &Body,
    weight: F,
    method: IntegrationMethod,
) -> Result<MonteCarloEstimate>
where
    F: Fn(&BoundaryPoint) -> f64 + Sync,
{
    sphere_integral(
        body.dim(),
        |u| {
            let p = body.point_at(u);
            weight(&p) / p.kappa
        },
        method,
    )
}

/// `H^{n−1}(∂K)`. Closed forms for balls and support curves, the
/// deterministic rules otherwise.
pub fn surface_area(body: &Body) -> f64 {
    match body {
        Body::Ball { radius, dim } => sphere_area(*dim) * radius.powi(*dim as i32 - 1),
        // ∫ (h + h'') dθ = 2π a0.
        Body::SupportCurve(c) => TAU * c.a0,
        Body::Ellipsoid { .. } => {
            boundary_integral(
                body,
                |_| 1.0,
                IntegrationMethod::deterministic_default(body.dim()),
            )
            .expect("ellipsoid area integrand is finite")
            .value
        }
    }
}

/// `vol(K)`.
pub fn body_volume(body: &Body) -> f64 {
    match body {
        Body::Ball { radius, dim } => ball_volume(*dim) * radius.powi(*dim as i32),
        Body::Ellipsoid { semi_axes } => {
            ball_volume(semi_axes.len()) * semi_axes.iter().product::<f64>()
        }
        Body::SupportCurve(c) => {
            let nodes = 4096;
            let step = TAU / nodes as f64;
            0.5 * step
                * (0..nodes)
                    .map(|i| {
                        let (h, _, d2) = c.eval(step * i as f64);
                        h * (h + d2)
                    })
                    .sum::<f64>()
        }
    }
}
