//! Surface-area and volume deviation between a scaled smooth body and a
//! polytope.
//!
//! Surface deviation is split into four terms,
//! `Δ_s = H(∂K∖P) + H(∂P∖K) − H(∂K∩P) − H(∂P∩K)`.
//!
//! When the origin is interior to `P` every term is estimated from the same
//! facet samples: a point `y` on a facet and the boundary point of `K` on the
//! ray through `y` are paired by radial projection, and the ratio of the two
//! radial area elements converts facet measure into body measure. Otherwise
//! the body terms come from uniform directions pulled back through the Gauss
//! map and the polytope terms from per-facet membership fractions.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Body;
use crate::hull::{Facet, Polytope};
use crate::integration::{
    body_volume, sample_unit_sphere, surface_area, Accumulator, MonteCarloEstimate, CHUNK,
};
use crate::rng;
use crate::special::sphere_area;
use crate::vector::norm;

const FACETS_PER_TASK: usize = 256;
const MIN_PER_FACET: usize = 8;
const TAG_FACETS: u64 = 0xfac3;
const TAG_BODY: u64 = 0xb0d7;
const TAG_VOLUME_P: u64 = 0x7601;
const TAG_VOLUME_K: u64 = 0x7602;

/// Which estimator [`surface_deviation`] uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviationMethod {
    /// Radial pairing when the origin is interior to `P`, indicators otherwise.
    #[default]
    Auto,
    Radial,
    Indicator,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationParams {
    /// Initial budget per side; doubled until the error cap is met.
    pub samples: usize,
    pub max_samples: usize,
    /// Acceptable standard error relative to the estimate.
    pub rel_cap: f64,
    /// Acceptable standard error relative to `H^{n−1}(∂(λK))`.
    pub abs_cap: f64,
    pub seed: u64,
    pub method: DeviationMethod,
}

impl Default for DeviationParams {
    fn default() -> Self {
        DeviationParams {
            samples: 200_000,
            max_samples: 1_600_000,
            rel_cap: 0.02,
            abs_cap: 1e-4,
            seed: 0,
            method: DeviationMethod::Auto,
        }
    }
}

impl DeviationParams {
    pub fn with_seed(seed: u64) -> Self {
        DeviationParams {
            seed,
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DeviationParts {
    /// `H^{n−1}(∂K ∩ Pᶜ)`.
    pub body_outside: f64,
    /// `H^{n−1}(∂P ∩ Kᶜ)`.
    pub poly_outside: f64,
    /// `H^{n−1}(∂K ∩ P)`.
    pub body_inside: f64,
    /// `H^{n−1}(∂P ∩ K)`.
    pub poly_inside: f64,
}

impl DeviationParts {
    pub fn delta(&self) -> f64 {
        self.body_outside + self.poly_outside - self.body_inside - self.poly_inside
    }

    fn add(&mut self, o: &DeviationParts) {
        self.body_outside += o.body_outside;
        self.poly_outside += o.poly_outside;
        self.body_inside += o.body_inside;
        self.poly_inside += o.poly_inside;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationEstimate {
    pub delta: MonteCarloEstimate,
    pub parts: DeviationParts,
    pub scale: f64,
    pub method: DeviationMethod,
}

fn check(body: &Body, scale: f64, p: &Polytope) -> Result<()> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Contract(format!(
            "scale must be positive, got {scale}"
        )));
    }
    if body.dim() != p.dim {
        return Err(Error::DimensionMismatch {
            expected: body.dim(),
            found: p.dim,
        });
    }
    if p.facets.is_empty() {
        return Err(Error::Contract("polytope has no facets".into()));
    }
    Ok(())
}

/// Per-facet sample counts proportional to measure, at least 8 each.
fn allocation(p: &Polytope, budget: usize) -> Vec<usize> {
    let total = p.surface_area();
    p.facets
        .iter()
        .map(|f| ((budget as f64 * f.measure / total).round() as usize).max(MIN_PER_FACET))
        .collect()
}

/// Stratified facet estimate: parts, Δ contribution and its variance.
struct FacetSums {
    parts: DeviationParts,
    delta: f64,
    var: f64,
    count: usize,
}

impl FacetSums {
    fn zero() -> Self {
        FacetSums {
            parts: DeviationParts::default(),
            delta: 0.0,
            var: 0.0,
            count: 0,
        }
    }

    fn merge(&mut self, o: &FacetSums) {
        self.parts.add(&o.parts);
        self.delta += o.delta;
        self.var += o.var;
        self.count += o.count;
    }
}

/// Walks all facets in fixed-size tasks with one random stream per task and
/// folds the per-facet sums in facet order.
#[allow(clippy::needless_range_loop)]
fn over_facets<F>(p: &Polytope, counts: &[usize], seed: u64, per_sample: F) -> FacetSums
where
    F: Fn(&Facet, &[f64]) -> (DeviationParts, f64) + Sync,
{
    let tasks = p.facets.len().div_ceil(FACETS_PER_TASK);
    let partial: Vec<FacetSums> = (0..tasks)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::stream(seed, &[TAG_FACETS, t as u64]);
            let mut sums = FacetSums::zero();
            let end = ((t + 1) * FACETS_PER_TASK).min(p.facets.len());
            for fid in t * FACETS_PER_TASK..end {
                let facet = &p.facets[fid];
                let m = counts[fid];
                let mut acc = Accumulator::default();
                let mut parts = DeviationParts::default();
                for _ in 0..m {
                    let y = p.sample_on_facet(fid, &mut r);
                    let (part, d) = per_sample(facet, &y);
                    parts.add(&part);
                    acc.push(d);
                }
                let w = facet.measure / m as f64;
                sums.parts.body_outside += w * parts.body_outside;
                sums.parts.poly_outside += w * parts.poly_outside;
                sums.parts.body_inside += w * parts.body_inside;
                sums.parts.poly_inside += w * parts.poly_inside;
                sums.delta += facet.measure * acc.mean;
                sums.var += facet.measure * facet.measure * acc.variance() / m as f64;
                sums.count += m;
            }
            sums
        })
        .collect();
    let mut out = FacetSums::zero();
    for s in &partial {
        out.merge(s);
    }
    out
}

/// Radial pairing. A facet point `y` and the body point `ρ ω` on the same ray
/// carry area elements `|y|ⁿ/⟨y,N_F⟩ dω` and `ρⁿ/⟨x,N_K⟩ dω`; their ratio
/// turns a facet sample into a body sample.
fn radial(
    body: &Body,
    scale: f64,
    p: &Polytope,
    budget: usize,
    seed: u64,
) -> (DeviationParts, MonteCarloEstimate) {
    let n = p.dim as i32;
    let counts = allocation(p, budget);
    let sums = over_facets(p, &counts, seed, |facet, y| {
        let r = norm(y);
        let omega: Vec<f64> = y.iter().map(|c| c / r).collect();
        let (rho, support) = body.radial(&omega, scale);
        let ratio = (rho / r).powi(n) * facet.offset / support;
        if rho > r {
            (
                DeviationParts {
                    body_outside: ratio,
                    poly_inside: 1.0,
                    ..Default::default()
                },
                ratio - 1.0,
            )
        } else {
            (
                DeviationParts {
                    body_inside: ratio,
                    poly_outside: 1.0,
                    ..Default::default()
                },
                1.0 - ratio,
            )
        }
    });
    let est = MonteCarloEstimate {
        value: sums.delta,
        std_error: sums.var.sqrt(),
        samples: sums.count,
        seed,
    };
    (sums.parts, est)
}

/// Membership indicators: uniform directions for the body terms, facet
/// samples for the polytope terms.
fn indicator(
    body: &Body,
    scale: f64,
    p: &Polytope,
    budget: usize,
    seed: u64,
) -> (DeviationParts, MonteCarloEstimate) {
    let n = p.dim;
    let counts = allocation(p, budget);
    let facet_sums = over_facets(p, &counts, seed, |_, y| {
        if body.contains(y, scale) {
            (
                DeviationParts {
                    poly_inside: 1.0,
                    ..Default::default()
                },
                -1.0,
            )
        } else {
            (
                DeviationParts {
                    poly_outside: 1.0,
                    ..Default::default()
                },
                1.0,
            )
        }
    });

    // ∂(λK) at normal u is λ x(u) with curvature κ/λ, hence the λ^{n−1}.
    let jac = sphere_area(n) * scale.powi(n as i32 - 1);
    let chunks = budget.div_ceil(CHUNK);
    let partial: Vec<(Accumulator, Accumulator)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::stream(seed, &[TAG_BODY, c as u64]);
            let (mut signed, mut outside) = (Accumulator::default(), Accumulator::default());
            for _ in 0..CHUNK.min(budget - c * CHUNK) {
                let u = sample_unit_sphere(&mut r, n);
                let b = body.boundary_point(&u).expect("dimension checked");
                let x: Vec<f64> = b.x.iter().map(|c| c * scale).collect();
                let w = jac / b.kappa;
                if p.contains(&x) {
                    signed.push(-w);
                    outside.push(0.0);
                } else {
                    signed.push(w);
                    outside.push(w);
                }
            }
            (signed, outside)
        })
        .collect();
    let (mut signed, mut outside) = (Accumulator::default(), Accumulator::default());
    for (s, o) in &partial {
        signed.merge(s);
        outside.merge(o);
    }
    let area = surface_area(body) * scale.powi(n as i32 - 1);
    let mut parts = facet_sums.parts;
    parts.body_outside = outside.mean;
    parts.body_inside = area - outside.mean;
    let est = MonteCarloEstimate {
        value: parts.delta(),
        std_error: (facet_sums.var + signed.std_error().powi(2)).sqrt(),
        samples: facet_sums.count + signed.count,
        seed,
    };
    (parts, est)
}

/// `Δ_s(λK, P)` with its four terms.
///
/// The budget doubles from `params.samples` until the standard error is
/// within `max(rel_cap·Δ, abs_cap·H^{n−1}(∂(λK)))`; past `max_samples` the
/// last estimate is returned inside [`Error::StderrCap`].
pub fn surface_deviation(
    body: &Body,
    scale: f64,
    p: &Polytope,
    params: &DeviationParams,
) -> Result<DeviationEstimate> {
    check(body, scale, p)?;
    let origin_inside = p
        .facets
        .iter()
        .all(|f| f.offset > 1e-12 * p.coordinate_scale());
    let method = match params.method {
        DeviationMethod::Auto if origin_inside => DeviationMethod::Radial,
        DeviationMethod::Auto => DeviationMethod::Indicator,
        DeviationMethod::Radial if !origin_inside => {
            return Err(Error::Contract(
                "radial estimator needs the origin inside the polytope".into(),
            ))
        }
        m => m,
    };
    let area = surface_area(body) * scale.powi(body.dim() as i32 - 1);
    let mut budget = params.samples.max(1);
    let mut round = 0u64;
    loop {
        let seed = rng::derive_seed(params.seed, &[round]);
        let (parts, delta) = match method {
            DeviationMethod::Radial => radial(body, scale, p, budget, seed),
            _ => indicator(body, scale, p, budget, seed),
        };
        let cap = (params.rel_cap * delta.value.abs()).max(params.abs_cap * area);
        if delta.std_error <= cap {
            return Ok(DeviationEstimate {
                delta,
                parts,
                scale,
                method,
            });
        }
        if budget >= params.max_samples {
            return Err(Error::StderrCap {
                value: delta.value,
                std_error: delta.std_error,
                cap,
                samples: delta.samples,
            });
        }
        log::debug!(
            "deviation stderr {} above cap {cap}; doubling budget",
            delta.std_error
        );
        budget = (2 * budget).min(params.max_samples);
        round += 1;
    }
}

/// `Δ_v(λK, P) = vol(λK ∖ P) + vol(P ∖ λK)`.
pub fn volume_deviation(
    body: &Body,
    scale: f64,
    p: &Polytope,
    params: &DeviationParams,
) -> Result<MonteCarloEstimate> {
    check(body, scale, p)?;
    let n = p.dim;
    let vol_p = p.volume();
    let vol_k = body_volume(body) * scale.powi(n as i32);
    let radius = body.circumradius() * scale;
    let cumulative = p.fan_cumulative();
    let budget = params.samples.max(1);
    let chunks = budget.div_ceil(CHUNK);

    let poly_side: Vec<Accumulator> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::stream(params.seed, &[TAG_VOLUME_P, c as u64]);
            (0..CHUNK.min(budget - c * CHUNK))
                .map(|_| {
                    let x = p.sample_interior(&cumulative, &mut r);
                    if body.contains(&x, scale) {
                        0.0
                    } else {
                        vol_p
                    }
                })
                .collect()
        })
        .collect();
    let body_side: Vec<Accumulator> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::stream(params.seed, &[TAG_VOLUME_K, c as u64]);
            let mut acc = Accumulator::default();
            let mut x = vec![0.0; n];
            while acc.count < CHUNK.min(budget - c * CHUNK) {
                x.iter_mut()
                    .for_each(|v| *v = r.random_range(-radius..radius));
                if body.contains(&x, scale) {
                    acc.push(if p.contains(&x) { 0.0 } else { vol_k });
                }
            }
            acc
        })
        .collect();

    let (mut a, mut b) = (Accumulator::default(), Accumulator::default());
    poly_side.iter().for_each(|x| a.merge(x));
    body_side.iter().for_each(|x| b.merge(x));
    Ok(MonteCarloEstimate {
        value: a.mean + b.mean,
        std_error: (a.std_error().powi(2) + b.std_error().powi(2)).sqrt(),
        samples: a.count + b.count,
        seed: params.seed,
    })
}
