//! Random-hull experiments: surface-area deficits, the shrink-and-hull
//! construction with its scaling study, and integral-geometric identity
//! checks.

mod identities;
pub mod stats;

pub use identities::{
    bp_check_2d, verify_identities, verify_identities_with, BpParams, IdentityReport, IdentityRow,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affine::{p_affine_surface_area, shrink_factor, ShrinkMode};
use crate::deviation::{surface_deviation, DeviationParams};
use crate::error::{Error, Result};
use crate::geometry::Body;
use crate::hull::{convex_hull_seeded, Polytope};
use crate::integration::{
    surface_area, Accumulator, BoundarySampler, DensitySpec, IntegrationMethod, MonteCarloEstimate,
};
use crate::rng;
use stats::{ols, theil_sen, SlopeFit};

const TAG_DEFICIT: u64 = 0xdef1;
const TAG_CONSTRUCT: u64 = 0xc0de;
const TAG_DEVIATION: u64 = 0xde71;
const TAG_SHRINK: u64 = 0x5411;

fn is_hull_failure(e: &Error) -> bool {
    matches!(e, Error::DegenerateHull { .. } | Error::InconsistentHull(_))
}

/// Hull of `n_points` draws with the stream `(seed, tags)`. A failed hull is
/// retried once with a fresh stream.
fn random_hull(
    sampler: &BoundarySampler,
    n_points: usize,
    seed: u64,
    tags: &[u64],
) -> Result<Polytope> {
    let mut last = None;
    for attempt in 0..2u64 {
        let mut tags = tags.to_vec();
        tags.push(attempt);
        let mut r = rng::stream(seed, &tags);
        let pts: Vec<_> = sampler
            .sample_points(&mut r, n_points)?
            .into_iter()
            .map(|p| p.x)
            .collect();
        match convex_hull_seeded(&pts, sampler.body().dim(), rng::derive_seed(seed, &tags)) {
            Ok(p) => return Ok(p),
            Err(e) if is_hull_failure(&e) && attempt == 0 => {
                log::warn!("hull failed for stream {tags:?}: {e}; retrying with a fresh seed");
                last = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("two attempts"))
}

/// Surface areas of `trials` independent random hulls, in trial order.
pub fn hull_surface_areas(
    sampler: &BoundarySampler,
    n_points: usize,
    trials: usize,
    seed: u64,
    tag: u64,
) -> Result<Vec<f64>> {
    (0..trials)
        .into_par_iter()
        .map(|t| {
            random_hull(sampler, n_points, seed, &[tag, n_points as u64, t as u64])
                .map(|p| p.surface_area())
        })
        .collect()
}

/// Mean of `H^{n−1}(∂K) − H^{n−1}(∂P_N)` over `trials` random hulls.
pub fn hull_deficit(
    body: &Body,
    density: &DensitySpec,
    n_points: usize,
    trials: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if n_points <= body.dim() || trials == 0 {
        return Err(Error::Contract(format!(
            "deficit needs more than {} points and at least one trial",
            body.dim()
        )));
    }
    let sampler = BoundarySampler::new(body, density.clone());
    let area = surface_area(body);
    let areas = hull_surface_areas(&sampler, n_points, trials, seed, TAG_DEFICIT)?;
    let acc: Accumulator = areas.into_iter().map(|a| area - a).collect();
    Ok(acc.estimate(seed))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeficitRow {
    pub n_points: usize,
    pub trials: usize,
    pub mean_deficit: f64,
    pub stderr: f64,
    /// `mean_deficit · N^{2/(n−1)}`.
    pub normalized: f64,
    pub target: f64,
    pub ratio: f64,
}

/// Normalized deficits against the asymptotic coefficient for each `N` of
/// an increasing schedule.
pub fn verify_prop21(
    body: &Body,
    density: &DensitySpec,
    schedule: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<DeficitRow>> {
    check_schedule(schedule, 3)?;
    let target = crate::affine::deficit_coefficient(body, density)?.product;
    let e = 2.0 / (body.dim() as f64 - 1.0);
    schedule
        .iter()
        .map(|&n_points| {
            let d = hull_deficit(
                body,
                density,
                n_points,
                trials,
                rng::derive_seed(seed, &[n_points as u64]),
            )?;
            let normalized = d.value * (n_points as f64).powf(e);
            Ok(DeficitRow {
                n_points,
                trials,
                mean_deficit: d.value,
                stderr: d.std_error,
                normalized,
                target,
                ratio: normalized / target,
            })
        })
        .collect()
}

fn check_schedule(schedule: &[usize], min_len: usize) -> Result<()> {
    if schedule.len() < min_len || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Contract(format!(
            "schedule must be strictly increasing with at least {min_len} entries"
        )));
    }
    Ok(())
}

/// How the shrink factor of a construction is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShrinkChoice {
    /// Pilot hulls up to 5000 points, the asymptotic formula beyond.
    #[default]
    Auto,
    Asymptotic,
    Empirical {
        pilots: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    pub trials: usize,
    pub shrink: ShrinkChoice,
    pub seed: u64,
    pub deviation: DeviationParams,
}

impl ConstructionParams {
    pub fn new(trials: usize, seed: u64) -> Self {
        ConstructionParams {
            trials,
            shrink: ShrinkChoice::Auto,
            seed,
            deviation: DeviationParams::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionResult {
    pub n_points: usize,
    pub trials: usize,
    pub shrink_c: f64,
    pub mean_delta_s: f64,
    pub stderr: f64,
    pub min_delta_s: f64,
    /// Mean of `Δ_s · (1−c)^{−(n−1)}`.
    pub rescaled_mean: f64,
    /// Per-trial `rescaled Δ_s / (n N^{−2/(n−1)} as_n(K)^{2/(n−1)} H^{n−1}(∂K))`.
    pub bound_ratios: Vec<f64>,
    pub origin_outside: usize,
    pub min_vertices: usize,
    pub max_vertices: usize,
    pub seed: u64,
    /// The trial polytope with the smallest deviation.
    pub witness: Polytope,
}

/// Draws `trials` hulls of `n_points` points from `density` on `∂K` and
/// measures each against `(1−c)K`.
pub fn run_construction(
    body: &Body,
    density: &DensitySpec,
    n_points: usize,
    params: &ConstructionParams,
) -> Result<ConstructionResult> {
    let n = body.dim();
    if params.trials == 0 {
        return Err(Error::Contract(
            "construction needs at least one trial".into(),
        ));
    }
    let seed = rng::derive_seed(params.seed, &[n_points as u64]);
    let shrink_seed = rng::derive_seed(seed, &[TAG_SHRINK]);
    let mode = match params.shrink {
        ShrinkChoice::Auto => ShrinkMode::default_for(n_points, shrink_seed),
        ShrinkChoice::Asymptotic => ShrinkMode::Asymptotic,
        ShrinkChoice::Empirical { pilots } => ShrinkMode::Empirical {
            pilots,
            seed: shrink_seed,
        },
    };
    let c = shrink_factor(body, density, n_points, mode)?;
    let scale = 1.0 - c;
    let rescale = scale.powi(-(n as i32 - 1));

    let e = 2.0 / (n as f64 - 1.0);
    let as_n = p_affine_surface_area(body, n as f64, IntegrationMethod::deterministic_default(n))?
        .value
        .value;
    let bound = n as f64 * (n_points as f64).powf(-e) * as_n.powf(e) * surface_area(body);

    let sampler = BoundarySampler::new(body, density.clone());
    let trials: Vec<(Polytope, f64)> = (0..params.trials)
        .into_par_iter()
        .map(|t| {
            let p = random_hull(&sampler, n_points, seed, &[TAG_CONSTRUCT, t as u64])?;
            let dev = DeviationParams {
                seed: rng::derive_seed(seed, &[TAG_DEVIATION, t as u64]),
                ..params.deviation
            };
            let d = surface_deviation(body, scale, &p, &dev)?;
            Ok((p, d.delta.value))
        })
        .collect::<Result<_>>()?;

    let acc: Accumulator = trials.iter().map(|(_, d)| *d).collect();
    let origin_outside = trials
        .iter()
        .filter(|(p, _)| !p.contains_origin_strictly())
        .count();
    if origin_outside > 0 {
        log::warn!(
            "{origin_outside} of {} hulls with N = {n_points} miss the origin",
            params.trials
        );
    }
    let best = trials
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .expect("at least one trial");
    let vertex_counts = trials.iter().map(|(p, _)| p.vertex_count());
    Ok(ConstructionResult {
        n_points,
        trials: params.trials,
        shrink_c: c,
        mean_delta_s: acc.mean,
        stderr: acc.std_error(),
        min_delta_s: trials[best].1,
        rescaled_mean: acc.mean * rescale,
        bound_ratios: trials.iter().map(|(_, d)| d * rescale / bound).collect(),
        origin_outside,
        min_vertices: vertex_counts.clone().min().unwrap_or(0),
        max_vertices: vertex_counts.max().unwrap_or(0),
        seed,
        witness: trials[best].0.clone(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n_points: usize,
    pub trials: usize,
    pub shrink_c: f64,
    pub mean_delta_s: f64,
    pub stderr: f64,
    pub rescaled_mean: f64,
    pub bound_ratio_max: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub schema_version: u32,
    pub body: String,
    pub density: String,
    pub schedule: Vec<usize>,
    pub rows: Vec<ScalingRow>,
    /// Least-squares fit of `log mean Δ_s` against `log N`.
    pub slope: SlopeFit,
    /// The exponent `−2/(n−1)` the fit is compared with.
    pub expected_slope: f64,
    /// Theil–Sen slope of the maximal bound ratio against `log N`.
    pub bound_ratio_trend: f64,
    pub bound_ratios: Vec<Vec<f64>>,
    #[serde(skip)]
    pub witnesses: Vec<Polytope>,
}

/// Runs the construction for each `N` of an increasing schedule and fits the
/// convergence exponent.
pub fn scaling_study(
    body: &Body,
    density: &DensitySpec,
    schedule: &[usize],
    params: &ConstructionParams,
) -> Result<ScalingReport> {
    check_schedule(schedule, 3)?;
    let results: Vec<ConstructionResult> = schedule
        .iter()
        .map(|&m| run_construction(body, density, m, params))
        .collect::<Result<_>>()?;
    let logn: Vec<f64> = schedule.iter().map(|&m| (m as f64).ln()).collect();
    let logd: Vec<f64> = results.iter().map(|r| r.mean_delta_s.ln()).collect();
    if logd.iter().any(|v| !v.is_finite()) {
        return Err(Error::NoConvergence(
            "a mean deviation is not positive; slope undefined".into(),
        ));
    }
    let slope = ols(&logn, &logd)?;
    let max_r: Vec<f64> = results
        .iter()
        .map(|r| {
            r.bound_ratios
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let trend = theil_sen(&logn, &max_r)?;
    Ok(ScalingReport {
        schema_version: crate::SCHEMA_VERSION,
        body: body.label(),
        density: density.kind().to_string(),
        schedule: schedule.to_vec(),
        rows: results
            .iter()
            .zip(&max_r)
            .map(|(r, &m)| ScalingRow {
                n_points: r.n_points,
                trials: r.trials,
                shrink_c: r.shrink_c,
                mean_delta_s: r.mean_delta_s,
                stderr: r.stderr,
                rescaled_mean: r.rescaled_mean,
                bound_ratio_max: m,
                seed: r.seed,
            })
            .collect(),
        slope,
        expected_slope: -2.0 / (body.dim() as f64 - 1.0),
        bound_ratio_trend: trend,
        bound_ratios: results.iter().map(|r| r.bound_ratios.clone()).collect(),
        witnesses: results.into_iter().map(|r| r.witness).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::fn_density;
    use std::f64::consts::PI;

    #[test]
    fn deficit_is_positive_and_shrinks_with_n() {
        let e = Body::ellipsoid(&[2.0, 1.0]).unwrap();
        let u = DensitySpec::uniform(&e);
        let mut last = f64::INFINITY;
        for n_points in [20, 80, 320] {
            let d = hull_deficit(&e, &u, n_points, 100, 1).unwrap();
            assert!(d.value > 0.0 && d.value < last);
            last = d.value;
        }
        assert!(hull_deficit(&e, &u, 2, 10, 1).is_err());
    }

    #[test]
    fn deficit_is_reproducible_and_worker_independent() {
        let b = Body::ball(1.0, 3).unwrap();
        let u = DensitySpec::uniform(&b);
        let a = hull_deficit(&b, &u, 200, 16, 9).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let c = pool.install(|| hull_deficit(&b, &u, 200, 16, 9).unwrap());
        assert_eq!(a, c);
    }

    #[test]
    fn prop21_schedule_validation() {
        let b = Body::ball(1.0, 2).unwrap();
        let u = DensitySpec::uniform(&b);
        assert!(verify_prop21(&b, &u, &[100, 200], 5, 1).is_err());
        assert!(verify_prop21(&b, &u, &[100, 300, 200], 5, 1).is_err());
        let rows = verify_prop21(&b, &u, &[100, 200, 400], 100, 1).unwrap();
        assert_eq!(rows.len(), 3);
        for r in &rows {
            assert!((r.target - 2.0 * PI.powi(3)).abs() < 1e-9);
            assert!((r.ratio - 1.0).abs() < 0.2, "{r:?}");
        }
    }

    #[test]
    fn construction_on_the_disc() {
        let b = Body::ball(1.0, 2).unwrap();
        let f = fn_density(&b).unwrap();
        let params = ConstructionParams::new(40, 3);
        let r = run_construction(&b, &f, 1000, &params).unwrap();
        assert!(r.min_delta_s <= r.mean_delta_s);
        assert_eq!(r.min_vertices, 1000);
        assert_eq!(r.max_vertices, 1000);
        assert_eq!(r.origin_outside, 0);
        let prediction = 2.0 * 2.0 * PI.powi(3) / 1e6;
        assert!(
            r.rescaled_mean > prediction / 3.0 && r.rescaled_mean < prediction * 3.0,
            "{}",
            r.rescaled_mean
        );
        assert!(r.bound_ratios.iter().all(|x| x.is_finite() && *x > 0.0));
        assert_eq!(r.witness.vertex_count(), 1000);
    }
}
