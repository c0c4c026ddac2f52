//! p-affine surface areas, the affine-optimal density `f_n`, the hull-deficit
//! constant and the shrink factor.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::experiments::hull_surface_areas;
use crate::geometry::Body;
use crate::integration::{
    body_volume, boundary_integral, surface_area, BoundarySampler, DensitySpec, IntegrationMethod,
    MonteCarloEstimate,
};
use crate::special::{ball_volume, ln_factorial, sphere_area};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineSurfaceAreaResult {
    pub p: f64,
    pub value: MonteCarloEstimate,
}

/// Exponents `(p/(n+p), n(p−1)/(n+p))` of curvature and support in the
/// integrand, with their limits at `p = ±∞`.
fn exponents(p: f64, n: usize) -> Result<(f64, f64)> {
    let nf = n as f64;
    if p.is_nan() || p == -nf {
        return Err(Error::Contract(format!(
            "p must lie in [-inf, inf] \\ {{-{n}}}, got {p}"
        )));
    }
    if p.is_infinite() {
        return Ok((1.0, nf));
    }
    Ok((p / (nf + p), nf * (p - 1.0) / (nf + p)))
}

/// `as_p(K) = ∫_{∂K} κ^{p/(n+p)} ⟨x,N⟩^{−n(p−1)/(n+p)} dH^{n−1}`.
///
/// The origin must be interior to `K`; all catalogue bodies are centred.
pub fn p_affine_surface_area(
    body: &Body,
    p: f64,
    method: IntegrationMethod,
) -> Result<AffineSurfaceAreaResult> {
    let (a, b) = exponents(p, body.dim())?;
    let value = boundary_integral(body, |x| x.kappa.powf(a) * x.support.powf(-b), method)?;
    Ok(AffineSurfaceAreaResult { p, value })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsoperimetricRatio {
    pub ratio: f64,
    pub std_error: f64,
}

/// `[as_p(K)/as_p(Bⁿ)] / [vol(K)/vol(Bⁿ)]^{(n−p)/(n+p)}`, at most 1 for
/// `p ≥ 0` with equality exactly for ellipsoids.
pub fn affine_isoperimetric_ratio(
    body: &Body,
    p: f64,
    method: IntegrationMethod,
) -> Result<IsoperimetricRatio> {
    if !(p >= 0.0) {
        return Err(Error::Contract(format!(
            "isoperimetric ratio needs p >= 0, got {p}"
        )));
    }
    let n = body.dim();
    let nf = n as f64;
    let asp = p_affine_surface_area(body, p, method)?.value;
    let vol_exp = if p.is_infinite() {
        -1.0
    } else {
        (nf - p) / (nf + p)
    };
    let denom = sphere_area(n) * (body_volume(body) / ball_volume(n)).powf(vol_exp);
    Ok(IsoperimetricRatio {
        ratio: asp.value / denom,
        std_error: asp.std_error / denom,
    })
}

/// `f_n = κ^{1/2} / (as_n(K) h^{(n−1)/2})`, normalized with the
/// deterministic rule for the dimension.
pub fn fn_density(body: &Body) -> Result<DensitySpec> {
    let method = IntegrationMethod::deterministic_default(body.dim());
    let as_n = p_affine_surface_area(body, body.dim() as f64, method)?
        .value
        .value;
    Ok(DensitySpec::affine_optimal_with(body, as_n))
}

/// Dimension constant of the random-hull surface-area deficit:
/// `Γ(n+2/(n−1)) Γ((n+1)/2)^{(n+1)/(n−1)} / (π (n+1) (n−2)! Γ((n−1)/2))`.
pub fn reitzner_constant(n: usize) -> f64 {
    assert!(n >= 2, "dimension must be at least 2");
    let nf = n as f64;
    let e = (nf + 1.0) / (nf - 1.0);
    (ln_gamma(nf + 2.0 / (nf - 1.0)) + e * ln_gamma((nf + 1.0) / 2.0)
        - PI.ln()
        - (nf + 1.0).ln()
        - ln_factorial(n - 2)
        - ln_gamma((nf - 1.0) / 2.0))
    .exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeficitCoefficient {
    pub c_n: f64,
    /// `∫ κ^{1/(n−1)} f^{−2/(n−1)} H dH^{n−1}`.
    pub integral: f64,
    pub product: f64,
}

/// Limit of `N^{2/(n−1)} (H^{n−1}(∂K) − E H^{n−1}(∂P_N))` for hulls of `N`
/// points drawn from `density`.
pub fn deficit_coefficient(body: &Body, density: &DensitySpec) -> Result<DeficitCoefficient> {
    let n = body.dim();
    let e = 1.0 / (n as f64 - 1.0);
    let method = IntegrationMethod::deterministic_default(n);
    let integral = boundary_integral(
        body,
        |x| x.kappa.powf(e) * density.eval(x).powf(-2.0 * e) * x.mean_curv,
        method,
    )?
    .value;
    let c_n = reitzner_constant(n);
    Ok(DeficitCoefficient {
        c_n,
        integral,
        product: c_n * integral,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ShrinkMode {
    /// `c = N^{−2/(n−1)} product / ((n−1) H^{n−1}(∂K))`.
    Asymptotic,
    /// Solves `E H^{n−1}(∂P_N) = (1−c)^{n−1} H^{n−1}(∂K)` with the mean over
    /// pilot hulls.
    Empirical { pilots: usize, seed: u64 },
}

/// Above this many points the asymptotic formula is used by default.
pub const EMPIRICAL_SHRINK_LIMIT: usize = 5000;
pub const DEFAULT_PILOTS: usize = 200;

impl ShrinkMode {
    pub fn default_for(n_points: usize, seed: u64) -> Self {
        if n_points <= EMPIRICAL_SHRINK_LIMIT {
            ShrinkMode::Empirical {
                pilots: DEFAULT_PILOTS,
                seed,
            }
        } else {
            ShrinkMode::Asymptotic
        }
    }
}

const PILOT_TAG: u64 = 0x7069_6c6f;

/// The factor `c` for which `(1−c)K` has the expected surface area of the
/// hull of `n_points` draws from `density`.
pub fn shrink_factor(
    body: &Body,
    density: &DensitySpec,
    n_points: usize,
    mode: ShrinkMode,
) -> Result<f64> {
    let n = body.dim();
    if n_points <= n {
        return Err(Error::Contract(format!(
            "need more than {n} points, got {n_points}"
        )));
    }
    let area = surface_area(body);
    let c = match mode {
        ShrinkMode::Asymptotic => {
            let coef = deficit_coefficient(body, density)?;
            (n_points as f64).powf(-2.0 / (n as f64 - 1.0)) * coef.product
                / ((n as f64 - 1.0) * area)
        }
        ShrinkMode::Empirical { pilots, seed } => {
            if pilots == 0 {
                return Err(Error::Contract(
                    "empirical shrink factor needs pilot trials".into(),
                ));
            }
            let sampler = BoundarySampler::new(body, density.clone());
            let areas = hull_surface_areas(&sampler, n_points, pilots, seed, PILOT_TAG)?;
            let mean = areas.iter().sum::<f64>() / areas.len() as f64;
            1.0 - (mean / area).powf(1.0 / (n as f64 - 1.0))
        }
    };
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::ShrinkFactor { c, n_points });
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BoundaryPoint, SupportCurve};
    use crate::special::gauss_legendre;
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    fn quad(n: usize) -> IntegrationMethod {
        IntegrationMethod::deterministic_default(n)
    }

    /// `∫_0^{2π} g(t) dt` by 400-point Gauss–Legendre on each of 8 panels.
    fn integrate_period(g: impl Fn(f64) -> f64) -> f64 {
        let (x, w) = gauss_legendre(400);
        let panels = 8;
        let width = TAU / panels as f64;
        (0..panels)
            .map(|k| {
                let mid = (k as f64 + 0.5) * width;
                x.iter()
                    .zip(&w)
                    .map(|(xi, wi)| wi * g(mid + 0.5 * width * xi))
                    .sum::<f64>()
                    * 0.5
                    * width
            })
            .sum()
    }

    /// `∫ κ^s ds` on the ellipse `(a cos t, b sin t)`.
    fn ellipse_curvature_moment(a: f64, b: f64, s: f64) -> f64 {
        integrate_period(|t| {
            let q = (a * t.sin()).powi(2) + (b * t.cos()).powi(2);
            (a * b / q.powf(1.5)).powf(s) * q.sqrt()
        })
    }

    /// Müller's constant for the uniform ball: the deficit of `N` uniform
    /// points on the unit sphere times `N^{2/(n−1)}`.
    fn muller_ball_constant(n: usize) -> f64 {
        let nf = n as f64;
        let e = (nf + 1.0) / (nf - 1.0);
        (e * 2f64.ln() + (nf / 2.0 + 1.0 / (nf - 1.0)) * PI.ln()
            - (nf + 1.0).ln()
            - ln_factorial(n - 2)
            + ln_gamma(nf + 2.0 / (nf - 1.0))
            - ln_gamma((nf - 1.0) / 2.0)
            + e * (ln_gamma((nf + 1.0) / 2.0) - ln_gamma(nf / 2.0)))
        .exp()
    }

    #[test]
    fn ball_has_sphere_area_for_every_p() {
        for n in [2, 3] {
            let b = Body::ball(1.0, n).unwrap();
            for p in [
                -1.0,
                0.0,
                1.0,
                n as f64,
                10.0,
                f64::INFINITY,
                f64::NEG_INFINITY,
            ] {
                let r = p_affine_surface_area(&b, p, quad(n)).unwrap();
                assert_relative_eq!(r.value.value, sphere_area(n), max_relative = 1e-12);
            }
            let mc = p_affine_surface_area(
                &b,
                1.0,
                IntegrationMethod::MonteCarlo {
                    samples: 10_000,
                    seed: 1,
                },
            )
            .unwrap();
            assert!(mc.value.agrees_with(sphere_area(n), 3.0, 1e-12));
        }
    }

    #[test]
    fn p_equal_minus_n_is_rejected() {
        let b = Body::ball(1.0, 3).unwrap();
        assert!(matches!(
            p_affine_surface_area(&b, -3.0, quad(3)),
            Err(Error::Contract(_))
        ));
        assert!(p_affine_surface_area(&b, f64::NAN, quad(3)).is_err());
    }

    #[test]
    fn ellipse_affine_surface_areas() {
        let e = Body::ellipsoid(&[2.0, 1.0]).unwrap();
        let as1 = p_affine_surface_area(&e, 1.0, quad(2)).unwrap().value.value;
        let oracle = ellipse_curvature_moment(2.0, 1.0, 1.0 / 3.0);
        assert_relative_eq!(oracle, TAU * 2f64.powf(1.0 / 3.0), max_relative = 1e-10);
        assert_relative_eq!(as1, oracle, max_relative = 1e-9);
        for (a, b) in [(2.0, 1.0), (3.0, 0.5)] {
            let e = Body::ellipsoid(&[a, b]).unwrap();
            let as2 = p_affine_surface_area(&e, 2.0, quad(2)).unwrap().value.value;
            assert_relative_eq!(as2, TAU, max_relative = 1e-9);
        }
    }

    #[test]
    fn as_zero_is_n_times_volume() {
        let bodies = [
            Body::ball(1.3, 2).unwrap(),
            Body::ellipsoid(&[2.0, 1.0]).unwrap(),
            Body::ellipsoid(&[1.5, 1.0, 0.75]).unwrap(),
            Body::curve(SupportCurve::new(1.0, vec![(3, 0.1, 0.0), (2, 0.0, 0.05)])).unwrap(),
        ];
        for b in &bodies {
            let n = b.dim();
            let as0 = p_affine_surface_area(b, 0.0, quad(n)).unwrap().value.value;
            assert_relative_eq!(as0, n as f64 * body_volume(b), max_relative = 1e-9);
        }
        let e = &bodies[2];
        let mc = p_affine_surface_area(
            e,
            0.0,
            IntegrationMethod::MonteCarlo {
                samples: 200_000,
                seed: 3,
            },
        )
        .unwrap();
        assert!(mc.value.agrees_with(3.0 * body_volume(e), 3.0, 0.0));
    }

    /// On `rBⁿ`: `κ = r^{1−n}`, `h = r`, area `r^{n−1} ω_n`, so
    /// `as_p = ω_n r^{(n−1)(1−α)−β}` with the exponents `α`, `β` of the
    /// integrand, which simplifies to degree `n(n−p)/(n+p)`.
    #[test]
    fn ball_homogeneity() {
        for n in [2, 3] {
            for p in [0.0, 1.0, 5.0] {
                let r = 1.7;
                let v = p_affine_surface_area(&Body::ball(r, n).unwrap(), p, quad(n))
                    .unwrap()
                    .value
                    .value;
                let nf = n as f64;
                let (alpha, beta) = (p / (nf + p), nf * (p - 1.0) / (nf + p));
                let degree = (nf - 1.0) * (1.0 - alpha) - beta;
                assert_relative_eq!(degree, nf * (nf - p) / (nf + p), max_relative = 1e-14);
                assert_relative_eq!(v, r.powf(degree) * sphere_area(n), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn ellipsoids_attain_equality() {
        let e = Body::ellipsoid(&[1.5, 1.0, 0.75]).unwrap();
        let det = p_affine_surface_area(&e, 3.0, quad(3)).unwrap().value.value;
        assert_relative_eq!(det, 4.0 * PI, max_relative = 1e-10);
        let mc = p_affine_surface_area(
            &e,
            3.0,
            IntegrationMethod::MonteCarlo {
                samples: 100_000,
                seed: 4,
            },
        )
        .unwrap();
        assert!(mc.value.agrees_with(4.0 * PI, 3.0, 0.0), "{:?}", mc.value);
    }

    #[test]
    fn isoperimetric_ratios() {
        let ball = Body::ball(2.0, 2).unwrap();
        assert_relative_eq!(
            affine_isoperimetric_ratio(&ball, 1.0, quad(2))
                .unwrap()
                .ratio,
            1.0,
            max_relative = 1e-12
        );
        let e = Body::ellipsoid(&[2.0, 1.0, 1.0]).unwrap();
        assert_relative_eq!(
            affine_isoperimetric_ratio(&e, 0.0, quad(3)).unwrap().ratio,
            1.0,
            max_relative = 1e-9
        );
        let trefoil = Body::curve(SupportCurve::new(1.0, vec![(3, 0.1, 0.0)])).unwrap();
        let r = affine_isoperimetric_ratio(&trefoil, 1.0, quad(2))
            .unwrap()
            .ratio;
        assert!(r < 1.0 - 1e-4, "ratio {r}");

        let catalogue = [
            Body::ball(1.0, 3).unwrap(),
            Body::ellipsoid(&[3.0, 0.5]).unwrap(),
            Body::ellipsoid(&[1.5, 1.0, 0.75]).unwrap(),
            trefoil,
        ];
        for b in &catalogue {
            let n = b.dim() as f64;
            for p in [0.0, 1.0, n, 2.0 * n] {
                let r = affine_isoperimetric_ratio(b, p, quad(b.dim())).unwrap();
                assert!(
                    r.ratio <= 1.0 + 3.0 * r.std_error + 1e-9,
                    "{} p={p}: {}",
                    b.label(),
                    r.ratio
                );
            }
        }
    }

    #[test]
    fn negative_p_is_rejected_by_isoperimetric_ratio() {
        let b = Body::ball(1.0, 2).unwrap();
        assert!(affine_isoperimetric_ratio(&b, -1.0, quad(2)).is_err());
    }

    #[test]
    fn fn_density_examples() {
        let b = Body::ball(1.0, 3).unwrap();
        let f = fn_density(&b).unwrap();
        let x = b
            .boundary_point(&crate::geometry::Direction::new(&[0.3, -0.2, 0.9]).unwrap())
            .unwrap();
        assert_relative_eq!(f.eval(&x), 1.0 / (4.0 * PI), max_relative = 1e-12);

        let e = Body::ellipsoid(&[2.0, 1.0]).unwrap();
        let f = fn_density(&e).unwrap();
        let total = boundary_integral(&e, |x: &BoundaryPoint| f.eval(x), quad(2))
            .unwrap()
            .value;
        assert_relative_eq!(total, 1.0, max_relative = 1e-6);
        let x = e.point_at_angle(0.0);
        assert_relative_eq!(f.eval(&x), 1.0 / TAU, max_relative = 1e-9);
    }

    #[test]
    fn dimension_constants() {
        assert_relative_eq!(reitzner_constant(2), 0.25, max_relative = 1e-13);
        assert_relative_eq!(reitzner_constant(3), 1.5 / PI, max_relative = 1e-13);
        assert_relative_eq!(
            muller_ball_constant(2),
            2.0 * PI.powi(3),
            max_relative = 1e-13
        );
        assert_relative_eq!(muller_ball_constant(3), 24.0 * PI, max_relative = 1e-13);
        for n in 2..=20 {
            let nf = n as f64;
            let lhs = reitzner_constant(n) * sphere_area(n).powf((nf + 1.0) / (nf - 1.0));
            assert_relative_eq!(lhs, muller_ball_constant(n), max_relative = 1e-11);
        }
    }

    #[test]
    fn deficit_coefficient_examples() {
        let disc = Body::ball(1.0, 2).unwrap();
        let d = deficit_coefficient(&disc, &DensitySpec::uniform(&disc)).unwrap();
        assert_relative_eq!(d.product, 2.0 * PI.powi(3), max_relative = 1e-12);
        let ball = Body::ball(1.0, 3).unwrap();
        let d = deficit_coefficient(&ball, &DensitySpec::uniform(&ball)).unwrap();
        assert_relative_eq!(d.product, 24.0 * PI, max_relative = 1e-10);

        let e = Body::ellipsoid(&[2.0, 1.0]).unwrap();
        let d = deficit_coefficient(&e, &DensitySpec::uniform(&e)).unwrap();
        let length = ellipse_curvature_moment(2.0, 1.0, 0.0);
        let oracle = 0.25 * length * length * ellipse_curvature_moment(2.0, 1.0, 2.0);
        assert_relative_eq!(d.product, oracle, max_relative = 1e-9);
    }

    #[test]
    fn asymptotic_shrink_factor() {
        let disc = Body::ball(1.0, 2).unwrap();
        let u = DensitySpec::uniform(&disc);
        let c = shrink_factor(&disc, &u, 1000, ShrinkMode::Asymptotic).unwrap();
        assert_relative_eq!(c, PI * PI / 1e6, max_relative = 1e-12);
        let mut last = 1.0;
        for n_points in [10, 100, 1000, 10_000] {
            let c = shrink_factor(&disc, &u, n_points, ShrinkMode::Asymptotic).unwrap();
            assert!(c < last);
            last = c;
        }
        assert!(matches!(
            shrink_factor(&disc, &u, 2, ShrinkMode::Asymptotic),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            shrink_factor(&disc, &u, 3, ShrinkMode::Asymptotic),
            Err(Error::ShrinkFactor { .. })
        ));
    }

    #[test]
    fn empirical_shrink_factor_tracks_asymptotic() {
        let disc = Body::ball(1.0, 2).unwrap();
        let u = DensitySpec::uniform(&disc);
        let mut gaps = Vec::new();
        for n_points in [500, 1000, 2000] {
            let a = shrink_factor(&disc, &u, n_points, ShrinkMode::Asymptotic).unwrap();
            let e = shrink_factor(
                &disc,
                &u,
                n_points,
                ShrinkMode::Empirical {
                    pilots: 200,
                    seed: 5,
                },
            )
            .unwrap();
            if n_points == 1000 {
                assert!((e / a - 1.0).abs() < 0.2, "empirical {e} asymptotic {a}");
            }
            gaps.push((e / a - 1.0).abs());
        }
        assert!(gaps.iter().all(|g| *g < 0.2), "{gaps:?}");
        assert_eq!(
            ShrinkMode::default_for(5000, 1),
            ShrinkMode::Empirical {
                pilots: 200,
                seed: 1
            }
        );
        assert_eq!(ShrinkMode::default_for(5001, 1), ShrinkMode::Asymptotic);
    }
}
