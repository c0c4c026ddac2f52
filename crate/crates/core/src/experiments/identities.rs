//! Integral-geometric identities evaluated two independent ways.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::affine::{fn_density, p_affine_surface_area};
use crate::error::{Error, Result};
use crate::geometry::{Body, BoundaryPoint, Direction, MeanCurvature};
use crate::integration::{
    body_volume, boundary_integral, sample_unit_sphere, sphere_integral, surface_area, Accumulator,
    IntegrationMethod, CHUNK,
};
use crate::rng;
use crate::special::sphere_area;
use crate::vector::Coords;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityRow {
    pub identity: String,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityRow {
    pub fn new(identity: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let rel_error = ((lhs - rhs) / rhs).abs();
        IdentityRow {
            identity: identity.into(),
            lhs,
            rhs,
            rel_error,
            tolerance,
            pass: rel_error <= tolerance,
        }
    }

    fn failed(identity: impl Into<String>, tolerance: f64) -> Self {
        IdentityRow {
            identity: identity.into(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            rel_error: f64::INFINITY,
            tolerance,
            pass: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub schema_version: u32,
    pub body: String,
    pub rows: Vec<IdentityRow>,
}

impl IdentityReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn row(&self, name: &str) -> Option<&IdentityRow> {
        self.rows.iter().find(|r| r.identity == name)
    }
}

/// Default rule and tolerance: the planar quadrature at 1e-6, Monte Carlo
/// with 10⁶ samples at 1% in higher dimensions.
fn default_rule(n: usize) -> (IntegrationMethod, f64) {
    if n == 2 {
        (IntegrationMethod::Quad2D { nodes: 4096 }, 1e-6)
    } else {
        (
            IntegrationMethod::MonteCarlo {
                samples: 1_000_000,
                seed: 0x1de7,
            },
            1e-2,
        )
    }
}

const TEST_FUNCTIONS: [&str; 5] = [
    "one",
    "x0_squared",
    "norm_squared",
    "shifted_last",
    "exp_first",
];

fn test_function(k: usize, x: &[f64]) -> f64 {
    match k {
        0 => 1.0,
        1 => x[0] * x[0],
        2 => x.iter().map(|c| c * c).sum(),
        3 => 2.0 + x[x.len() - 1],
        _ => (0.3 * x[0]).exp(),
    }
}

/// Minkowski's formula, the change of variables through the Gauss map,
/// normalization of `f_n`, `as_0 = n·vol` and `as_p` of the unit ball, with
/// the default rule for the body's dimension.
pub fn verify_identities(body: &Body) -> Result<IdentityReport> {
    let (method, tol) = default_rule(body.dim());
    verify_identities_with(body, method, tol, MeanCurvature::default())
}

pub fn verify_identities_with(
    body: &Body,
    method: IntegrationMethod,
    tolerance: f64,
    convention: MeanCurvature,
) -> Result<IdentityReport> {
    let n = body.dim();
    let mut rows = Vec::new();

    let lhs = boundary_integral(
        body,
        |x| x.support * convention.apply(x.mean_curv, n),
        method,
    )?
    .value;
    let rhs = boundary_integral(body, |_| 1.0, method)?.value;
    rows.push(IdentityRow::new("minkowski", lhs, rhs, tolerance));

    for (k, name) in TEST_FUNCTIONS.iter().enumerate() {
        let lhs = sphere_integral(n, |u| test_function(k, &body.point_at(u).x), method)?.value;
        let rhs = parametrized_integral(body, |x, kappa| test_function(k, x) * kappa, method)?;
        rows.push(IdentityRow::new(
            format!("change_of_variables_{name}"),
            lhs,
            rhs,
            tolerance,
        ));
    }

    let f = fn_density(body)?;
    let total = boundary_integral(body, |x| f.eval(x), method)?.value;
    rows.push(IdentityRow::new("fn_normalization", total, 1.0, tolerance));

    let as0 = p_affine_surface_area(body, 0.0, method)?.value.value;
    rows.push(IdentityRow::new(
        "as0_volume",
        as0,
        n as f64 * body_volume(body),
        tolerance,
    ));

    let ball = Body::ball(1.0, n)?;
    for p in [-1.0, 0.0, 1.0, n as f64, 10.0] {
        let v = p_affine_surface_area(&ball, p, method)?.value.value;
        rows.push(IdentityRow::new(
            format!("ball_as_p={p}"),
            v,
            sphere_area(n),
            tolerance,
        ));
    }

    Ok(IdentityReport {
        schema_version: crate::SCHEMA_VERSION,
        body: body.label(),
        rows,
    })
}

/// `∫_{∂K} g(x, κ(x)) dH^{n−1}` without the Gauss map: ellipsoids and balls
/// as linear images `x = D s` of the sphere with area element
/// `Π a_i |D⁻¹ s| ds`, support curves over the polar angle with a numerically
/// differentiated arclength.
fn parametrized_integral<G>(body: &Body, g: G, method: IntegrationMethod) -> Result<f64>
where
    G: Fn(&[f64], f64) -> f64 + Sync,
{
    match body {
        Body::Ball { radius, dim } => {
            let axes: Coords = std::iter::repeat_n(*radius, *dim).collect();
            linear_image(body, &axes, g, method)
        }
        Body::Ellipsoid { semi_axes } => linear_image(body, semi_axes, g, method),
        Body::SupportCurve(c) => {
            let nodes = 8192;
            let step = TAU / nodes as f64;
            let d = 1e-5;
            let at = |psi: f64| {
                let t = c.normal_angle_on_ray(psi);
                (t, c.point(t))
            };
            let mut sum = 0.0;
            for i in 0..nodes {
                let psi = step * i as f64;
                let (theta, x) = at(psi);
                let (_, xp) = at(psi + d);
                let (_, xm) = at(psi - d);
                let ds = ((xp[0] - xm[0]).powi(2) + (xp[1] - xm[1]).powi(2)).sqrt() / (2.0 * d);
                sum += g(&x, 1.0 / c.radius_of_curvature(theta)) * ds;
            }
            Ok(sum * step)
        }
    }
}

fn linear_image<G>(body: &Body, axes: &[f64], g: G, method: IntegrationMethod) -> Result<f64>
where
    G: Fn(&[f64], f64) -> f64 + Sync,
{
    let det: f64 = axes.iter().product();
    let weight = |s: &Direction| {
        let x: Coords = s.coords().iter().zip(axes).map(|(v, a)| v * a).collect();
        let normal: Coords = s.coords().iter().zip(axes).map(|(v, a)| v / a).collect();
        let stretch = crate::vector::norm(&normal);
        let u = Direction::new(&normal).expect("non-zero normal");
        let kappa = body.point_at(&u).kappa;
        g(&x, kappa) * det * stretch
    };
    // A separate stream so that both sides of the identity are independent.
    let method = match method {
        IntegrationMethod::MonteCarlo { samples, seed } => IntegrationMethod::MonteCarlo {
            samples,
            seed: rng::derive_seed(seed, &[0x9a7a]),
        },
        m => m,
    };
    Ok(sphere_integral(body.dim(), weight, method)?.value)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BpParams {
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for BpParams {
    fn default() -> Self {
        BpParams {
            samples: 400_000,
            seed: 0xb9,
            tolerance: 0.02,
        }
    }
}

/// Lines `⟨x,u⟩ = h` with `h_K(u) − h` below this fraction of `h_K(u)` are
/// skipped; the substitution `h = h_K (1 − t²)` turns it into `t ≥ 10⁻³`.
const TANGENCY_BAND: f64 = 1e-6;

/// The planar integral-geometric identity
/// `L² = ∫_{S¹} ∫_0^{h_K(u)} Σ_{i≠j} |x_i − x_j| l(x_i) l(x_j) dh du`, where the
/// `x_i` are the two boundary points on the line `⟨x,u⟩ = h` and
/// `l(x) = 1/|sin(angle between N(x) and u)|`.
pub fn bp_check_2d(body: &Body, params: &BpParams) -> Result<IdentityRow> {
    if body.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: body.dim(),
        });
    }
    let length = surface_area(body);
    let lhs = length * length;
    let t_min = TANGENCY_BAND.sqrt();
    let chunks = params.samples.div_ceil(CHUNK);
    let partial: Vec<Option<Accumulator>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::stream(params.seed, &[0xb9, c as u64]);
            let mut acc = Accumulator::default();
            for _ in 0..CHUNK.min(params.samples - c * CHUNK) {
                let u = sample_unit_sphere(&mut r, 2);
                let t = t_min + (1.0 - t_min) * rand::Rng::random::<f64>(&mut r);
                let hk = body.support(u.coords());
                let h = hk * (1.0 - t * t);
                let v = chord_integrand(body, u.angle(), h)?;
                acc.push(TAU * (1.0 - t_min) * v * 2.0 * hk * t);
            }
            Some(acc)
        })
        .collect();
    let mut acc = Accumulator::default();
    for p in partial {
        match p {
            Some(a) => acc.merge(&a),
            None => {
                return Ok(IdentityRow::failed(
                    "blaschke_petkantschin",
                    params.tolerance,
                ))
            }
        }
    }
    Ok(IdentityRow::new(
        "blaschke_petkantschin",
        lhs,
        acc.mean,
        params.tolerance,
    ))
}

/// `2 |x₁ − x₂| l(x₁) l(x₂)` on the line `⟨x,u(φ)⟩ = h`, or `None` when a
/// crossing cannot be bracketed.
fn chord_integrand(body: &Body, phi: f64, h: f64) -> Option<f64> {
    let (s, c) = phi.sin_cos();
    let height = |theta: f64| {
        let p: BoundaryPoint = body.point_at_angle(theta);
        p.x[0] * c + p.x[1] * s
    };
    // ⟨x(θ),u⟩ decreases on [φ, φ+π] and increases on [φ−π, φ].
    let t1 = bisect(|t| height(t) - h, phi, phi + PI)?;
    let t2 = bisect(|t| h - height(t), phi - PI, phi)?;
    let p1 = body.point_at_angle(t1);
    let p2 = body.point_at_angle(t2);
    let chord = ((p1.x[0] - p2.x[0]).powi(2) + (p1.x[1] - p2.x[1]).powi(2)).sqrt();
    let l1 = 1.0 / (t1 - phi).sin().abs();
    let l2 = 1.0 / (t2 - phi).sin().abs();
    Some(2.0 * chord * l1 * l2)
}

/// Root of a function that is positive at `a` and negative at `b`.
fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> Option<f64> {
    if !(f(a) >= 0.0 && f(b) <= 0.0) {
        return None;
    }
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        if f(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
        if b - a < 1e-15 {
            break;
        }
    }
    Some(0.5 * (a + b))
}
