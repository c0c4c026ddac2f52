use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use smallvec::smallvec;

use super::curve::SupportCurve;
use super::{BoundaryPoint, Direction};
use crate::error::{Error, Result};
use crate::vector::{dot, norm, Coords};

/// Number of grid angles used for support-curve membership.
pub(crate) const CURVE_GRID: usize = 4096;

/// An immutable convex body of class C²₊ with the origin in its interior.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Body {
    Ball { radius: f64, dim: usize },
    Ellipsoid { semi_axes: Coords },
    SupportCurve(SupportCurve),
}

impl Body {
    pub fn ball(radius: f64, dim: usize) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Contract(format!(
                "ball radius must be > 0, got {radius}"
            )));
        }
        if dim < 2 {
            return Err(Error::Contract(format!(
                "dimension must be >= 2, got {dim}"
            )));
        }
        Ok(Body::Ball { radius, dim })
    }

    pub fn ellipsoid(semi_axes: &[f64]) -> Result<Self> {
        if semi_axes.len() < 2 {
            return Err(Error::Contract(format!(
                "an ellipsoid needs at least 2 semi-axes, got {}",
                semi_axes.len()
            )));
        }
        if let Some(a) = semi_axes.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::Contract(format!("semi-axes must be > 0, got {a}")));
        }
        Ok(Body::Ellipsoid {
            semi_axes: semi_axes.iter().copied().collect(),
        })
    }

    /// A planar support curve, validated for positive curvature and an
    /// interior origin.
    pub fn curve(curve: SupportCurve) -> Result<Self> {
        let body = Body::SupportCurve(curve);
        super::validate_body(&body)?;
        Ok(body)
    }

    pub fn dim(&self) -> usize {
        match self {
            Body::Ball { dim, .. } => *dim,
            Body::Ellipsoid { semi_axes } => semi_axes.len(),
            Body::SupportCurve(_) => 2,
        }
    }

    /// Short human-readable identifier, e.g. `ellipsoid(1.5,1,0.75)`.
    pub fn label(&self) -> String {
        match self {
            Body::Ball { radius, dim } => format!("ball(r={radius},n={dim})"),
            Body::Ellipsoid { semi_axes } => {
                let a: Vec<String> = semi_axes.iter().map(|a| a.to_string()).collect();
                format!("ellipsoid({})", a.join(","))
            }
            Body::SupportCurve(c) => {
                format!("curve2d(a0={},harmonics={})", c.a0, c.harmonics.len())
            }
        }
    }

    pub fn is_ellipsoid(&self) -> bool {
        matches!(self, Body::Ball { .. } | Body::Ellipsoid { .. })
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found,
            });
        }
        Ok(())
    }

    /// `h_K(u) = max ⟨x, u⟩` over `x ∈ K`.
    pub fn support_function(&self, u: &Direction) -> Result<f64> {
        self.check_dim(u.dim())?;
        Ok(self.support(u.coords()))
    }

    pub(crate) fn support(&self, u: &[f64]) -> f64 {
        match self {
            Body::Ball { radius, .. } => *radius,
            Body::Ellipsoid { semi_axes } => semi_axes
                .iter()
                .zip(u)
                .map(|(a, u)| a * a * u * u)
                .sum::<f64>()
                .sqrt(),
            Body::SupportCurve(c) => c.eval(u[1].atan2(u[0])).0,
        }
    }

    /// The unique boundary point with outer unit normal `u`, with its
    /// curvature data.
    pub fn boundary_point(&self, u: &Direction) -> Result<BoundaryPoint> {
        self.check_dim(u.dim())?;
        Ok(self.point_at(u))
    }

    pub(crate) fn point_at(&self, u: &Direction) -> BoundaryPoint {
        match self {
            Body::Ball { radius, dim } => BoundaryPoint {
                x: u.coords().iter().map(|c| c * radius).collect(),
                u: u.clone(),
                kappa: radius.powi(1 - *dim as i32),
                mean_curv: 1.0 / radius,
                support: *radius,
            },
            Body::Ellipsoid { semi_axes } => {
                let n = semi_axes.len();
                let uc = u.coords();
                // x = D²u / |Du|; with h = |Du| one gets |x / a²| = 1/h.
                let h = self.support(uc);
                let x: Coords = semi_axes
                    .iter()
                    .zip(uc)
                    .map(|(a, u)| a * a * u / h)
                    .collect();
                let prod_sq: f64 = semi_axes.iter().map(|a| a * a).product();
                let kappa = h.powi(n as i32 + 1) / prod_sq;
                let trace_a: f64 = semi_axes.iter().map(|a| 1.0 / (a * a)).sum();
                let quad: f64 = semi_axes.iter().zip(uc).map(|(a, u)| u * u / (a * a)).sum();
                let mean_curv = h * (trace_a - quad) / (n as f64 - 1.0);
                BoundaryPoint {
                    x,
                    u: u.clone(),
                    kappa,
                    mean_curv,
                    support: h,
                }
            }
            Body::SupportCurve(c) => self.curve_point(c, u.angle(), u.clone()),
        }
    }

    fn curve_point(&self, c: &SupportCurve, theta: f64, u: Direction) -> BoundaryPoint {
        let (h, d1, d2) = c.eval(theta);
        let (s, co) = theta.sin_cos();
        let kappa = 1.0 / (h + d2);
        BoundaryPoint {
            x: smallvec![h * co - d1 * s, h * s + d1 * co],
            u,
            kappa,
            mean_curv: kappa,
            support: h,
        }
    }

    /// Boundary point of a planar body with outer normal `(cos θ, sin θ)`.
    pub fn point_at_angle(&self, theta: f64) -> BoundaryPoint {
        match self {
            Body::SupportCurve(c) => self.curve_point(c, theta, Direction::from_angle(theta)),
            _ => self.point_at(&Direction::from_angle(theta)),
        }
    }

    /// Principal curvatures at `x(u)`, ascending. For ellipsoids these are
    /// the eigenvalues of the Weingarten map of the level set restricted to
    /// the tangent space.
    pub fn principal_curvatures(&self, u: &Direction) -> Result<Vec<f64>> {
        self.check_dim(u.dim())?;
        Ok(match self {
            Body::Ball { radius, dim } => vec![1.0 / radius; dim - 1],
            Body::SupportCurve(_) => vec![self.point_at(u).kappa],
            Body::Ellipsoid { semi_axes } => {
                let n = semi_axes.len();
                let h = self.support(u.coords());
                let basis = tangent_basis(u.coords());
                // Shape operator Tᵀ A T / |∇F|, A = diag(1/a²), |∇F|/2 = 1/h.
                let m = DMatrix::from_fn(n - 1, n - 1, |i, j| {
                    h * (0..n)
                        .map(|k| basis[i][k] * basis[j][k] / (semi_axes[k] * semi_axes[k]))
                        .sum::<f64>()
                });
                let mut eig: Vec<f64> =
                    SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
                eig.sort_by(f64::total_cmp);
                eig
            }
        })
    }

    /// Whether `point ∈ scale·K`. Boundary ties count as inside.
    pub fn contains(&self, point: &[f64], scale: f64) -> bool {
        match self {
            Body::Ball { radius, .. } => {
                let r = radius * scale;
                dot(point, point) <= r * r * (1.0 + 1e-12)
            }
            Body::Ellipsoid { semi_axes } => {
                let q: f64 = semi_axes
                    .iter()
                    .zip(point)
                    .map(|(a, p)| {
                        let t = p / (a * scale);
                        t * t
                    })
                    .sum();
                q <= 1.0 + 1e-12
            }
            Body::SupportCurve(c) => {
                let tol = 1e-9 * c.support_bound() * scale;
                (0..CURVE_GRID).all(|i| {
                    let theta = std::f64::consts::TAU * i as f64 / CURVE_GRID as f64;
                    let (s, co) = theta.sin_cos();
                    point[0] * co + point[1] * s - scale * c.eval(theta).0 <= tol
                })
            }
        }
    }

    /// `λK`.
    pub fn scale_body(&self, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::Contract(format!("scale must be > 0, got {lambda}")));
        }
        Ok(match self {
            Body::Ball { radius, dim } => Body::Ball {
                radius: radius * lambda,
                dim: *dim,
            },
            Body::Ellipsoid { semi_axes } => Body::Ellipsoid {
                semi_axes: semi_axes.iter().map(|a| a * lambda).collect(),
            },
            Body::SupportCurve(c) => Body::SupportCurve(c.scaled(lambda)),
        })
    }

    /// Where the ray from the origin in direction `omega` (unit) leaves
    /// `scale·K`: returns `(ρ, ⟨x, N(x)⟩)` at the exit point `x = ρ ω`.
    pub(crate) fn radial(&self, omega: &[f64], scale: f64) -> (f64, f64) {
        match self {
            Body::Ball { radius, .. } => (radius * scale, radius * scale),
            Body::Ellipsoid { semi_axes } => {
                let mut q2 = 0.0;
                let mut q4 = 0.0;
                for (a, w) in semi_axes.iter().zip(omega) {
                    let a = a * scale;
                    let t = w * w / (a * a);
                    q2 += t;
                    q4 += t / (a * a);
                }
                let rho = 1.0 / q2.sqrt();
                // |x / a²| = ρ sqrt(Σ ω²/a⁴), ⟨x, N⟩ = 1 / |x / a²|.
                (rho, 1.0 / (rho * q4.sqrt()))
            }
            Body::SupportCurve(c) => {
                let theta = c.normal_angle_on_ray(omega[1].atan2(omega[0]));
                let p = c.point(theta);
                (
                    (p[0] * p[0] + p[1] * p[1]).sqrt() * scale,
                    c.eval(theta).0 * scale,
                )
            }
        }
    }

    /// Radius of a ball centred at the origin that contains the body.
    pub fn circumradius(&self) -> f64 {
        match self {
            Body::Ball { radius, .. } => *radius,
            Body::Ellipsoid { semi_axes } => semi_axes.iter().copied().fold(0.0, f64::max),
            Body::SupportCurve(c) => {
                (0..CURVE_GRID)
                    .map(|i| {
                        let p = c.point(std::f64::consts::TAU * i as f64 / CURVE_GRID as f64);
                        norm(&p)
                    })
                    .fold(0.0, f64::max)
                    * (1.0 + 1e-6)
            }
        }
    }
}

/// Orthonormal basis of `u^⊥` by Gram–Schmidt on the standard basis.
pub(crate) fn tangent_basis(u: &[f64]) -> Vec<Coords> {
    let n = u.len();
    let mut basis: Vec<Coords> = Vec::with_capacity(n - 1);
    let mut axes: Vec<usize> = (0..n).collect();
    // Start with the axes least aligned with u for conditioning.
    axes.sort_by(|&i, &j| u[i].abs().total_cmp(&u[j].abs()));
    for &k in &axes {
        if basis.len() == n - 1 {
            break;
        }
        let mut v: Coords = (0..n).map(|i| if i == k { 1.0 } else { 0.0 }).collect();
        let p = v[k] * u[k];
        for i in 0..n {
            v[i] -= p * u[i];
        }
        for b in &basis {
            let p = dot(&v, b);
            for i in 0..n {
                v[i] -= p * b[i];
            }
        }
        let r = norm(&v);
        if r > 1e-8 {
            basis.push(v.iter().map(|x| x / r).collect());
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn dir(c: &[f64]) -> Direction {
        Direction::new(c).unwrap()
    }

    #[test]
    fn support_function_examples() {
        let ball = Body::ball(1.0, 3).unwrap();
        assert_eq!(ball.support_function(&dir(&[0.3, -0.2, 0.9])).unwrap(), 1.0);
        let e = Body::ellipsoid(&[2.0, 1.0]).unwrap();
        assert_eq!(e.support_function(&dir(&[1.0, 0.0])).unwrap(), 2.0);
        assert_relative_eq!(
            e.support_function(&dir(&[1.0, 1.0])).unwrap(),
            2.5f64.sqrt(),
            max_relative = 1e-15
        );
        assert!(matches!(
            e.support_function(&dir(&[1.0, 0.0, 0.0])),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 3
            })
        ));
    }

    #[test]
    fn boundary_point_examples() {
        let ball = Body::ball(1.0, 4).unwrap();
        let p = ball.boundary_point(&dir(&[0.0, 0.0, 0.0, 1.0])).unwrap();
        assert_eq!(p.x.as_slice(), &[0.0, 0.0, 0.0, 1.0]);
        assert_eq!((p.kappa, p.mean_curv, p.support), (1.0, 1.0, 1.0));

        let e = Body::ellipsoid(&[2.0, 1.0]).unwrap();
        let p = e.boundary_point(&dir(&[1.0, 0.0])).unwrap();
        assert_eq!(p.x.as_slice(), &[2.0, 0.0]);
        assert_relative_eq!(p.kappa, 2.0, max_relative = 1e-15);

        let e = Body::ellipsoid(&[2.0, 1.0, 1.0]).unwrap();
        let u = dir(&[1.0, 0.0, 0.0]);
        let p = e.boundary_point(&u).unwrap();
        assert_relative_eq!(p.kappa, 4.0, max_relative = 1e-15);
        assert_relative_eq!(p.mean_curv, 2.0, max_relative = 1e-15);
        let k = e.principal_curvatures(&u).unwrap();
        assert_relative_eq!(k[0], 2.0, max_relative = 1e-12);
        assert_relative_eq!(k[1], 2.0, max_relative = 1e-12);
    }

    #[test]
    fn ellipse_curvature_matches_parametric_formula() {
        // κ(t) = ab / (a² sin²t + b² cos²t)^{3/2} at the point (a cos t, b sin t).
        let (a, b) = (2.0, 1.0);
        let e = Body::ellipsoid(&[a, b]).unwrap();
        for i in 0..20 {
            let t = 0.31 * i as f64;
            let normal = dir(&[b * t.cos(), a * t.sin()]);
            let p = e.boundary_point(&normal).unwrap();
            assert_relative_eq!(p.x[0], a * t.cos(), epsilon = 1e-14);
            assert_relative_eq!(p.x[1], b * t.sin(), epsilon = 1e-14);
            let expected = a * b / (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).powf(1.5);
            assert_relative_eq!(p.kappa, expected, max_relative = 1e-13);
        }
    }

    #[test]
    fn membership_examples() {
        let ball = Body::ball(1.0, 2).unwrap();
        assert!(ball.contains(&[0.0, 0.0], 1.0));
        assert!(!ball.contains(&[0.95, 0.0], 0.9));
        let e = Body::ellipsoid(&[2.0, 1.0]).unwrap();
        assert!(!e.contains(&[2.001, 0.0], 1.0));
        assert!(e.contains(&[2.0, 0.0], 1.0));
        let c = Body::curve(SupportCurve::new(1.0, vec![(3, 0.1, 0.0)])).unwrap();
        assert!(c.contains(&[0.0, 0.0], 1.0));
        let far = c.point_at_angle(0.4).x;
        assert!(c.contains(&far, 1.0));
        assert!(!c.contains(&[far[0] * 1.001, far[1] * 1.001], 1.0));
        assert!(!c.contains(&far, 0.99));
    }

    #[test]
    fn scaling_examples() {
        let b = Body::ball(1.0, 2).unwrap().scale_body(0.5).unwrap();
        assert_eq!(
            b,
            Body::Ball {
                radius: 0.5,
                dim: 2
            }
        );
        let e = Body::ellipsoid(&[2.0, 1.0])
            .unwrap()
            .scale_body(2.0)
            .unwrap();
        assert_eq!(e, Body::ellipsoid(&[4.0, 2.0]).unwrap());
        assert!(e.scale_body(0.0).is_err());
        assert!(e.scale_body(-1.0).is_err());
    }

    #[test]
    fn radial_exit_point_lies_on_boundary() {
        let bodies = [
            Body::ellipsoid(&[1.5, 1.0, 0.75]).unwrap(),
            Body::ellipsoid(&[2.0, 1.0]).unwrap(),
            Body::curve(SupportCurve::new(1.0, vec![(3, 0.1, 0.0)])).unwrap(),
        ];
        for body in &bodies {
            let n = body.dim();
            for i in 0..25 {
                let w: Vec<f64> = (0..n)
                    .map(|k| ((i * 7 + k * 3) as f64 * 0.37).sin() + 0.1)
                    .collect();
                let w = dir(&w);
                let (rho, hx) = body.radial(w.coords(), 1.3);
                let x: Vec<f64> = w.coords().iter().map(|c| c * rho).collect();
                assert!(body.contains(&x, 1.3));
                let outside: Vec<f64> = x.iter().map(|c| c * 1.0001).collect();
                assert!(!body.contains(&outside, 1.3));
                // ⟨x, N⟩ equals the support value at the normal through x.
                assert!(hx > 0.0 && hx <= rho * (1.0 + 1e-12));
            }
        }
    }
}
