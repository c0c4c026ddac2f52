//! Convex hulls in ℝⁿ (2 ≤ n ≤ 5) and measures of the resulting simplicial
//! polytopes.

mod build;

pub use build::{convex_hull, convex_hull_seeded};

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::Direction;
use crate::special::ln_factorial;
use crate::vector::{det_in_place, dot, sub, Coords};
use crate::SCHEMA_VERSION;

/// An `(n−1)`-simplex on the boundary of a polytope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    /// Indices into [`Polytope::vertices`].
    pub vertex_ids: Vec<usize>,
    /// Outward unit normal.
    pub normal: Direction,
    /// `⟨normal, v⟩` for every vertex `v` of the facet.
    pub offset: f64,
    /// `(n−1)`-dimensional volume.
    pub measure: f64,
}

/// A full-dimensional simplicial polytope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polytope {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub dim: usize,
    pub vertices: Vec<Coords>,
    pub facets: Vec<Facet>,
    /// Centroid of the vertices.
    pub interior_point: Coords,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

/// `(n−1)`-volume of the simplex spanned by `vertices` (n points in ℝⁿ, or in
/// general k+1 points spanning a k-simplex): `sqrt(det GᵀG) / k!` with `G`
/// the edge vectors from the first vertex. Degenerate simplices give 0.
pub fn facet_measure<V: AsRef<[f64]>>(vertices: &[V]) -> f64 {
    if vertices.len() < 2 {
        return 0.0;
    }
    let base = vertices[0].as_ref();
    let edges: Vec<Coords> = vertices[1..]
        .iter()
        .map(|v| sub(v.as_ref(), base))
        .collect();
    let k = edges.len();
    let mut gram = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            gram[i * k + j] = dot(&edges[i], &edges[j]);
        }
    }
    let det = det_in_place(&mut gram, k);
    if det <= 0.0 {
        return 0.0;
    }
    (0.5 * det.ln() - ln_factorial(k)).exp()
}

impl Polytope {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Largest absolute vertex coordinate, the length scale for tolerances.
    pub fn coordinate_scale(&self) -> f64 {
        self.vertices
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0f64, |m, c| m.max(c.abs()))
            .max(f64::MIN_POSITIVE)
    }

    /// `H^{n−1}(∂P)`, the sum of facet measures.
    pub fn surface_area(&self) -> f64 {
        self.facets.iter().map(|f| f.measure).sum()
    }

    /// Volume by a fan of simplices from the interior point.
    pub fn volume(&self) -> f64 {
        let n = self.dim as f64;
        self.facets
            .iter()
            .map(|f| f.measure * (f.offset - dot(f.normal.coords(), &self.interior_point)) / n)
            .sum()
    }

    /// `x ∈ P` up to a relative tolerance of 1e-12 of the coordinate scale.
    pub fn contains(&self, x: &[f64]) -> bool {
        let tol = 1e-12 * self.coordinate_scale();
        self.facets
            .iter()
            .all(|f| dot(f.normal.coords(), x) <= f.offset + tol)
    }

    /// Whether the origin is an interior point.
    pub fn contains_origin_strictly(&self) -> bool {
        self.facets.iter().all(|f| f.offset > 0.0)
    }

    /// Uniform draw from facet `facet_id` via symmetric Dirichlet
    /// barycentric weights.
    pub fn sample_on_facet<R: Rng + ?Sized>(&self, facet_id: usize, rng: &mut R) -> Coords {
        let f = &self.facets[facet_id];
        let weights: Coords = f
            .vertex_ids
            .iter()
            .map(|_| rng.sample::<f64, _>(Exp1))
            .collect();
        let total: f64 = weights.iter().sum();
        let mut out = Coords::from_elem(0.0, self.dim);
        for (w, &vid) in weights.iter().zip(&f.vertex_ids) {
            for (o, c) in out.iter_mut().zip(&self.vertices[vid]) {
                *o += w / total * c;
            }
        }
        out
    }

    /// Uniform draw from the whole polytope: a fan simplex chosen with
    /// probability proportional to its volume, then Dirichlet weights over
    /// its `n+1` corners. `cumulative` comes from [`Polytope::fan_cumulative`].
    pub fn sample_interior<R: Rng + ?Sized>(&self, cumulative: &[f64], rng: &mut R) -> Coords {
        let total = *cumulative.last().expect("non-empty fan");
        let t = rng.random::<f64>() * total;
        let idx = cumulative
            .partition_point(|&c| c <= t)
            .min(cumulative.len() - 1);
        let f = &self.facets[idx];
        let mut weights: Coords = (0..=self.dim).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let s: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= s);
        let mut out: Coords = self.interior_point.iter().map(|c| c * weights[0]).collect();
        for (w, &vid) in weights[1..].iter().zip(&f.vertex_ids) {
            for (o, c) in out.iter_mut().zip(&self.vertices[vid]) {
                *o += w * c;
            }
        }
        out
    }

    /// Running sum of fan-simplex volumes in facet order.
    pub fn fan_cumulative(&self) -> Vec<f64> {
        let n = self.dim as f64;
        let mut acc = 0.0;
        self.facets
            .iter()
            .map(|f| {
                acc += f.measure * (f.offset - dot(f.normal.coords(), &self.interior_point)) / n;
                acc
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("polytope serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// `P`'s surface area.
pub fn polytope_surface_area(p: &Polytope) -> f64 {
    p.surface_area()
}

pub fn polytope_volume(p: &Polytope) -> f64 {
    p.volume()
}

pub fn polytope_contains(p: &Polytope, x: &[f64]) -> bool {
    p.contains(x)
}
