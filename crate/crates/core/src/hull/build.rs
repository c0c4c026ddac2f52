//! Randomized incremental (beneath–beyond) construction of simplicial hulls.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use smallvec::SmallVec;

use super::{facet_measure, Facet, Polytope};
use crate::error::{Error, Result};
use crate::geometry::Direction;
use crate::rng;
use crate::vector::{dot, norm, orthogonal_complement, sub, Coords};
use crate::SCHEMA_VERSION;

const NONE: u32 = u32::MAX;
const DEFAULT_SEED: u64 = 0x6875_6c6c;

type Ids = SmallVec<[usize; 6]>;

struct Face {
    verts: Ids,
    normal: Coords,
    offset: f64,
    /// `neighbors[i]` shares the ridge opposite `verts[i]`.
    neighbors: SmallVec<[u32; 6]>,
    outside: Vec<u32>,
    alive: bool,
}

struct Builder<'a> {
    n: usize,
    pts: &'a [f64],
    eps: f64,
    interior: Coords,
    faces: Vec<Face>,
    owner: Vec<u32>,
    visit: Vec<u32>,
    visible: Vec<u32>,
    epoch: u32,
}

/// Hull of `points` in ℝ^`dim` with the default insertion seed.
pub fn convex_hull<P: AsRef<[f64]>>(points: &[P], dim: usize) -> Result<Polytope> {
    convex_hull_seeded(points, dim, DEFAULT_SEED)
}

/// Hull of `points` in ℝ^`dim`; `seed` fixes the random insertion order.
/// The facet set is a function of the point set alone (up to ordering) for
/// points in general position.
pub fn convex_hull_seeded<P: AsRef<[f64]>>(
    points: &[P],
    dim: usize,
    seed: u64,
) -> Result<Polytope> {
    if !(2..=5).contains(&dim) {
        return Err(Error::Contract(format!(
            "hull dimension must be in 2..=5, got {dim}"
        )));
    }
    if points.len() < dim + 1 {
        return Err(Error::Contract(format!(
            "need at least {} points in dimension {dim}, got {}",
            dim + 1,
            points.len()
        )));
    }
    let mut flat = Vec::with_capacity(points.len() * dim);
    for p in points {
        let p = p.as_ref();
        if p.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.len(),
            });
        }
        if p.iter().any(|c| !c.is_finite()) {
            return Err(Error::Contract(
                "hull input contains a non-finite coordinate".into(),
            ));
        }
        flat.extend_from_slice(p);
    }
    let scale = flat
        .iter()
        .fold(0.0f64, |m, c| m.max(c.abs()))
        .max(f64::MIN_POSITIVE);

    match build(&flat, dim, scale, seed).and_then(|b| b.finish(&flat, scale)) {
        Ok(p) => Ok(p),
        Err(e @ Error::DegenerateHull { .. }) => Err(e),
        Err(first) => {
            log::warn!("hull construction failed ({first}); retrying with jitter");
            let mut r = rng::stream(seed, &[0x6a69_7474]);
            let jittered: Vec<f64> = flat
                .iter()
                .map(|c| c + 1e-9 * scale * r.random_range(-1.0..1.0))
                .collect();
            build(&jittered, dim, scale, seed)?.finish(&flat, scale)
        }
    }
}

fn build(pts: &[f64], n: usize, scale: f64, seed: u64) -> Result<Builder<'_>> {
    let count = pts.len() / n;
    let pt = |i: usize| &pts[i * n..(i + 1) * n];
    let eps = 1e-10 * scale;

    let simplex = initial_simplex(pts, n, eps)?;
    let mut interior = Coords::from_elem(0.0, n);
    for &i in &simplex {
        for (c, x) in interior.iter_mut().zip(pt(i)) {
            *c += x / (n + 1) as f64;
        }
    }

    let mut b = Builder {
        n,
        pts,
        eps,
        interior,
        faces: Vec::with_capacity(8 * count),
        owner: vec![NONE; count],
        visit: Vec::new(),
        visible: Vec::new(),
        epoch: 0,
    };

    for j in 0..=n {
        let verts: Ids = simplex
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != j)
            .map(|(_, &v)| v)
            .collect();
        let neighbors = (0..=n).filter(|&k| k != j).map(|k| k as u32).collect();
        b.push_face(verts, neighbors)?;
    }

    let mut order: Vec<u32> = (0..count as u32)
        .filter(|i| !simplex.contains(&(*i as usize)))
        .collect();
    order.shuffle(&mut rng::stream(seed, &[count as u64]));
    let initial: Vec<u32> = (0..=n as u32).collect();
    for &i in &order {
        b.assign(i, &initial);
    }
    for &i in &order {
        let f = b.owner[i as usize];
        if f != NONE {
            b.insert(i as usize, f)?;
        }
    }
    Ok(b)
}

/// Greedy simplex: each new corner is the point farthest from the affine
/// hull of the corners chosen so far.
fn initial_simplex(pts: &[f64], n: usize, eps: f64) -> Result<Ids> {
    let count = pts.len() / n;
    let pt = |i: usize| &pts[i * n..(i + 1) * n];
    let first = (0..count)
        .min_by(|&a, &b| pt(a)[0].total_cmp(&pt(b)[0]).then(a.cmp(&b)))
        .expect("non-empty");
    let mut chosen: Ids = SmallVec::from_elem(first, 1);
    let mut basis: Vec<Coords> = Vec::new();
    for rank in 0..n {
        let mut best = (0.0, usize::MAX, Coords::new());
        for i in 0..count {
            let mut v = sub(pt(i), pt(first));
            for e in &basis {
                let t = dot(&v, e);
                v.iter_mut().zip(e).for_each(|(a, b)| *a -= t * b);
            }
            let d = norm(&v);
            if d > best.0 {
                best = (d, i, v);
            }
        }
        if best.0 <= eps * 10.0 {
            return Err(Error::DegenerateHull { rank, dim: n });
        }
        let (d, i, mut v) = best;
        v.iter_mut().for_each(|a| *a /= d);
        basis.push(v);
        chosen.push(i);
    }
    Ok(chosen)
}

impl<'a> Builder<'a> {
    fn pt(&self, i: usize) -> &'a [f64] {
        &self.pts[i * self.n..(i + 1) * self.n]
    }

    fn dist(&self, f: u32, i: u32) -> f64 {
        let face = &self.faces[f as usize];
        dot(&face.normal, self.pt(i as usize)) - face.offset
    }

    /// Oriented hyperplane through `verts` with `interior` on the inner side.
    fn plane(&self, pts_of: impl Fn(usize) -> &'a [f64], verts: &[usize]) -> Option<(Coords, f64)> {
        let base = pts_of(verts[0]);
        let edges: Vec<Coords> = verts[1..].iter().map(|&v| sub(pts_of(v), base)).collect();
        let mut normal = orthogonal_complement(&edges, self.n);
        let len = norm(&normal);
        if !(len > 0.0) || !len.is_finite() {
            return None;
        }
        normal.iter_mut().for_each(|c| *c /= len);
        let mut offset = dot(&normal, base);
        if dot(&normal, &self.interior) > offset {
            normal.iter_mut().for_each(|c| *c = -*c);
            offset = -offset;
        }
        Some((normal, offset))
    }

    fn push_face(&mut self, verts: Ids, neighbors: SmallVec<[u32; 6]>) -> Result<u32> {
        let pts = self.pts;
        let n = self.n;
        let (normal, offset) = self
            .plane(|i| &pts[i * n..(i + 1) * n], &verts)
            .ok_or_else(|| Error::InconsistentHull("zero-measure facet created".into()))?;
        if offset - dot(&normal, &self.interior) <= 0.0 {
            return Err(Error::InconsistentHull(
                "facet plane passes through the interior point".into(),
            ));
        }
        self.faces.push(Face {
            verts,
            normal,
            offset,
            neighbors,
            outside: Vec::new(),
            alive: true,
        });
        self.visit.push(0);
        Ok((self.faces.len() - 1) as u32)
    }

    /// Attach point `i` to the candidate facet it lies farthest beyond.
    fn assign(&mut self, i: u32, candidates: &[u32]) {
        let mut best = (self.eps, NONE);
        for &f in candidates {
            let d = self.dist(f, i);
            if d > best.0 {
                best = (d, f);
            }
        }
        self.owner[i as usize] = best.1;
        if best.1 != NONE {
            self.faces[best.1 as usize].outside.push(i);
        }
    }

    fn insert(&mut self, p: usize, start: u32) -> Result<()> {
        self.epoch += 1;
        let epoch = self.epoch;
        let seen = 2 * epoch;
        let vis = 2 * epoch + 1;

        // Visible region by flood fill from the conflict facet.
        self.visible.clear();
        self.visit[start as usize] = vis;
        self.visible.push(start);
        let mut k = 0;
        while k < self.visible.len() {
            let f = self.visible[k] as usize;
            k += 1;
            for j in 0..self.n {
                let g = self.faces[f].neighbors[j];
                let mark = self.visit[g as usize];
                if mark == seen || mark == vis {
                    continue;
                }
                if self.dist(g, p as u32) > self.eps {
                    self.visit[g as usize] = vis;
                    self.visible.push(g);
                } else {
                    self.visit[g as usize] = seen;
                }
            }
        }

        // One new facet per horizon ridge.
        let visible = std::mem::take(&mut self.visible);
        let first_new = self.faces.len() as u32;
        let mut ridges: HashMap<Ids, (u32, usize)> = HashMap::new();
        for &f in &visible {
            for j in 0..self.n {
                let g = self.faces[f as usize].neighbors[j];
                if self.visit[g as usize] == vis {
                    continue;
                }
                let mut verts: Ids = SmallVec::with_capacity(self.n);
                verts.push(p);
                verts.extend(
                    self.faces[f as usize]
                        .verts
                        .iter()
                        .enumerate()
                        .filter(|&(q, _)| q != j)
                        .map(|(_, &v)| v),
                );
                let mut nbrs: SmallVec<[u32; 6]> = SmallVec::from_elem(NONE, self.n);
                nbrs[0] = g;
                let nf = self.push_face(verts, nbrs)?;
                let slot = self.faces[g as usize]
                    .neighbors
                    .iter()
                    .position(|&h| h == f)
                    .ok_or_else(|| Error::InconsistentHull("asymmetric facet adjacency".into()))?;
                self.faces[g as usize].neighbors[slot] = nf;

                // Ridges through p are shared by exactly two new facets.
                for q in 1..self.n {
                    let mut key: Ids = self.faces[nf as usize]
                        .verts
                        .iter()
                        .enumerate()
                        .filter(|&(r, _)| r != q)
                        .map(|(_, &v)| v)
                        .collect();
                    key.sort_unstable();
                    match ridges.remove(&key) {
                        Some((other, oq)) => {
                            self.faces[nf as usize].neighbors[q] = other;
                            self.faces[other as usize].neighbors[oq] = nf;
                        }
                        None => {
                            ridges.insert(key, (nf, q));
                        }
                    }
                }
            }
        }
        if !ridges.is_empty() || first_new as usize == self.faces.len() {
            return Err(Error::InconsistentHull(
                "horizon is not a closed ridge cycle".into(),
            ));
        }

        let new_faces: Vec<u32> = (first_new..self.faces.len() as u32).collect();
        self.owner[p] = NONE;
        for &f in &visible {
            let face = &mut self.faces[f as usize];
            face.alive = false;
            let outside = std::mem::take(&mut face.outside);
            for q in outside {
                if q as usize != p {
                    self.assign(q, &new_faces);
                }
            }
        }
        self.visible = visible;
        Ok(())
    }

    /// Checks the facet complex against `original` coordinates and converts
    /// it into a [`Polytope`] indexed by extreme points only.
    fn finish(self, original: &[f64], scale: f64) -> Result<Polytope> {
        let n = self.n;
        let orig = |i: usize| &original[i * n..(i + 1) * n];
        let tol = 1e-9 * scale;

        let alive: Vec<usize> = (0..self.faces.len())
            .filter(|&f| self.faces[f].alive)
            .collect();
        for &f in &alive {
            let face = &self.faces[f];
            for j in 0..n {
                let g = &self.faces[face.neighbors[j] as usize];
                if !g.alive {
                    return Err(Error::InconsistentHull(
                        "facet adjacent to a deleted facet".into(),
                    ));
                }
                let back = g
                    .neighbors
                    .iter()
                    .position(|&h| h as usize == f)
                    .ok_or_else(|| Error::InconsistentHull("asymmetric facet adjacency".into()))?;
                let mut shared_f: Ids = face
                    .verts
                    .iter()
                    .enumerate()
                    .filter(|&(q, _)| q != j)
                    .map(|(_, &v)| v)
                    .collect();
                let mut shared_g: Ids = g
                    .verts
                    .iter()
                    .enumerate()
                    .filter(|&(q, _)| q != back)
                    .map(|(_, &v)| v)
                    .collect();
                shared_f.sort_unstable();
                shared_g.sort_unstable();
                if shared_f != shared_g {
                    return Err(Error::InconsistentHull(
                        "neighbouring facets do not share a ridge".into(),
                    ));
                }
                let apex = orig(g.verts[back]);
                if dot(&face.normal, apex) - face.offset > tol {
                    return Err(Error::InconsistentHull("hull is not locally convex".into()));
                }
            }
        }

        let mut remap = vec![usize::MAX; original.len() / n];
        let mut used: Vec<usize> = alive
            .iter()
            .flat_map(|&f| self.faces[f].verts.iter().copied())
            .collect();
        used.sort_unstable();
        used.dedup();
        let vertices: Vec<Coords> = used.iter().map(|&i| Coords::from_slice(orig(i))).collect();
        for (k, &i) in used.iter().enumerate() {
            remap[i] = k;
        }
        let mut centroid = Coords::from_elem(0.0, n);
        for v in &vertices {
            centroid
                .iter_mut()
                .zip(v)
                .for_each(|(c, x)| *c += x / vertices.len() as f64);
        }

        let mut facets = Vec::with_capacity(alive.len());
        let builder = Builder {
            interior: centroid.clone(),
            ..self
        };
        for &f in &alive {
            let verts = &builder.faces[f].verts;
            let (normal, offset) = builder
                .plane(orig, verts)
                .ok_or_else(|| Error::InconsistentHull("zero-measure facet".into()))?;
            let corners: Vec<&[f64]> = verts.iter().map(|&v| orig(v)).collect();
            facets.push(Facet {
                vertex_ids: verts.iter().map(|&v| remap[v]).collect(),
                normal: Direction::from_unit(normal),
                offset,
                measure: facet_measure(&corners),
            });
        }

        Ok(Polytope {
            schema_version: SCHEMA_VERSION,
            dim: n,
            vertices,
            facets,
            interior_point: centroid,
        })
    }
}
