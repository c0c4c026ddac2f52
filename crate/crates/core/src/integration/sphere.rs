use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::{PI, TAU};

use crate::geometry::Direction;
use crate::rng;
use crate::vector::{norm, Coords};

/// Uniform draw from `S^{n−1}` (normalized isotropic Gaussian).
pub fn sample_unit_sphere<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Direction {
    loop {
        let g: Coords = (0..n)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let r = norm(&g);
        if r > 1e-150 {
            return Direction::from_unit(g.iter().map(|c| c / r).collect());
        }
    }
}

/// Deterministic, roughly uniform probe set on `S^{n−1}`: equally spaced
/// angles for n = 2, a Fibonacci lattice for n = 3 and fixed-seed Gaussian
/// draws beyond. The coordinate axes (both signs) are always included.
pub fn probe_directions(n: usize, count: usize) -> Vec<Direction> {
    if n == 2 {
        return (0..count)
            .map(|i| Direction::from_angle(TAU * i as f64 / count as f64))
            .collect();
    }
    let mut out = Vec::with_capacity(count + 2 * n);
    for k in 0..n {
        for s in [1.0, -1.0] {
            let mut c = Coords::from_elem(0.0, n);
            c[k] = s;
            out.push(Direction::from_unit(c));
        }
    }
    if n == 3 {
        let golden = PI * (3.0 - 5f64.sqrt());
        for i in 0..count {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let (s, c) = (golden * i as f64).sin_cos();
            out.push(Direction::from_unit(smallvec::smallvec![r * c, r * s, z]));
        }
    } else {
        let mut rng = rng::stream(0x0b5e_55ed, &[n as u64, count as u64]);
        out.extend((0..count).map(|_| sample_unit_sphere(&mut rng, n)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_and_sigma(xs: &[f64]) -> (f64, f64) {
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64;
        (m, (v / xs.len() as f64).sqrt())
    }

    #[test]
    fn planar_samples_are_centred() {
        let mut rng = rng::stream(1, &[]);
        let samples: Vec<Direction> = (0..100_000)
            .map(|_| sample_unit_sphere(&mut rng, 2))
            .collect();
        for k in 0..2 {
            let xs: Vec<f64> = samples.iter().map(|u| u.coords()[k]).collect();
            let (m, s) = mean_and_sigma(&xs);
            assert!(m.abs() < 3.0 * s, "coordinate {k}: mean {m} sigma {s}");
        }
        for u in &samples {
            assert!((norm(u.coords()) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn squared_coordinate_has_mean_one_over_n() {
        let mut rng = rng::stream(2, &[]);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| sample_unit_sphere(&mut rng, 3).coords()[0].powi(2))
            .collect();
        let (m, s) = mean_and_sigma(&xs);
        assert!((m - 1.0 / 3.0).abs() < 3.0 * s, "mean {m} sigma {s}");
    }

    #[test]
    fn probes_are_unit_vectors() {
        for n in 2..6 {
            for u in probe_directions(n, 500) {
                assert!((norm(u.coords()) - 1.0).abs() < 1e-12);
                assert_eq!(u.dim(), n);
            }
        }
    }
}
