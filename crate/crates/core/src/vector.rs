//! Small dense vectors and the handful of linear-algebra kernels the hull and
//! the curvature code need.

use smallvec::SmallVec;

/// Coordinates of a point or vector in ℝⁿ. Stored inline up to six
/// dimensions.
pub type Coords = SmallVec<[f64; 6]>;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn sub(a: &[f64], b: &[f64]) -> Coords {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[inline]
pub fn scaled(a: &[f64], s: f64) -> Coords {
    a.iter().map(|x| x * s).collect()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Determinant of a square row-major matrix by Gaussian elimination with
/// partial pivoting. Destroys `m`.
pub fn det_in_place(m: &mut [f64], k: usize) -> f64 {
    debug_assert_eq!(m.len(), k * k);
    let mut det = 1.0;
    for col in 0..k {
        let mut piv = col;
        let mut best = m[col * k + col].abs();
        for row in col + 1..k {
            let v = m[row * k + col].abs();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != col {
            for j in 0..k {
                m.swap(col * k + j, piv * k + j);
            }
            det = -det;
        }
        let p = m[col * k + col];
        det *= p;
        for row in col + 1..k {
            let f = m[row * k + col] / p;
            if f != 0.0 {
                for j in col..k {
                    m[row * k + j] -= f * m[col * k + j];
                }
            }
        }
    }
    det
}

/// Generalized cross product: a vector orthogonal to the `n − 1` rows of
/// `edges` (each of length `n`). Its norm is the `(n−1)`-volume of the
/// parallelotope spanned by the rows.
pub fn orthogonal_complement(edges: &[Coords], n: usize) -> Coords {
    debug_assert_eq!(edges.len(), n - 1);
    match n {
        2 => smallvec::smallvec![edges[0][1], -edges[0][0]],
        3 => {
            let (a, b) = (&edges[0], &edges[1]);
            smallvec::smallvec![
                a[1] * b[2] - a[2] * b[1],
                a[2] * b[0] - a[0] * b[2],
                a[0] * b[1] - a[1] * b[0],
            ]
        }
        _ => {
            let k = n - 1;
            let mut out = Coords::from_elem(0.0, n);
            let mut minor = vec![0.0; k * k];
            for (i, slot) in out.iter_mut().enumerate() {
                for (r, e) in edges.iter().enumerate() {
                    let mut c = 0;
                    for (j, &v) in e.iter().enumerate() {
                        if j != i {
                            minor[r * k + c] = v;
                            c += 1;
                        }
                    }
                }
                let d = det_in_place(&mut minor, k);
                *slot = if i % 2 == 0 { d } else { -d };
            }
            out
        }
    }
}
