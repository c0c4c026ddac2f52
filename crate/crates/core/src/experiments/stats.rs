//! Line fits for log-log convergence data.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Half-width of the 95% confidence interval for the slope.
    pub half_width: f64,
}

impl SlopeFit {
    pub fn contains(&self, slope: f64) -> bool {
        (self.slope - slope).abs() <= self.half_width
    }
}

/// Ordinary least squares with a Student-t interval; needs three points.
pub fn ols(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    let m = xs.len();
    if m != ys.len() || m < 3 {
        return Err(Error::Contract(format!(
            "least squares needs >= 3 paired points, got {m}"
        )));
    }
    let mx = xs.iter().sum::<f64>() / m as f64;
    let my = ys.iter().sum::<f64>() / m as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Contract(
            "least squares needs distinct abscissae".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let dof = (m - 2) as f64;
    let se = (rss / dof / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof)
        .expect("positive dof")
        .inverse_cdf(0.975);
    Ok(SlopeFit {
        slope,
        intercept,
        half_width: t * se,
    })
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Theil–Sen estimator: the median of all pairwise slopes.
pub fn theil_sen(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let mut slopes = Vec::new();
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            if xs[j] != xs[i] {
                slopes.push((ys[j] - ys[i]) / (xs[j] - xs[i]));
            }
        }
    }
    if slopes.is_empty() {
        return Err(Error::Contract(
            "Theil-Sen needs two distinct abscissae".into(),
        ));
    }
    Ok(median(&mut slopes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x).collect();
        let fit = ols(&xs, &ys).unwrap();
        assert_relative_eq!(fit.slope, -2.0, max_relative = 1e-14);
        assert_relative_eq!(fit.intercept, 3.0, max_relative = 1e-14);
        assert!(fit.half_width < 1e-12);
        assert_relative_eq!(theil_sen(&xs, &ys).unwrap(), -2.0, max_relative = 1e-14);
    }

    #[test]
    fn interval_matches_textbook_example() {
        // y = (1, 3, 2, 5, 4): slope 0.8, residual SS 3.6, se = sqrt(1.2/10),
        // t(0.975, 3) = 3.182446.
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        let ys = [1.0, 3.0, 2.0, 5.0, 4.0];
        let fit = ols(&xs, &ys).unwrap();
        assert_relative_eq!(fit.slope, 0.8, max_relative = 1e-12);
        assert_relative_eq!(
            fit.half_width,
            3.182446 * (0.12f64).sqrt(),
            max_relative = 1e-5
        );
    }

    #[test]
    fn theil_sen_ignores_one_outlier() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let mut ys: Vec<f64> = xs.iter().map(|x| 0.5 * x).collect();
        ys[5] = 100.0;
        let ts = theil_sen(&xs, &ys).unwrap();
        assert!((ts - 0.5).abs() < 0.1, "{ts}");
        assert!(ols(&xs, &ys).unwrap().slope > 5.0);
    }

    #[test]
    fn too_few_points() {
        assert!(ols(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(theil_sen(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }
}
