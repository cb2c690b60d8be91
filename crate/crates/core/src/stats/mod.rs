//! Test statistics computed from transformed paths, and the distribution
//! functions of their universal limits.

mod limits;

pub use limits::{cvm_cdf_eigen_inversion, LimitLaw};

use crate::error::{Error, Result};
use crate::transforms::ProcessPath;

/// `sup |path|`, taking both one-sided limits at every grid point.
pub fn ks_statistic(path: &ProcessPath) -> f64 {
    path.values_left()
        .iter()
        .chain(path.values_right())
        .fold(0.0, |m, v| m.max(v.abs()))
}

/// `∫ path(t)² dt` as a left-endpoint Darboux sum in the path's own time.
pub fn cvm_statistic(path: &ProcessPath) -> f64 {
    let t = path.time();
    let v = path.values_right();
    (0..t.len().saturating_sub(1))
        .map(|k| v[k] * v[k] * (t[k + 1] - t[k]))
        .sum()
}

/// `sup |path| / normalizer`.
pub fn motion_sup_statistic(path: &ProcessPath, normalizer: f64) -> Result<f64> {
    if !(normalizer > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "normalizer must be positive, got {normalizer}"
        )));
    }
    Ok(ks_statistic(path) / normalizer)
}

/// `1 − F(statistic)` under the limit law.
pub fn p_value(law: LimitLaw, statistic: f64) -> f64 {
    (1.0 - law.cdf(statistic)).clamp(0.0, 1.0)
}

/// `sup_x |F_n(x) − F(x)|` for the empirical distribution of `sorted`
/// (ascending) against a continuous distribution function.
pub fn ecdf_distance(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let c = cdf(*x);
            (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
        })
        .fold(0.0, f64::max)
}

/// `sup_x |F_n(x) − G_m(x)|` between two empirical distributions.
pub fn two_sample_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut worst: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        worst = worst.max((i as f64 / n - j as f64 / m).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(values: Vec<f64>) -> ProcessPath {
        let grid: Vec<f64> = (0..values.len())
            .map(|k| k as f64 / (values.len() - 1) as f64)
            .collect();
        ProcessPath::new(grid.clone(), grid, values.clone(), values).unwrap()
    }

    #[test]
    fn statistic_examples() {
        assert_eq!(ks_statistic(&path(vec![0.0; 4])), 0.0);
        assert_eq!(ks_statistic(&path(vec![0.1, -0.4, 0.2])), 0.4);
        assert_eq!(cvm_statistic(&path(vec![0.0; 4])), 0.0);
        assert!((cvm_statistic(&path(vec![0.7; 11])) - 0.49).abs() < 1e-15);
        let p = path(vec![0.0, 0.9, -0.3]);
        assert!((motion_sup_statistic(&p, 0.81f64.sqrt()).unwrap() - 1.0).abs() < 1e-15);
        assert!(motion_sup_statistic(&p, 0.0).is_err());
    }

    #[test]
    fn ecdf_distances() {
        let xs = [0.25, 0.75];
        assert!((ecdf_distance(&xs, |x| x) - 0.25).abs() < 1e-15);
        assert_eq!(two_sample_distance(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(two_sample_distance(&[1.0, 2.0], &[3.0, 4.0]), 1.0);
        assert!((two_sample_distance(&[1.0, 3.0], &[2.0, 4.0]) - 0.5).abs() < 1e-15);
    }
}
