use nalgebra::{DMatrix, DVector};

use super::family::ParametricFamily;
use crate::error::{Error, Result};
use crate::model::Sample;

pub const MAX_NEWTON_ITERATIONS: usize = 50;
/// Convergence threshold on the gradient of the mean log-likelihood.
pub const GRADIENT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateReport {
    pub theta_hat: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Total log-likelihood at `theta_hat`.
    pub loglik: f64,
    /// Euclidean norm of the mean score at `theta_hat`.
    pub gradient_norm: f64,
}

fn mean_loglik(family: &ParametricFamily, theta: &[f64], xs: &[f64]) -> f64 {
    if family.check_theta(theta).is_err() {
        return f64::NEG_INFINITY;
    }
    xs.iter()
        .map(|x| family.log_density(theta, *x))
        .sum::<f64>()
        / xs.len() as f64
}

fn mean_score(family: &ParametricFamily, theta: &[f64], xs: &[f64]) -> DVector<f64> {
    let mut g = DVector::zeros(family.dim());
    for x in xs {
        for (gi, si) in g.iter_mut().zip(family.score_at(theta, *x)) {
            *gi += si;
        }
    }
    g / xs.len() as f64
}

fn check_sample(family: &ParametricFamily, sample: &Sample) -> Result<()> {
    let k = family.dim();
    if sample.n() < k + 1 {
        return Err(Error::Estimation(format!(
            "{family} needs at least {} observations, got {}",
            k + 1,
            sample.n()
        )));
    }
    let (lo, _) = family.support();
    if let Some(x) = sample.sorted().iter().find(|x| **x < lo) {
        return Err(Error::Estimation(format!(
            "observation {x} lies outside the support of {family}"
        )));
    }
    Ok(())
}

fn report(
    family: &ParametricFamily,
    theta: Vec<f64>,
    xs: &[f64],
    iterations: usize,
) -> EstimateReport {
    let gradient_norm = mean_score(family, &theta, xs).norm();
    EstimateReport {
        loglik: mean_loglik(family, &theta, xs) * xs.len() as f64,
        converged: gradient_norm < GRADIENT_TOLERANCE,
        gradient_norm,
        iterations,
        theta_hat: theta,
    }
}

/// Maximum-likelihood estimate, in closed form for the built-in families.
pub fn fit_mle(family: &ParametricFamily, sample: &Sample) -> Result<EstimateReport> {
    check_sample(family, sample)?;
    let xs = sample.sorted();
    let mean = sample.mean();
    let theta = match family {
        ParametricFamily::NormalLocation { .. } => vec![mean],
        ParametricFamily::Normal => {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
            if !(var > 0.0) {
                return Err(Error::Estimation(
                    "sample variance is zero; σ̂ lies on the boundary".into(),
                ));
            }
            vec![mean, var.sqrt()]
        }
        ParametricFamily::Exponential => {
            if !(mean > 0.0) {
                return Err(Error::Estimation(
                    "sample mean is zero; λ̂ is unbounded".into(),
                ));
            }
            vec![1.0 / mean]
        }
    };
    Ok(report(family, theta, xs, 0))
}

/// Newton's method on the log-likelihood with the analytic score and a
/// central-difference Hessian, halving the step until the likelihood does
/// not decrease. Non-convergence is reported in the result, not as an error.
pub fn fit_mle_newton(
    family: &ParametricFamily,
    sample: &Sample,
    start: &[f64],
) -> Result<EstimateReport> {
    check_sample(family, sample)?;
    family.check_theta(start)?;
    let xs = sample.sorted();
    let k = family.dim();
    let mut theta = DVector::from_column_slice(start);
    let mut value = mean_loglik(family, theta.as_slice(), xs);
    let mut iterations = 0;
    while iterations < MAX_NEWTON_ITERATIONS {
        let grad = mean_score(family, theta.as_slice(), xs);
        if grad.norm() < GRADIENT_TOLERANCE {
            break;
        }
        iterations += 1;
        let mut hess = DMatrix::zeros(k, k);
        for j in 0..k {
            let h = 1e-5 * theta[j].abs().max(1.0);
            let mut up = theta.clone();
            let mut down = theta.clone();
            up[j] += h;
            down[j] -= h;
            let col = (mean_score(family, up.as_slice(), xs)
                - mean_score(family, down.as_slice(), xs))
                / (2.0 * h);
            hess.set_column(j, &col);
        }
        let hess = (&hess + hess.transpose()) * 0.5;
        // Newton direction when −H is positive definite, otherwise ascent.
        let step = match (-&hess).cholesky() {
            Some(ch) => ch.solve(&grad),
            None => grad.clone(),
        };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial = &theta + &step * t;
            let v = mean_loglik(family, trial.as_slice(), xs);
            if v.is_finite() && v >= value - 1e-15 * value.abs().max(1.0) {
                theta = trial;
                value = v;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let theta: Vec<f64> = theta.iter().copied().collect();
    family.check_theta(&theta).map_err(|_| {
        Error::Estimation(format!(
            "Newton iteration left the parameter space at {theta:?}"
        ))
    })?;
    Ok(report(family, theta, xs, iterations))
}
