use nalgebra::{DMatrix, DVector};

use super::simple::NEAR_DEGENERATE;
use crate::error::{Error, Result};
use crate::l2geom::LikelihoodShift;
use crate::model::DiscreteModel;

/// Jumps of a transformed process on a finite support.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteProcess {
    atoms: Vec<f64>,
    jumps: Vec<f64>,
}

impl DiscreteProcess {
    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    /// Running sums of the jumps, atom by atom.
    pub fn cumulative(&self) -> Vec<f64> {
        self.jumps
            .iter()
            .scan(0.0, |acc, j| {
                *acc += j;
                Some(*acc)
            })
            .collect()
    }

    pub fn total(&self) -> f64 {
        self.jumps.iter().sum()
    }
}

/// The finite-dimensional version of the bridge-to-bridge rotation:
/// jump at `x` is
/// `l(x) Δv(x) − [Σ_y l(y) Δv(y)] (π(x) − l(x) p(x)) / (1 − Σ_y l(y) p(y))`.
#[derive(Clone, Debug)]
pub struct DiscreteTransform {
    f: DiscreteModel,
    g: DiscreteModel,
    matrix: DMatrix<f64>,
}

impl DiscreteTransform {
    pub fn new(f: &DiscreteModel, g: &DiscreteModel) -> Result<Self> {
        let shift = LikelihoodShift::discrete(f, g)?;
        let h = shift.hellinger_sq()?;
        if h < NEAR_DEGENERATE {
            return Err(Error::Degenerate("the two discrete laws coincide".into()));
        }
        let p = f.probs();
        let pi = g.probs();
        let l: Vec<f64> = f.atoms().iter().map(|x| shift.l().eval(*x)).collect();
        // 1 − Σ l p and π − l p in forms free of cancellation when π ≈ p.
        let denom = half_hellinger(p, pi);
        let gap: Vec<f64> = p
            .iter()
            .zip(pi)
            .map(|(p, q)| q.sqrt() * (q.sqrt() - p.sqrt()))
            .collect();
        let k = p.len();
        let matrix = DMatrix::from_fn(k, k, |i, j| {
            let diag = if i == j { l[i] } else { 0.0 };
            diag - gap[i] * l[j] / denom
        });
        Ok(Self {
            f: f.clone(),
            g: g.clone(),
            matrix,
        })
    }

    /// The matrix taking input jumps to output jumps.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `1/(1 − Σ l p)`.
    pub fn drift_factor(&self) -> f64 {
        1.0 / half_hellinger(self.f.probs(), self.g.probs())
    }

    pub fn apply(&self, jumps: &[f64]) -> Result<Vec<f64>> {
        if jumps.len() != self.matrix.ncols() {
            return Err(Error::InvalidArgument(format!(
                "expected {} jumps, got {}",
                self.matrix.ncols(),
                jumps.len()
            )));
        }
        let out = &self.matrix * DVector::from_column_slice(jumps);
        Ok(out.iter().copied().collect())
    }

    /// `M Σ Mᵀ` for an input covariance `Σ`.
    pub fn pushforward(&self, cov: &DMatrix<f64>) -> DMatrix<f64> {
        &self.matrix * cov * self.matrix.transpose()
    }

    pub fn transform_counts(&self, counts: &[u64]) -> Result<DiscreteProcess> {
        if counts.len() != self.f.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} counts, got {}",
                self.f.len(),
                counts.len()
            )));
        }
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return Err(Error::InvalidArgument("counts sum to zero".into()));
        }
        let nf = n as f64;
        let jumps: Vec<f64> = counts
            .iter()
            .zip(self.f.probs())
            .map(|(c, p)| nf.sqrt() * (*c as f64 / nf - p))
            .collect();
        Ok(DiscreteProcess {
            atoms: self.f.atoms().to_vec(),
            jumps: self.apply(&jumps)?,
        })
    }
}

/// `1 − Σ √(p π) = ½ Σ (√p − √π)²`.
fn half_hellinger(p: &[f64], pi: &[f64]) -> f64 {
    0.5 * p
        .iter()
        .zip(pi)
        .map(|(p, q)| (p.sqrt() - q.sqrt()).powi(2))
        .sum::<f64>()
}

/// `diag(p) − p pᵀ`, the covariance of the multinomial limit.
pub fn bridge_covariance(model: &DiscreteModel) -> DMatrix<f64> {
    let p = DVector::from_column_slice(model.probs());
    DMatrix::from_diagonal(&p) - &p * p.transpose()
}

/// Transforms the jumps `√n (counts/n − p)` of the empirical process.
pub fn transform_discrete(
    counts: &[u64],
    f: &DiscreteModel,
    g: &DiscreteModel,
) -> Result<DiscreteProcess> {
    DiscreteTransform::new(f, g)?.transform_counts(counts)
}
