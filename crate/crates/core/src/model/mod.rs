//! Hypothesized distributions, samples, quadrature, and the raw
//! empirical-process integrals `∫_{y≤x} ψ dv_n`.

mod distributions;
mod field;
mod quadrature;
mod sample;

pub use distributions::{ContinuousModel, DiscreteModel, InverseCdf, ModelKind};
pub use field::ScalarField;
pub use quadrature::{
    gauss_legendre_rule, CumulativeTable, EvalGrid, Locator, QuadratureScheme, DEFAULT_PANELS,
    ORDER,
};
pub use sample::{draw_sample, draw_sample_with, Sample};

use crate::error::{Error, Result};

/// Evaluates `∫_{y≤x} ψ dv_n` for one sample against one model, reusing
/// the quadrature and the cumulative table of `ψ` across points.
#[derive(Clone, Debug)]
pub struct EmpiricalIntegral {
    scheme: QuadratureScheme,
    table: CumulativeTable,
    psi: ScalarField,
    /// `Σ_{i ≤ k} ψ(X_(i))` over the sorted sample.
    partial_sums: Vec<f64>,
    sqrt_n: f64,
}

impl EmpiricalIntegral {
    pub fn new(sample: &Sample, model: &ContinuousModel, psi: &ScalarField) -> Result<Self> {
        Self::with_scheme(sample, QuadratureScheme::new(model), psi)
    }

    pub fn with_scheme(
        sample: &Sample,
        scheme: QuadratureScheme,
        psi: &ScalarField,
    ) -> Result<Self> {
        let table = scheme.table(psi)?;
        let mut acc = 0.0;
        let mut partial_sums = Vec::with_capacity(sample.n() + 1);
        partial_sums.push(0.0);
        for x in sample.sorted() {
            let v = psi.eval(*x);
            if !v.is_finite() {
                return Err(Error::Quadrature(format!(
                    "`{}` is not finite at observation {x}",
                    psi.label()
                )));
            }
            acc += v;
            partial_sums.push(acc);
        }
        Ok(Self {
            scheme,
            table,
            psi: psi.clone(),
            partial_sums,
            sqrt_n: (sample.n() as f64).sqrt(),
        })
    }

    pub fn psi(&self) -> &ScalarField {
        &self.psi
    }

    fn at_count(&self, count: usize, x: f64) -> f64 {
        let n = self.sqrt_n * self.sqrt_n;
        let compensator = self.table.at(&self.scheme.locate(x));
        (self.partial_sums[count] - n * compensator) / self.sqrt_n
    }

    /// Right-continuous value at `x`, for a sample sorted as at construction.
    pub fn value(&self, sample: &Sample, x: f64) -> f64 {
        self.at_count(sample.count_le(x), x)
    }

    /// Value just before `x`.
    pub fn value_left(&self, sample: &Sample, x: f64) -> f64 {
        self.at_count(sample.count_lt(x), x)
    }

    /// `v_n(ψ)`, the integral over the whole support.
    pub fn total(&self) -> f64 {
        let n = self.sqrt_n * self.sqrt_n;
        (self.partial_sums.last().copied().unwrap_or(0.0) - n * self.table.total()) / self.sqrt_n
    }
}

/// `∫_{y≤x} ψ(y) v_n(dy) = n^{-1/2}[Σ_{X_i≤x} ψ(X_i) − n ∫_{y≤x} ψ dF]`.
pub fn empirical_integral(
    sample: &Sample,
    model: &ContinuousModel,
    psi: &ScalarField,
    x: f64,
) -> Result<f64> {
    Ok(EmpiricalIntegral::new(sample, model, psi)?.value(sample, x))
}

/// `v_n(x) = √n [F_n(x) − F(x)]`.
pub fn empirical_process_value(sample: &Sample, model: &ContinuousModel, x: f64) -> f64 {
    let n = sample.n() as f64;
    n.sqrt() * (sample.count_le(x) as f64 / n - model.cdf(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empirical_integral_examples() {
        let u = ContinuousModel::uniform();
        let s = Sample::new(vec![0.5]).unwrap();
        let v = empirical_integral(&s, &u, &ScalarField::one(), 0.25).unwrap();
        assert!((v + 0.25).abs() < 1e-14);
        assert!(
            empirical_integral(&s, &u, &ScalarField::one(), 1.0)
                .unwrap()
                .abs()
                < 1e-13
        );

        let s = Sample::new(vec![0.2, 0.8]).unwrap();
        assert!((empirical_process_value(&s, &u, 0.3) - 0.282_842_712_474_619).abs() < 1e-12);
        assert_eq!(empirical_process_value(&s, &u, 0.0), 0.0);
        assert!(empirical_process_value(&s, &u, 0.5).abs() < 1e-15);
    }

    #[test]
    fn identity_integrand_matches_empirical_process() {
        let m = ContinuousModel::beta(0.8, 1.5).unwrap();
        let s = draw_sample(&m, 40, 3).unwrap();
        let ei = EmpiricalIntegral::new(&s, &m, &ScalarField::one()).unwrap();
        for x in [0.001, 0.1, 0.37, 0.9, 1.0] {
            assert!((ei.value(&s, x) - empirical_process_value(&s, &m, x)).abs() < 1e-11);
        }
    }
}
