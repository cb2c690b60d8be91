//! The linear functionals `ψ ↦ ∫_{y≤x} ψ dv` that every transform consumes.
//!
//! A transform only ever touches the driving process `v` through cumulative
//! integrals of a fixed, finite list of integrands. [`DriverValues`] holds
//! exactly those numbers, whether they come from a sample (the empirical
//! process) or from a simulated Gaussian limit, so both go through the same
//! transform code.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{CumulativeTable, EvalGrid, QuadratureScheme, Sample, ScalarField};

/// The integrands of a transform together with their cumulative `dF` tables.
#[derive(Clone, Debug)]
pub struct IntegrandSet {
    scheme: Arc<QuadratureScheme>,
    fields: Vec<ScalarField>,
    tables: Vec<CumulativeTable>,
}

impl IntegrandSet {
    pub fn new(scheme: Arc<QuadratureScheme>, fields: Vec<ScalarField>) -> Result<Self> {
        let tables = fields
            .iter()
            .map(|f| scheme.table(f))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            scheme,
            fields,
            tables,
        })
    }

    pub fn scheme(&self) -> &Arc<QuadratureScheme> {
        &self.scheme
    }

    pub fn fields(&self) -> &[ScalarField] {
        &self.fields
    }

    pub fn tables(&self) -> &[CumulativeTable] {
        &self.tables
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }
}

/// Left and right limits of a cumulative integral at one grid point.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Jump {
    pub left: f64,
    pub right: f64,
}

impl Jump {
    pub fn continuous(v: f64) -> Self {
        Self { left: v, right: v }
    }
}

/// `∫_{y≤x} ψ_a dv` on a grid, and `∫ ψ_a dv` over the whole support, for
/// each integrand `ψ_a` of a transform.
#[derive(Clone, Debug)]
pub struct DriverValues {
    cumulative: Vec<Vec<Jump>>,
    totals: Vec<f64>,
}

impl DriverValues {
    pub fn from_parts(cumulative: Vec<Vec<Jump>>, totals: Vec<f64>) -> Self {
        assert_eq!(cumulative.len(), totals.len());
        Self { cumulative, totals }
    }

    /// The empirical process `v_n` of `sample` under the scheme's model:
    /// `n^{-1/2} Σ_{X_i ≤ x} ψ(X_i) − √n ∫_{y≤x} ψ dF`.
    pub fn empirical(set: &IntegrandSet, sample: &Sample, grid: &EvalGrid) -> Result<Self> {
        let n = sample.n() as f64;
        let sqrt_n = n.sqrt();
        let xs = sample.sorted();
        let le: Vec<usize> = grid.xs().iter().map(|x| sample.count_le(*x)).collect();
        let lt: Vec<usize> = grid.xs().iter().map(|x| sample.count_lt(*x)).collect();
        let mut cumulative = Vec::with_capacity(set.len());
        let mut totals = Vec::with_capacity(set.len());
        for (field, table) in set.fields.iter().zip(&set.tables) {
            let mut sums = Vec::with_capacity(xs.len() + 1);
            let mut acc = 0.0;
            sums.push(0.0);
            for x in xs {
                let v = field.eval(*x);
                if !v.is_finite() {
                    return Err(Error::Quadrature(format!(
                        "integrand `{}` is not finite at observation {x}",
                        field.label()
                    )));
                }
                acc += v;
                sums.push(acc);
            }
            let compensator = table.on(grid);
            let path = compensator
                .iter()
                .enumerate()
                .map(|(k, c)| Jump {
                    left: (sums[lt[k]] - n * c) / sqrt_n,
                    right: (sums[le[k]] - n * c) / sqrt_n,
                })
                .collect();
            cumulative.push(path);
            totals.push((acc - n * table.total()) / sqrt_n);
        }
        Ok(Self { cumulative, totals })
    }

    pub fn cumulative(&self, a: usize) -> &[Jump] {
        &self.cumulative[a]
    }

    pub fn total(&self, a: usize) -> f64 {
        self.totals[a]
    }

    pub fn len(&self) -> usize {
        self.totals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.totals.is_empty()
    }
}
