use std::sync::Arc;

use crate::model::{ContinuousModel, DiscreteModel, QuadratureScheme, ScalarField};

/// The Hilbert space `L2(F)` of a hypothesized distribution.
///
/// Continuous models carry the quadrature used for every inner product, so
/// that all geometric quantities built on one space are mutually consistent.
#[derive(Clone, Debug)]
pub enum L2Space {
    Continuous(Arc<QuadratureScheme>),
    Discrete(DiscreteModel),
}

impl L2Space {
    pub fn continuous(model: &ContinuousModel) -> Self {
        L2Space::Continuous(Arc::new(QuadratureScheme::new(model)))
    }

    pub fn from_scheme(scheme: QuadratureScheme) -> Self {
        L2Space::Continuous(Arc::new(scheme))
    }

    pub fn discrete(model: &DiscreteModel) -> Self {
        L2Space::Discrete(model.clone())
    }

    pub fn scheme(&self) -> Option<&Arc<QuadratureScheme>> {
        match self {
            L2Space::Continuous(s) => Some(s),
            L2Space::Discrete(_) => None,
        }
    }

    /// Points at which functions are sampled for integration.
    pub fn points(&self) -> &[f64] {
        match self {
            L2Space::Continuous(s) => s.nodes(),
            L2Space::Discrete(d) => d.atoms(),
        }
    }

    /// Integration weights matching [`L2Space::points`].
    pub fn weights(&self) -> &[f64] {
        match self {
            L2Space::Continuous(s) => s.weights(),
            L2Space::Discrete(d) => d.probs(),
        }
    }

    /// `∫ φ dF`.
    pub fn integrate(&self, phi: &ScalarField) -> f64 {
        self.points()
            .iter()
            .zip(self.weights())
            .map(|(x, w)| w * phi.eval(*x))
            .sum()
    }

    /// `⟨φ, ψ⟩_F = ∫ φ ψ dF`.
    pub fn inner(&self, phi: &ScalarField, psi: &ScalarField) -> f64 {
        self.points()
            .iter()
            .zip(self.weights())
            .map(|(x, w)| w * phi.eval(*x) * psi.eval(*x))
            .sum()
    }

    pub fn norm_sq(&self, phi: &ScalarField) -> f64 {
        self.inner(phi, phi)
    }

    pub fn norm(&self, phi: &ScalarField) -> f64 {
        self.norm_sq(phi).sqrt()
    }

    /// Gram matrix `⟨f_i, f_j⟩` of a list of functions, row-major.
    pub fn gram(&self, fields: &[ScalarField]) -> Vec<Vec<f64>> {
        let values: Vec<Vec<f64>> = fields
            .iter()
            .map(|f| self.points().iter().map(|x| f.eval(*x)).collect())
            .collect();
        let w = self.weights();
        let k = fields.len();
        let mut g = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in 0..=i {
                let s: f64 = (0..w.len())
                    .map(|m| w[m] * values[i][m] * values[j][m])
                    .sum();
                g[i][j] = s;
                g[j][i] = s;
            }
        }
        g
    }

    /// Largest deviation of the Gram matrix of `fields` from the identity.
    pub fn orthonormality_defect(&self, fields: &[ScalarField]) -> f64 {
        let g = self.gram(fields);
        let mut worst: f64 = 0.0;
        for (i, row) in g.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        worst
    }
}

/// `⟨φ, ψ⟩_F`.
pub fn inner_product(phi: &ScalarField, psi: &ScalarField, space: &L2Space) -> f64 {
    space.inner(phi, psi)
}
