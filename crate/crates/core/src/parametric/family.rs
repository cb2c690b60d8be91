use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::l2geom::L2Space;
use crate::model::{ContinuousModel, ScalarField};

/// Eigenvalues of the Fisher information below this count as singular.
pub const EIGEN_FLOOR: f64 = 1e-10;

/// Tolerance for the zero-mean and orthonormality checks on scores.
pub const SCORE_TOLERANCE: f64 = 1e-6;

/// The parametric families the library knows how to fit and transform.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ParametricFamily {
    /// `N(θ, σ²)` with `σ` known.
    NormalLocation { sigma: f64 },
    /// `N(μ, σ²)` with `θ = (μ, σ)`.
    Normal,
    /// Exponential with rate `θ = λ`.
    Exponential,
}

impl ParametricFamily {
    pub fn normal_location(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "normal-location needs σ > 0, got {sigma}"
            )));
        }
        Ok(Self::NormalLocation { sigma })
    }

    /// Catalog lookup: `normal-location [σ]`, `normal`, `exponential`.
    pub fn from_name(name: &str, params: &[f64]) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "normal-location" | "normal_location" | "location" => match params {
                [] => Self::normal_location(1.0),
                [s] => Self::normal_location(*s),
                _ => Err(Error::Config(
                    "normal-location takes at most one parameter (σ)".into(),
                )),
            },
            "normal" | "gaussian" if params.is_empty() => Ok(Self::Normal),
            "exponential" | "exp" if params.is_empty() => Ok(Self::Exponential),
            "normal" | "gaussian" | "exponential" | "exp" => Err(Error::Config(format!(
                "family `{name}` takes no parameters"
            ))),
            _ => Err(Error::Config(format!("unknown parametric family `{name}`"))),
        }
    }

    /// `κ`, the number of estimated parameters.
    pub fn dim(&self) -> usize {
        match self {
            Self::NormalLocation { .. } | Self::Exponential => 1,
            Self::Normal => 2,
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Exponential => (0.0, f64::INFINITY),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.dim() {
            return Err(Error::InvalidArgument(format!(
                "{self} has {} parameters, got {}",
                self.dim(),
                theta.len()
            )));
        }
        let ok = match self {
            Self::NormalLocation { .. } => theta[0].is_finite(),
            Self::Normal => theta[0].is_finite() && theta[1] > 0.0 && theta[1].is_finite(),
            Self::Exponential => theta[0] > 0.0 && theta[0].is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "θ = {theta:?} is outside the parameter space of {self}"
            )))
        }
    }

    /// `F_θ`.
    pub fn model_at(&self, theta: &[f64]) -> Result<ContinuousModel> {
        self.check_theta(theta)?;
        match self {
            Self::NormalLocation { sigma } => ContinuousModel::normal(theta[0], *sigma),
            Self::Normal => ContinuousModel::normal(theta[0], theta[1]),
            Self::Exponential => ContinuousModel::exponential(theta[0]),
        }
    }

    pub fn density_at(&self, theta: &[f64], x: f64) -> Result<f64> {
        Ok(self.model_at(theta)?.density(x))
    }

    pub fn cdf_at(&self, theta: &[f64], x: f64) -> Result<f64> {
        Ok(self.model_at(theta)?.cdf(x))
    }

    /// `log f_θ(x)`; `-∞` off the support.
    pub fn log_density(&self, theta: &[f64], x: f64) -> f64 {
        const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
        match self {
            Self::NormalLocation { sigma } => {
                let z = (x - theta[0]) / sigma;
                -0.5 * z * z - sigma.ln() - LN_SQRT_2PI
            }
            Self::Normal => {
                let z = (x - theta[0]) / theta[1];
                -0.5 * z * z - theta[1].ln() - LN_SQRT_2PI
            }
            Self::Exponential => {
                if x < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    theta[0].ln() - theta[0] * x
                }
            }
        }
    }

    /// `∂ log f_θ(x) / ∂θ`.
    pub fn score_at(&self, theta: &[f64], x: f64) -> Vec<f64> {
        match self {
            Self::NormalLocation { sigma } => vec![(x - theta[0]) / (sigma * sigma)],
            Self::Normal => {
                let (mu, s) = (theta[0], theta[1]);
                let d = x - mu;
                vec![d / (s * s), (d * d - s * s) / (s * s * s)]
            }
            Self::Exponential => vec![1.0 / theta[0] - x],
        }
    }

    /// The score coordinates as fields.
    pub fn score_fields(&self, theta: &[f64]) -> Result<Vec<ScalarField>> {
        self.check_theta(theta)?;
        Ok((0..self.dim())
            .map(|i| {
                let fam = *self;
                let th = theta.to_vec();
                ScalarField::new(format!("score{i}[{self}]"), move |x| {
                    fam.score_at(&th, x)[i]
                })
            })
            .collect())
    }
}

impl fmt::Display for ParametricFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NormalLocation { sigma } => write!(f, "normal-location(sigma={sigma})"),
            Self::Normal => f.write_str("normal"),
            Self::Exponential => f.write_str("exponential"),
        }
    }
}

/// `Γ_θ = ∫ s sᵀ dF_θ` computed in `space`, which must integrate against `F_θ`.
pub(crate) fn fisher_in(space: &L2Space, scores: &[ScalarField]) -> Result<DMatrix<f64>> {
    for (i, s) in scores.iter().enumerate() {
        let mean = space.integrate(s);
        if mean.abs() > SCORE_TOLERANCE {
            return Err(Error::Quadrature(format!(
                "score coordinate {i} has mean {mean:e} instead of 0"
            )));
        }
    }
    let gram = space.gram(scores);
    let k = scores.len();
    let gamma = DMatrix::from_fn(k, k, |i, j| 0.5 * (gram[i][j] + gram[j][i]));
    if k > 0 {
        let smallest = gamma.symmetric_eigenvalues().min();
        if !(smallest > EIGEN_FLOOR) {
            return Err(Error::Singular(format!(
                "Fisher information has smallest eigenvalue {smallest:e}"
            )));
        }
    }
    Ok(gamma)
}

/// The Fisher information matrix of `family` at `theta`, by quadrature.
pub fn fisher_information(family: &ParametricFamily, theta: &[f64]) -> Result<DMatrix<f64>> {
    let space = L2Space::continuous(&family.model_at(theta)?);
    fisher_in(&space, &family.score_fields(theta)?)
}

/// `Γ^{-1/2}` via the symmetric eigendecomposition.
pub fn inverse_sqrt(gamma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(gamma.clone());
    if let Some(bad) = eig.eigenvalues.iter().find(|l| !(**l > EIGEN_FLOOR)) {
        return Err(Error::Singular(format!(
            "eigenvalue {bad:e} is below the floor {EIGEN_FLOOR:e}"
        )));
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

/// `q_0 ≡ 1` and the coordinates of `β = Γ^{-1/2} ḟ/f`.
#[derive(Clone, Debug)]
pub struct ScoreBasis {
    q: Vec<ScalarField>,
    gamma: DMatrix<f64>,
}

impl ScoreBasis {
    /// Orthonormalizes raw scores in `space` (which integrates against `F_θ`).
    pub(crate) fn from_scores(space: &L2Space, scores: &[ScalarField]) -> Result<Self> {
        let gamma = fisher_in(space, scores)?;
        let mut q = vec![ScalarField::one()];
        if !scores.is_empty() {
            let root = inverse_sqrt(&gamma)?;
            for i in 0..scores.len() {
                let coeffs: Vec<f64> = root.row(i).iter().copied().collect();
                let parts = scores.to_vec();
                q.push(ScalarField::new(format!("beta{i}"), move |x| {
                    parts.iter().zip(&coeffs).map(|(s, c)| c * s.eval(x)).sum()
                }));
            }
        }
        let defect = space.orthonormality_defect(&q);
        if defect > SCORE_TOLERANCE {
            return Err(Error::NotOrthonormal(format!(
                "normalized scores deviate from orthonormal by {defect:e}"
            )));
        }
        Ok(Self { q, gamma })
    }

    pub fn q0(&self) -> &ScalarField {
        &self.q[0]
    }

    /// `q_1, …, q_κ`.
    pub fn scores(&self) -> &[ScalarField] {
        &self.q[1..]
    }

    /// `q_0, q_1, …, q_κ`.
    pub fn all(&self) -> &[ScalarField] {
        &self.q
    }

    pub fn fisher(&self) -> &DMatrix<f64> {
        &self.gamma
    }
}

pub fn normalized_score(family: &ParametricFamily, theta: &[f64]) -> Result<ScoreBasis> {
    let space = L2Space::continuous(&family.model_at(theta)?);
    ScoreBasis::from_scores(&space, &family.score_fields(theta)?)
}
