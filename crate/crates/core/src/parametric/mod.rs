//! Goodness of fit for parametric families with estimated parameters.
//!
//! Under `F_θ` with `θ` replaced by its maximum-likelihood estimate, the
//! empirical process converges to `F`-Brownian motion projected parallel to
//! `1` and to the normalized score `β = Γ^{-1/2} ḟ/f`. A chain of
//! one-dimensional rotations `K̂` carries `(l, l r_1, …, l r_κ)` onto
//! `(1, β_1, …, β_κ)`, and `x ↦ v̂_n(K̂(l 1_{(-∞,x]}))` then has, whatever
//! `θ`, the law of `G`-Brownian motion projected off `(1, r_1, …, r_κ)`.

mod family;
mod mle;

pub use family::{
    fisher_information, inverse_sqrt, normalized_score, ParametricFamily, ScoreBasis, EIGEN_FLOOR,
    SCORE_TOLERANCE,
};
pub use mle::{fit_mle, fit_mle_newton, EstimateReport, GRADIENT_TOLERANCE, MAX_NEWTON_ITERATIONS};

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::l2geom::{build_chain, L2Space, LikelihoodShift, RotationChain};
use crate::model::{ContinuousModel, CumulativeTable, EvalGrid, Sample, ScalarField};
use crate::transforms::{
    apply_transform, DriverValues, IntegrandSet, PathTransform, ProcessPath, Values,
};

/// Target law `G` and an orthonormal family `r_1, …, r_κ` in `L2(G)`,
/// orthogonal to constants.
#[derive(Clone, Debug)]
pub struct TargetSpec {
    g: ContinuousModel,
    r: Vec<ScalarField>,
}

fn hermite(k: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if k == 0 {
        return prev;
    }
    for j in 1..k {
        let next = x * cur - j as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn legendre(k: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if k == 0 {
        return prev;
    }
    for j in 1..k {
        let j = j as f64;
        let next = ((2.0 * j + 1.0) * x * cur - j * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

fn laguerre(k: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 1.0 - x);
    if k == 0 {
        return prev;
    }
    for j in 1..k {
        let j = j as f64;
        let next = ((2.0 * j + 1.0 - x) * cur - j * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

impl TargetSpec {
    pub fn new(g: ContinuousModel, r: Vec<ScalarField>) -> Result<Self> {
        let space = L2Space::continuous(&g);
        let mut basis = vec![ScalarField::one()];
        basis.extend(r.iter().cloned());
        let defect = space.orthonormality_defect(&basis);
        if defect > SCORE_TOLERANCE {
            return Err(Error::NotOrthonormal(format!(
                "target functions for {g} deviate from orthonormal by {defect:e}"
            )));
        }
        Ok(Self { g, r })
    }

    /// `N(0, 1)` with `He_k/√k!`, `k = 1..=kappa`.
    pub fn hermite(kappa: usize) -> Result<Self> {
        let r = (1..=kappa)
            .map(|k| {
                let norm = (1..=k).map(|j| j as f64).product::<f64>().sqrt();
                ScalarField::new(format!("hermite{k}"), move |x| hermite(k, x) / norm)
            })
            .collect();
        Self::new(ContinuousModel::standard_normal(), r)
    }

    /// Uniform on `[0, 1]` with `√(2k+1) P_k(2x − 1)`.
    pub fn legendre(kappa: usize) -> Result<Self> {
        let r = (1..=kappa)
            .map(|k| {
                let c = ((2 * k + 1) as f64).sqrt();
                ScalarField::new(format!("legendre{k}"), move |x| {
                    c * legendre(k, 2.0 * x - 1.0)
                })
            })
            .collect();
        Self::new(ContinuousModel::uniform(), r)
    }

    /// `Exp(1)` with the Laguerre polynomials `L_k`.
    pub fn laguerre(kappa: usize) -> Result<Self> {
        let r = (1..=kappa)
            .map(|k| ScalarField::new(format!("laguerre{k}"), move |x| laguerre(k, x)))
            .collect();
        Self::new(ContinuousModel::exponential(1.0)?, r)
    }

    /// The built-in target matching the support of `family`.
    pub fn canonical(family: &ParametricFamily) -> Result<Self> {
        match family.support() {
            (lo, hi) if lo == f64::NEG_INFINITY && hi == f64::INFINITY => {
                Self::hermite(family.dim())
            }
            (lo, hi) if lo == 0.0 && hi == f64::INFINITY => Self::laguerre(family.dim()),
            (lo, hi) if lo == 0.0 && hi == 1.0 => Self::legendre(family.dim()),
            (lo, hi) => Err(Error::InvalidArgument(format!(
                "no canonical target for support [{lo}, {hi}]"
            ))),
        }
    }

    /// Catalog lookup: `hermite`, `legendre`, `laguerre`, or `canonical`.
    pub fn from_name(name: &str, family: &ParametricFamily) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "canonical" | "default" => Self::canonical(family),
            "hermite" | "normal" => Self::hermite(family.dim()),
            "legendre" | "uniform" => Self::legendre(family.dim()),
            "laguerre" | "exponential" => Self::laguerre(family.dim()),
            _ => Err(Error::Config(format!("unknown parametric target `{name}`"))),
        }
    }

    pub fn model(&self) -> &ContinuousModel {
        &self.g
    }

    pub fn functions(&self) -> &[ScalarField] {
        &self.r
    }

    pub fn dim(&self) -> usize {
        self.r.len()
    }
}

/// `x ↦ v̂_n(K̂(l 1_{(-∞,x]}))` evaluated through the chain's reflection
/// weights: with `K̂φ = φ − Σ α_s(φ) d_s` and `α_s` a function of the
/// `⟨d_s, φ⟩`, only the cumulative integrals of `l`, the totals of the
/// `d_s`, and the deterministic tables `∫_{y≤x} d_s l dF` are needed.
#[derive(Clone, Debug)]
pub struct ParametricTransform {
    f: ContinuousModel,
    target: TargetSpec,
    theta: Vec<f64>,
    chain: RotationChain,
    set: IntegrandSet,
    d_l: Vec<CumulativeTable>,
}

impl ParametricTransform {
    /// Builds every basis at the plug-in value `theta`.
    pub fn new(family: &ParametricFamily, theta: &[f64], target: &TargetSpec) -> Result<Self> {
        let f = family.model_at(theta)?;
        let mut t = Self::from_scores(&f, &family.score_fields(theta)?, target)?;
        t.theta = theta.to_vec();
        Ok(t)
    }

    /// General form: `scores` are raw (unnormalized) scores of `f`, possibly none.
    pub fn from_scores(
        f: &ContinuousModel,
        scores: &[ScalarField],
        target: &TargetSpec,
    ) -> Result<Self> {
        if scores.len() != target.dim() {
            return Err(Error::InvalidArgument(format!(
                "{} scores but {} target functions",
                scores.len(),
                target.dim()
            )));
        }
        let shift = LikelihoodShift::new(f, target.model())?;
        let space = shift.space().clone();
        let scheme = Arc::clone(space.scheme().expect("continuous space"));
        let q = ScoreBasis::from_scores(&space, scores)?;
        let l = shift.l().clone();
        let mut b = vec![l.clone()];
        b.extend(target.functions().iter().map(|r| l.mul(r)));
        let chain = build_chain(q.all(), &b, &space)?;
        let mut fields = vec![l.clone()];
        fields.extend(chain.directions());
        let set = IntegrandSet::new(Arc::clone(&scheme), fields)?;
        let d_l = chain
            .directions()
            .iter()
            .map(|d| scheme.table(&d.mul(&l)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            f: f.clone(),
            target: target.clone(),
            theta: Vec::new(),
            chain,
            set,
            d_l,
        })
    }

    pub fn chain(&self) -> &RotationChain {
        &self.chain
    }

    pub fn target(&self) -> &TargetSpec {
        &self.target
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }
}

impl PathTransform for ParametricTransform {
    fn label(&self) -> String {
        format!("parametric({} -> {})", self.f, self.target.model())
    }

    fn base_model(&self) -> &ContinuousModel {
        &self.f
    }

    fn integrands(&self) -> &IntegrandSet {
        &self.set
    }

    fn mesh(&self, size: usize) -> Vec<f64> {
        let g = self.target.model();
        (0..size)
            .map(|k| g.quantile(k as f64 / (size - 1) as f64))
            .collect()
    }

    fn time(&self, x: f64) -> f64 {
        self.target.model().cdf(x)
    }

    fn evaluate(&self, grid: &EvalGrid, driver: &DriverValues) -> Result<Values> {
        let running = driver.cumulative(0);
        let d_totals: Vec<f64> = (0..self.chain.len()).map(|s| driver.total(s + 1)).collect();
        let mut left = Vec::with_capacity(grid.len());
        let mut right = Vec::with_capacity(grid.len());
        let mut dots = vec![0.0; self.chain.len()];
        for (k, loc) in grid.locators().iter().enumerate() {
            for (dot, table) in dots.iter_mut().zip(&self.d_l) {
                *dot = table.at(loc);
            }
            let alpha = self.chain.reflection_weights(&dots);
            let correction: f64 = alpha.iter().zip(&d_totals).map(|(a, t)| a * t).sum();
            left.push(running[k].left - correction);
            right.push(running[k].right - correction);
        }
        Ok(Values { left, right })
    }
}

/// Fits `family` by maximum likelihood and applies the parametric transform
/// at the estimate.
pub fn transform_parametric(
    sample: &Sample,
    family: &ParametricFamily,
    target: &TargetSpec,
    mesh_size: usize,
) -> Result<ProcessPath> {
    let fit = fit_mle(family, sample)?;
    if !fit.converged {
        return Err(Error::Estimation(format!(
            "maximum likelihood did not converge (gradient norm {:e})",
            fit.gradient_norm
        )));
    }
    let t = ParametricTransform::new(family, &fit.theta_hat, target)?;
    let theta: Vec<String> = fit.theta_hat.iter().map(|v| format!("{v}")).collect();
    Ok(apply_transform(&t, sample, mesh_size)?.with_meta("theta_hat", theta.join(";")))
}
