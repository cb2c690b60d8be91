//! Brute-force Gaussian limits on a finite grid.
//!
//! `F`-Brownian motion `w` has independent increments over disjoint cells,
//! and on one cell `C` the vector `(w(ψ_a 1_C))_a` is centred Gaussian with
//! covariance `∫_C ψ_a ψ_b dF`. Summing cells gives every cumulative
//! integral a transform reads, so the transform's own `evaluate` can be fed
//! with exact draws of the limit. Projecting `w` parallel to an orthonormal
//! list (`1` for the bridge, `1, β_1, …, β_κ` after estimation) gives the
//! limit of the corresponding empirical process.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use super::experiment::replication_rng;
use crate::error::{Error, Result};
use crate::model::{ContinuousModel, EvalGrid, ScalarField};
use crate::transforms::{
    evaluate_on, DriverValues, IntegrandSet, Jump, PathTransform, ProcessPath, Values,
};

/// Diagonal jitter, relative to the largest variance of a cell.
const JITTER: f64 = 1e-12;

/// The untransformed process: `x ↦ v(1_{(-∞,x]})`.
#[derive(Clone, Debug)]
pub struct IdentityTransform {
    f: ContinuousModel,
    set: IntegrandSet,
}

impl IdentityTransform {
    pub fn new(f: &ContinuousModel) -> Result<Self> {
        let scheme = std::sync::Arc::new(crate::model::QuadratureScheme::new(f));
        Ok(Self {
            f: f.clone(),
            set: IntegrandSet::new(scheme, vec![ScalarField::one()])?,
        })
    }
}

impl PathTransform for IdentityTransform {
    fn label(&self) -> String {
        format!("identity({})", self.f)
    }

    fn base_model(&self) -> &ContinuousModel {
        &self.f
    }

    fn integrands(&self) -> &IntegrandSet {
        &self.set
    }

    fn mesh(&self, size: usize) -> Vec<f64> {
        (0..size)
            .map(|k| self.f.quantile(k as f64 / (size - 1) as f64))
            .collect()
    }

    fn time(&self, x: f64) -> f64 {
        self.f.cdf(x)
    }

    fn evaluate(&self, _grid: &EvalGrid, driver: &DriverValues) -> Result<Values> {
        let c = driver.cumulative(0);
        Ok(Values {
            left: c.iter().map(|j| j.left).collect(),
            right: c.iter().map(|j| j.right).collect(),
        })
    }
}

/// Square root `L` with `L Lᵀ ≈ cov`: Cholesky after a small diagonal
/// jitter, or a clipped eigendecomposition if that still fails.
fn gaussian_factor(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let k = cov.nrows();
    let scale = (0..k).map(|i| cov[(i, i)]).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let jittered = cov + DMatrix::identity(k, k) * (JITTER * scale);
    if let Some(ch) = jittered.clone().cholesky() {
        return Ok(ch.l());
    }
    let eig = SymmetricEigen::new(jittered);
    if eig.eigenvalues.iter().any(|l| *l < -1e-9 * scale) {
        return Err(Error::Singular(format!(
            "cell covariance is not positive semidefinite (smallest eigenvalue {:e})",
            eig.eigenvalues.min()
        )));
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()));
    Ok(&eig.eigenvectors * d)
}

/// Exact Gaussian draws of a projected `F`-Brownian motion, read through a
/// transform's integrands on a finite grid.
pub struct GaussianOracle<'a> {
    transform: &'a dyn PathTransform,
    grid: EvalGrid,
    /// One factor per cell `(x_{j-1}, x_j]`, the last cell unbounded above.
    factors: Vec<DMatrix<f64>>,
    /// `∫_{y≤x_k} ψ_a p_i dF` for transform integrand `a` and projection `i`.
    projection_cumulative: Vec<Vec<Vec<f64>>>,
    /// `⟨ψ_a, p_i⟩`.
    projection_total: Vec<Vec<f64>>,
    integrands: usize,
    projections: usize,
}

impl<'a> GaussianOracle<'a> {
    /// Oracle for the `F`-Brownian bridge (projection parallel to `1`).
    pub fn bridge(transform: &'a dyn PathTransform, xs: &[f64]) -> Result<Self> {
        Self::new(transform, &[ScalarField::one()], xs)
    }

    /// `projection` must be orthonormal in `L2(F)`; `xs` is completed with
    /// the transform's required points and restricted to its domain.
    pub fn new(
        transform: &'a dyn PathTransform,
        projection: &[ScalarField],
        xs: &[f64],
    ) -> Result<Self> {
        let mut points: Vec<f64> = xs.to_vec();
        points.extend(transform.required_points());
        points.retain(|x| x.is_finite() && transform.in_domain(*x));
        points.sort_by(f64::total_cmp);
        points.dedup();
        if points.is_empty() {
            return Err(Error::InvalidArgument("oracle grid is empty".into()));
        }
        let set = transform.integrands();
        let scheme = set.scheme();
        let grid = scheme.eval_grid(&points);
        let mut fields: Vec<ScalarField> = set.fields().to_vec();
        fields.extend(projection.iter().cloned());
        let k = fields.len();
        // Cumulative product integrals at the grid points and in total.
        let mut at = vec![vec![vec![0.0; k]; k]; points.len()];
        let mut total = vec![vec![0.0; k]; k];
        for a in 0..k {
            for b in a..k {
                let table = scheme.table(&fields[a].mul(&fields[b]))?;
                let on = table.on(&grid);
                for (j, v) in on.iter().enumerate() {
                    at[j][a][b] = *v;
                    at[j][b][a] = *v;
                }
                total[a][b] = table.total();
                total[b][a] = table.total();
            }
        }
        let mut factors = Vec::with_capacity(points.len() + 1);
        for j in 0..=points.len() {
            let upper = if j < points.len() { &at[j] } else { &total };
            let cov = DMatrix::from_fn(k, k, |a, b| {
                let lower = if j == 0 { 0.0 } else { at[j - 1][a][b] };
                upper[a][b] - lower
            });
            factors.push(gaussian_factor(&cov)?);
        }
        let a_count = set.len();
        let projection_cumulative = (0..a_count)
            .map(|a| {
                (0..projection.len())
                    .map(|i| at.iter().map(|m| m[a][a_count + i]).collect())
                    .collect()
            })
            .collect();
        let projection_total = (0..a_count)
            .map(|a| (0..projection.len()).map(|i| total[a][a_count + i]).collect())
            .collect();
        Ok(Self {
            transform,
            grid,
            factors,
            projection_cumulative,
            projection_total,
            integrands: a_count,
            projections: projection.len(),
        })
    }

    pub fn grid(&self) -> &[f64] {
        self.grid.xs()
    }

    /// One draw of the projected process, as the transform's driver values.
    pub fn draw_driver<R: Rng + ?Sized>(&self, rng: &mut R) -> DriverValues {
        let k = self.integrands + self.projections;
        let m = self.grid.len();
        let mut running = DVector::<f64>::zeros(k);
        let mut raw = Vec::with_capacity(m);
        for (j, factor) in self.factors.iter().enumerate() {
            let z = DVector::from_fn(k, |_, _| rng.sample::<f64, _>(StandardNormal));
            running += factor * z;
            if j < m {
                raw.push(running.clone());
            }
        }
        let w_proj: Vec<f64> = (0..self.projections)
            .map(|i| running[self.integrands + i])
            .collect();
        let cumulative = (0..self.integrands)
            .map(|a| {
                raw.iter()
                    .enumerate()
                    .map(|(j, w)| {
                        let proj: f64 = (0..self.projections)
                            .map(|i| self.projection_cumulative[a][i][j] * w_proj[i])
                            .sum();
                        Jump::continuous(w[a] - proj)
                    })
                    .collect()
            })
            .collect();
        let totals = (0..self.integrands)
            .map(|a| {
                running[a]
                    - (0..self.projections)
                        .map(|i| self.projection_total[a][i] * w_proj[i])
                        .sum::<f64>()
            })
            .collect();
        DriverValues::from_parts(cumulative, totals)
    }

    /// One draw of the transformed limit process on the grid.
    pub fn draw_path<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ProcessPath> {
        evaluate_on(self.transform, &self.grid, &self.draw_driver(rng))
    }

    /// `reps` independent paths; replication `r` uses stream `r` of `seed`.
    pub fn simulate(&self, reps: usize, seed: u64) -> Result<Vec<ProcessPath>> {
        (0..reps)
            .map(|r| self.draw_path(&mut replication_rng(seed, r)))
            .collect()
    }

    /// Compares the second moments of the transformed limit with `target`.
    pub fn covariance_check(
        &self,
        reps: usize,
        seed: u64,
        target: impl Fn(f64, f64) -> f64,
    ) -> Result<CovarianceReport> {
        if reps < 2 {
            return Err(Error::InvalidArgument("need at least two replications".into()));
        }
        let paths = self.simulate(reps, seed)?;
        let xs = self.grid.xs().to_vec();
        let values: Vec<&[f64]> = paths.iter().map(|p| p.values_right()).collect();
        Ok(CovarianceReport::from_draws(xs, &values, target))
    }
}

/// Sampled versus target covariance of a zero-mean process on a grid.
///
/// The sample matrix is the raw second moment (the mean is known to be
/// zero), and the standard error of entry `(i, j)` is the Gaussian value
/// `√((σ_ii σ_jj + σ_ij²)/reps)` at the target.
#[derive(Clone, Debug)]
pub struct CovarianceReport {
    pub grid: Vec<f64>,
    pub reps: usize,
    pub sampled: DMatrix<f64>,
    pub target: DMatrix<f64>,
    pub standard_error: DMatrix<f64>,
}

impl CovarianceReport {
    pub fn from_draws(
        grid: Vec<f64>,
        draws: &[&[f64]],
        target: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let m = grid.len();
        let reps = draws.len();
        let mut sampled = DMatrix::zeros(m, m);
        for d in draws {
            let v = DVector::from_column_slice(d);
            sampled += &v * v.transpose();
        }
        sampled /= reps as f64;
        let target = DMatrix::from_fn(m, m, |i, j| target(grid[i], grid[j]));
        let standard_error = DMatrix::from_fn(m, m, |i, j| {
            ((target[(i, i)] * target[(j, j)] + target[(i, j)].powi(2)) / reps as f64).sqrt()
        });
        Self {
            grid,
            reps,
            sampled,
            target,
            standard_error,
        }
    }

    pub fn max_abs_deviation(&self) -> f64 {
        (&self.sampled - &self.target).abs().max()
    }

    /// Largest `|sampled − target| / SE`; entries with zero target
    /// variance count only if they deviate by more than `1e-10`.
    pub fn max_standardized_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.grid.len() {
            for j in 0..self.grid.len() {
                let dev = (self.sampled[(i, j)] - self.target[(i, j)]).abs();
                let se = self.standard_error[(i, j)];
                let z = if se > 0.0 {
                    dev / se
                } else if dev > 1e-10 {
                    f64::INFINITY
                } else {
                    0.0
                };
                worst = worst.max(z);
            }
        }
        worst
    }

    /// Every entry within `k` standard errors.
    pub fn within(&self, k: f64) -> bool {
        self.max_standardized_deviation() <= k
    }
}

/// Covariance check of `transform` applied to the Gaussian limit under
/// projection `projection`, on the grid `xs`.
pub fn gaussian_limit_check(
    transform: &dyn PathTransform,
    projection: &[ScalarField],
    xs: &[f64],
    reps: usize,
    seed: u64,
    target: impl Fn(f64, f64) -> f64,
) -> Result<CovarianceReport> {
    if xs.len() > 128 {
        return Err(Error::InvalidArgument(format!(
            "dense oracle grids are limited to 128 points, got {}",
            xs.len()
        )));
    }
    GaussianOracle::new(transform, projection, xs)?.covariance_check(reps, seed, target)
}

/// Outcome of one named oracle comparison.
#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: String,
    pub max_abs_deviation: f64,
    pub max_standardized_deviation: f64,
    pub passed: bool,
}

impl CheckOutcome {
    fn from_report(name: &str, report: &CovarianceReport, k: f64) -> Self {
        Self {
            name: name.to_string(),
            max_abs_deviation: report.max_abs_deviation(),
            max_standardized_deviation: report.max_standardized_deviation(),
            passed: report.within(k),
        }
    }
}

/// Interior quantile grid `Q(k/(m+1))`, `k = 1..=m`.
pub fn quantile_grid(model: &ContinuousModel, m: usize) -> Vec<f64> {
    (1..=m)
        .map(|k| model.quantile(k as f64 / (m + 1) as f64))
        .collect()
}

/// The covariance checks of every transform family against its limit,
/// each at `k_se` standard errors:
///
/// * the untransformed bridge under `beta(3,3)`;
/// * uniform → `2x` and `beta(3,3)` → uniform bridge-to-bridge maps;
/// * the `η = 1_A/√Δ` motion transform at `f ≡ 1`, `Δ = 1/4`;
/// * the integrated motion transform under `beta(3,3)`, `Δ = 0.1`;
/// * the parametric transform for the normal-location family at `θ = 0.5`
///   with the one-term Hermite target.
pub fn standard_checks(m: usize, reps: usize, seed: u64, k_se: f64) -> Result<Vec<CheckOutcome>> {
    use crate::motion::{IntegratedTransform, UniformEtaTransform};
    use crate::parametric::{normalized_score, ParametricFamily, ParametricTransform, TargetSpec};
    use crate::transforms::{SimpleTransform, StandardBridgeTransform};

    let uniform = ContinuousModel::uniform();
    let two_x = ContinuousModel::parse("2x")?;
    let beta33 = ContinuousModel::beta(3.0, 3.0)?;
    let mut out = Vec::new();

    let t = IdentityTransform::new(&beta33)?;
    let r = gaussian_limit_check(&t, &[ScalarField::one()], &quantile_grid(&beta33, m), reps, seed, |x, y| {
        beta33.cdf(x.min(y)) - beta33.cdf(x) * beta33.cdf(y)
    })?;
    out.push(CheckOutcome::from_report("bridge beta(3,3)", &r, k_se));

    let t = SimpleTransform::new(&uniform, &two_x)?;
    let r = gaussian_limit_check(&t, &[ScalarField::one()], &quantile_grid(&two_x, m), reps, seed, |x, y| {
        two_x.cdf(x.min(y)) - two_x.cdf(x) * two_x.cdf(y)
    })?;
    out.push(CheckOutcome::from_report("uniform -> 2x", &r, k_se));

    let t = StandardBridgeTransform::new(&beta33)?;
    let r = gaussian_limit_check(&t, &[ScalarField::one()], &quantile_grid(&uniform, m), reps, seed, |x, y| {
        x.min(y) - x * y
    })?;
    out.push(CheckOutcome::from_report("beta(3,3) -> uniform", &r, k_se));

    let delta = 0.25;
    let t = UniformEtaTransform::new(&uniform, 0.0, delta)?;
    let xs: Vec<f64> = (0..m).map(|k| delta + (1.0 - delta) * k as f64 / (m - 1) as f64).collect();
    let r = gaussian_limit_check(&t, &[ScalarField::one()], &xs, reps, seed, |x, y| {
        if x.min(y) < delta {
            0.0
        } else {
            x.min(y) - delta
        }
    })?;
    out.push(CheckOutcome::from_report("motion f=1, A=[0,1/4]", &r, k_se));

    let delta = 0.1;
    let t = IntegratedTransform::new(&beta33, delta)?;
    let fd = beta33.cdf(delta);
    let xs: Vec<f64> = (0..m).map(|k| delta + (1.0 - delta) * k as f64 / (m - 1) as f64).collect();
    let r = gaussian_limit_check(&t, &[ScalarField::one()], &xs, reps, seed, |x, y| {
        beta33.cdf(x.min(y)) - fd
    })?;
    out.push(CheckOutcome::from_report("integrated motion beta(3,3), delta=0.1", &r, k_se));

    let family = ParametricFamily::normal_location(1.0)?;
    let theta = [0.5];
    let target = TargetSpec::hermite(1)?;
    let t = ParametricTransform::new(&family, &theta, &target)?;
    let q = normalized_score(&family, &theta)?;
    let g = target.model().clone();
    let density = g.density_field();
    let r = gaussian_limit_check(&t, q.all(), &quantile_grid(&g, m), reps, seed, |x, y| {
        // ∫_{y≤x} y dG(y) = −φ(x) for the standard normal.
        let (rx, ry) = (-density.eval(x), -density.eval(y));
        g.cdf(x.min(y)) - g.cdf(x) * g.cdf(y) - rx * ry
    })?;
    out.push(CheckOutcome::from_report("parametric normal-location theta=0.5", &r, k_se));
    Ok(out)
}
