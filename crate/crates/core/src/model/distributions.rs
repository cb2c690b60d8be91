//! Hypothesized distributions: the continuous catalog and finite discrete laws.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::fmt;

use libm::erfc;
use statrs::function::beta::{beta_reg, ln_beta};
use statrs::function::erf::erfc_inv;

use super::field::ScalarField;
use crate::error::{Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Anything that can be sampled by inversion.
pub trait InverseCdf {
    fn quantile(&self, u: f64) -> f64;
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelKind {
    Uniform { lo: f64, hi: f64 },
    Beta { alpha: f64, beta: f64, ln_norm: f64 },
    Normal { mu: f64, sigma: f64 },
    Exponential { rate: f64 },
}

/// A continuous distribution on an interval of the real line.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuousModel {
    kind: ModelKind,
    name: String,
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidArgument(format!(
            "{name} must be finite and positive, got {v}"
        )))
    }
}

impl ContinuousModel {
    pub fn uniform() -> Self {
        Self {
            kind: ModelKind::Uniform { lo: 0.0, hi: 1.0 },
            name: "uniform".into(),
        }
    }

    pub fn uniform_on(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidArgument(format!(
                "uniform needs finite lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self {
            kind: ModelKind::Uniform { lo, hi },
            name: format!("uniform({lo},{hi})"),
        })
    }

    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        positive("beta alpha", alpha)?;
        positive("beta beta", beta)?;
        Ok(Self {
            kind: ModelKind::Beta {
                alpha,
                beta,
                ln_norm: ln_beta(alpha, beta),
            },
            name: format!("beta({alpha},{beta})"),
        })
    }

    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "normal mean must be finite, got {mu}"
            )));
        }
        positive("normal sigma", sigma)?;
        Ok(Self {
            kind: ModelKind::Normal { mu, sigma },
            name: format!("normal({mu},{sigma})"),
        })
    }

    pub fn standard_normal() -> Self {
        Self::normal(0.0, 1.0).expect("valid parameters")
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        positive("exponential rate", rate)?;
        Ok(Self {
            kind: ModelKind::Exponential { rate },
            name: format!("exponential({rate})"),
        })
    }

    /// Builds a catalog model from a name and a parameter list.
    ///
    /// Accepted names: `uniform` (no parameters, or `lo, hi`), `beta`
    /// (`alpha, beta`), `normal` (`mu, sigma`, default standard),
    /// `exponential` (`rate`, default 1) and the alias `2x` for the
    /// density `2x` on `[0, 1]`.
    pub fn from_name(name: &str, params: &[f64]) -> Result<Self> {
        let want = |k: usize| -> Result<()> {
            if params.len() == k {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!(
                    "model `{name}` takes {k} parameter(s), got {}",
                    params.len()
                )))
            }
        };
        let model = match name.trim().to_ascii_lowercase().as_str() {
            "uniform" | "unif" => match params.len() {
                0 => Self::uniform(),
                _ => {
                    want(2)?;
                    Self::uniform_on(params[0], params[1])?
                }
            },
            "beta" => {
                want(2)?;
                Self::beta(params[0], params[1])?
            }
            "normal" | "gaussian" => match params.len() {
                0 => Self::standard_normal(),
                _ => {
                    want(2)?;
                    Self::normal(params[0], params[1])?
                }
            },
            "exponential" | "exp" => match params.len() {
                0 => Self::exponential(1.0)?,
                _ => {
                    want(1)?;
                    Self::exponential(params[0])?
                }
            },
            "2x" => {
                want(0)?;
                Self::beta(2.0, 1.0)?.with_name("2x")
            }
            other => return Err(Error::InvalidArgument(format!("unknown model `{other}`"))),
        };
        Ok(model)
    }

    /// Parses `name`, `name(p1,p2)` or `name:p1,p2`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, rest) = match spec.find(['(', ':']) {
            Some(i) => (&spec[..i], spec[i + 1..].trim_end_matches(')')),
            None => (spec, ""),
        };
        let params = rest
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>().map_err(|_| {
                    Error::InvalidArgument(format!("bad model parameter `{s}` in `{spec}`"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_name(name, &params)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn support(&self) -> (f64, f64) {
        match self.kind {
            ModelKind::Uniform { lo, hi } => (lo, hi),
            ModelKind::Beta { .. } => (0.0, 1.0),
            ModelKind::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            ModelKind::Exponential { .. } => (0.0, f64::INFINITY),
        }
    }

    /// Whether the model is the uniform law on `[0, 1]`.
    pub fn is_unit_uniform(&self) -> bool {
        match self.kind {
            ModelKind::Uniform { lo, hi } => lo == 0.0 && hi == 1.0,
            ModelKind::Beta { alpha, beta, .. } => alpha == 1.0 && beta == 1.0,
            _ => false,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let (lo, hi) = self.support();
        x >= lo && x <= hi
    }

    pub fn density(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if !(x >= lo && x <= hi) {
            return 0.0;
        }
        match self.kind {
            ModelKind::Uniform { lo, hi } => 1.0 / (hi - lo),
            ModelKind::Beta {
                alpha,
                beta,
                ln_norm,
            } => {
                if x == 0.0 || x == 1.0 {
                    let (edge_exp, other) = if x == 0.0 {
                        (alpha, beta)
                    } else {
                        (beta, alpha)
                    };
                    return if edge_exp < 1.0 {
                        f64::INFINITY
                    } else if edge_exp == 1.0 {
                        (-ln_beta(1.0, other)).exp()
                    } else {
                        0.0
                    };
                }
                ((alpha - 1.0) * x.ln() + (beta - 1.0) * (-x).ln_1p() - ln_norm).exp()
            }
            ModelKind::Normal { mu, sigma } => {
                let z = (x - mu) / sigma;
                INV_SQRT_2PI / sigma * (-0.5 * z * z).exp()
            }
            ModelKind::Exponential { rate } => rate * (-rate * x).exp(),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        let (lo, hi) = self.support();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        match self.kind {
            ModelKind::Uniform { lo, hi } => (x - lo) / (hi - lo),
            ModelKind::Beta { alpha, beta, .. } => beta_reg(alpha, beta, x),
            ModelKind::Normal { mu, sigma } => 0.5 * erfc(-(x - mu) / sigma * FRAC_1_SQRT_2),
            ModelKind::Exponential { rate } => -(-rate * x).exp_m1(),
        }
    }

    /// Survival function `1 - F(x)`, accurate in the upper tail.
    pub fn sf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        let (lo, hi) = self.support();
        if x <= lo {
            return 1.0;
        }
        if x >= hi {
            return 0.0;
        }
        match self.kind {
            ModelKind::Uniform { lo, hi } => (hi - x) / (hi - lo),
            ModelKind::Beta { alpha, beta, .. } => beta_reg(beta, alpha, 1.0 - x),
            ModelKind::Normal { mu, sigma } => 0.5 * erfc((x - mu) / sigma * FRAC_1_SQRT_2),
            ModelKind::Exponential { rate } => (-rate * x).exp(),
        }
    }

    pub fn quantile(&self, u: f64) -> f64 {
        self.quantile_split(u, 1.0 - u)
    }

    /// Quantile at upper-tail probability `v`, i.e. `F⁻¹(1 − v)` without
    /// losing precision when `v` is tiny.
    pub fn quantile_upper(&self, v: f64) -> f64 {
        self.quantile_split(1.0 - v, v)
    }

    /// `u` and `v = 1 − u` are both passed so that whichever is smaller can
    /// be used at full precision.
    fn quantile_split(&self, u: f64, v: f64) -> f64 {
        let (lo, hi) = self.support();
        if u <= 0.0 {
            return lo;
        }
        if v <= 0.0 {
            return hi;
        }
        let lower = u <= 0.5;
        match self.kind {
            ModelKind::Uniform { lo, hi } => {
                if lower {
                    lo + u * (hi - lo)
                } else {
                    hi - v * (hi - lo)
                }
            }
            ModelKind::Beta { alpha, beta, .. } => {
                if alpha == 1.0 && beta == 1.0 {
                    return if lower { u } else { 1.0 - v };
                }
                if beta == 1.0 && lower {
                    return u.powf(1.0 / alpha);
                }
                if alpha == 1.0 && !lower {
                    return 1.0 - v.powf(1.0 / beta);
                }
                let guess = initial_beta_guess(alpha, beta, u, v);
                if lower {
                    solve_increasing(u, 0.0, 1.0, guess, |x| self.cdf(x), |x| self.density(x))
                } else {
                    solve_increasing(-v, 0.0, 1.0, guess, |x| -self.sf(x), |x| self.density(x))
                }
            }
            ModelKind::Normal { mu, sigma } => {
                let mut z = if lower {
                    -SQRT_2 * erfc_inv(2.0 * u)
                } else {
                    SQRT_2 * erfc_inv(2.0 * v)
                };
                // Polish with Newton steps on whichever tail keeps precision.
                for _ in 0..2 {
                    let phi = INV_SQRT_2PI * (-0.5 * z * z).exp();
                    if phi == 0.0 {
                        break;
                    }
                    let resid = if lower {
                        0.5 * erfc(-z * FRAC_1_SQRT_2) - u
                    } else {
                        v - 0.5 * erfc(z * FRAC_1_SQRT_2)
                    };
                    z -= resid / phi;
                }
                mu + sigma * z
            }
            ModelKind::Exponential { rate } => {
                if lower {
                    -(-u).ln_1p() / rate
                } else {
                    -v.ln() / rate
                }
            }
        }
    }

    pub fn density_field(&self) -> ScalarField {
        let m = self.clone();
        ScalarField::new(format!("f[{}]", self.name), move |x| m.density(x))
    }

    pub fn cdf_field(&self) -> ScalarField {
        let m = self.clone();
        ScalarField::new(format!("F[{}]", self.name), move |x| m.cdf(x))
    }

    pub fn quantile_field(&self) -> ScalarField {
        let m = self.clone();
        ScalarField::new(format!("Finv[{}]", self.name), move |u| m.quantile(u))
    }
}

impl InverseCdf for ContinuousModel {
    fn quantile(&self, u: f64) -> f64 {
        ContinuousModel::quantile(self, u)
    }
}

impl fmt::Display for ContinuousModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

fn initial_beta_guess(alpha: f64, beta: f64, u: f64, v: f64) -> f64 {
    // Leading-order tail inversions, cut off at the mean.
    let norm = ln_beta(alpha, beta).exp();
    let mean = alpha / (alpha + beta);
    let guess = if u < 0.5 {
        (u * alpha * norm).powf(1.0 / alpha).min(mean)
    } else {
        (1.0 - (v * beta * norm).powf(1.0 / beta)).max(mean)
    };
    guess.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)
}

/// Root of `cdf(x) = target` for an increasing `cdf` on `[lo, hi]`, by
/// Newton steps that fall back to bisection when they leave the bracket.
pub(crate) fn solve_increasing(
    target: f64,
    mut lo: f64,
    mut hi: f64,
    start: f64,
    cdf: impl Fn(f64) -> f64,
    pdf: impl Fn(f64) -> f64,
) -> f64 {
    let mut x = if start > lo && start < hi {
        start
    } else {
        0.5 * (lo + hi)
    };
    for _ in 0..300 {
        let fx = cdf(x) - target;
        if fx == 0.0 {
            return x;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = pdf(x);
        let newton = x - fx / d;
        let next = if d.is_finite() && d > 0.0 && newton > lo && newton < hi {
            newton
        } else if lo > 0.0 && hi > 16.0 * lo {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
        let scale = x.abs().max(f64::MIN_POSITIVE);
        if (next - x).abs() <= 2.0 * f64::EPSILON * scale || hi - lo <= 2.0 * f64::EPSILON * scale {
            return next;
        }
        x = next;
    }
    x
}

/// A probability law on finitely many ordered atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteModel {
    atoms: Vec<f64>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl DiscreteModel {
    pub fn new(atoms: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != probs.len() {
            return Err(Error::InvalidArgument(format!(
                "discrete model needs equally many atoms and probabilities, got {} and {}",
                atoms.len(),
                probs.len()
            )));
        }
        if atoms.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument(
                "discrete atoms must be strictly increasing".into(),
            ));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "discrete probabilities must be positive, got {p}"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "discrete probabilities sum to {total}, not 1"
            )));
        }
        let cumulative = probs
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        Ok(Self {
            atoms,
            probs,
            cumulative,
        })
    }

    /// Atoms `0, 1, ..., k-1` with the given probabilities.
    pub fn on_cells(probs: Vec<f64>) -> Result<Self> {
        let atoms = (0..probs.len()).map(|i| i as f64).collect();
        Self::new(atoms, probs)
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn index_of(&self, x: f64) -> Option<usize> {
        self.atoms.binary_search_by(|a| a.total_cmp(&x)).ok()
    }

    pub fn prob(&self, x: f64) -> f64 {
        self.index_of(x).map_or(0.0, |i| self.probs[i])
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.atoms.partition_point(|a| *a <= x);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1].min(1.0)
        }
    }

    pub fn same_support(&self, other: &DiscreteModel) -> bool {
        self.atoms == other.atoms
    }
}

impl InverseCdf for DiscreteModel {
    fn quantile(&self, u: f64) -> f64 {
        let k = self.cumulative.partition_point(|c| *c < u);
        self.atoms[k.min(self.atoms.len() - 1)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalog() -> Vec<ContinuousModel> {
        vec![
            ContinuousModel::uniform(),
            ContinuousModel::beta(3.0, 3.0).unwrap(),
            ContinuousModel::beta(0.8, 1.5).unwrap(),
            ContinuousModel::beta(2.0, 1.0).unwrap(),
            ContinuousModel::normal(0.3, 2.0).unwrap(),
            ContinuousModel::exponential(2.0).unwrap(),
        ]
    }

    #[test]
    fn quantile_inverts_cdf_in_the_interior() {
        for m in catalog() {
            for i in 1..200 {
                let u = i as f64 / 200.0;
                let x = m.quantile(u);
                assert!((m.cdf(x) - u).abs() < 1e-12, "{m}: cdf(quantile({u}))");
                assert!(
                    (m.quantile(m.cdf(x)) - x).abs() < 1e-8,
                    "{m}: quantile(cdf({x}))"
                );
            }
        }
    }

    #[test]
    fn cdf_is_zero_and_one_at_support_ends() {
        for m in catalog() {
            let (lo, hi) = m.support();
            assert_eq!(m.cdf(lo), 0.0);
            assert_eq!(m.cdf(hi), 1.0);
        }
    }

    #[test]
    fn beta_density_handles_endpoints() {
        let j = ContinuousModel::beta(0.8, 1.5).unwrap();
        assert!(j.density(0.0).is_infinite());
        assert_eq!(j.density(1.0), 0.0);
        assert!((ContinuousModel::parse("2x").unwrap().density(0.25) - 0.5).abs() < 1e-13);
        assert!((ContinuousModel::beta(2.0, 1.0).unwrap().density(1.0) - 2.0).abs() < 1e-13);
    }

    #[test]
    fn parse_accepts_both_spellings() {
        assert_eq!(
            ContinuousModel::parse("beta(3,3)").unwrap(),
            ContinuousModel::beta(3.0, 3.0).unwrap()
        );
        assert_eq!(
            ContinuousModel::parse("beta:0.8,1.5").unwrap(),
            ContinuousModel::beta(0.8, 1.5).unwrap()
        );
        assert!(ContinuousModel::parse("gamma(2)").is_err());
        assert!(ContinuousModel::parse("beta(1)").is_err());
        assert!(ContinuousModel::parse("beta(-1,2)").is_err());
    }

    #[test]
    fn discrete_model_validates() {
        assert!(DiscreteModel::on_cells(vec![0.25, 0.75]).is_ok());
        assert!(DiscreteModel::on_cells(vec![0.25, 0.7]).is_err());
        assert!(DiscreteModel::on_cells(vec![0.0, 1.0]).is_err());
        assert!(DiscreteModel::new(vec![1.0, 0.0], vec![0.5, 0.5]).is_err());
        let d = DiscreteModel::on_cells(vec![0.25, 0.75]).unwrap();
        assert_eq!(d.quantile(0.2), 0.0);
        assert_eq!(d.quantile(0.3), 1.0);
        assert_eq!(d.cdf(0.5), 0.25);
    }
}
