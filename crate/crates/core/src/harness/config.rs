use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::model::ContinuousModel;
use crate::motion::{ConditionalEtaTransform, IntegratedTransform, UniformEtaTransform};
use crate::parametric::{ParametricFamily, TargetSpec};
use crate::stats::LimitLaw;
use crate::transforms::{PathTransform, SimpleTransform, StandardBridgeTransform, DEFAULT_MESH};

/// A catalog model: name plus parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

impl ModelSpec {
    pub fn new(name: impl Into<String>, params: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            params,
        }
    }

    /// Accepts the same forms as [`ContinuousModel::parse`], e.g. `beta(3,3)`.
    pub fn parse(text: &str) -> Result<Self> {
        // Validate with the model parser first, then keep the raw pieces.
        ContinuousModel::parse(text).map_err(as_config)?;
        let text = text.trim();
        let (name, rest) = match text.find(['(', ':']) {
            Some(i) => (&text[..i], &text[i + 1..]),
            None => (text, ""),
        };
        let params = rest
            .trim_end_matches(')')
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Config(format!("bad parameter in `{text}`: {e}")))?;
        Ok(Self::new(name.trim(), params))
    }

    pub fn build(&self) -> Result<ContinuousModel> {
        ContinuousModel::from_name(&self.name, &self.params).map_err(as_config)
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.params.is_empty() {
            return f.write_str(&self.name);
        }
        let p: Vec<String> = self.params.iter().map(|v| v.to_string()).collect();
        write!(f, "{}({})", self.name, p.join(","))
    }
}

fn as_config(e: Error) -> Error {
    match e {
        Error::InvalidArgument(m) => Error::Config(m),
        other => other,
    }
}

/// A transform by catalog name, with free-form options.
///
/// | name | options |
/// |---|---|
/// | `simple` | `target` (model string) |
/// | `standard-bridge` | — |
/// | `motion-uniform-eta` | `delta`, or `a_lo` and `a_hi` |
/// | `motion-conditional-eta` | `delta`, or `a_lo` and `a_hi` |
/// | `motion-integrated` | `delta` |
/// | `parametric` | `family`, `family_params`, `target` (`canonical`, `hermite`, …) |
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformSpec {
    pub name: String,
    #[serde(default)]
    pub options: BTreeMap<String, Value>,
}

impl TransformSpec {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            options: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.options.insert(key.to_string(), value.into());
        self
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        match self.options.get(key) {
            None => Ok(None),
            Some(v) => v.as_f64().map(Some).ok_or_else(|| {
                Error::Config(format!("option `{key}` of `{}` must be a number", self.name))
            }),
        }
    }

    fn string(&self, key: &str) -> Result<Option<String>> {
        match self.options.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(Error::Config(format!(
                "option `{key}` of `{}` must be a string",
                self.name
            ))),
        }
    }

    fn numbers(&self, key: &str) -> Result<Vec<f64>> {
        match self.options.get(key) {
            None => Ok(Vec::new()),
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| {
                    v.as_f64().ok_or_else(|| {
                        Error::Config(format!("option `{key}` must be a list of numbers"))
                    })
                })
                .collect(),
            Some(v) => v
                .as_f64()
                .map(|x| vec![x])
                .ok_or_else(|| Error::Config(format!("option `{key}` must be numeric"))),
        }
    }

    /// `A = [a_lo, a_hi]`, or `[0, delta]`.
    fn interval(&self) -> Result<(f64, f64)> {
        match (self.number("a_lo")?, self.number("a_hi")?, self.number("delta")?) {
            (Some(lo), Some(hi), None) => Ok((lo, hi)),
            (None, None, Some(d)) => Ok((0.0, d)),
            _ => Err(Error::Config(format!(
                "`{}` needs either `delta` or both `a_lo` and `a_hi`",
                self.name
            ))),
        }
    }
}

/// The statistic computed from each transformed path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Statistic {
    Ks,
    Cvm,
    MotionSup,
}

impl Statistic {
    pub fn from_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "ks" | "kolmogorov-smirnov" => Ok(Self::Ks),
            "cvm" | "omega2" | "cramer-von-mises" => Ok(Self::Cvm),
            "motion-sup" | "sup" | "d-bn" => Ok(Self::MotionSup),
            _ => Err(Error::Config(format!("unknown statistic `{name}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Ks => "ks",
            Self::Cvm => "cvm",
            Self::MotionSup => "motion-sup",
        }
    }
}

fn default_mesh() -> usize {
    DEFAULT_MESH
}

/// One Monte Carlo study: draw `n` observations `reps` times, transform,
/// and record the statistic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// The hypothesized model (for `parametric`, the law samples are drawn from).
    pub model: ModelSpec,
    /// Law the samples are drawn from, when it differs from `model`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_model: Option<ModelSpec>,
    pub transform: TransformSpec,
    pub statistic: String,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    #[serde(default = "default_mesh")]
    pub mesh: usize,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if self.mesh < 2 {
            return Err(Error::Config("mesh must be at least 2".into()));
        }
        Statistic::from_name(&self.statistic)?;
        self.model.build()?;
        if let Some(m) = &self.sample_model {
            m.build()?;
        }
        Ok(())
    }

    pub fn statistic(&self) -> Result<Statistic> {
        Statistic::from_name(&self.statistic)
    }

    pub fn sampling_model(&self) -> Result<ContinuousModel> {
        self.sample_model.as_ref().unwrap_or(&self.model).build()
    }
}

/// How a sample becomes a path.
#[derive(Clone)]
pub enum PathSource {
    /// The same transform for every sample.
    Fixed(Arc<dyn PathTransform>),
    /// Rebuilt at the maximum-likelihood estimate of each sample.
    Parametric {
        family: ParametricFamily,
        target: TargetSpec,
    },
}

/// A resolved transform together with what its statistics need.
#[derive(Clone)]
pub struct Pipeline {
    pub source: PathSource,
    /// Divides `sup |path|` for [`Statistic::MotionSup`].
    pub normalizer: f64,
    /// Open interval excluded from [`Statistic::MotionSup`].
    pub excluded: Option<(f64, f64)>,
    /// Limit law of each statistic, where one is known.
    pub ks_law: Option<LimitLaw>,
    pub cvm_law: Option<LimitLaw>,
    pub motion_law: Option<LimitLaw>,
}

impl fmt::Debug for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match &self.source {
            PathSource::Fixed(t) => t.label(),
            PathSource::Parametric { family, target } => {
                format!("parametric({family} -> {})", target.model())
            }
        };
        f.debug_struct("Pipeline")
            .field("source", &label)
            .field("normalizer", &self.normalizer)
            .finish()
    }
}

impl Pipeline {
    fn bridge(t: Arc<dyn PathTransform>) -> Self {
        Self {
            source: PathSource::Fixed(t),
            normalizer: 1.0,
            excluded: None,
            ks_law: Some(LimitLaw::Kolmogorov),
            cvm_law: Some(LimitLaw::CramerVonMises),
            motion_law: None,
        }
    }

    fn motion(t: Arc<dyn PathTransform>, normalizer: f64, initial: bool) -> Self {
        Self {
            source: PathSource::Fixed(t),
            normalizer,
            excluded: None,
            ks_law: None,
            cvm_law: None,
            motion_law: initial.then_some(LimitLaw::SupAbsBrownianMotion),
        }
    }

    /// Resolves a catalog transform for hypothesized model `f`.
    pub fn build(spec: &TransformSpec, f: &ContinuousModel) -> Result<Self> {
        let cfg = |e: Error| match e {
            Error::InvalidArgument(m) => Error::Config(m),
            other => other,
        };
        match spec.name.to_ascii_lowercase().as_str() {
            "simple" => {
                let target = spec
                    .string("target")?
                    .ok_or_else(|| Error::Config("`simple` needs option `target`".into()))?;
                let g = ModelSpec::parse(&target)?.build()?;
                Ok(Self::bridge(Arc::new(SimpleTransform::new(f, &g).map_err(cfg)?)))
            }
            "standard-bridge" | "bridge" => Ok(Self::bridge(Arc::new(
                StandardBridgeTransform::new(f).map_err(cfg)?,
            ))),
            "motion-uniform-eta" => {
                let (lo, hi) = spec.interval()?;
                let t = UniformEtaTransform::new(f, lo, hi).map_err(cfg)?;
                let normalizer = t.normalizer();
                let mut p = Self::motion(Arc::new(t), normalizer, lo == 0.0);
                p.excluded = Some((lo, hi));
                Ok(p)
            }
            "motion-conditional-eta" => {
                let (lo, hi) = spec.interval()?;
                let t = ConditionalEtaTransform::new(f, lo, hi).map_err(cfg)?;
                let normalizer = t.normalizer();
                Ok(Self::motion(Arc::new(t), normalizer, lo == 0.0))
            }
            "motion-integrated" => {
                let delta = spec.number("delta")?.ok_or_else(|| {
                    Error::Config("`motion-integrated` needs option `delta`".into())
                })?;
                let t = IntegratedTransform::new(f, delta).map_err(cfg)?;
                let normalizer = t.normalizer();
                Ok(Self::motion(Arc::new(t), normalizer, true))
            }
            "parametric" => {
                let name = spec
                    .string("family")?
                    .unwrap_or_else(|| "normal-location".to_string());
                let family = ParametricFamily::from_name(&name, &spec.numbers("family_params")?)?;
                let target_name = spec
                    .string("target")?
                    .unwrap_or_else(|| "canonical".to_string());
                let target = TargetSpec::from_name(&target_name, &family)?;
                Ok(Self {
                    source: PathSource::Parametric { family, target },
                    normalizer: 1.0,
                    excluded: None,
                    ks_law: None,
                    cvm_law: None,
                    motion_law: None,
                })
            }
            other => Err(Error::Config(format!("unknown transform `{other}`"))),
        }
    }

    pub fn limit_law(&self, statistic: Statistic) -> Option<LimitLaw> {
        match statistic {
            Statistic::Ks => self.ks_law,
            Statistic::Cvm => self.cvm_law,
            Statistic::MotionSup => self.motion_law,
        }
    }
}
