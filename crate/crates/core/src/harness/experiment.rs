use std::io::Write;
use std::ops::Range;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{ExperimentConfig, PathSource, Pipeline, Statistic};
use crate::error::{Error, Result};
use crate::model::{draw_sample_with, ContinuousModel, Sample};
use crate::parametric::transform_parametric;
use crate::stats::{
    cvm_statistic, ecdf_distance, ks_statistic, two_sample_distance,
    LimitLaw,
};
use crate::transforms::{apply_transform, ProcessPath};

/// Environment variable capping the number of worker threads (0 = automatic).
pub const THREADS_ENV: &str = "KHMROTATE_THREADS";

/// Generator of replication `index`: ChaCha8 keyed by the master seed,
/// with the replication index selecting an independent stream.
pub fn replication_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// A rayon pool honoring [`THREADS_ENV`].
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| {
            Error::Config(format!("{THREADS_ENV} must be a non-negative integer, got `{v}`"))
        })?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker threads: {e}")))
}

impl Pipeline {
    pub fn path(&self, sample: &Sample, mesh: usize) -> Result<ProcessPath> {
        match &self.source {
            PathSource::Fixed(t) => apply_transform(t.as_ref(), sample, mesh),
            PathSource::Parametric { family, target } => {
                transform_parametric(sample, family, target, mesh)
            }
        }
    }

    pub fn statistic(&self, statistic: Statistic, path: &ProcessPath) -> Result<f64> {
        match statistic {
            Statistic::Ks => Ok(ks_statistic(path)),
            Statistic::Cvm => Ok(cvm_statistic(path)),
            Statistic::MotionSup => {
                let sup = match self.excluded {
                    None => ks_statistic(path),
                    Some((lo, hi)) => {
                        let below = path.restricted(f64::NEG_INFINITY, lo);
                        let above = path.restricted(hi, f64::INFINITY);
                        ks_statistic(&below).max(ks_statistic(&above))
                    }
                };
                if !(self.normalizer > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "normalizer must be positive, got {}",
                        self.normalizer
                    )));
                }
                Ok(sup / self.normalizer)
            }
        }
    }
}

/// Everything a replication needs, resolved once per experiment.
struct Plan {
    pipeline: Pipeline,
    statistic: Statistic,
    sampler: ContinuousModel,
    n: usize,
    mesh: usize,
    seed: u64,
}

impl Plan {
    fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let model = config.model.build()?;
        Ok(Self {
            pipeline: Pipeline::build(&config.transform, &model)?,
            statistic: config.statistic()?,
            sampler: config.sampling_model()?,
            n: config.n,
            mesh: config.mesh,
            seed: config.seed,
        })
    }

    fn replicate(&self, index: usize) -> Result<f64> {
        let mut rng = replication_rng(self.seed, index);
        let sample = draw_sample_with(&self.sampler, self.n, &mut rng)?;
        let path = self.pipeline.path(&sample, self.mesh)?;
        self.pipeline.statistic(self.statistic, &path)
    }
}

/// Statistics of replications `indices`, in index order. The first failing
/// replication (lowest index) aborts the run.
pub fn run_replications(config: &ExperimentConfig, indices: Range<usize>) -> Result<Vec<f64>> {
    run_plan(&Plan::new(config)?, indices)
}

fn run_plan(plan: &Plan, indices: Range<usize>) -> Result<Vec<f64>> {
    let results: Vec<Result<f64>> = thread_pool()?.install(|| {
        indices
            .clone()
            .into_par_iter()
            .map(|i| plan.replicate(i))
            .collect()
    });
    results
        .into_iter()
        .zip(indices)
        .map(|(r, index)| {
            r.map_err(|e| Error::Replication {
                index,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Runs every replication of `config` and tabulates the empirical
/// distribution of the statistic against its limit law.
pub fn run_experiment(config: &ExperimentConfig) -> Result<EcdfTable> {
    let plan = Plan::new(config)?;
    let law = plan.pipeline.limit_law(plan.statistic);
    let values = run_plan(&plan, 0..config.reps)?;
    Ok(EcdfTable::new(values, law).with_config(config.to_json()))
}

/// Sorted statistic values with ECDF levels `i/reps` and the matching
/// limit distribution function.
#[derive(Clone, Debug, PartialEq)]
pub struct EcdfTable {
    config: Option<String>,
    values: Vec<f64>,
    law: Option<LimitLaw>,
}

impl EcdfTable {
    pub fn new(mut values: Vec<f64>, law: Option<LimitLaw>) -> Self {
        values.sort_by(f64::total_cmp);
        Self {
            config: None,
            values,
            law,
        }
    }

    pub fn with_config(mut self, json: String) -> Self {
        self.config = Some(json);
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn levels(&self) -> Vec<f64> {
        let n = self.values.len() as f64;
        (1..=self.values.len()).map(|i| i as f64 / n).collect()
    }

    pub fn law(&self) -> Option<LimitLaw> {
        self.law
    }

    pub fn limit_values(&self) -> Option<Vec<f64>> {
        self.law
            .map(|law| self.values.iter().map(|x| law.cdf(*x)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `sup |ECDF − limit CDF|`, if the limit law is known.
    pub fn distance_to_limit(&self) -> Option<f64> {
        self.law
            .map(|law| ecdf_distance(&self.values, |x| law.cdf(x)))
    }

    /// `sup |ECDF − other ECDF|`.
    pub fn distance_to(&self, other: &EcdfTable) -> f64 {
        two_sample_distance(&self.values, &other.values)
    }

    /// Columns `stat,ecdf,limit_cdf` under a `# config=` header; the limit
    /// column is empty when no limit law applies.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if let Some(c) = &self.config {
            out.push_str(&format!("# config={c}\n"));
        }
        if let Some(law) = self.law {
            out.push_str(&format!("# limit={law}\n"));
        }
        out.push_str("stat,ecdf,limit_cdf\n");
        let limits = self.limit_values();
        for (i, (x, level)) in self.values.iter().zip(self.levels()).enumerate() {
            match &limits {
                Some(l) => out.push_str(&format!("{x},{level},{}\n", l[i])),
                None => out.push_str(&format!("{x},{level},\n")),
            }
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        file.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }
}
