use std::path::Path;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::distributions::{ContinuousModel, DiscreteModel, InverseCdf};
use crate::error::{Error, Result};

/// Observations kept in ascending order, with the position each value had
/// in the original input.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
    order: Vec<usize>,
    /// Source line of each input value, when the sample was parsed from text.
    lines: Option<Vec<usize>>,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument(
                "a sample needs at least one observation".into(),
            ));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "sample value {v} is not finite"
            )));
        }
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|a, b| values[*a].total_cmp(&values[*b]));
        let sorted = order.iter().map(|i| values[*i]).collect();
        Ok(Self {
            values: sorted,
            order,
            lines: None,
        })
    }

    /// Reads one decimal number per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        let mut lines = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let s = line.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            let v: f64 = s.parse().map_err(|_| Error::Parse {
                line: i + 1,
                msg: format!("`{s}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("`{s}` is not finite"),
                });
            }
            values.push(v);
            lines.push(i + 1);
        }
        if values.is_empty() {
            return Err(Error::Parse {
                line: 0,
                msg: "no observations found".into(),
            });
        }
        let mut sample = Self::new(values)?;
        sample.lines = Some(lines);
        Ok(sample)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Checks that every observation lies in the model's support. The first
    /// offender in input order is reported by its source line when the
    /// sample was parsed from text, and by its position otherwise.
    pub fn check_support(&self, model: &ContinuousModel) -> Result<()> {
        let first = (0..self.values.len())
            .filter(|k| !model.contains(self.values[*k]))
            .min_by_key(|k| self.order[*k]);
        let Some(k) = first else {
            return Ok(());
        };
        let msg = format!("value {} lies outside the support of {model}", self.values[k]);
        match &self.lines {
            Some(lines) => Err(Error::Parse {
                line: lines[self.order[k]],
                msg,
            }),
            None => Err(Error::InvalidArgument(format!(
                "observation #{}: {msg}",
                self.order[k] + 1
            ))),
        }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Values in ascending order.
    pub fn sorted(&self) -> &[f64] {
        &self.values
    }

    /// For each sorted position, the index of that value in the input.
    pub fn original_indices(&self) -> &[usize] {
        &self.order
    }

    /// Values in their original order.
    pub fn in_original_order(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.values.len()];
        for (v, i) in self.values.iter().zip(&self.order) {
            out[*i] = *v;
        }
        out
    }

    /// Number of observations `≤ x`.
    pub fn count_le(&self, x: f64) -> usize {
        self.values.partition_point(|v| *v <= x)
    }

    /// Number of observations `< x`.
    pub fn count_lt(&self, x: f64) -> usize {
        self.values.partition_point(|v| *v < x)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.n() as f64
    }

    /// Per-atom counts of a sample drawn from a discrete model.
    pub fn counts(&self, model: &DiscreteModel) -> Result<Vec<u64>> {
        let mut counts = vec![0u64; model.len()];
        for v in &self.values {
            let i = model.index_of(*v).ok_or_else(|| {
                Error::InvalidArgument(format!("{v} is not an atom of the discrete model"))
            })?;
            counts[i] += 1;
        }
        Ok(counts)
    }
}

/// Draws `n` observations by inversion with a ChaCha stream keyed by `seed`.
pub fn draw_sample<M: InverseCdf + ?Sized>(model: &M, n: usize, seed: u64) -> Result<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    draw_sample_with(model, n, &mut rng)
}

/// Draws `n` observations by inversion from an existing generator.
pub fn draw_sample_with<M: InverseCdf + ?Sized, R: Rng + ?Sized>(
    model: &M,
    n: usize,
    rng: &mut R,
) -> Result<Sample> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "sample size must be positive".into(),
        ));
    }
    let values = (0..n)
        .map(|_| {
            let u: f64 = rng.sample(Open01);
            model.quantile(u)
        })
        .collect();
    Sample::new(values)
}
