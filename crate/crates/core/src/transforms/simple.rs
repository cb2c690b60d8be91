use std::sync::Arc;

use super::driver::{DriverValues, IntegrandSet};
use super::{uniform_mesh, PathTransform, Values};
use crate::error::{Error, Result};
use crate::l2geom::LikelihoodShift;
use crate::model::{ContinuousModel, EvalGrid, ScalarField};

/// Hellinger quantities below this are rejected as `G = F`.
pub const NEAR_DEGENERATE: f64 = 1e-10;

/// Carries the `F`-bridge into a `G`-bridge:
///
/// `ṽ(x) = ∫_{y≤x} l dv − [∫ l dv] · (G(x) − ∫_{y≤x} l dF) / (1 − ∫ l dF)`,
/// with `l = √(dG/dF)`.
#[derive(Clone, Debug)]
pub struct SimpleTransform {
    f: ContinuousModel,
    g: ContinuousModel,
    shift: LikelihoodShift,
    set: IntegrandSet,
    denom: f64,
}

impl SimpleTransform {
    pub fn new(f: &ContinuousModel, g: &ContinuousModel) -> Result<Self> {
        let shift = LikelihoodShift::new(f, g)?;
        let h = shift.hellinger_sq()?;
        if h < NEAR_DEGENERATE {
            return Err(Error::Degenerate(format!(
                "Hellinger quantity {h:e} between {f} and {g} is too small"
            )));
        }
        let scheme = shift.space().scheme().expect("continuous space").clone();
        let set = IntegrandSet::new(scheme, vec![shift.l().clone()])?;
        let denom = 1.0 - set.tables()[0].total();
        Ok(Self {
            f: f.clone(),
            g: g.clone(),
            shift,
            set,
            denom,
        })
    }

    pub fn shift(&self) -> &LikelihoodShift {
        &self.shift
    }

    pub fn target(&self) -> &ContinuousModel {
        &self.g
    }

    /// `1/(1 − ∫ l dF)`, the factor multiplying the drift.
    pub fn drift_factor(&self) -> f64 {
        1.0 / self.denom
    }
}

impl PathTransform for SimpleTransform {
    fn label(&self) -> String {
        format!("simple({} -> {})", self.f, self.g)
    }

    fn base_model(&self) -> &ContinuousModel {
        &self.f
    }

    fn integrands(&self) -> &IntegrandSet {
        &self.set
    }

    fn mesh(&self, size: usize) -> Vec<f64> {
        (0..size)
            .map(|k| self.g.quantile(k as f64 / (size - 1) as f64))
            .collect()
    }

    fn time(&self, x: f64) -> f64 {
        self.g.cdf(x)
    }

    fn evaluate(&self, grid: &EvalGrid, driver: &DriverValues) -> Result<Values> {
        let running = driver.cumulative(0);
        let total = driver.total(0);
        let l_mass = self.set.tables()[0].on(grid);
        let mut left = Vec::with_capacity(grid.len());
        let mut right = Vec::with_capacity(grid.len());
        for (k, x) in grid.xs().iter().enumerate() {
            let drift = total * (self.g.cdf(*x) - l_mass[k]) / self.denom;
            left.push(running[k].left - drift);
            right.push(running[k].right - drift);
        }
        Ok(Values { left, right })
    }
}

/// Carries the `F`-bridge of a law on `[0, 1]` into the standard bridge:
///
/// `ũ(x) = ∫_{y≤x} f^{-1/2} dv − [∫ f^{-1/2} dv] · ∫_{y≤x}(1 − √f) dy / (1 − ∫ √f dy)`.
#[derive(Clone, Debug)]
pub struct StandardBridgeTransform {
    f: ContinuousModel,
    set: IntegrandSet,
    denom: f64,
}

impl StandardBridgeTransform {
    pub fn new(f: &ContinuousModel) -> Result<Self> {
        let (lo, hi) = f.support();
        if lo < 0.0 || hi > 1.0 {
            return Err(Error::InvalidArgument(format!(
                "{f} is not supported on [0, 1]"
            )));
        }
        let uniform = ContinuousModel::uniform();
        // The geometry is that of the pair (F, uniform); reuse its checks.
        let shift = LikelihoodShift::new(f, &uniform)?;
        let h = shift.hellinger_sq()?;
        if h < NEAR_DEGENERATE {
            return Err(Error::Degenerate(format!(
                "{f} is indistinguishable from the uniform law"
            )));
        }
        let scheme = Arc::clone(shift.space().scheme().expect("continuous space"));
        let fm = f.clone();
        let inv_sqrt_f = ScalarField::new(format!("f^(-1/2)[{f}]"), move |x| {
            1.0 / fm.density(x).sqrt()
        });
        let set = IntegrandSet::new(scheme, vec![inv_sqrt_f])?;
        let denom = 1.0 - set.tables()[0].total();
        Ok(Self {
            f: f.clone(),
            set,
            denom,
        })
    }
}

impl PathTransform for StandardBridgeTransform {
    fn label(&self) -> String {
        format!("standard-bridge({})", self.f)
    }

    fn base_model(&self) -> &ContinuousModel {
        &self.f
    }

    fn integrands(&self) -> &IntegrandSet {
        &self.set
    }

    fn mesh(&self, size: usize) -> Vec<f64> {
        uniform_mesh(0.0, 1.0, size)
    }

    fn time(&self, x: f64) -> f64 {
        x.clamp(0.0, 1.0)
    }

    fn evaluate(&self, grid: &EvalGrid, driver: &DriverValues) -> Result<Values> {
        let running = driver.cumulative(0);
        let total = driver.total(0);
        // ∫_{y≤x} √f dy = ∫_{y≤x} f^{-1/2} dF.
        let root_mass = self.set.tables()[0].on(grid);
        let mut left = Vec::with_capacity(grid.len());
        let mut right = Vec::with_capacity(grid.len());
        for (k, x) in grid.xs().iter().enumerate() {
            let drift = total * (x.clamp(0.0, 1.0) - root_mass[k]) / self.denom;
            left.push(running[k].left - drift);
            right.push(running[k].right - drift);
        }
        Ok(Values { left, right })
    }
}
