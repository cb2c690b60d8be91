//! Transforms of the empirical bridge on `[0, 1]` whose limit is standard
//! Brownian motion away from a chosen interval `A`.
//!
//! Three variants are provided:
//!
//! * [`UniformEtaTransform`] orthogonalizes against `η_A = 1_A/√Δ` and
//!   yields a process on all of `[0, 1]` that vanishes on `A` in the sense
//!   `∫_A η_A db = 0`;
//! * [`ConditionalEtaTransform`] conditions on the mass of `A` and is only
//!   defined off `A`, running upward from `sup A` and downward from `inf A`;
//! * [`IntegratedTransform`] works with `∫ √f db` directly, so it never
//!   divides by the density.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::Sample;
use crate::model::{ContinuousModel, EvalGrid, QuadratureScheme, ScalarField};
use crate::transforms::{
    apply_transform, uniform_mesh, DriverValues, IntegrandSet, PathTransform, ProcessPath, Values,
};

/// Denominators smaller than this are treated as zero.
const DENOM_FLOOR: f64 = 1e-12;

/// Which square-root density concentrated on `A` is used.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EtaKind {
    /// `η_A = 1_A / √Δ`.
    UniformOnA,
    /// `η_A = √(f 1_A / F(A))`, i.e. conditioning on `A`.
    ConditionalOnA,
}

/// An interval `A ⊂ [0, 1]` and the function `η_A` attached to it.
#[derive(Clone, Debug)]
pub struct EtaSpec {
    kind: EtaKind,
    lo: f64,
    hi: f64,
    eta: ScalarField,
}

impl EtaSpec {
    pub fn new(kind: EtaKind, lo: f64, hi: f64, model: &ContinuousModel) -> Result<Self> {
        if !(0.0 <= lo && lo < hi && hi <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "A = [{lo}, {hi}] is not a nondegenerate interval inside [0, 1]"
            )));
        }
        let eta = match kind {
            EtaKind::UniformOnA => {
                let c = 1.0 / (hi - lo).sqrt();
                ScalarField::new(format!("1_[{lo},{hi}]/sqrt(delta)"), move |x| {
                    if x >= lo && x <= hi {
                        c
                    } else {
                        0.0
                    }
                })
            }
            EtaKind::ConditionalOnA => {
                let mass = model.cdf(hi) - model.cdf(lo);
                if mass <= 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "{model} puts no mass on [{lo}, {hi}]"
                    )));
                }
                let m = model.clone();
                ScalarField::new(format!("sqrt(f 1_A / F(A))[{lo},{hi}]"), move |x| {
                    if x >= lo && x <= hi {
                        (m.density(x) / mass).sqrt()
                    } else {
                        0.0
                    }
                })
            }
        };
        Ok(Self { kind, lo, hi, eta })
    }

    /// `A = [0, Δ]`.
    pub fn initial(kind: EtaKind, delta: f64, model: &ContinuousModel) -> Result<Self> {
        Self::new(kind, 0.0, delta, model)
    }

    pub fn kind(&self) -> EtaKind {
        self.kind
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// `Δ = μ(A)`.
    pub fn delta(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn eta(&self) -> &ScalarField {
        &self.eta
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

fn check_unit_support(f: &ContinuousModel) -> Result<()> {
    let (lo, hi) = f.support();
    if lo < 0.0 || hi > 1.0 {
        return Err(Error::InvalidArgument(format!(
            "{f} is not supported on [0, 1]"
        )));
    }
    Ok(())
}

fn inv_sqrt_density(f: &ContinuousModel) -> ScalarField {
    let m = f.clone();
    ScalarField::new(format!("f^(-1/2)[{f}]"), move |x| 1.0 / m.density(x).sqrt())
}

/// Position of a required point in the grid.
fn grid_index(grid: &EvalGrid, x: f64) -> Result<usize> {
    grid.xs()
        .binary_search_by(|g| g.total_cmp(&x))
        .map_err(|_| Error::InvalidArgument(format!("grid is missing the anchor point {x}")))
}

/// `b(x) = ∫_{y≤x} f^{-1/2} dv − [∫_A f^{-1/2} dv] · (E(x) − ∫_{y≤x} √f dy) / (√Δ − ∫_A √f dy)`
/// with `E(x) = |[0, x] ∩ A| / √Δ`.
#[derive(Clone, Debug)]
pub struct UniformEtaTransform {
    f: ContinuousModel,
    eta: EtaSpec,
    set: IntegrandSet,
    denom: f64,
}

impl UniformEtaTransform {
    pub fn new(f: &ContinuousModel, lo: f64, hi: f64) -> Result<Self> {
        check_unit_support(f)?;
        let eta = EtaSpec::new(EtaKind::UniformOnA, lo, hi, f)?;
        let scheme = Arc::new(QuadratureScheme::for_pair(f, &ContinuousModel::uniform())?);
        let set = IntegrandSet::new(Arc::clone(&scheme), vec![inv_sqrt_density(f)])?;
        let table = &set.tables()[0];
        let root_mass_a = table.at(&scheme.locate(hi)) - table.at(&scheme.locate(lo));
        let denom = eta.delta().sqrt() - root_mass_a;
        if denom.abs() < DENOM_FLOOR {
            return Err(Error::Degenerate(format!(
                "√Δ − ∫_A √f dy = {denom:e} for A = [{lo}, {hi}]"
            )));
        }
        Ok(Self {
            f: f.clone(),
            eta,
            set,
            denom,
        })
    }

    pub fn eta(&self) -> &EtaSpec {
        &self.eta
    }

    /// `√(1 − Δ)`, the scale of the limit on `[sup A, 1]`.
    pub fn normalizer(&self) -> f64 {
        (1.0 - self.eta.delta()).sqrt()
    }

    /// The drift coefficient's denominator `√Δ − ∫_A √f dy`.
    pub fn denominator(&self) -> f64 {
        self.denom
    }

    /// `∫_A η_A db` from a path containing both ends of `A`.
    pub fn eta_integral(&self, path: &ProcessPath) -> Result<f64> {
        let at = |x: f64| -> Result<f64> {
            let k = path
                .grid()
                .binary_search_by(|g| g.total_cmp(&x))
                .map_err(|_| Error::InvalidArgument(format!("path lacks the point {x}")))?;
            Ok(path.values_right()[k])
        };
        Ok((at(self.eta.hi)? - at(self.eta.lo)?) / self.eta.delta().sqrt())
    }
}

impl PathTransform for UniformEtaTransform {
    fn label(&self) -> String {
        format!(
            "motion-uniform-eta({}; A=[{},{}])",
            self.f, self.eta.lo, self.eta.hi
        )
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

    fn required_points(&self) -> Vec<f64> {
        vec![self.eta.lo, self.eta.hi]
    }

    fn time(&self, x: f64) -> f64 {
        x
    }

    fn evaluate(&self, grid: &EvalGrid, driver: &DriverValues) -> Result<Values> {
        let running = driver.cumulative(0);
        let i_lo = grid_index(grid, self.eta.lo)?;
        let i_hi = grid_index(grid, self.eta.hi)?;
        let over_a = running[i_hi].right - running[i_lo].right;
        let coef = over_a / self.denom;
        let root_mass = self.set.tables()[0].on(grid);
        let sqrt_delta = self.eta.delta().sqrt();
        let mut left = Vec::with_capacity(grid.len());
        let mut right = Vec::with_capacity(grid.len());
        for (k, x) in grid.xs().iter().enumerate() {
            let in_a = (x.min(self.eta.hi) - self.eta.lo).max(0.0) / sqrt_delta;
            let drift = coef * (in_a - root_mass[k]);
            left.push(running[k].left - drift);
            right.push(running[k].right - drift);
        }
        Ok(Values { left, right })
    }
}

/// Off `A`: `b(dx) = v(dx)/√f + v(A) √f(x) dx / (√F(A) − F(A))`,
/// accumulated upward from `sup A` and downward from `inf A`.
#[derive(Clone, Debug)]
pub struct ConditionalEtaTransform {
    f: ContinuousModel,
    eta: EtaSpec,
    set: IntegrandSet,
    factor: f64,
}

impl ConditionalEtaTransform {
    pub fn new(f: &ContinuousModel, lo: f64, hi: f64) -> Result<Self> {
        check_unit_support(f)?;
        let mass = f.cdf(hi) - f.cdf(lo);
        if !(mass > DENOM_FLOOR && mass < 1.0 - DENOM_FLOOR) {
            return Err(Error::Degenerate(format!(
                "F(A) = {mass} for A = [{lo}, {hi}]; need 0 < F(A) < 1"
            )));
        }
        let eta = EtaSpec::new(EtaKind::ConditionalOnA, lo, hi, f)?;
        let scheme = Arc::new(QuadratureScheme::for_pair(f, &ContinuousModel::uniform())?);
        let set = IntegrandSet::new(scheme, vec![inv_sqrt_density(f), ScalarField::one()])?;
        Ok(Self {
            f: f.clone(),
            eta,
            set,
            factor: 1.0 / (mass.sqrt() - mass),
        })
    }

    pub fn eta(&self) -> &EtaSpec {
        &self.eta
    }

    /// `1/(√F(A) − F(A))`.
    pub fn drift_factor(&self) -> f64 {
        self.factor
    }

    pub fn normalizer(&self) -> f64 {
        (1.0 - self.eta.delta()).sqrt()
    }
}

impl PathTransform for ConditionalEtaTransform {
    fn label(&self) -> String {
        format!(
            "motion-conditional-eta({}; A=[{},{}])",
            self.f, self.eta.lo, self.eta.hi
        )
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

    fn required_points(&self) -> Vec<f64> {
        vec![self.eta.lo, self.eta.hi]
    }

    fn time(&self, x: f64) -> f64 {
        x
    }

    fn in_domain(&self, x: f64) -> bool {
        x <= self.eta.lo || x >= self.eta.hi
    }

    fn evaluate(&self, grid: &EvalGrid, driver: &DriverValues) -> Result<Values> {
        let scaled = driver.cumulative(0);
        let plain = driver.cumulative(1);
        let i_lo = grid_index(grid, self.eta.lo)?;
        let i_hi = grid_index(grid, self.eta.hi)?;
        let coef = (plain[i_hi].right - plain[i_lo].right) * self.factor;
        let root_mass = self.set.tables()[0].on(grid);
        let mut left = Vec::with_capacity(grid.len());
        let mut right = Vec::with_capacity(grid.len());
        for (k, x) in grid.xs().iter().enumerate() {
            if *x >= self.eta.hi {
                let drift = coef * (root_mass[k] - root_mass[i_hi]);
                left.push(scaled[k].left - scaled[i_hi].right + drift);
                right.push(scaled[k].right - scaled[i_hi].right + drift);
            } else if *x <= self.eta.lo {
                // ∫ over (x, inf A] for the right value, [x, inf A] for the left.
                let drift = coef * (root_mass[i_lo] - root_mass[k]);
                left.push(scaled[i_lo].right - scaled[k].left + drift);
                right.push(scaled[i_lo].right - scaled[k].right + drift);
            } else {
                return Err(Error::InvalidArgument(format!(
                    "x = {x} lies inside A, where the process is not defined"
                )));
            }
        }
        Ok(Values { left, right })
    }
}

/// On `[Δ, 1]`: `V(x) = v(x) − v(Δ) + v(Δ) (F(x) − F(Δ)) / (√F(Δ) − F(Δ))`.
#[derive(Clone, Debug)]
pub struct IntegratedTransform {
    f: ContinuousModel,
    delta: f64,
    f_delta: f64,
    set: IntegrandSet,
}

impl IntegratedTransform {
    pub fn new(f: &ContinuousModel, delta: f64) -> Result<Self> {
        check_unit_support(f)?;
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "Δ = {delta} must lie strictly inside (0, 1)"
            )));
        }
        let f_delta = f.cdf(delta);
        if !(f_delta > DENOM_FLOOR && f_delta < 1.0 - DENOM_FLOOR) {
            return Err(Error::Degenerate(format!(
                "F(Δ) = {f_delta}; need 0 < F(Δ) < 1"
            )));
        }
        let set = IntegrandSet::new(Arc::new(QuadratureScheme::new(f)), vec![ScalarField::one()])?;
        Ok(Self {
            f: f.clone(),
            delta,
            f_delta,
            set,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `√(1 − F(Δ))`.
    pub fn normalizer(&self) -> f64 {
        (1.0 - self.f_delta).sqrt()
    }
}

impl PathTransform for IntegratedTransform {
    fn label(&self) -> String {
        format!("motion-integrated({}; delta={})", self.f, self.delta)
    }

    fn base_model(&self) -> &ContinuousModel {
        &self.f
    }

    fn integrands(&self) -> &IntegrandSet {
        &self.set
    }

    fn mesh(&self, size: usize) -> Vec<f64> {
        uniform_mesh(self.delta, 1.0, size)
    }

    fn required_points(&self) -> Vec<f64> {
        vec![self.delta]
    }

    fn time(&self, x: f64) -> f64 {
        self.f.cdf(x)
    }

    fn in_domain(&self, x: f64) -> bool {
        x >= self.delta
    }

    fn evaluate(&self, grid: &EvalGrid, driver: &DriverValues) -> Result<Values> {
        let v = driver.cumulative(0);
        let i_d = grid_index(grid, self.delta)?;
        let v_delta = v[i_d].right;
        let factor = v_delta / (self.f_delta.sqrt() - self.f_delta);
        let mut left = Vec::with_capacity(grid.len());
        let mut right = Vec::with_capacity(grid.len());
        for (k, x) in grid.xs().iter().enumerate() {
            let drift = factor * (self.f.cdf(*x) - self.f_delta);
            left.push(v[k].left - v_delta + drift);
            right.push(v[k].right - v_delta + drift);
        }
        Ok(Values { left, right })
    }
}

pub fn transform_motion_uniform_eta(
    sample: &Sample,
    f: &ContinuousModel,
    lo: f64,
    hi: f64,
    mesh_size: usize,
) -> Result<ProcessPath> {
    apply_transform(&UniformEtaTransform::new(f, lo, hi)?, sample, mesh_size)
}

pub fn transform_motion_conditional_eta(
    sample: &Sample,
    f: &ContinuousModel,
    lo: f64,
    hi: f64,
    mesh_size: usize,
) -> Result<ProcessPath> {
    apply_transform(&ConditionalEtaTransform::new(f, lo, hi)?, sample, mesh_size)
}

pub fn transform_motion_integrated(
    sample: &Sample,
    f: &ContinuousModel,
    delta: f64,
    mesh_size: usize,
) -> Result<ProcessPath> {
    apply_transform(&IntegratedTransform::new(f, delta)?, sample, mesh_size)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{draw_sample, empirical_process_value};

    #[test]
    fn eta_spec_is_unit_on_a() {
        let f = ContinuousModel::beta(3.0, 3.0).unwrap();
        let space = crate::l2geom::L2Space::continuous(&ContinuousModel::uniform());
        for kind in [EtaKind::UniformOnA, EtaKind::ConditionalOnA] {
            let e = EtaSpec::new(kind, 0.2, 0.45, &f).unwrap();
            assert_eq!(e.eta().eval(0.5), 0.0);
            if kind == EtaKind::UniformOnA {
                assert!((space.norm_sq(e.eta()) - 1.0).abs() < 1e-10);
            }
        }
        assert!(EtaSpec::new(EtaKind::UniformOnA, 0.5, 0.5, &f).is_err());
        assert!(EtaSpec::new(EtaKind::UniformOnA, -0.1, 0.5, &f).is_err());
    }

    #[test]
    fn uniform_eta_vanishes_on_a_and_matches_closed_form_at_unit_density() {
        let f = ContinuousModel::beta(1.0, 1.0).unwrap();
        let s = draw_sample(&f, 100, 5).unwrap();
        let delta = 0.25;
        let t = UniformEtaTransform::new(&f, 0.0, delta).unwrap();
        let path = apply_transform(&t, &s, 64).unwrap();
        assert!(t.eta_integral(&path).unwrap().abs() < 1e-10);
        let u_delta = empirical_process_value(&s, &f, delta);
        for (x, b) in path.grid().iter().zip(path.values_right()) {
            if *x > delta {
                let u = empirical_process_value(&s, &f, *x);
                let closed = u - u_delta + u_delta * (x - delta) / (delta.sqrt() - delta);
                assert!((b - closed).abs() < 1e-10, "x={x}: {b} vs {closed}");
            }
        }
    }

    #[test]
    fn conditional_eta_drift_factor_and_domain() {
        let f = ContinuousModel::uniform();
        let t = ConditionalEtaTransform::new(&f, 0.0, 0.25).unwrap();
        assert!((t.drift_factor() - 4.0).abs() < 1e-12);
        let s = draw_sample(&f, 30, 2).unwrap();
        let path = apply_transform(&t, &s, 32).unwrap();
        assert!(path.grid().iter().all(|x| !(*x > 0.0 && *x < 0.25)));
        assert_eq!(path.value_at(0.25), Some(0.0));
    }

    #[test]
    fn integrated_transform_examples() {
        let f = ContinuousModel::beta(3.0, 3.0).unwrap();
        let s = draw_sample(&f, 50, 9).unwrap();
        let delta = 0.3;
        let t = IntegratedTransform::new(&f, delta).unwrap();
        let path = apply_transform(&t, &s, 32).unwrap();
        assert!(path.value_at(delta).unwrap().abs() < 1e-12);
        let fd = f.cdf(delta);
        let x = f.quantile(fd + fd.sqrt() - fd);
        let s2 = Sample::new(s.sorted().to_vec()).unwrap();
        let grid = t.integrands().scheme().eval_grid(&[delta, x]);
        let driver = DriverValues::empirical(t.integrands(), &s2, &grid).unwrap();
        let v = t.evaluate(&grid, &driver).unwrap();
        let vx = empirical_process_value(&s, &f, x);
        assert!((v.right[1] - vx).abs() < 1e-10);
    }
}
