//! Finite-sample rotations of the empirical process for simple hypotheses:
//! `F`-bridge to `G`-bridge, `F`-bridge to the standard bridge, the
//! discrete analogue, and the product time map.

mod discrete;
mod driver;
mod path;
mod simple;

pub use discrete::{bridge_covariance, transform_discrete, DiscreteProcess, DiscreteTransform};
pub use driver::{DriverValues, IntegrandSet, Jump};
pub use path::ProcessPath;
pub use simple::{SimpleTransform, StandardBridgeTransform, NEAR_DEGENERATE};

use crate::error::{Error, Result};
use crate::model::{ContinuousModel, EvalGrid, Sample};

/// Default number of mesh points added to the sample's jump points.
pub const DEFAULT_MESH: usize = 512;

/// Left and right values of a transformed process on a grid.
#[derive(Clone, Debug, Default)]
pub struct Values {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

/// A linear transformation of the driving process, evaluated on a grid.
///
/// Implementations declare the integrands through which they read the
/// driving process; [`DriverValues`] supplies the corresponding cumulative
/// integrals, either from a sample or from a simulated Gaussian limit.
pub trait PathTransform: Send + Sync {
    fn label(&self) -> String;

    /// The hypothesized law of the observations.
    fn base_model(&self) -> &ContinuousModel;

    fn integrands(&self) -> &IntegrandSet;

    /// Deterministic evaluation points; sample points are added to these.
    fn mesh(&self, size: usize) -> Vec<f64>;

    /// Points every evaluation grid must contain (anchors of the drift).
    fn required_points(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Intrinsic time of a grid point, used by integral statistics.
    fn time(&self, x: f64) -> f64;

    /// Whether the transformed process is defined at `x`.
    fn in_domain(&self, _x: f64) -> bool {
        true
    }

    fn evaluate(&self, grid: &EvalGrid, driver: &DriverValues) -> Result<Values>;
}

/// `size` equally spaced points from `lo` to `hi` inclusive.
pub fn uniform_mesh(lo: f64, hi: f64, size: usize) -> Vec<f64> {
    if size == 1 {
        return vec![lo];
    }
    (0..size)
        .map(|k| {
            if k + 1 == size {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (size - 1) as f64
            }
        })
        .collect()
}

/// Sorted union of the transform's mesh and the sample points, restricted
/// to the transform's domain.
pub fn path_grid(t: &dyn PathTransform, sample: &Sample, mesh_size: usize) -> Vec<f64> {
    let mut xs = t.mesh(mesh_size);
    xs.extend(t.required_points());
    xs.extend_from_slice(sample.sorted());
    xs.retain(|x| !x.is_nan() && t.in_domain(*x));
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// Runs a transform on the empirical process of `sample`.
pub fn apply_transform(
    t: &dyn PathTransform,
    sample: &Sample,
    mesh_size: usize,
) -> Result<ProcessPath> {
    if mesh_size < 2 {
        return Err(Error::InvalidArgument(format!(
            "mesh size must be at least 2, got {mesh_size}"
        )));
    }
    sample.check_support(t.base_model())?;
    let xs = path_grid(t, sample, mesh_size);
    let grid = t.integrands().scheme().eval_grid(&xs);
    let driver = DriverValues::empirical(t.integrands(), sample, &grid)?;
    Ok(evaluate_on(t, &grid, &driver)?.with_meta("n", sample.n()))
}

/// Runs a transform on given driver values.
pub fn evaluate_on(
    t: &dyn PathTransform,
    grid: &EvalGrid,
    driver: &DriverValues,
) -> Result<ProcessPath> {
    let values = t.evaluate(grid, driver)?;
    let time = grid.xs().iter().map(|x| t.time(*x)).collect();
    Ok(
        ProcessPath::new(grid.xs().to_vec(), time, values.left, values.right)?
            .with_meta("transform", t.label())
            .with_meta("model", t.base_model().name()),
    )
}

/// `ṽ_n` carrying the `F`-bridge to the `G`-bridge.
pub fn transform_simple(
    sample: &Sample,
    f: &ContinuousModel,
    g: &ContinuousModel,
    mesh_size: usize,
) -> Result<ProcessPath> {
    apply_transform(&SimpleTransform::new(f, g)?, sample, mesh_size)
}

/// `ũ_n` carrying the `F`-bridge to the standard Brownian bridge.
pub fn transform_to_standard_bridge(
    sample: &Sample,
    f: &ContinuousModel,
    mesh_size: usize,
) -> Result<ProcessPath> {
    apply_transform(&StandardBridgeTransform::new(f)?, sample, mesh_size)
}

/// Componentwise time change `t_i = G_i(x_i)` onto the unit cube.
pub fn product_time_map(components: &[ContinuousModel], x: &[f64]) -> Result<Vec<f64>> {
    if components.len() != x.len() {
        return Err(Error::InvalidArgument(format!(
            "{} components but a point of dimension {}",
            components.len(),
            x.len()
        )));
    }
    Ok(components.iter().zip(x).map(|(g, xi)| g.cdf(*xi)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::draw_sample;

    fn two_x() -> ContinuousModel {
        ContinuousModel::parse("2x").unwrap()
    }

    #[test]
    fn single_point_matches_hand_expansion() {
        let u = ContinuousModel::uniform();
        let s = Sample::new(vec![0.25]).unwrap();
        let path = transform_simple(&s, &u, &two_x(), 16).unwrap();
        // n = 1: ∫_{y≤x} l dv = l(X)1{X≤x} − ∫_0^x √(2y) dy, with ∫_0^x √(2y) dy = (2√2/3) x^{3/2}.
        let c = 2.0 * 2f64.sqrt() / 3.0;
        let x: f64 = 0.25;
        let running = 0.5f64.sqrt() - c * x.powf(1.5);
        let total = 0.5f64.sqrt() - c;
        let expected = running - total * (x * x - c * x.powf(1.5)) / (1.0 - c);
        let got = path.value_at(0.25).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
        assert!(path.final_value().unwrap().abs() < 1e-12);
    }

    #[test]
    fn equal_models_are_rejected() {
        let u = ContinuousModel::uniform();
        assert!(matches!(
            SimpleTransform::new(&u, &u),
            Err(Error::Degenerate(_))
        ));
        assert!(StandardBridgeTransform::new(&u).is_err());
    }

    #[test]
    fn standard_bridge_agrees_with_simple_toward_uniform() {
        let f = ContinuousModel::beta(3.0, 3.0).unwrap();
        let s = draw_sample(&f, 200, 11).unwrap();
        let a = transform_to_standard_bridge(&s, &f, 64).unwrap();
        let simple = SimpleTransform::new(&f, &ContinuousModel::uniform()).unwrap();
        let grid = simple.integrands().scheme().eval_grid(a.grid());
        let driver = DriverValues::empirical(simple.integrands(), &s, &grid).unwrap();
        let b = evaluate_on(&simple, &grid, &driver).unwrap();
        let worst = a
            .values_right()
            .iter()
            .zip(b.values_right())
            .chain(a.values_left().iter().zip(b.values_left()))
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-10, "{worst}");
        assert!(a.final_value().unwrap().abs() < 1e-10);
    }

    #[test]
    fn discrete_example() {
        let p = crate::model::DiscreteModel::on_cells(vec![0.25, 0.75]).unwrap();
        let q = crate::model::DiscreteModel::on_cells(vec![0.5, 0.5]).unwrap();
        let t = DiscreteTransform::new(&p, &q).unwrap();
        assert!((t.drift_factor() - 29.347_740_270_490_636).abs() < 1e-9);
        let out = t.transform_counts(&[10, 0]).unwrap();
        assert!(out.total().abs() < 1e-12);
        let pushed = t.pushforward(&bridge_covariance(&p));
        let target = bridge_covariance(&q);
        assert!((pushed - target).abs().max() < 1e-12);
    }

    #[test]
    fn time_map_examples() {
        let e = ContinuousModel::exponential(1.0).unwrap();
        let t = product_time_map(&[e.clone(), e], &[2f64.ln(), 4f64.ln()]).unwrap();
        assert!((t[0] - 0.5).abs() < 1e-15 && (t[1] - 0.75).abs() < 1e-15);
        let u = ContinuousModel::uniform();
        assert_eq!(product_time_map(&[u], &[0.3]).unwrap(), vec![0.3]);
    }

    #[test]
    fn csv_round_trip() {
        let path = ProcessPath::new(
            vec![0.0, 0.5],
            vec![0.0, 0.5],
            vec![0.0, 0.1],
            vec![0.0, 0.2],
        )
        .unwrap()
        .with_meta("transform", "demo");
        let back = ProcessPath::from_csv(&path.to_csv()).unwrap();
        assert_eq!(back, path);
    }
}
