//! Composite Gauss–Legendre quadrature in the probability scale.
//!
//! Integrals `∫ ψ dF` are computed as `∫₀¹ ψ(Q(u)) r(Q(u)) du`, where `Q` is
//! the quantile function of a reference measure `M` and `r = dF/dM`. With
//! `M = F` this is the familiar quantile substitution, which flattens
//! integrable endpoint singularities of the density and maps infinite
//! supports to the unit interval. For a pair `(F, G)` the reference is the
//! mixture `(F + G)/2`, so integrands such as `dG/dF` stay bounded in the
//! probability scale even where `G` puts mass that `F` hardly sees.
//!
//! The unit interval is cut into equal panels, and the two outermost panels
//! are refined geometrically towards `0` and `1` instead of truncating the
//! tails.

use std::sync::OnceLock;

use super::distributions::{solve_increasing, ContinuousModel};
use super::field::ScalarField;
use crate::error::{Error, Result};

/// Nodes per panel.
pub const ORDER: usize = 12;
/// Default number of equal panels on `[0, 1]`.
pub const DEFAULT_PANELS: usize = 512;
/// Geometric refinement levels inside each outermost panel.
const GRADING_LEVELS: i32 = 40;
const GRADING_FACTOR: f64 = 2.0;

struct GaussLegendre {
    nodes: [f64; ORDER],
    weights: [f64; ORDER],
}

/// Legendre polynomial values `P_0(t), ..., P_ORDER(t)`.
fn legendre_values(t: f64) -> [f64; ORDER + 1] {
    let mut p = [0.0; ORDER + 1];
    p[0] = 1.0;
    p[1] = t;
    for k in 1..ORDER {
        let kf = k as f64;
        p[k + 1] = ((2.0 * kf + 1.0) * t * p[k] - kf * p[k - 1]) / (kf + 1.0);
    }
    p
}

fn gauss_legendre() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| {
        let (t, w) = gauss_legendre_rule(ORDER);
        let mut nodes = [0.0; ORDER];
        let mut weights = [0.0; ORDER];
        nodes.copy_from_slice(&t);
        weights.copy_from_slice(&w);
        GaussLegendre { nodes, weights }
    })
}

/// Nodes (ascending) and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "a quadrature rule needs at least one node");
    // (P_n(t), P_{n-1}(t)) by the three-term recurrence.
    let eval = |t: f64| {
        let (mut prev, mut cur) = (1.0, t);
        if n == 1 {
            return (cur, prev);
        }
        for k in 1..n {
            let kf = k as f64;
            let next = ((2.0 * kf + 1.0) * t * cur - kf * prev) / (kf + 1.0);
            prev = cur;
            cur = next;
        }
        (cur, prev)
    };
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Tricomi's approximation, then Newton on P_n.
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, q) = eval(t);
            let dp = n as f64 * (t * p - q) / (t * t - 1.0);
            let step = p / dp;
            t -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (p, q) = eval(t);
        let dp = n as f64 * (t * p - q) / (t * t - 1.0);
        nodes[n - 1 - i] = t;
        weights[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    (nodes, weights)
}

/// `∫_{-1}^{t} P_k(s) ds` for `k = 0..ORDER`.
fn legendre_antiderivatives(t: f64) -> [f64; ORDER] {
    let p = legendre_values(t);
    let mut omega = [0.0; ORDER];
    omega[0] = t + 1.0;
    for k in 1..ORDER {
        omega[k] = (p[k + 1] - p[k - 1]) / (2 * k + 1) as f64;
    }
    omega
}

#[derive(Clone, Debug)]
enum Reference {
    Model,
    Mixture(ContinuousModel),
}

/// Where a point falls relative to the panels of a scheme.
#[derive(Clone, Debug, PartialEq)]
pub enum Locator {
    /// At or below the lower support end: cumulative integrals vanish.
    Start,
    /// At or above the upper support end: cumulative integrals are totals.
    End,
    /// Inside a panel, with the Legendre antiderivatives at the local coordinate.
    Inside { panel: usize, omega: [f64; ORDER] },
}

/// Quadrature for integrals against a continuous model `F`.
#[derive(Clone, Debug)]
pub struct QuadratureScheme {
    model: ContinuousModel,
    reference: Reference,
    support: (f64, f64),
    edges: Vec<f64>,
    /// `1 − edges`, computed directly so the upper tail keeps precision.
    edges_c: Vec<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    ratio: Vec<f64>,
    cumulative_prefix: Vec<f64>,
}

impl QuadratureScheme {
    /// Scheme in the probability scale of `model` itself.
    pub fn new(model: &ContinuousModel) -> Self {
        Self::build(model, Reference::Model, DEFAULT_PANELS)
            .expect("single-model scheme cannot fail")
    }

    /// Scheme for `F = model` whose reference measure is `(F + G)/2`.
    ///
    /// Use this when integrands involve `dG/dF`.
    pub fn for_pair(model: &ContinuousModel, other: &ContinuousModel) -> Result<Self> {
        if model == other {
            return Ok(Self::new(model));
        }
        Self::build(model, Reference::Mixture(other.clone()), DEFAULT_PANELS)
    }

    pub fn with_panels(
        model: &ContinuousModel,
        other: Option<&ContinuousModel>,
        panels: usize,
    ) -> Result<Self> {
        if panels < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 panels, got {panels}"
            )));
        }
        let reference = match other {
            Some(g) if g != model => Reference::Mixture(g.clone()),
            _ => Reference::Model,
        };
        Self::build(model, reference, panels)
    }

    fn build(model: &ContinuousModel, reference: Reference, panels: usize) -> Result<Self> {
        let support = match &reference {
            Reference::Model => model.support(),
            Reference::Mixture(g) => {
                let (a, b) = model.support();
                let (c, d) = g.support();
                (a.min(c), b.max(d))
            }
        };
        let (edges, edges_c) = graded_edges(panels);
        let rule = gauss_legendre();
        let mut scheme = Self {
            model: model.clone(),
            reference,
            support,
            edges,
            edges_c,
            nodes: Vec::new(),
            weights: Vec::new(),
            ratio: Vec::new(),
            cumulative_prefix: Vec::new(),
        };
        let npanels = scheme.edges.len() - 1;
        scheme.nodes.reserve(npanels * ORDER);
        for p in 0..npanels {
            let (a, b) = (scheme.edges[p], scheme.edges[p + 1]);
            let hw = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            let mid_c = 0.5 * (scheme.edges_c[p] + scheme.edges_c[p + 1]);
            for j in 0..ORDER {
                let u = mid + hw * rule.nodes[j];
                let v = mid_c - hw * rule.nodes[j];
                let x = scheme.reference_quantile(u, v);
                let r = scheme.density_ratio(x);
                if !r.is_finite() {
                    return Err(Error::Quadrature(format!(
                        "density ratio not finite at x={x}"
                    )));
                }
                scheme.nodes.push(x);
                scheme.ratio.push(r);
                scheme.weights.push(rule.weights[j] * hw * r);
            }
        }
        let mut acc = 0.0;
        scheme.cumulative_prefix = scheme
            .weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Ok(scheme)
    }

    pub fn model(&self) -> &ContinuousModel {
        &self.model
    }

    /// The second model of a pair scheme, if any.
    pub fn partner(&self) -> Option<&ContinuousModel> {
        match &self.reference {
            Reference::Model => None,
            Reference::Mixture(g) => Some(g),
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights of `dF` at the nodes.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Running sums of the weights, node by node.
    pub fn cumulative_prefix(&self) -> &[f64] {
        &self.cumulative_prefix
    }

    pub fn panels(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    fn reference_cdf(&self, x: f64) -> f64 {
        match &self.reference {
            Reference::Model => self.model.cdf(x),
            Reference::Mixture(g) => 0.5 * (self.model.cdf(x) + g.cdf(x)),
        }
    }

    fn reference_sf(&self, x: f64) -> f64 {
        match &self.reference {
            Reference::Model => self.model.sf(x),
            Reference::Mixture(g) => 0.5 * (self.model.sf(x) + g.sf(x)),
        }
    }

    /// Reference quantile at `u`, with `v = 1 − u` supplied for the upper tail.
    fn reference_quantile(&self, u: f64, v: f64) -> f64 {
        let lower = u <= 0.5;
        match &self.reference {
            Reference::Model => {
                if lower {
                    self.model.quantile(u)
                } else {
                    self.model.quantile_upper(v)
                }
            }
            Reference::Mixture(g) => {
                let (a, b) = if lower {
                    (self.model.quantile(u), g.quantile(u))
                } else {
                    (self.model.quantile_upper(v), g.quantile_upper(v))
                };
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                if lo == hi {
                    return lo;
                }
                let pdf = |x: f64| 0.5 * (self.model.density(x) + g.density(x));
                let start = 0.5 * (lo + hi);
                if lower {
                    solve_increasing(u, lo, hi, start, |x| self.reference_cdf(x), pdf)
                } else {
                    solve_increasing(-v, lo, hi, start, |x| -self.reference_sf(x), pdf)
                }
            }
        }
    }

    fn density_ratio(&self, x: f64) -> f64 {
        match &self.reference {
            Reference::Model => 1.0,
            Reference::Mixture(g) => {
                let f = self.model.density(x);
                let gx = g.density(x);
                if f == 0.0 {
                    0.0
                } else if f.is_infinite() {
                    2.0
                } else {
                    2.0 * f / (f + gx)
                }
            }
        }
    }

    /// `∫ ψ dF`.
    pub fn integrate(&self, psi: &ScalarField) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * psi.eval(*x))
            .sum()
    }

    /// `∫ ψ dF` from values of `ψ` at the nodes.
    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.nodes.len());
        values.iter().zip(&self.weights).map(|(v, w)| w * v).sum()
    }

    pub fn inner(&self, phi: &ScalarField, psi: &ScalarField) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * phi.eval(*x) * psi.eval(*x))
            .sum()
    }

    pub fn values(&self, psi: &ScalarField) -> Vec<f64> {
        self.nodes.iter().map(|x| psi.eval(*x)).collect()
    }

    /// Cumulative integral table of `ψ dF`, checking that the values are finite.
    pub fn table(&self, psi: &ScalarField) -> Result<CumulativeTable> {
        let values = self.values(psi);
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Quadrature(format!(
                "integrand `{}` is not finite at x={}",
                psi.label(),
                self.nodes[i]
            )));
        }
        Ok(self.table_from_values(&values))
    }

    pub fn table_from_values(&self, values: &[f64]) -> CumulativeTable {
        assert_eq!(values.len(), self.nodes.len(), "one value per node");
        let rule = gauss_legendre();
        let legendre_at_nodes: Vec<[f64; ORDER + 1]> =
            rule.nodes.iter().map(|t| legendre_values(*t)).collect();
        let npanels = self.panels();
        let mut prefix = Vec::with_capacity(npanels + 1);
        let mut coeffs = Vec::with_capacity(npanels);
        let mut acc = 0.0;
        prefix.push(0.0);
        for p in 0..npanels {
            let hw = 0.5 * (self.edges[p + 1] - self.edges[p]);
            let mut c = [0.0; ORDER];
            let mut total = 0.0;
            for j in 0..ORDER {
                let idx = p * ORDER + j;
                let h = values[idx] * self.ratio[idx];
                total += self.weights[idx] * values[idx];
                let wh = rule.weights[j] * h;
                for (k, ck) in c.iter_mut().enumerate() {
                    *ck += wh * legendre_at_nodes[j][k];
                }
            }
            for (k, ck) in c.iter_mut().enumerate() {
                *ck *= hw * (2 * k + 1) as f64 / 2.0;
            }
            coeffs.push(c);
            acc += total;
            prefix.push(acc);
        }
        CumulativeTable { prefix, coeffs }
    }

    /// Position of `x` for cumulative-integral lookups.
    pub fn locate(&self, x: f64) -> Locator {
        if x.is_nan() {
            return Locator::Start;
        }
        let (lo, hi) = self.support;
        if x <= lo {
            return Locator::Start;
        }
        if x >= hi {
            return Locator::End;
        }
        let u = self.reference_cdf(x);
        let t = if u <= 0.5 {
            if u <= 0.0 {
                return Locator::Start;
            }
            let p = self
                .edges
                .partition_point(|e| *e <= u)
                .clamp(1, self.edges.len() - 1)
                - 1;
            let (a, b) = (self.edges[p], self.edges[p + 1]);
            (p, 2.0 * (u - a) / (b - a) - 1.0)
        } else {
            let v = self.reference_sf(x);
            if v <= 0.0 {
                return Locator::End;
            }
            // Complements decrease along the panels.
            let p = self
                .edges_c
                .partition_point(|e| *e > v)
                .clamp(1, self.edges_c.len() - 1)
                - 1;
            let (a, b) = (self.edges_c[p], self.edges_c[p + 1]);
            (p, 2.0 * (a - v) / (a - b) - 1.0)
        };
        Locator::Inside {
            panel: t.0,
            omega: legendre_antiderivatives(t.1.clamp(-1.0, 1.0)),
        }
    }

    pub fn eval_grid(&self, xs: &[f64]) -> EvalGrid {
        EvalGrid {
            xs: xs.to_vec(),
            locators: xs.iter().map(|x| self.locate(*x)).collect(),
        }
    }
}

/// Panel edges on `[0, 1]` and their complements `1 − edge`.
fn graded_edges(panels: usize) -> (Vec<f64>, Vec<f64>) {
    let h = 1.0 / panels as f64;
    let mut low = vec![0.0];
    for level in (1..=GRADING_LEVELS).rev() {
        low.push(h * GRADING_FACTOR.powi(-level));
    }
    // Edges below one half are exact as `u`; above it, as `1 − u`.
    let mut edges = low.clone();
    let mut edges_c: Vec<f64> = low.iter().map(|u| 1.0 - u).collect();
    for i in 1..panels {
        let u = i as f64 * h;
        let c = (panels - i) as f64 * h;
        edges.push(if u <= 0.5 { u } else { 1.0 - c });
        edges_c.push(if u <= 0.5 { 1.0 - u } else { c });
    }
    for c in low.iter().rev() {
        edges.push(1.0 - c);
        edges_c.push(*c);
    }
    (edges, edges_c)
}

/// Prefix integrals of one integrand with per-panel Legendre coefficients,
/// so that `∫_{y ≤ x} ψ dF` is exact for the interpolating polynomial of
/// the integrand inside each panel.
#[derive(Clone, Debug)]
pub struct CumulativeTable {
    prefix: Vec<f64>,
    coeffs: Vec<[f64; ORDER]>,
}

impl CumulativeTable {
    pub fn total(&self) -> f64 {
        *self.prefix.last().expect("nonempty table")
    }

    pub fn at(&self, loc: &Locator) -> f64 {
        match loc {
            Locator::Start => 0.0,
            Locator::End => self.total(),
            Locator::Inside { panel, omega } => {
                let c = &self.coeffs[*panel];
                self.prefix[*panel] + c.iter().zip(omega).map(|(c, o)| c * o).sum::<f64>()
            }
        }
    }

    pub fn on(&self, grid: &EvalGrid) -> Vec<f64> {
        grid.locators.iter().map(|l| self.at(l)).collect()
    }
}

/// Evaluation points with precomputed panel locations.
#[derive(Clone, Debug)]
pub struct EvalGrid {
    xs: Vec<f64>,
    locators: Vec<Locator>,
}

impl EvalGrid {
    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn locators(&self) -> &[Locator] {
        &self.locators
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_high_degree_exactly() {
        let rule = gauss_legendre();
        let s: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(t, w)| w * t.powi(22))
            .sum();
        assert!((s - 2.0 / 23.0).abs() < 1e-14);
        assert!((rule.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn total_mass_is_one() {
        for m in [
            ContinuousModel::uniform(),
            ContinuousModel::beta(0.8, 1.5).unwrap(),
            ContinuousModel::standard_normal(),
            ContinuousModel::exponential(3.0).unwrap(),
        ] {
            let s = QuadratureScheme::new(&m);
            assert!(
                (s.integrate(&ScalarField::one()) - 1.0).abs() < 1e-12,
                "{m}"
            );
            assert!(s.weights().iter().all(|w| *w > 0.0));
        }
        let f = ContinuousModel::beta(3.0, 3.0).unwrap();
        let s = QuadratureScheme::for_pair(&f, &ContinuousModel::uniform()).unwrap();
        assert!((s.integrate(&ScalarField::one()) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn cumulative_integrals_match_closed_forms() {
        let m = ContinuousModel::standard_normal();
        let s = QuadratureScheme::new(&m);
        let t = s.table(&ScalarField::new("x", |x| x)).unwrap();
        let grid = s.eval_grid(&[-2.0, -0.3, 0.0, 1.7, f64::INFINITY]);
        // ∫_{-∞}^{x} y φ(y) dy = -φ(x)
        for (x, v) in grid.xs().iter().zip(t.on(&grid)) {
            let expect = -m.density(*x);
            assert!((v - expect).abs() < 1e-12, "x={x}: {v} vs {expect}");
        }
        let one = s.table(&ScalarField::one()).unwrap();
        for x in [0.01, 0.5, 2.5] {
            assert!((one.at(&s.locate(x)) - m.cdf(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn pair_scheme_integrates_likelihood_ratio() {
        let f = ContinuousModel::normal(0.0, 1.0).unwrap();
        let g = ContinuousModel::normal(5.0, 1.0).unwrap();
        let s = QuadratureScheme::for_pair(&f, &g).unwrap();
        let ratio = {
            let (f, g) = (f.clone(), g.clone());
            ScalarField::new("g/f", move |x| g.density(x) / f.density(x))
        };
        let table = s.table(&ratio).unwrap();
        assert!((table.total() - 1.0).abs() < 1e-10);
        for x in [3.0, 5.0, 6.5] {
            assert!((table.at(&s.locate(x)) - g.cdf(x)).abs() < 1e-10);
        }
    }
}
