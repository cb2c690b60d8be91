//! Geometry of `L2(F)`: inner products, the likelihood shift `l = √(dG/dF)`,
//! the Hellinger quantity `‖l − 1‖²`, and the one-dimensional unitary
//! rotations built from pairs of unit vectors.

mod rotation;
mod space;

pub use rotation::{
    build_chain, rotate, RotationChain, RotationStep, BASIS_TOLERANCE, DEGENERACY_THRESHOLD,
    UNIT_TOLERANCE,
};
pub use space::{inner_product, L2Space};

use crate::error::{Error, Result};
use crate::model::{ContinuousModel, DiscreteModel, QuadratureScheme, ScalarField};

/// The unit vector `l = √(dG/dF)` of `L2(F)` that represents `G`, together
/// with the space it lives in and its first two moments under `F`.
#[derive(Clone, Debug)]
pub struct LikelihoodShift {
    space: L2Space,
    l: ScalarField,
    mean: f64,
    norm_sq: f64,
}

impl LikelihoodShift {
    /// Continuous case. Integrals use the quadrature whose reference
    /// measure is `(F + G)/2`, which keeps `l² dF = dG` well resolved.
    pub fn new(f: &ContinuousModel, g: &ContinuousModel) -> Result<Self> {
        let scheme = QuadratureScheme::for_pair(f, g)?;
        for x in scheme.nodes() {
            if f.density(*x) == 0.0 && g.density(*x) > 0.0 {
                return Err(Error::AbsoluteContinuity { x: *x });
            }
        }
        let (fm, gm) = (f.clone(), g.clone());
        let l = ScalarField::new(format!("sqrt(d[{g}]/d[{f}])"), move |x| {
            let fx = fm.density(x);
            let gx = gm.density(x);
            if gx == 0.0 || fx.is_infinite() {
                0.0
            } else {
                (gx / fx).sqrt()
            }
        });
        Ok(Self::from_parts(L2Space::from_scheme(scheme), l))
    }

    /// Discrete case: `l(x) = √(π(x)/p(x))` on the shared atoms.
    pub fn discrete(f: &DiscreteModel, g: &DiscreteModel) -> Result<Self> {
        if !f.same_support(g) {
            return Err(Error::InvalidArgument(
                "discrete models must share the same atoms".into(),
            ));
        }
        let ratio: Vec<f64> = f
            .probs()
            .iter()
            .zip(g.probs())
            .map(|(p, q)| (q / p).sqrt())
            .collect();
        let fm = f.clone();
        let l = ScalarField::new(format!("sqrt(pi/p)[{}]", f.len()), move |x| {
            fm.index_of(x).map_or(0.0, |i| ratio[i])
        });
        Ok(Self::from_parts(L2Space::discrete(f), l))
    }

    fn from_parts(space: L2Space, l: ScalarField) -> Self {
        let mean = space.integrate(&l);
        let norm_sq = space.norm_sq(&l);
        Self {
            space,
            l,
            mean,
            norm_sq,
        }
    }

    pub fn l(&self) -> &ScalarField {
        &self.l
    }

    pub fn space(&self) -> &L2Space {
        &self.space
    }

    /// `⟨l, 1⟩_F = ∫ l dF`.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// `‖l‖²_F`, which is one up to quadrature error.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// `‖l − 1‖²_F` evaluated directly.
    pub fn hellinger_direct(&self) -> f64 {
        let one = ScalarField::one();
        self.space.norm_sq(&self.l.sub(&one))
    }

    /// `2 ∫ (1 − l) dF`.
    pub fn hellinger_via_mean(&self) -> f64 {
        2.0 * (1.0 - self.mean)
    }

    /// `‖l − 1‖²`, or a degeneracy error when `G = F` almost everywhere.
    pub fn hellinger_sq(&self) -> Result<f64> {
        let h = self.hellinger_via_mean();
        if h < DEGENERACY_THRESHOLD {
            Err(Error::Degenerate(format!(
                "Hellinger quantity {h:e}: the two distributions coincide"
            )))
        } else {
            Ok(h)
        }
    }

    /// The rotation `K_{1,l}` exchanging the constant function and `l`.
    pub fn rotation(&self) -> Result<RotationStep> {
        RotationStep::new(&ScalarField::one(), &self.l, &self.space)
    }
}

/// `l = √(dG/dF)`.
pub fn likelihood_shift(f: &ContinuousModel, g: &ContinuousModel) -> Result<ScalarField> {
    Ok(LikelihoodShift::new(f, g)?.l)
}

/// `‖l − 1‖²_F = 2 ∫ (1 − l) dF`, failing when `G = F`.
pub fn hellinger_sq(f: &ContinuousModel, g: &ContinuousModel) -> Result<f64> {
    LikelihoodShift::new(f, g)?.hellinger_sq()
}

pub fn hellinger_sq_discrete(f: &DiscreteModel, g: &DiscreteModel) -> Result<f64> {
    LikelihoodShift::discrete(f, g)?.hellinger_sq()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_x() -> ContinuousModel {
        ContinuousModel::parse("2x").unwrap()
    }

    #[test]
    fn inner_product_examples() {
        let space = L2Space::continuous(&ContinuousModel::uniform());
        let one = ScalarField::one();
        let y = ScalarField::new("y", |y| y);
        assert!((inner_product(&one, &one, &space) - 1.0).abs() < 1e-13);
        assert!((inner_product(&y, &one, &space) - 0.5).abs() < 1e-13);
        let sq = ScalarField::new("sin", f64::sin);
        assert!((space.inner(&y, &sq) - space.inner(&sq, &y)).abs() < 1e-14);
    }

    #[test]
    fn likelihood_shift_closed_forms() {
        let u = ContinuousModel::uniform();
        let ls = LikelihoodShift::new(&u, &two_x()).unwrap();
        assert!((ls.l().eval(0.32) - 0.8).abs() < 1e-14);
        assert!((ls.mean() - 2.0 * 2f64.sqrt() / 3.0).abs() < 1e-12);
        assert!((ls.norm_sq() - 1.0).abs() < 1e-12);
        let h = ls.hellinger_sq().unwrap();
        assert!((h - 0.114_381_916_835_873).abs() < 1e-11, "{h}");
        assert!((ls.hellinger_direct() - h).abs() < 1e-11);

        let same = LikelihoodShift::new(&u, &u).unwrap();
        assert!((same.l().eval(0.3) - 1.0).abs() < 1e-15);
        assert!(matches!(same.hellinger_sq(), Err(Error::Degenerate(_))));
    }

    #[test]
    fn absolute_continuity_is_checked() {
        let u = ContinuousModel::uniform();
        let n = ContinuousModel::standard_normal();
        assert!(matches!(
            LikelihoodShift::new(&u, &n),
            Err(Error::AbsoluteContinuity { .. })
        ));
        assert!(LikelihoodShift::new(&n, &u).is_ok());
    }

    #[test]
    fn discrete_likelihood_shift() {
        let p = DiscreteModel::on_cells(vec![0.25, 0.75]).unwrap();
        let q = DiscreteModel::on_cells(vec![0.5, 0.5]).unwrap();
        let ls = LikelihoodShift::discrete(&p, &q).unwrap();
        assert!((ls.l().eval(0.0) - 2f64.sqrt()).abs() < 1e-15);
        assert!((ls.l().eval(1.0) - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((ls.mean() - 0.965_925_826_289_068).abs() < 1e-12);
        assert!((ls.hellinger_sq().unwrap() - 0.068_148_347_421_864).abs() < 1e-12);
    }

    #[test]
    fn single_rotation_swaps_and_fixes() {
        let u = ContinuousModel::uniform();
        let ls = LikelihoodShift::new(&u, &two_x()).unwrap();
        let k = ls.rotation().unwrap();
        let space = ls.space();
        let one = ScalarField::one();
        let kl = k.apply(ls.l());
        assert!(space.norm(&kl.sub(&one)) < 1e-8);
        let k1 = k.apply(&one);
        for x in [0.1, 0.5, 0.9] {
            assert!((k1.eval(x) - (2.0 * x).sqrt()).abs() < 1e-8);
        }
        // Orthogonal to both 1 and √(2x): built by Gram–Schmidt.
        let y = ScalarField::new("y", |y| y);
        let c1 = space.inner(&y, &one);
        let r = y.combine(1.0, &one, -c1);
        let ls_c =
            space.inner(&r, ls.l()) / space.inner(&ls.l().combine(1.0, &one, -ls.mean()), ls.l());
        let lperp = ls.l().combine(1.0, &one, -ls.mean());
        let phi = r.combine(1.0, &lperp, -ls_c);
        assert!(space.inner(&phi, &one).abs() < 1e-10);
        assert!(space.inner(&phi, ls.l()).abs() < 1e-10);
        let kphi = k.apply(&phi);
        assert!(space.norm(&kphi.sub(&phi)) < 1e-8);
    }

    #[test]
    fn chain_with_trivial_pair_is_identity() {
        let space = L2Space::continuous(&ContinuousModel::uniform());
        let one = ScalarField::one();
        let chain = build_chain(std::slice::from_ref(&one), std::slice::from_ref(&one), &space).unwrap();
        assert!(chain.is_empty());
        assert_eq!(chain.skipped(), &[0]);
    }
}
