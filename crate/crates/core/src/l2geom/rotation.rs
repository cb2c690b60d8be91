use super::space::L2Space;
use crate::error::{Error, Result};
use crate::model::ScalarField;

/// Below this squared distance two unit vectors are treated as equal.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;
/// Tolerance on the unit norm of the two vectors a rotation exchanges.
pub const UNIT_TOLERANCE: f64 = 1e-8;
/// Tolerance on the orthonormality of the bases handed to [`build_chain`].
pub const BASIS_TOLERANCE: f64 = 1e-6;

/// The self-adjoint unitary operator
/// `K φ = φ − 2 (h − g) ⟨h − g, φ⟩ / ‖h − g‖²`,
/// which swaps the unit vectors `g` and `h` and fixes everything
/// orthogonal to both.
#[derive(Clone, Debug)]
pub struct RotationStep {
    g: ScalarField,
    h: ScalarField,
    direction: ScalarField,
    gap_norm_sq: f64,
    space: L2Space,
}

impl RotationStep {
    pub fn new(g: &ScalarField, h: &ScalarField, space: &L2Space) -> Result<Self> {
        for (name, f) in [("g", g), ("h", h)] {
            let norm_sq = space.norm_sq(f);
            if (norm_sq - 1.0).abs() > 2.0 * UNIT_TOLERANCE {
                return Err(Error::NotOrthonormal(format!(
                    "rotation endpoint {name} = `{}` has squared norm {norm_sq}",
                    f.label()
                )));
            }
        }
        let direction = h
            .sub(g)
            .relabel(format!("({}) - ({})", h.label(), g.label()));
        let gap_norm_sq = space.norm_sq(&direction);
        if gap_norm_sq < DEGENERACY_THRESHOLD {
            return Err(Error::Degenerate(format!(
                "‖h − g‖² = {gap_norm_sq:e}: `{}` and `{}` coincide",
                h.label(),
                g.label()
            )));
        }
        Ok(Self {
            g: g.clone(),
            h: h.clone(),
            direction,
            gap_norm_sq,
            space: space.clone(),
        })
    }

    pub fn g(&self) -> &ScalarField {
        &self.g
    }

    pub fn h(&self) -> &ScalarField {
        &self.h
    }

    /// `h − g`.
    pub fn direction(&self) -> &ScalarField {
        &self.direction
    }

    pub fn gap_norm_sq(&self) -> f64 {
        self.gap_norm_sq
    }

    pub fn space(&self) -> &L2Space {
        &self.space
    }

    /// The multiple of `h − g` that the step subtracts from `φ`.
    pub fn coefficient(&self, phi: &ScalarField) -> f64 {
        2.0 * self.space.inner(&self.direction, phi) / self.gap_norm_sq
    }

    pub fn apply(&self, phi: &ScalarField) -> ScalarField {
        let c = self.coefficient(phi);
        phi.combine(1.0, &self.direction, -c)
            .relabel(format!("K[{}]", phi.label()))
    }
}

/// `K_{g,h} φ`.
pub fn rotate(step: &RotationStep, phi: &ScalarField) -> ScalarField {
    step.apply(phi)
}

/// A product `K_S ⋯ K_1 K_0` of one-dimensional rotations that carries a
/// list of orthonormal functions onto another.
///
/// The product acts as `φ ↦ φ − Σ_s α_s(φ) d_s` with `d_s = h_s − g_s`;
/// the weights `α_s` depend on `φ` only through `⟨d_s, φ⟩`, so they can be
/// computed from inner products alone (see [`RotationChain::reflection_weights`]).
#[derive(Clone, Debug)]
pub struct RotationChain {
    space: L2Space,
    steps: Vec<RotationStep>,
    /// `⟨d_s, d_t⟩` for all pairs of retained steps.
    gram: Vec<Vec<f64>>,
    /// Basis positions whose pair already coincided, so no step was needed.
    skipped: Vec<usize>,
}

impl RotationChain {
    pub fn identity(space: &L2Space) -> Self {
        Self {
            space: space.clone(),
            steps: Vec::new(),
            gram: Vec::new(),
            skipped: Vec::new(),
        }
    }

    pub fn steps(&self) -> &[RotationStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn skipped(&self) -> &[usize] {
        &self.skipped
    }

    pub fn space(&self) -> &L2Space {
        &self.space
    }

    /// The directions `d_s = h_s − g_s`, in application order.
    pub fn directions(&self) -> Vec<ScalarField> {
        self.steps.iter().map(|s| s.direction().clone()).collect()
    }

    pub fn gaps(&self) -> Vec<f64> {
        self.steps.iter().map(RotationStep::gap_norm_sq).collect()
    }

    pub fn direction_gram(&self) -> &[Vec<f64>] {
        &self.gram
    }

    /// Weights `α_s` with `K̂ φ = φ − Σ α_s d_s`, given `⟨d_s, φ⟩` for every step.
    pub fn reflection_weights(&self, d_dot_phi: &[f64]) -> Vec<f64> {
        assert_eq!(
            d_dot_phi.len(),
            self.steps.len(),
            "one inner product per step"
        );
        let mut alpha: Vec<f64> = Vec::with_capacity(self.steps.len());
        for (s, step) in self.steps.iter().enumerate() {
            let carried: f64 = (0..s).map(|t| alpha[t] * self.gram[s][t]).sum();
            alpha.push(2.0 * (d_dot_phi[s] - carried) / step.gap_norm_sq());
        }
        alpha
    }

    pub fn apply(&self, phi: &ScalarField) -> ScalarField {
        if self.steps.is_empty() {
            return phi.clone();
        }
        let dots: Vec<f64> = self
            .steps
            .iter()
            .map(|s| self.space.inner(s.direction(), phi))
            .collect();
        let alpha = self.reflection_weights(&dots);
        let dirs = self.directions();
        let base = phi.clone();
        ScalarField::new(format!("Khat[{}]", phi.label()), move |x| {
            base.eval(x)
                - dirs
                    .iter()
                    .zip(&alpha)
                    .map(|(d, a)| a * d.eval(x))
                    .sum::<f64>()
        })
    }

    fn push(&mut self, step: RotationStep) {
        let d = step.direction().clone();
        let mut row: Vec<f64> = self
            .steps
            .iter()
            .map(|s| self.space.inner(s.direction(), &d))
            .collect();
        row.push(step.gap_norm_sq());
        for (t, v) in row.iter().enumerate().take(self.steps.len()) {
            self.gram[t].push(*v);
        }
        self.gram.push(row);
        self.steps.push(step);
    }
}

/// Builds the rotation chain taking `lr_basis[i]` to `q_basis[i]` for all `i`.
///
/// Step `i` pairs `q_basis[i]` with the image of `lr_basis[i]` under the
/// steps built so far. Pairs that already coincide are skipped and recorded.
pub fn build_chain(
    q_basis: &[ScalarField],
    lr_basis: &[ScalarField],
    space: &L2Space,
) -> Result<RotationChain> {
    if q_basis.len() != lr_basis.len() {
        return Err(Error::InvalidArgument(format!(
            "bases differ in length: {} vs {}",
            q_basis.len(),
            lr_basis.len()
        )));
    }
    for (name, basis) in [("q", q_basis), ("lr", lr_basis)] {
        let defect = space.orthonormality_defect(basis);
        if defect > BASIS_TOLERANCE {
            return Err(Error::NotOrthonormal(format!(
                "{name}-basis Gram matrix differs from the identity by {defect:e}"
            )));
        }
    }
    let mut chain = RotationChain::identity(space);
    for (i, (q, lr)) in q_basis.iter().zip(lr_basis).enumerate() {
        let h = chain.apply(lr);
        match RotationStep::new(q, &h, space) {
            Ok(step) => chain.push(step),
            Err(Error::Degenerate(_)) => chain.skipped.push(i),
            Err(e) => return Err(e),
        }
    }
    for (i, (q, lr)) in q_basis.iter().zip(lr_basis).enumerate() {
        let miss = space.norm(&chain.apply(lr).sub(q));
        if miss > UNIT_TOLERANCE {
            return Err(Error::NotOrthonormal(format!(
                "chain maps basis function {i} to within {miss:e} of its target"
            )));
        }
    }
    Ok(chain)
}
