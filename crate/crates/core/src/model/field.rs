use std::fmt;
use std::sync::Arc;

/// A real function of one variable, evaluated lazily.
///
/// Fields are cheap to clone and may be shared across threads. The label
/// is informational only and identifies the field in error messages and
/// path metadata.
#[derive(Clone)]
pub struct ScalarField {
    func: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    label: Arc<str>,
}

impl ScalarField {
    pub fn new(
        label: impl Into<String>,
        func: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let label: String = label.into();
        Self {
            func: Arc::new(func),
            label: label.into(),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("{c}"), move |_| c)
    }

    /// The function identically equal to one.
    pub fn one() -> Self {
        Self::new("1", |_| 1.0)
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.func)(x)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        let label: String = label.into();
        self.label = label.into();
        self
    }

    pub fn scale(&self, c: f64) -> Self {
        let f = self.func.clone();
        Self::new(format!("{c}*({})", self.label), move |x| c * f(x))
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &ScalarField, b: f64) -> Self {
        let f = self.func.clone();
        let g = other.func.clone();
        Self::new(
            format!("{a}*({}) + {b}*({})", self.label, other.label),
            move |x| a * f(x) + b * g(x),
        )
    }

    pub fn add(&self, other: &ScalarField) -> Self {
        self.combine(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &ScalarField) -> Self {
        self.combine(1.0, other, -1.0)
    }

    pub fn mul(&self, other: &ScalarField) -> Self {
        let f = self.func.clone();
        let g = other.func.clone();
        Self::new(format!("({})*({})", self.label, other.label), move |x| {
            f(x) * g(x)
        })
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("ScalarField").field(&self.label).finish()
    }
}
