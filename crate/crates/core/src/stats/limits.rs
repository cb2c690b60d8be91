use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::ScalarField;

/// Series are cut once a term falls below this.
const TERM_CUTOFF: f64 = 1e-12;
const MAX_TERMS: usize = 100;

/// The universal limit laws of the statistics in this crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LimitLaw {
    /// `sup_{0≤t≤1} |u(t)|` for the standard Brownian bridge `u`.
    Kolmogorov,
    /// `∫_0^1 u(t)² dt`, the `ω²` law.
    CramerVonMises,
    /// `sup_{0≤t≤1} |w(t)|` for standard Brownian motion `w`.
    SupAbsBrownianMotion,
}

impl LimitLaw {
    pub fn from_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "kolmogorov" | "ks" => Ok(Self::Kolmogorov),
            "cramer-von-mises" | "cvm" | "omega2" => Ok(Self::CramerVonMises),
            "sup-abs-brownian-motion" | "sup-bm" | "supbm" => Ok(Self::SupAbsBrownianMotion),
            _ => Err(Error::Config(format!("unknown limit law `{name}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Kolmogorov => "kolmogorov",
            Self::CramerVonMises => "cramer-von-mises",
            Self::SupAbsBrownianMotion => "sup-abs-brownian-motion",
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        if x <= 0.0 {
            return 0.0;
        }
        if x == f64::INFINITY {
            return 1.0;
        }
        let p = match self {
            Self::Kolmogorov => kolmogorov_cdf(x),
            Self::CramerVonMises => cvm_cdf(x),
            Self::SupAbsBrownianMotion => sup_abs_bm_cdf(x),
        };
        p.clamp(0.0, 1.0)
    }

    pub fn cdf_field(&self) -> ScalarField {
        let law = *self;
        ScalarField::new(format!("cdf[{}]", law.name()), move |x| law.cdf(x))
    }

    /// Smallest `x` with `cdf(x) ≥ p`, by bisection.
    pub fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return 0.0;
        }
        if p >= 1.0 {
            return f64::INFINITY;
        }
        let mut hi = 1.0;
        while self.cdf(hi) < p {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        hi
    }
}

impl fmt::Display for LimitLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn kolmogorov_cdf(x: f64) -> f64 {
    if x < 1.0 {
        // Theta-function form; converges quickly for small x.
        let c = PI * PI / (8.0 * x * x);
        let mut sum = 0.0;
        for k in 1..=MAX_TERMS {
            let j = (2 * k - 1) as f64;
            let term = (-j * j * c).exp();
            sum += term;
            if term < TERM_CUTOFF {
                break;
            }
        }
        (2.0 * PI).sqrt() / x * sum
    } else {
        let mut sum = 0.0;
        for k in 1..=MAX_TERMS {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * x * x).exp();
            sum += if k % 2 == 1 { term } else { -term };
            if term < TERM_CUTOFF {
                break;
            }
        }
        1.0 - 2.0 * sum
    }
}

fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / SQRT_2)
}

fn sup_abs_bm_cdf(x: f64) -> f64 {
    if x < 1.0 {
        let c = PI * PI / (8.0 * x * x);
        let mut sum = 0.0;
        for k in 0..MAX_TERMS {
            let j = (2 * k + 1) as f64;
            let term = (-j * j * c).exp() / j;
            sum += if k % 2 == 0 { term } else { -term };
            if term < TERM_CUTOFF {
                break;
            }
        }
        4.0 / PI * sum
    } else {
        // Reflection form: P(sup|w| ≥ x) = 4 Σ_k (−1)^k P(Z > (2k+1)x).
        let mut sum = 0.0;
        for k in 0..MAX_TERMS {
            let term = normal_sf((2 * k + 1) as f64 * x);
            sum += if k % 2 == 0 { term } else { -term };
            if term < TERM_CUTOFF {
                break;
            }
        }
        1.0 - 4.0 * sum
    }
}

/// Gauss–Legendre rule on `[0, π]` used for the branch-cut integrals.
fn arc_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let (t, w) = crate::model::gauss_legendre_rule(64);
        let theta = t.iter().map(|t| 0.5 * PI * (t + 1.0)).collect();
        let weights = w.iter().map(|w| 0.5 * PI * w).collect();
        (theta, weights)
    })
}

/// `P(ω² ≤ x)` by inverting the characteristic function
/// `(√(2it)/sin √(2it))^{1/2}` along its branch cuts, which leaves the
/// alternating series
/// `1 − (1/π) Σ_k (−1)^{k+1} ∫_{2k−1}^{2k} (2/s) √(πs/|sin πs|) e^{−π²s²x/2} ds`.
/// The substitution `s = 2k−1 + sin²(θ/2)` removes the endpoint singularities.
fn cvm_cdf(x: f64) -> f64 {
    let (theta, weights) = arc_rule();
    let mut sum = 0.0;
    for k in 1..=400 {
        let a = (2 * k - 1) as f64;
        if (-PI * PI * a * a * x / 2.0).exp() < 1e-17 {
            break;
        }
        let mut term = 0.0;
        for (th, w) in theta.iter().zip(weights) {
            let half = 0.5 * th;
            let d = half.sin().powi(2);
            let s = a + d;
            // |sin πs| = sin(πd) for s in (2k−1, 2k); ds = ½ sin θ dθ.
            let jac = 0.5 * th.sin();
            let root = (PI * s / (PI * d).sin()).sqrt();
            term += w * jac * (2.0 / s) * root * (-PI * PI * s * s * x / 2.0).exp();
        }
        sum += if k % 2 == 1 { term } else { -term };
    }
    1.0 - sum / PI
}

/// `P(ω² ≤ x)` from the first `terms` eigenvalues `1/(k²π²)`, inverting the
/// characteristic function of the truncated sum numerically (Gil-Pelaez) and
/// shifting by the mean of the omitted tail. Slow; meant as a cross-check.
pub fn cvm_cdf_eigen_inversion(x: f64, terms: usize) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let lambdas: Vec<f64> = (1..=terms).map(|k| (k as f64 * PI).powi(2)).collect();
    let tail_mean =
        1.0 / (PI * PI) * (PI * PI / 6.0 - lambdas.iter().map(|l| PI * PI / l).sum::<f64>());
    let y = x - tail_mean;
    let log_phi = |t: f64| -> Complex64 {
        lambdas
            .iter()
            .map(|l| -0.5 * Complex64::new(1.0, -2.0 * t / l).ln())
            .sum()
    };
    let (nodes, weights) = crate::model::gauss_legendre_rule(16);
    let width = 0.25;
    let mut integral = 0.0;
    let mut start = 0.0;
    loop {
        let mut panel = 0.0;
        let mut smallest = f64::INFINITY;
        for (t, w) in nodes.iter().zip(&weights) {
            let u = start + 0.5 * width * (t + 1.0);
            let z = log_phi(u) - Complex64::new(0.0, u * y);
            smallest = smallest.min(z.re);
            panel += w * z.exp().im / u;
        }
        integral += 0.5 * width * panel;
        start += width;
        if smallest < -40.0 || start > 1e6 {
            break;
        }
    }
    0.5 - integral / PI
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_reference_values() {
        assert!((LimitLaw::Kolmogorov.cdf(0.5) - 0.036_054_756_335_124_89).abs() < 1e-12);
        assert!((LimitLaw::SupAbsBrownianMotion.cdf(1.0) - 0.370_777_429_799_523_9).abs() < 1e-12);
    }

    #[test]
    fn both_forms_agree_at_the_switch() {
        for x in [0.9, 1.0, 1.1] {
            let k_small = {
                let c = PI * PI / (8.0 * x * x);
                (2.0 * PI).sqrt() / x
                    * (1..50)
                        .map(|k| (-((2 * k - 1) as f64).powi(2) * c).exp())
                        .sum::<f64>()
            };
            let k_large = 1.0
                - 2.0
                    * (1..50)
                        .map(|k| (-1f64).powi(k - 1) * (-2.0 * (k * k) as f64 * x * x).exp())
                        .sum::<f64>();
            assert!((k_small - k_large).abs() < 1e-13);
            let b_small = 4.0 / PI
                * (0..50)
                    .map(|k| {
                        let j = (2 * k + 1) as f64;
                        (-1f64).powi(k) * (-j * j * PI * PI / (8.0 * x * x)).exp() / j
                    })
                    .sum::<f64>();
            let b_large = 1.0
                - 4.0
                    * (0..50)
                        .map(|k| (-1f64).powi(k) * normal_sf((2 * k + 1) as f64 * x))
                        .sum::<f64>();
            assert!((b_small - b_large).abs() < 1e-13, "{b_small} {b_large}");
        }
    }

    #[test]
    fn cvm_branch_cut_form_matches_eigen_inversion() {
        for x in [0.05, 0.2, 0.46136, 1.0] {
            let a = LimitLaw::CramerVonMises.cdf(x);
            let b = cvm_cdf_eigen_inversion(x, 200);
            assert!((a - b).abs() < 1e-7, "x={x}: {a} vs {b}");
        }
        assert!((LimitLaw::CramerVonMises.cdf(0.46136) - 0.95).abs() < 1e-4);
    }

    #[test]
    fn kolmogorov_quantile() {
        let q = LimitLaw::Kolmogorov.quantile(0.95);
        assert!((1.3575..=1.3590).contains(&q), "{q}");
    }

    #[test]
    fn cdfs_are_monotone_and_bounded() {
        for law in [
            LimitLaw::Kolmogorov,
            LimitLaw::CramerVonMises,
            LimitLaw::SupAbsBrownianMotion,
        ] {
            assert_eq!(law.cdf(0.0), 0.0);
            assert_eq!(law.cdf(-1.0), 0.0);
            let mut prev = 0.0;
            for i in 1..=1000 {
                let c = law.cdf(i as f64 * 0.004);
                assert!(c >= prev && c <= 1.0, "{law} at {i}");
                prev = c;
            }
            assert!(law.cdf(50.0) > 1.0 - 1e-12);
        }
    }
}
