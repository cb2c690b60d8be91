use khmrotate::l2geom::LikelihoodShift;
use khmrotate::model::{
    draw_sample, empirical_integral, empirical_process_value, ContinuousModel, Sample, ScalarField,
};
use khmrotate::parametric::{ParametricFamily, ParametricTransform, TargetSpec};
use khmrotate::stats::{cvm_statistic, ks_statistic, LimitLaw};
use khmrotate::transforms::{apply_transform, transform_simple, PathTransform, SimpleTransform};
use proptest::prelude::*;

fn polynomial(coefs: Vec<f64>) -> ScalarField {
    ScalarField::new("poly", move |x| coefs.iter().rev().fold(0.0, |acc, c| acc * x + c))
}

fn pair(index: usize) -> (ContinuousModel, ContinuousModel) {
    let specs = [
        ("uniform", "2x"),
        ("beta(3,3)", "uniform"),
        ("beta(0.8,1.5)", "beta(3,3)"),
        ("normal(0,1)", "normal(0.5,1.5)"),
        ("exponential(1)", "exponential(2)"),
    ];
    let (f, g) = specs[index % specs.len()];
    (
        ContinuousModel::parse(f).unwrap(),
        ContinuousModel::parse(g).unwrap(),
    )
}

fn coefficients() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, 1..6).prop_filter("non-zero", |c| {
        c.iter().any(|v| v.abs() > 1e-3)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rotation_preserves_inner_products(
        which in 0usize..5,
        a in coefficients(),
        b in coefficients(),
    ) {
        let (f, g) = pair(which);
        let shift = LikelihoodShift::new(&f, &g).unwrap();
        let k = shift.rotation().unwrap();
        let space = shift.space();
        let (phi, psi) = (polynomial(a), polynomial(b));
        let (kphi, kpsi) = (k.apply(&phi), k.apply(&psi));
        let scale = space.norm(&phi) * space.norm(&psi);
        prop_assert!((space.inner(&kphi, &kpsi) - space.inner(&phi, &psi)).abs() <= 1e-7 * scale.max(1.0));
        prop_assert!((space.norm(&kphi) / space.norm(&phi) - 1.0).abs() <= 1e-7);
        let back = k.apply(&kphi);
        prop_assert!(space.norm(&back.sub(&phi)) <= 1e-8 * space.norm(&phi).max(1.0));
    }

    #[test]
    fn parametric_chain_is_unitary(theta in -1.0f64..1.0, coefs in coefficients()) {
        let family = ParametricFamily::normal_location(1.0).unwrap();
        let t = ParametricTransform::new(&family, &[theta], &TargetSpec::hermite(1).unwrap()).unwrap();
        let chain = t.chain();
        let space = chain.space();
        let phi = polynomial(coefs);
        let ratio = space.norm(&chain.apply(&phi)) / space.norm(&phi);
        prop_assert!((ratio - 1.0).abs() <= 1e-7, "ratio {ratio}");
    }

    #[test]
    fn empirical_integral_is_linear_and_matches_the_process(
        seed in 0u64..1000,
        n in 1usize..60,
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        x in 0.0f64..1.0,
    ) {
        let f = ContinuousModel::beta(2.0, 5.0).unwrap();
        let s = draw_sample(&f, n, seed).unwrap();
        let one = empirical_integral(&s, &f, &ScalarField::one(), x).unwrap();
        prop_assert!((one - empirical_process_value(&s, &f, x)).abs() <= 1e-10);
        let p1 = ScalarField::new("x", |x| x);
        let p2 = ScalarField::new("x^2", |x| x * x);
        let combined = empirical_integral(&s, &f, &p1.combine(a, &p2, b), x).unwrap();
        let separate = a * empirical_integral(&s, &f, &p1, x).unwrap()
            + b * empirical_integral(&s, &f, &p2, x).unwrap();
        prop_assert!((combined - separate).abs() <= 1e-10);
    }

    #[test]
    fn sampling_is_deterministic(seed in any::<u64>(), n in 1usize..100) {
        let f = ContinuousModel::beta(0.8, 1.5).unwrap();
        let a = draw_sample(&f, n, seed).unwrap();
        let b = draw_sample(&f, n, seed).unwrap();
        prop_assert_eq!(a.sorted(), b.sorted());
    }

    #[test]
    fn simple_paths_end_at_zero(seed in 0u64..1000, n in 1usize..120) {
        let f = ContinuousModel::beta(3.0, 3.0).unwrap();
        let g = ContinuousModel::uniform();
        let s = draw_sample(&f, n, seed).unwrap();
        let path = transform_simple(&s, &f, &g, 64).unwrap();
        prop_assert!(path.final_value().unwrap().abs() <= 1e-10);
    }

    #[test]
    fn transform_is_linear_in_the_empirical_measure(seed in 0u64..1000, n1 in 1usize..80, n2 in 1usize..80) {
        let f = ContinuousModel::beta(0.8, 1.5).unwrap();
        let g = ContinuousModel::parse("2x").unwrap();
        let t = SimpleTransform::new(&f, &g).unwrap();
        let s1 = draw_sample(&f, n1, seed).unwrap();
        let s2 = draw_sample(&f, n2, seed.wrapping_add(1_000_003)).unwrap();
        let mut pooled_values = s1.sorted().to_vec();
        pooled_values.extend_from_slice(s2.sorted());
        let pooled = Sample::new(pooled_values).unwrap();
        let n = (n1 + n2) as f64;
        let (w1, w2) = ((n1 as f64 / n).sqrt(), (n2 as f64 / n).sqrt());
        let (p, p1, p2) = (
            apply_transform(&t, &pooled, 32).unwrap(),
            apply_transform(&t, &s1, 32).unwrap(),
            apply_transform(&t, &s2, 32).unwrap(),
        );
        // Mesh points belong to every grid.
        for x in t.mesh(32) {
            let combined = w1 * p1.value_at(x).unwrap() + w2 * p2.value_at(x).unwrap();
            prop_assert!((p.value_at(x).unwrap() - combined).abs() <= 1e-9, "at {x}");
        }
    }

    #[test]
    fn statistics_scale(seed in 0u64..1000, c in -4.0f64..4.0) {
        let f = ContinuousModel::beta(3.0, 3.0).unwrap();
        let s = draw_sample(&f, 40, seed).unwrap();
        let path = transform_simple(&s, &f, &ContinuousModel::uniform(), 64).unwrap();
        let scaled = path.scaled(c);
        prop_assert!((ks_statistic(&scaled) - c.abs() * ks_statistic(&path)).abs() <= 1e-12 * (1.0 + ks_statistic(&path)));
        prop_assert!((cvm_statistic(&scaled) - c * c * cvm_statistic(&path)).abs() <= 1e-12 * (1.0 + cvm_statistic(&path)));
    }

    #[test]
    fn limit_cdfs_are_ordered(law in 0usize..3, a in 0.0f64..4.0, b in 0.0f64..4.0) {
        let law = [LimitLaw::Kolmogorov, LimitLaw::CramerVonMises, LimitLaw::SupAbsBrownianMotion][law];
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (flo, fhi) = (law.cdf(lo), law.cdf(hi));
        prop_assert!((0.0..=1.0).contains(&flo) && (0.0..=1.0).contains(&fhi));
        prop_assert!(flo <= fhi + 1e-14, "{law}: F({lo}) = {flo} > F({hi}) = {fhi}");
    }

    #[test]
    fn quantile_inverts_limit_cdf(law in 0usize..3, p in 0.01f64..0.99) {
        let law = [LimitLaw::Kolmogorov, LimitLaw::CramerVonMises, LimitLaw::SupAbsBrownianMotion][law];
        let q = law.quantile(p);
        prop_assert!((law.cdf(q) - p).abs() <= 1e-8, "{law}: F(Q({p})) = {}", law.cdf(q));
    }
}

#[test]
fn parametric_path_is_stable_under_small_parameter_changes() {
    let family = ParametricFamily::normal_location(1.0).unwrap();
    let target = TargetSpec::hermite(1).unwrap();
    let sample = draw_sample(&ContinuousModel::normal(0.3, 1.0).unwrap(), 200, 5).unwrap();
    let theta = sample.mean();
    let at = |th: f64| {
        let t = ParametricTransform::new(&family, &[th], &target).unwrap();
        apply_transform(&t, &sample, 256).unwrap()
    };
    let (a, b) = (at(theta), at(theta + 1e-6));
    let diff = a
        .values_right()
        .iter()
        .zip(b.values_right())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(diff <= 1e-2, "sup-norm change {diff}");
}
