mod common;

use common::{affine_min, fixed_point, pv};
use conefix_core::cone::{thompson_distance, ConeBox};
use conefix_core::mapping::{
    asymptotic_evaluate, builtin, check_concave, check_c_concave, check_monotone, check_positive,
    check_scalable, evaluate, AsymptoticOptions, BuiltinId, Sampler,
};
use conefix_core::solver::{
    banach_bound, box_invariant, contraction_certificate, contraction_curve, feasibility_check,
    fixed_point_iterate, mapping_spectral_radius, Feasibility, IterateOptions, SpectralOptions,
};
use conefix_core::{Error, Mapping, PositiveVector};
use proptest::prelude::*;

fn boxed_around(x: &PositiveVector, factor: f64) -> ConeBox {
    ConeBox::around(x, factor).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pc_mappings_pass_every_si_check(spec in affine_min(6, 3), seed in any::<u64>()) {
        let f = spec.build();
        prop_assert!(f.flags().is_pc() && f.flags().is_si());
        let k = f.dim();
        let mut s = Sampler::cube(seed, k, 10.0).unwrap();
        prop_assert!(check_monotone(&f, &mut s, 64).passed());
        prop_assert!(check_scalable(&f, &mut s, 64).passed());
        prop_assert!(check_concave(&f, &mut s, 64).passed());
        prop_assert!(check_positive(&f, &mut s, 64).passed());
    }

    #[test]
    fn para_contraction(spec in affine_min(6, 3), seed in any::<u64>()) {
        let f = spec.build();
        let mut s = Sampler::cube(seed, f.dim(), 10.0).unwrap();
        for _ in 0..32 {
            let x: Vec<f64> = s.uniform().into_iter().map(|v| v + 1e-3).collect();
            let y: Vec<f64> = s.uniform().into_iter().map(|v| v + 1e-3).collect();
            let (x, y) = (pv(&x), pv(&y));
            let d = thompson_distance(&x, &y).unwrap();
            if d < 1e-9 {
                continue;
            }
            let fd = thompson_distance(&evaluate(&f, &x).unwrap(), &evaluate(&f, &y).unwrap()).unwrap();
            prop_assert!(fd < d, "{fd} >= {d}");
        }
    }

    #[test]
    fn expansion_is_sublinear(spec in affine_min(6, 3), seed in any::<u64>(), lambda in 1.0f64..50.0) {
        // concavity together with f(0) ≥ 0 gives f(λx) ≤ λ f(x) for λ ≥ 1
        let f = spec.build();
        let mut s = Sampler::cube(seed, f.dim(), 10.0).unwrap();
        let x = pv(&s.uniform());
        let fx = evaluate(&f, &x).unwrap();
        let flx = evaluate(&f, &x.scaled(lambda).unwrap()).unwrap();
        for (a, b) in flx.as_slice().iter().zip(fx.as_slice()) {
            prop_assert!(*a <= lambda * b * (1.0 + 1e-12));
        }
    }

    #[test]
    fn asymptote_is_positively_homogeneous(spec in affine_min(6, 3), seed in any::<u64>(), alpha in 0.01f64..100.0) {
        let f = spec.build();
        let mut s = Sampler::cube(seed, f.dim(), 10.0).unwrap();
        let x: Vec<f64> = s.uniform().into_iter().map(|v| v + 1e-2).collect();
        let x = pv(&x);
        let opts = AsymptoticOptions::default();
        let a = asymptotic_evaluate(&f, &x, &opts).unwrap().value;
        let b = asymptotic_evaluate(&f, &x.scaled(alpha).unwrap(), &opts).unwrap().value;
        for (p, q) in a.iter().zip(&b) {
            prop_assert!((alpha * p - q).abs() <= 1e-12 * q.abs().max(1.0));
        }
    }

    #[test]
    fn certificate_is_a_contraction_factor(spec in affine_min(5, 3), seed in any::<u64>(), factor in 1.05f64..4.0) {
        let f = spec.build();
        let x_star = fixed_point(&f);
        let u = boxed_around(&x_star, factor);
        prop_assert!(box_invariant(&f, &u).unwrap());
        let cert = contraction_certificate(&f, &u, None).unwrap();
        prop_assert!(cert.c > 0.0 && cert.c < 1.0);
        let mut s = Sampler::for_box(seed, &u);
        let rep = check_c_concave(&f, &u, cert.c, &mut s, 128);
        prop_assert!(rep.passed(), "{:?}", rep.worst());
        for _ in 0..64 {
            let x = pv(&s.uniform());
            let y = pv(&s.uniform());
            let d = thompson_distance(&x, &y).unwrap();
            let fd = thompson_distance(&evaluate(&f, &x).unwrap(), &evaluate(&f, &y).unwrap()).unwrap();
            prop_assert!(fd <= cert.c * d * (1.0 + 1e-10) + 1e-15);
        }
    }

    #[test]
    fn certificate_dominates_spectral_radius(spec in affine_min(5, 3), factor in 1.05f64..4.0) {
        let f = spec.build();
        let x_star = fixed_point(&f);
        let cert = contraction_certificate(&f, &boxed_around(&x_star, factor), None).unwrap();
        let rho = mapping_spectral_radius(&f, &SpectralOptions::default()).unwrap();
        prop_assert!(cert.c >= rho.rho - 1e-9, "c = {} < rho = {}", cert.c, rho.rho);
    }

    #[test]
    fn banach_envelope_holds_on_invariant_box(spec in affine_min(5, 3), factor in 1.05f64..4.0) {
        let f = spec.build();
        let x_star = fixed_point(&f);
        let u = boxed_around(&x_star, factor);
        let cert = contraction_certificate(&f, &u, None).unwrap();
        let opts = IterateOptions { max_iter: 200, ..Default::default() };
        let t = fixed_point_iterate(&f, u.lower(), &opts, None).unwrap();
        let first = thompson_distance(&t.iterates[1], &t.iterates[0]).unwrap();
        for (n, x) in t.iterates.iter().enumerate() {
            prop_assert!(u.contains(x));
            let d = thompson_distance(x, &x_star).unwrap();
            prop_assert!(d <= banach_bound(cert.c, first, n) * (1.0 + 1e-9) + 1e-13);
        }
    }

    #[test]
    fn contracting_affine_maps_are_feasible(spec in affine_min(6, 3)) {
        let f = spec.build();
        let (verdict, est) = feasibility_check(&f, &SpectralOptions::default()).unwrap();
        prop_assert_eq!(verdict, Feasibility::HasFixedPoint);
        prop_assert!(est.lo <= est.rho && est.rho <= est.hi);
    }

    #[test]
    fn curve_is_monotone(mu in 0.01f64..0.99, l1 in 1.001f64..1e6, r in 1.001f64..10.0, dmu in 0.0f64..0.5) {
        let l2 = l1 * r;
        let c1 = contraction_curve(mu, l1).unwrap();
        let c2 = contraction_curve(mu, l2).unwrap();
        prop_assert!(c1 > 0.0 && c2 < 1.0);
        prop_assert!(c1 <= c2 + 1e-15);
        let mu2 = (mu + dmu).min(0.99);
        prop_assert!(contraction_curve(mu2, l1).unwrap() <= c1 + 1e-15);
    }
}

#[test]
fn curve_limits() {
    // λ → 1 gives 1 − μ, λ → ∞ gives 1
    let mu = 0.3;
    assert!((contraction_curve(mu, 1.0 + 1e-12).unwrap() - 0.7).abs() < 1e-9);
    assert!(contraction_curve(mu, 1e300).unwrap() > 0.99);
}

#[test]
fn f1_certificate_closed_form() {
    let f = builtin(&BuiltinId::F1).unwrap();
    let u = ConeBox::from_slices(&[0.5], &[1.5]).unwrap();
    let given = contraction_certificate(&f, &u, Some(1.0 / 3.0)).unwrap();
    // ln(1 + (2/3)·2) / ln 3
    let oracle = (7.0f64 / 3.0).ln() / 3.0f64.ln();
    assert!((given.c - oracle).abs() < 1e-15);
    assert!((given.c - 0.7712).abs() < 5e-4);
    let best = contraction_certificate(&f, &u, None).unwrap();
    assert!((best.mu - 0.4).abs() < 1e-15);
    assert!(best.c < given.c);
}

#[test]
fn nonnegative_control_is_refused() {
    let g = builtin(&BuiltinId::G).unwrap();
    let u = ConeBox::from_slices(&[1.0], &[3.0]).unwrap();
    match contraction_certificate(&g, &u, None) {
        Err(Error::CertificateRefused(why)) => assert!(why.contains("f(0)[0]"), "{why}"),
        other => panic!("expected refusal, got {other:?}"),
    }
    let mut s = Sampler::cube(1, 1, 4.0).unwrap();
    assert!(!check_positive(&g, &mut s, 16).passed());
}
