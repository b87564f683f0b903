use conefix_core::cone::{
    box_thompson_diameter, exp_iso, log_iso, normality_delta, thompson_distance, ConeBox, Norm,
    PositiveVector,
};
use proptest::prelude::*;

fn positive(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-3f64..1e3, k)
}

fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..=12).prop_flat_map(|k| (positive(k), positive(k)))
}

fn triple() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (1usize..=12).prop_flat_map(|k| (positive(k), positive(k), positive(k)))
}

fn pv(v: &[f64]) -> PositiveVector {
    PositiveVector::new(v.to_vec()).unwrap()
}

// direct evaluation of ln max(max_i x_i/y_i, max_i y_i/x_i)
fn oracle_thompson(x: &[f64], y: &[f64]) -> f64 {
    let m = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a / b).max(b / a))
        .fold(1.0f64, f64::max);
    m.ln()
}

proptest! {
    #[test]
    fn metric_axioms((x, y, z) in triple()) {
        let (x, y, z) = (pv(&x), pv(&y), pv(&z));
        let dxy = thompson_distance(&x, &y).unwrap();
        let dyx = thompson_distance(&y, &x).unwrap();
        let dxz = thompson_distance(&x, &z).unwrap();
        let dzy = thompson_distance(&z, &y).unwrap();
        prop_assert!(dxy >= 0.0);
        prop_assert_eq!(thompson_distance(&x, &x).unwrap(), 0.0);
        prop_assert!((dxy - dyx).abs() <= 1e-15 * dxy.max(1.0));
        prop_assert!(dxy <= dxz + dzy + 1e-12);
        if x != y {
            prop_assert!(dxy > 0.0);
        }
    }

    #[test]
    fn matches_direct_formula((x, y) in pair()) {
        let d = thompson_distance(&pv(&x), &pv(&y)).unwrap();
        prop_assert!((d - oracle_thompson(&x, &y)).abs() <= 1e-12);
    }

    #[test]
    fn log_map_is_an_isometry((x, y) in pair()) {
        let d = thompson_distance(&pv(&x), &pv(&y)).unwrap();
        let lx = log_iso(&pv(&x)).unwrap();
        let ly = log_iso(&pv(&y)).unwrap();
        prop_assert!((d - Norm::Linf.distance(&lx, &ly)).abs() <= 1e-12);
    }

    #[test]
    fn exp_inverts_log(x in (1usize..=12).prop_flat_map(positive)) {
        let back = exp_iso(&log_iso(&pv(&x)).unwrap()).unwrap();
        for (a, b) in back.as_slice().iter().zip(&x) {
            prop_assert!((a - b).abs() <= 1e-14 * b);
        }
    }

    #[test]
    fn invariant_under_common_scaling((x, y) in pair(), alpha in 1e-3f64..1e3) {
        let d = thompson_distance(&pv(&x), &pv(&y)).unwrap();
        let ds = thompson_distance(&pv(&x).scaled(alpha).unwrap(), &pv(&y).scaled(alpha).unwrap()).unwrap();
        prop_assert!((d - ds).abs() <= 1e-12 * d.max(1.0));
    }

    #[test]
    fn scaling_moves_by_log_factor(x in (1usize..=12).prop_flat_map(positive), alpha in 1e-3f64..1e3) {
        let x = pv(&x);
        let d = thompson_distance(&x, &x.scaled(alpha).unwrap()).unwrap();
        prop_assert!((d - alpha.ln().abs()).abs() <= 1e-12);
    }

    #[test]
    fn norm_bound_from_thompson_distance((x, y) in pair()) {
        let d = thompson_distance(&pv(&x), &pv(&y)).unwrap();
        for norm in Norm::ALL {
            let b = norm.of(&x).max(norm.of(&y));
            let delta = normality_delta(norm);
            let lhs = norm.distance(&x, &y);
            let rhs = b * (1.0 + 2.0 * delta) * d.exp_m1();
            prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-300, "{norm}: {lhs} > {rhs}");
        }
    }

    #[test]
    fn normality_constant_holds((x, t) in (1usize..=12).prop_flat_map(|k| (positive(k), prop::collection::vec(0.0f64..=1.0, k)))) {
        // 0 ≤ t∘x ≤ x
        let small: Vec<f64> = x.iter().zip(&t).map(|(a, s)| a * s).collect();
        for norm in Norm::ALL {
            prop_assert!(norm.of(&small) <= normality_delta(norm) * norm.of(&x) * (1.0 + 1e-15));
        }
    }

    #[test]
    fn box_diameter_is_largest_corner_ratio((lo, r) in (1usize..=8).prop_flat_map(|k| (positive(k), prop::collection::vec(1.0f64..10.0, k)))) {
        let hi: Vec<f64> = lo.iter().zip(&r).map(|(a, s)| a * s).collect();
        let u = ConeBox::from_slices(&lo, &hi).unwrap();
        let (lambda0, ln_lambda0) = box_thompson_diameter(&u);
        let expected = r.iter().cloned().fold(1.0f64, f64::max);
        prop_assert!((lambda0 - expected).abs() <= 1e-12 * expected);
        prop_assert!((ln_lambda0 - expected.ln()).abs() <= 1e-12);
        let corners = thompson_distance(u.lower(), u.upper()).unwrap();
        prop_assert!((corners - ln_lambda0).abs() <= 1e-12);
    }
}
