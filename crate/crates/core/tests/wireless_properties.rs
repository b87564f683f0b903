use std::sync::Arc;

use conefix_core::linalg::Matrix;
use conefix_core::mapping::{check_concave, check_monotone, check_scalable, evaluate, Sampler};
use conefix_core::solver::{fixed_point_iterate, IterateOptions, SpectralOptions};
use conefix_core::wireless::hata::hata_path_loss_db;
use conefix_core::wireless::load::{
    asymptotic_matrix, generate_scenario, load_mapping, run_load_experiment, Layout, LoadExperimentOptions,
    LoadParams, LoadScenario, ScenarioSpec,
};
use conefix_core::wireless::power::{
    capped_mapping, generate_power_scenario, scalar_closed_form, solve_power_control, InterferenceMapping,
    PowerOptions, PowerScenario, PowerScenarioSpec,
};
use conefix_core::wireless::HataParams;
use conefix_core::{Error, Mapping, PositiveVector};
use proptest::prelude::*;

fn small_load(seed: u64, k: usize, users: usize, layout: Layout) -> LoadScenario {
    generate_scenario(&ScenarioSpec {
        k,
        users,
        layout,
        seed,
        ..Default::default()
    })
    .unwrap()
}

fn layout() -> impl Strategy<Value = Layout> {
    prop_oneof![Just(Layout::Grid), Just(Layout::Uniform)]
}

// Hata loss written out term by term from the urban formula with the
// small/medium-city mobile correction.
fn oracle_hata(d_km: f64, f: f64, hb: f64, hm: f64) -> f64 {
    let a = (1.1 * f.log10() - 0.7) * hm - (1.56 * f.log10() - 0.8);
    69.55 + 26.16 * f.log10() - 13.82 * hb.log10() - a + (44.9 - 6.55 * hb.log10()) * d_km.log10()
}

#[test]
fn hata_reference_point() {
    let pl = hata_path_loss_db(1000.0, &HataParams::default()).unwrap();
    assert!((pl - oracle_hata(1.0, 900.0, 30.0, 1.5)).abs() < 1e-10);
    assert!((pl - 126.40).abs() < 0.01);
}

#[test]
fn two_symmetric_cells_match_scalar_oracle() {
    let (g, gc) = (1e-10, 3e-11);
    let p = LoadParams::default();
    let gains = Matrix::from_vec(2, 2, vec![g, gc, gc, g]).unwrap();
    let s = LoadScenario::from_gains(gains, None, p).unwrap();
    // x = (d/R) / (B log2(1 + p g / (x p g' + σ²))) by bisection
    let h = |x: f64| {
        x - p.demand_bps
            / p.resource_blocks
            / (p.bandwidth_hz * (1.0 + p.tx_power_w * g / (x * p.tx_power_w * gc + p.noise_w)).log2())
    };
    let (mut lo, mut hi) = (0.0f64, 10.0f64);
    assert!(h(lo) < 0.0 && h(hi) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < 0.0 {
            lo = mid
        } else {
            hi = mid
        }
    }
    let e = run_load_experiment(&s, &LoadExperimentOptions::default()).unwrap();
    let x = e.x_star.unwrap();
    for c in x.as_slice() {
        assert!((c - lo).abs() < 1e-12, "{c} vs {lo}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn frequency_cancels_in_asymptotic_matrix(seed in any::<u64>(), lay in layout(), k in 2usize..10) {
        let base = small_load(seed, k, 40, lay);
        let mut spec = ScenarioSpec { k, users: 40, layout: lay, seed, ..Default::default() };
        spec.params.hata.freq_mhz = 1800.0;
        let high = generate_scenario(&spec).unwrap();
        let (a, b) = (asymptotic_matrix(&base).matrix, asymptotic_matrix(&high).matrix);
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(f64::MIN_POSITIVE));
        }
    }

    #[test]
    fn demand_scaling_is_linear(seed in any::<u64>(), k in 2usize..8, alpha in 0.05f64..1.0) {
        let s = small_load(seed, k, 30, Layout::Grid);
        let m = asymptotic_matrix(&s).matrix;
        let scaled = s.scale_demand(alpha).unwrap();
        let ms = asymptotic_matrix(&scaled).matrix;
        for (x, y) in m.as_slice().iter().zip(ms.as_slice()) {
            prop_assert!((alpha * x - y).abs() <= 1e-14 * x.abs());
        }
        let rho = asymptotic_matrix(&s).spectral_radius(1e-12).unwrap().rho;
        let rho_s = asymptotic_matrix(&scaled).spectral_radius(1e-12).unwrap().rho;
        prop_assert!((alpha * rho - rho_s).abs() <= 1e-9 * rho.max(1e-12));
    }

    #[test]
    fn fixed_point_decreases_with_demand(seed in any::<u64>(), k in 2usize..8, alpha in 0.1f64..0.9) {
        let s = small_load(seed, k, 30, Layout::Grid);
        let rho = asymptotic_matrix(&s).spectral_radius(1e-12).unwrap().rho;
        // bring the scenario well inside the feasible region first
        let s = s.scale_demand(0.8 / rho.max(0.8)).unwrap();
        let low = s.scale_demand(alpha).unwrap();
        let opts = LoadExperimentOptions::default();
        let hi = run_load_experiment(&s, &opts).unwrap().x_star.unwrap();
        let lo = run_load_experiment(&low, &opts).unwrap().x_star.unwrap();
        prop_assert!(lo.strongly_less(&hi));
    }

    #[test]
    fn load_mapping_is_pc(seed in any::<u64>(), k in 2usize..8, sample_seed in any::<u64>()) {
        let s = small_load(seed, k, 30, Layout::Uniform);
        let f = load_mapping(&s);
        let zero = evaluate(&f, &PositiveVector::zeros(k).unwrap()).unwrap();
        prop_assert!(zero.is_strictly_positive());
        let mut smp = Sampler::cube(sample_seed, k, 3.0).unwrap();
        prop_assert!(check_monotone(&f, &mut smp, 48).passed());
        prop_assert!(check_scalable(&f, &mut smp, 48).passed());
        prop_assert!(check_concave(&f, &mut smp, 48).passed());
    }

    #[test]
    fn asymptote_matches_finite_difference(seed in any::<u64>(), k in 2usize..8) {
        let s = small_load(seed, k, 30, Layout::Grid);
        let f = load_mapping(&s);
        let x = vec![1.0; k];
        let mut exact = vec![0.0; k];
        f.asymptotic_into(&x, &mut exact).unwrap().unwrap();
        let p = 1e9;
        let mut far = vec![0.0; k];
        f.eval_into(&x.iter().map(|v| p * v).collect::<Vec<_>>(), &mut far).unwrap();
        for (a, b) in exact.iter().zip(&far) {
            let q = b / p;
            prop_assert!((a - q).abs() <= 1e-6 * a.max(q).max(1e-9), "{a} vs {q}");
        }
    }

    #[test]
    fn feasibility_matches_iteration(seed in any::<u64>(), k in 2usize..8, target in 0.3f64..1.7) {
        prop_assume!((target - 1.0).abs() > 0.05);
        let s = small_load(seed, k, 30, Layout::Grid);
        let rho = asymptotic_matrix(&s).spectral_radius(1e-12).unwrap().rho;
        prop_assume!(rho > 1e-6);
        let s = s.scale_demand(target / rho).unwrap();
        let opts = LoadExperimentOptions {
            iterate: IterateOptions { tol: 1e-12, max_iter: 20_000, ceiling: 1e12 },
            ..Default::default()
        };
        let e = run_load_experiment(&s, &opts).unwrap();
        prop_assert_eq!(e.feasibility.is_feasible(), target < 1.0);
        prop_assert_eq!(e.converged(), target < 1.0);
    }

    #[test]
    fn scalar_power_matches_linear_solve(
        r in prop::collection::vec(prop::collection::vec(0.05f64..1.0, 2), 2..5),
        gamma in 0.05f64..0.3,
    ) {
        let k = r.len();
        let mut r = r;
        // each user's own link is the strong one
        for (u, row) in r.iter_mut().enumerate() {
            row[u % 2] += 2.0;
        }
        let station: Vec<usize> = (0..k).map(|u| u % 2).collect();
        let gammas = vec![gamma; k];
        let s = PowerScenario::scalar(&r, station.iter().map(|&b| vec![b]).collect(), gammas.clone(), 1.0).unwrap();
        let res = solve_power_control(&s, &PowerOptions::default(), None);
        match scalar_closed_form(&r, &station, &gammas, 1.0) {
            Ok(x) if x.iter().all(|v| *v > 0.0) => {
                let got = res.unwrap().x_star;
                for (a, b) in got.as_slice().iter().zip(&x) {
                    prop_assert!((a - b).abs() <= 1e-9 * b);
                }
            }
            _ => {
                let infeasible = matches!(res, Err(Error::Infeasible { .. }));
                prop_assert!(infeasible);
            }
        }
    }

    #[test]
    fn power_solutions_meet_targets(seed in 0u64..400) {
        let spec = PowerScenarioSpec {
            seed,
            k: 2 + (seed as usize) % 4,
            m: 1 + (seed as usize / 4) % 3,
            l: 1 + (seed as usize / 12) % 3,
            ..Default::default()
        };
        let s = generate_power_scenario(&spec).unwrap();
        if let Ok(r) = solve_power_control(&s, &PowerOptions::default(), None) {
            for (u, sol) in r.solution.users.iter().enumerate() {
                prop_assert!((sol.sinr / s.gamma()[u] - 1.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn capped_power_always_converges(seed in 0u64..400, p_bar in 0.1f64..100.0) {
        let spec = PowerScenarioSpec { seed, k: 3, m: 2, l: 2, ..Default::default() };
        let s = generate_power_scenario(&spec).unwrap();
        let capped = capped_mapping(&s, p_bar).unwrap();
        let rho = conefix_core::solver::mapping_spectral_radius(&capped, &SpectralOptions::default()).unwrap();
        prop_assert_eq!(rho.rho, 0.0);
        let r = solve_power_control(&s, &PowerOptions::default(), Some(p_bar)).unwrap();
        prop_assert!(r.trace.converged());
        prop_assert!(r.x_star.as_slice().iter().all(|x| *x <= p_bar));
    }
}

#[test]
fn interference_mapping_is_monotone_and_scalable() {
    let s = generate_power_scenario(&PowerScenarioSpec {
        seed: 3,
        ..Default::default()
    })
    .unwrap();
    let f = InterferenceMapping::new(Arc::new(s));
    let mut smp = Sampler::cube(5, f.dim(), 5.0).unwrap();
    assert!(check_monotone(&f, &mut smp, 64).passed());
    assert!(check_scalable(&f, &mut smp, 64).passed());
    assert!(check_concave(&f, &mut smp, 64).passed());
    let x1 = PositiveVector::filled(f.dim(), 1.0).unwrap();
    let t = fixed_point_iterate(&f, &x1, &IterateOptions::default(), None);
    assert!(t.is_ok());
}
