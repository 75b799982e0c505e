use longmem::fipipe::{forecast_dispatch, FiConfig, ForecastMethod};
use longmem::fracdiff::{frac_diff, r_sequence};
use longmem::harness::{poos_run, PoosConfig, WindowScheme};
use longmem::mc::{simulate_fi, DgpSpec, Innovation};
use longmem::meanest::{robinson_mean, shimotsu_mean};
use longmem::memest::{local_whittle, lw_bandwidth, whittle_arfi, DInterval};
use proptest::prelude::*;

#[test]
fn estimators_recover_memory_on_long_series() {
    let y = simulate_fi(&DgpSpec::new(0.3, Innovation::Iid, 4000, 11)).unwrap();
    let lw = local_whittle(&y, lw_bandwidth(y.len(), 0.65).unwrap(), DInterval::default()).unwrap();
    let w0 = whittle_arfi(&y, 0, DInterval::default()).unwrap();
    assert!((lw.d_hat - 0.3).abs() < 0.1, "{}", lw.d_hat);
    assert!((w0.d_hat - 0.3).abs() < 0.05, "{}", w0.d_hat);
}

#[test]
fn mean_estimators_see_a_shifted_level() {
    let y: Vec<f64> = simulate_fi(&DgpSpec::new(0.4, Innovation::Ar1, 1500, 5))
        .unwrap()
        .iter()
        .map(|v| v + 10.0)
        .collect();
    for mu in [robinson_mean(&y, 0.4).unwrap().mu_hat, shimotsu_mean(&y, 0.4).unwrap().mu_hat] {
        assert!((mu - 10.0).abs() < 2.0, "{mu}");
    }
}

#[test]
fn every_method_forecasts_a_simulated_window() {
    let y = simulate_fi(&DgpSpec::new(0.6, Innovation::Ma9, 250, 2)).unwrap();
    let cfg = FiConfig::default();
    for m in [
        ForecastMethod::FiFixed(0.5),
        ForecastMethod::FiLw(0.65),
        ForecastMethod::FiUnit,
        ForecastMethod::Lar,
        ForecastMethod::Ar1,
        ForecastMethod::Ets,
        ForecastMethod::Har,
        ForecastMethod::Mean,
        ForecastMethod::Naive,
    ] {
        let f = forecast_dispatch(m, &y, 12, &cfg).unwrap().forecasts;
        assert_eq!(f.len(), 12);
        assert!(f.iter().all(|v| v.is_finite()), "{}", m.label());
    }
}

#[test]
fn poos_baseline_ratio_is_one() {
    let y = simulate_fi(&DgpSpec::new(0.45, Innovation::Iid, 320, 8)).unwrap();
    let cfg = PoosConfig::new(
        WindowScheme::Rolling(250),
        vec![1, 5],
        vec![ForecastMethod::FiFixed(0.5), ForecastMethod::Lar, ForecastMethod::Naive],
    );
    let t = poos_run(&y, &cfg).unwrap();
    for h in [1, 5] {
        let base = t.get("FI(0.5)", WindowScheme::Rolling(250), h).unwrap();
        assert_eq!(base.ratio, 1.0);
        assert_eq!(base.count, 320 - 250 - h + 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Differencing a constant series gives r_t times the constant.
    #[test]
    fn constant_differences_to_r(d in -1.0f64..1.5, c in -50.0f64..50.0, n in 1usize..300) {
        let diffed = frac_diff(&vec![c; n], d).unwrap();
        let r = r_sequence(d, n).unwrap();
        for (a, b) in diffed.iter().zip(&r) {
            prop_assert!((a - c * b).abs() <= 1e-9 * (1.0 + c.abs()));
        }
    }

    // Seeds fix the simulated path exactly.
    #[test]
    fn simulation_is_a_function_of_the_seed(seed in any::<u64>(), d in -0.4f64..1.2) {
        let spec = DgpSpec::new(d, Innovation::Ma9, 64, seed);
        prop_assert_eq!(simulate_fi(&spec).unwrap(), simulate_fi(&spec).unwrap());
    }
}
