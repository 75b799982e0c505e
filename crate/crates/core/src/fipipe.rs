//! The fractional-integration forecasting pipeline and the method registry
//! used by the evaluation harnesses.
//!
//! For a memory parameter `d` the pipeline estimates the level by Robinson's
//! regression, forms the short-memory residuals
//! `xi_t = Delta_+^d y_t - r_t mu`, fits an AIC-selected autoregression to
//! them without intercept, forecasts `xi` recursively and maps the forecasts
//! back through the truncated fractional integral.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fracdiff::{frac_diff, pi_coeffs, r_sequence};
use crate::meanest::robinson_mean;
use crate::memest::{local_whittle, lw_bandwidth, DInterval};
use crate::models::{
    ar_fit, ar_forecast, ar_select_with_rule, ets_fit_select, ets_forecast, har_fit, har_forecast,
    MaxLagRule,
};

/// Range of memory parameters the pipeline accepts.
pub const FI_D_RANGE: (f64, f64) = (-1.0, 2.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiConfig {
    pub lag_rule: MaxLagRule,
    /// Shortest estimation window for the FI methods.
    pub min_len: usize,
}

impl Default for FiConfig {
    fn default() -> Self {
        Self {
            lag_rule: MaxLagRule::Literal,
            min_len: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastResult {
    /// Forecasts for horizons `1..=h`.
    pub forecasts: Vec<f64>,
    pub d_used: Option<f64>,
    pub mu_hat: Option<f64>,
    pub ar_order: Option<usize>,
    /// Short-memory residuals over the estimation window (FI methods only).
    pub residuals_xi: Vec<f64>,
}

impl ForecastResult {
    fn plain(forecasts: Vec<f64>) -> Self {
        Self {
            forecasts,
            d_used: None,
            mu_hat: None,
            ar_order: None,
            residuals_xi: Vec::new(),
        }
    }
}

/// FI forecasts for horizons `1..=h` from the window `series`.
pub fn fi_forecast(series: &[f64], d: f64, h: usize, cfg: &FiConfig) -> Result<ForecastResult> {
    if !(d.is_finite() && (FI_D_RANGE.0..=FI_D_RANGE.1).contains(&d)) {
        return Err(Error::invalid(format!("d = {d} outside [-1, 2]")));
    }
    if h == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    let t_len = series.len();
    Error::require_len(t_len, cfg.min_len)?;

    let mu = robinson_mean(series, d)?.mu_hat;
    let r = r_sequence(d, t_len)?;
    let xi: Vec<f64> = frac_diff(series, d)?
        .iter()
        .zip(&r)
        .map(|(v, rt)| v - rt * mu)
        .collect();
    let fit = ar_select_with_rule(&xi, cfg.lag_rule, false)?;
    let xi_hat = ar_forecast(&fit, &xi, h)?;

    // recolor: last h entries of mu + Delta_+^{-d} (xi, xi_hat)
    let psi = pi_coeffs(-d, t_len + h)?.values;
    let full: Vec<f64> = xi.iter().chain(&xi_hat).copied().collect();
    let forecasts: Vec<f64> = (t_len..t_len + h)
        .map(|s| mu + (0..=s).map(|j| psi[j] * full[s - j]).sum::<f64>())
        .collect();
    if forecasts.iter().any(|v| !v.is_finite()) {
        return Err(Error::failed("FI forecasts are not finite", None));
    }
    Ok(ForecastResult {
        forecasts,
        d_used: Some(d),
        mu_hat: Some(mu),
        ar_order: Some(fit.order_p),
        residuals_xi: xi,
    })
}

/// A forecasting method of the roster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ForecastMethod {
    /// FI pipeline with a fixed `d`.
    FiFixed(f64),
    /// FI pipeline with `d` from local Whittle at bandwidth `floor(T^alpha)`.
    FiLw(f64),
    /// FI pipeline with `d = 1`.
    FiUnit,
    /// AIC-selected autoregression with intercept on the levels.
    Lar,
    Ar1,
    Ets,
    Har,
    Mean,
    Naive,
}

impl ForecastMethod {
    pub const BENCHMARK: ForecastMethod = ForecastMethod::FiFixed(0.5);

    /// Table label, e.g. `FI(0.5)` or `FI(T^0.65)`.
    pub fn label(&self) -> String {
        match self {
            ForecastMethod::FiFixed(d) => format!("FI({d})"),
            ForecastMethod::FiLw(a) => format!("FI(T^{a})"),
            ForecastMethod::FiUnit => "FI(1)".into(),
            ForecastMethod::Lar => "LAR".into(),
            ForecastMethod::Ar1 => "AR(1)".into(),
            ForecastMethod::Ets => "ES".into(),
            ForecastMethod::Har => "HAR".into(),
            ForecastMethod::Mean => "Mean".into(),
            ForecastMethod::Naive => "Naive".into(),
        }
    }

    pub fn is_fi(&self) -> bool {
        matches!(
            self,
            ForecastMethod::FiFixed(_) | ForecastMethod::FiLw(_) | ForecastMethod::FiUnit
        )
    }
}

/// Identifiers: `fi:<d>`, `fi-lw:<alpha>`, `fi1`, `lar`, `ar1`, `ets`, `har`,
/// `mean`, `naive`.
impl fmt::Display for ForecastMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ForecastMethod::FiFixed(d) => write!(f, "fi:{d}"),
            ForecastMethod::FiLw(a) => write!(f, "fi-lw:{a}"),
            ForecastMethod::FiUnit => f.write_str("fi1"),
            ForecastMethod::Lar => f.write_str("lar"),
            ForecastMethod::Ar1 => f.write_str("ar1"),
            ForecastMethod::Ets => f.write_str("ets"),
            ForecastMethod::Har => f.write_str("har"),
            ForecastMethod::Mean => f.write_str("mean"),
            ForecastMethod::Naive => f.write_str("naive"),
        }
    }
}

impl FromStr for ForecastMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let num = |v: &str| {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::invalid(format!("bad number in method id '{s}'")))
        };
        Ok(match s.as_str() {
            "fi1" => ForecastMethod::FiUnit,
            "lar" => ForecastMethod::Lar,
            "ar1" => ForecastMethod::Ar1,
            "ets" | "es" => ForecastMethod::Ets,
            "har" => ForecastMethod::Har,
            "mean" => ForecastMethod::Mean,
            "naive" => ForecastMethod::Naive,
            _ => {
                if let Some(v) = s.strip_prefix("fi-lw:") {
                    ForecastMethod::FiLw(num(v)?)
                } else if let Some(v) = s.strip_prefix("fi:") {
                    ForecastMethod::FiFixed(num(v)?)
                } else {
                    return Err(Error::invalid(format!("unknown method '{s}'")));
                }
            }
        })
    }
}

fn dispatch_inner(method: ForecastMethod, window: &[f64], h: usize, cfg: &FiConfig) -> Result<ForecastResult> {
    if h == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    if window.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("window contains non-finite values"));
    }
    match method {
        ForecastMethod::FiFixed(d) => fi_forecast(window, d, h, cfg),
        ForecastMethod::FiUnit => fi_forecast(window, 1.0, h, cfg),
        ForecastMethod::FiLw(alpha) => {
            Error::require_len(window.len(), cfg.min_len)?;
            let interval = DInterval::default();
            let m = lw_bandwidth(window.len(), alpha)?;
            let d = interval.clamp(local_whittle(window, m, interval)?.d_hat);
            fi_forecast(window, d, h, cfg)
        }
        ForecastMethod::Lar => {
            let fit = ar_select_with_rule(window, cfg.lag_rule, true)?;
            let mut out = ForecastResult::plain(ar_forecast(&fit, window, h)?);
            out.ar_order = Some(fit.order_p);
            Ok(out)
        }
        ForecastMethod::Ar1 => {
            let fit = ar_fit(window, 1, true)?;
            let mut out = ForecastResult::plain(ar_forecast(&fit, window, h)?);
            out.ar_order = Some(1);
            Ok(out)
        }
        ForecastMethod::Ets => Ok(ForecastResult::plain(ets_forecast(&ets_fit_select(window)?, h))),
        ForecastMethod::Har => {
            let fit = har_fit(window)?;
            Ok(ForecastResult::plain(har_forecast(&fit, window, h)?))
        }
        ForecastMethod::Mean => {
            Error::require_len(window.len(), 1)?;
            let m = window.iter().sum::<f64>() / window.len() as f64;
            Ok(ForecastResult::plain(vec![m; h]))
        }
        ForecastMethod::Naive => {
            let last = *window.last().ok_or(Error::InsufficientData { needed: 1, got: 0 })?;
            Ok(ForecastResult::plain(vec![last; h]))
        }
    }
}

/// Forecast horizons `1..=h` with `method`; errors carry the method label.
pub fn forecast_dispatch(method: ForecastMethod, window: &[f64], h: usize, cfg: &FiConfig) -> Result<ForecastResult> {
    let out = dispatch_inner(method, window, h, cfg).map_err(|e| e.in_method(method.label()))?;
    if out.forecasts.iter().any(|v| !v.is_finite()) {
        return Err(Error::failed("non-finite forecast", None).in_method(method.label()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ar_select_aic;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn normals(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    /// The equivalent recursion on the levels:
    /// `y_{T+k} = -sum_{j>=1} pi_j(d) y_{T+k-j} + r_{T+k} mu + xi_hat_{T+k}`.
    fn direct_recursion(series: &[f64], d: f64, h: usize, cfg: &FiConfig) -> Vec<f64> {
        let t_len = series.len();
        let res = fi_forecast(series, d, h, cfg).unwrap();
        let mu = res.mu_hat.unwrap();
        let fit = ar_select_with_rule(&res.residuals_xi, cfg.lag_rule, false).unwrap();
        let xi_hat = ar_forecast(&fit, &res.residuals_xi, h).unwrap();
        let pi = pi_coeffs(d, t_len + h).unwrap().values;
        let r = r_sequence(d, t_len + h).unwrap();
        let mut y = series.to_vec();
        for (k, xi_k) in xi_hat.iter().enumerate() {
            let s = t_len + k;
            let past: f64 = (1..=s).map(|j| pi[j] * y[s - j]).sum();
            y.push(-past + r[s] * mu + xi_k);
        }
        y[t_len..].to_vec()
    }

    fn fi_sample(d: f64, n: usize, seed: u64) -> Vec<f64> {
        crate::fracdiff::frac_integrate(&normals(n, seed), d).unwrap()
    }

    #[test]
    fn two_routes_agree() {
        let cfg = FiConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for &d in &[0.3, 0.5, 0.7, 1.0] {
            for rep in 0..5 {
                let n = rng.random_range(60..240);
                let y: Vec<f64> = fi_sample(d, n, rep * 31 + 7).iter().map(|v| v + 3.0).collect();
                let a = fi_forecast(&y, d, 24, &cfg).unwrap().forecasts;
                let b = direct_recursion(&y, d, 24, &cfg);
                for (x, z) in a.iter().zip(&b) {
                    assert!((x - z).abs() < 1e-8, "d = {d}: {x} vs {z}");
                }
            }
        }
    }

    #[test]
    fn zero_memory_is_demeaned_lar() {
        let y: Vec<f64> = normals(200, 3).iter().map(|v| 0.4 * v + 1.5).collect();
        let cfg = FiConfig::default();
        let res = fi_forecast(&y, 0.0, 6, &cfg).unwrap();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let z: Vec<f64> = y.iter().map(|v| v - mean).collect();
        let fit = ar_select_aic(&z, None, false).unwrap();
        let direct: Vec<f64> = ar_forecast(&fit, &z, 6).unwrap().iter().map(|v| v + mean).collect();
        for (x, w) in res.forecasts.iter().zip(&direct) {
            assert!((x - w).abs() < 1e-10);
        }
    }

    #[test]
    fn random_walk_with_white_increments() {
        // increments with no short-run dynamics select p = 0; the forecast is
        // then the last observation at every horizon
        let mut acc = 10.0;
        let y: Vec<f64> = normals(300, 12)
            .iter()
            .map(|e| {
                acc += e;
                acc
            })
            .collect();
        let cfg = FiConfig::default();
        let res = fi_forecast(&y, 1.0, 5, &cfg).unwrap();
        assert_eq!(res.ar_order, Some(0));
        assert_eq!(res.mu_hat, Some(y[0]));
        for (k, f) in res.forecasts.iter().enumerate() {
            assert!((f - y[299]).abs() < 1e-9, "h = {}", k + 1);
        }
        let direct = direct_recursion(&y, 1.0, 5, &cfg);
        for (f, g) in res.forecasts.iter().zip(&direct) {
            assert!((f - g).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_series_stays_constant() {
        let cfg = FiConfig::default();
        for d in [0.2, 0.5, 0.85] {
            let res = fi_forecast(&[4.5; 60], d, 8, &cfg).unwrap();
            assert!(res.residuals_xi.iter().all(|x| x.abs() < 1e-12));
            assert!(res.forecasts.iter().all(|f| (f - 4.5).abs() < 1e-10));
            assert_eq!(res.residuals_xi.len(), 60);
        }
        let f = forecast_dispatch(ForecastMethod::BENCHMARK, &[4.5; 60], 3, &cfg).unwrap();
        assert!(f.forecasts.iter().all(|v| (v - 4.5).abs() < 1e-10));
    }

    #[test]
    fn preconditions() {
        let cfg = FiConfig::default();
        assert!(fi_forecast(&[1.0; 40], 2.5, 1, &cfg).is_err());
        assert!(fi_forecast(&[1.0; 40], 0.4, 0, &cfg).is_err());
        assert!(matches!(
            fi_forecast(&[1.0; 29], 0.4, 1, &cfg),
            Err(Error::InsufficientData { needed: 30, got: 29 })
        ));
    }

    #[test]
    fn trivial_methods() {
        let cfg = FiConfig::default();
        let w = [1.0, 2.0, 3.0];
        assert_eq!(forecast_dispatch(ForecastMethod::Mean, &w, 2, &cfg).unwrap().forecasts, vec![2.0, 2.0]);
        assert_eq!(forecast_dispatch(ForecastMethod::Naive, &w, 2, &cfg).unwrap().forecasts, vec![3.0, 3.0]);
        let err = forecast_dispatch(ForecastMethod::Har, &w, 1, &cfg).unwrap_err();
        assert!(matches!(err, Error::Method { ref method, .. } if method == "HAR"));
    }

    #[test]
    fn method_ids_round_trip() {
        let all = [
            ForecastMethod::FiFixed(0.5),
            ForecastMethod::FiLw(0.65),
            ForecastMethod::FiUnit,
            ForecastMethod::Lar,
            ForecastMethod::Ar1,
            ForecastMethod::Ets,
            ForecastMethod::Har,
            ForecastMethod::Mean,
            ForecastMethod::Naive,
        ];
        for m in all {
            assert_eq!(m.to_string().parse::<ForecastMethod>().unwrap(), m);
        }
        assert_eq!(ForecastMethod::FiLw(0.8).label(), "FI(T^0.8)");
        assert!("fi:abc".parse::<ForecastMethod>().is_err());
        assert!("arima".parse::<ForecastMethod>().is_err());
    }

    #[test]
    fn every_method_is_location_equivariant() {
        let cfg = FiConfig::default();
        let y = fi_sample(0.4, 150, 5);
        let c = 37.0;
        let shifted: Vec<f64> = y.iter().map(|v| v + c).collect();
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
            let a = forecast_dispatch(m, &y, 12, &cfg).unwrap().forecasts;
            let b = forecast_dispatch(m, &shifted, 12, &cfg).unwrap().forecasts;
            for (x, z) in a.iter().zip(&b) {
                assert!((x + c - z).abs() < 1e-6, "{}: {x} + c vs {z}", m.label());
            }
        }
    }

    #[test]
    fn lw_variant_is_deterministic() {
        let cfg = FiConfig::default();
        let y = fi_sample(0.4, 200, 19);
        let a = forecast_dispatch(ForecastMethod::FiLw(0.65), &y, 12, &cfg).unwrap();
        let b = forecast_dispatch(ForecastMethod::FiLw(0.65), &y, 12, &cfg).unwrap();
        assert_eq!(a, b);
        let d = a.d_used.unwrap();
        assert!((-0.5..=1.5).contains(&d));
    }
}
