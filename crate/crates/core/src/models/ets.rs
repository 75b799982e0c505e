//! Additive-error exponential smoothing: simple (ANN), Holt (AAN) and damped
//! Holt (AAdN), fitted by the concentrated Gaussian innovation likelihood and
//! chosen by AICc.

use crate::error::{Error, Result};
use crate::models::ols::log_sigma2;
use crate::optim::{nelder_mead, SimplexOptions};

pub const ALPHA_BOUNDS: (f64, f64) = (1e-4, 0.9999);
pub const PHI_BOUNDS: (f64, f64) = (0.8, 0.98);
/// Smallest sample accepted by [`ets_fit_select`].
pub const ETS_MIN_LEN: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EtsModel {
    Ann,
    Aan,
    AadN,
}

impl EtsModel {
    pub const ALL: [EtsModel; 3] = [EtsModel::Ann, EtsModel::Aan, EtsModel::AadN];

    /// Estimated quantities including the innovation variance.
    pub fn n_params(self) -> usize {
        match self {
            EtsModel::Ann => 3,
            EtsModel::Aan => 5,
            EtsModel::AadN => 6,
        }
    }

    pub fn has_trend(self) -> bool {
        self != EtsModel::Ann
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtsParams {
    pub alpha: f64,
    pub beta: Option<f64>,
    pub phi: Option<f64>,
    pub level0: f64,
    pub trend0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EtsFit {
    pub model: EtsModel,
    pub params: EtsParams,
    /// Final level and trend after filtering the whole sample.
    pub level: f64,
    pub trend: f64,
    pub sse: f64,
    pub aicc: f64,
    pub n: usize,
}

fn run_filter(y: &[f64], model: EtsModel, p: &EtsParams) -> (f64, f64, f64) {
    let phi = match model {
        EtsModel::Ann => 0.0,
        EtsModel::Aan => 1.0,
        EtsModel::AadN => p.phi.unwrap_or(1.0),
    };
    let beta = p.beta.unwrap_or(0.0);
    let mut level = p.level0;
    let mut trend = if model.has_trend() { p.trend0.unwrap_or(0.0) } else { 0.0 };
    let mut sse = 0.0;
    for &obs in y {
        let pred = level + phi * trend;
        let e = obs - pred;
        sse += e * e;
        level = pred + p.alpha * e;
        trend = phi * trend + beta * e;
    }
    (level, trend, sse)
}

fn aicc(model: EtsModel, sse: f64, n: usize) -> f64 {
    let k = model.n_params() as f64;
    let nf = n as f64;
    let aic = nf * log_sigma2(sse / nf) + 2.0 * k;
    aic + 2.0 * k * (k + 1.0) / (nf - k - 1.0)
}

/// Filter `series` with fixed parameters.
pub fn ets_fit_fixed(series: &[f64], model: EtsModel, params: EtsParams) -> Result<EtsFit> {
    if series.is_empty() || series.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("ETS needs a non-empty finite series"));
    }
    let (level, trend, sse) = run_filter(series, model, &params);
    Ok(EtsFit {
        model,
        params,
        level,
        trend,
        sse,
        aicc: aicc(model, sse, series.len()),
        n: series.len(),
    })
}

fn squash(u: f64, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) / (1.0 + (-u).exp())
}

fn unsquash(v: f64, (lo, hi): (f64, f64)) -> f64 {
    let s = (v - lo) / (hi - lo);
    (s / (1.0 - s)).ln()
}

/// Maps the unconstrained simplex coordinates to parameters. The trend
/// smoothing weight is kept below `alpha`.
struct Layout {
    model: EtsModel,
    level_init: f64,
    trend_init: f64,
    scale: f64,
}

impl Layout {
    fn decode(&self, u: &[f64]) -> EtsParams {
        let alpha = squash(u[0], ALPHA_BOUNDS);
        match self.model {
            EtsModel::Ann => EtsParams {
                alpha,
                beta: None,
                phi: None,
                level0: self.level_init + self.scale * u[1],
                trend0: None,
            },
            EtsModel::Aan => EtsParams {
                alpha,
                beta: Some(squash(u[1], (ALPHA_BOUNDS.0, alpha))),
                phi: None,
                level0: self.level_init + self.scale * u[2],
                trend0: Some(self.trend_init + 0.1 * self.scale * u[3]),
            },
            EtsModel::AadN => EtsParams {
                alpha,
                beta: Some(squash(u[1], (ALPHA_BOUNDS.0, alpha))),
                phi: Some(squash(u[2], PHI_BOUNDS)),
                level0: self.level_init + self.scale * u[3],
                trend0: Some(self.trend_init + 0.1 * self.scale * u[4]),
            },
        }
    }

    fn start(&self) -> Vec<f64> {
        let a = unsquash(0.5, ALPHA_BOUNDS);
        let b = unsquash(0.1, (0.0, 1.0));
        match self.model {
            EtsModel::Ann => vec![a, 0.0],
            EtsModel::Aan => vec![a, b, 0.0, 0.0],
            EtsModel::AadN => vec![a, b, unsquash(0.9, PHI_BOUNDS), 0.0, 0.0],
        }
    }
}

/// Fit one candidate by maximizing the concentrated likelihood, that is by
/// minimizing `T log(SSE / T)`. The series is centred on its first value
/// internally so the fit is equivariant to level shifts.
pub fn ets_fit(series: &[f64], model: EtsModel) -> Result<EtsFit> {
    Error::require_len(series.len(), ETS_MIN_LEN)?;
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("series contains non-finite values"));
    }
    let origin = series[0];
    let z: Vec<f64> = series.iter().map(|v| v - origin).collect();
    let n = z.len();

    let k = n.min(10);
    let tbar = (k as f64 + 1.0) / 2.0;
    let zbar = z[..k].iter().sum::<f64>() / k as f64;
    let sxy: f64 = z[..k].iter().enumerate().map(|(i, v)| (i as f64 + 1.0 - tbar) * (v - zbar)).sum();
    let sxx: f64 = (1..=k).map(|t| (t as f64 - tbar).powi(2)).sum();
    let slope = sxy / sxx;
    let mean = z.iter().sum::<f64>() / n as f64;
    let sd = (z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    let layout = Layout {
        model,
        level_init: if model.has_trend() { zbar - slope * tbar } else { z[0] },
        trend_init: if model.has_trend() { slope } else { 0.0 },
        scale: if sd > 0.0 { sd } else { 1.0 },
    };

    let objective = |u: &[f64]| {
        let (_, _, sse) = run_filter(&z, model, &layout.decode(u));
        n as f64 * log_sigma2(sse / n as f64)
    };
    let opts = SimplexOptions {
        max_evals: 600 * (layout.start().len() + 1),
        f_tol: 1e-10,
        x_tol: 1e-8,
    };
    let steps = vec![0.5; layout.start().len()];
    let mut res = nelder_mead(objective, &layout.start(), &steps, &opts);
    // one restart from the best vertex guards against a collapsed simplex
    let again = nelder_mead(objective, &res.x, &steps, &opts);
    if again.value <= res.value {
        res = again;
    }
    if !res.value.is_finite() {
        return Err(Error::failed(format!("{model:?} likelihood is not finite"), None));
    }
    let mut params = layout.decode(&res.x);
    let (level, trend, sse) = run_filter(&z, model, &params);
    params.level0 += origin;
    Ok(EtsFit {
        model,
        params,
        level: level + origin,
        trend,
        sse,
        aicc: aicc(model, sse, n),
        n,
    })
}

/// Fit every candidate and keep the smallest AICc; candidates that fail are
/// skipped and ties go to the simpler model.
pub fn ets_fit_select(series: &[f64]) -> Result<EtsFit> {
    let mut best: Option<EtsFit> = None;
    let mut last_err = None;
    for model in EtsModel::ALL {
        match ets_fit(series, model) {
            Ok(fit) => {
                if best.as_ref().is_none_or(|b| fit.aicc < b.aicc) {
                    best = Some(fit);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| {
        last_err.unwrap_or_else(|| Error::failed("no exponential smoothing candidate could be fitted", None))
    })
}

pub fn ets_forecast(fit: &EtsFit, h: usize) -> Vec<f64> {
    let phi = match fit.model {
        EtsModel::Ann => 0.0,
        EtsModel::Aan => 1.0,
        EtsModel::AadN => fit.params.phi.unwrap_or(1.0),
    };
    let mut out = Vec::with_capacity(h);
    let mut damp = 0.0;
    let mut pow = 1.0;
    for _ in 0..h {
        pow *= phi;
        damp += pow;
        out.push(fit.level + damp * fit.trend);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn walk(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut acc = 0.0;
        (0..n)
            .map(|_| {
                let e: f64 = StandardNormal.sample(&mut rng);
                acc += e;
                acc + 0.5 * e
            })
            .collect()
    }

    #[test]
    fn constant_series_forecasts_constant() {
        let fit = ets_fit_select(&[3.25; 40]).unwrap();
        assert_eq!(fit.model, EtsModel::Ann);
        assert!(ets_forecast(&fit, 6).iter().all(|v| (v - 3.25).abs() < 1e-12));
    }

    #[test]
    fn holt_reproduces_line() {
        let y: Vec<f64> = (1..=50).map(|t| 2.0 + 3.0 * t as f64).collect();
        let fit = ets_fit(&y, EtsModel::Aan).unwrap();
        for (h, f) in ets_forecast(&fit, 8).iter().enumerate() {
            let target = 2.0 + 3.0 * (50 + h + 1) as f64;
            assert!((f - target).abs() < 1e-6, "h = {}: {f} vs {target}", h + 1);
        }
    }

    #[test]
    fn fixed_alpha_matches_hand_recursion() {
        let y = [1.0, 3.0, 2.0, 5.0, 4.0];
        let alpha = 0.3;
        let mut level = 2.0;
        for v in y {
            level += alpha * (v - level);
        }
        let params = EtsParams {
            alpha,
            beta: None,
            phi: None,
            level0: 2.0,
            trend0: None,
        };
        let fit = ets_fit_fixed(&y, EtsModel::Ann, params).unwrap();
        // 2 -> 1.7 -> 2.09 -> 2.063 -> 2.9441 -> 3.26087
        assert!((level - 3.26087).abs() < 1e-12);
        assert_eq!(ets_forecast(&fit, 3), vec![level; 3]);
    }

    #[test]
    fn damped_forecast_accumulates_powers() {
        let fit = EtsFit {
            model: EtsModel::AadN,
            params: EtsParams {
                alpha: 0.5,
                beta: Some(0.1),
                phi: Some(0.9),
                level0: 0.0,
                trend0: Some(0.0),
            },
            level: 10.0,
            trend: 1.0,
            sse: 0.0,
            aicc: 0.0,
            n: 20,
        };
        let f = ets_forecast(&fit, 3);
        assert!((f[0] - 10.9).abs() < 1e-12);
        assert!((f[1] - 11.71).abs() < 1e-12);
        assert!((f[2] - 12.439).abs() < 1e-12);
    }

    #[test]
    fn parameters_stay_in_bounds() {
        let y = walk(150, 3);
        for model in EtsModel::ALL {
            let p = ets_fit(&y, model).unwrap().params;
            assert!(p.alpha > 0.0 && p.alpha < 1.0);
            if let Some(b) = p.beta {
                assert!(b > 0.0 && b < 1.0);
            }
            if let Some(phi) = p.phi {
                assert!(phi > 0.8 && phi < 0.98);
            }
        }
    }

    #[test]
    fn location_equivariance() {
        let y = walk(120, 8);
        let c = 250.0;
        let shifted: Vec<f64> = y.iter().map(|v| v + c).collect();
        for model in EtsModel::ALL {
            let a = ets_forecast(&ets_fit(&y, model).unwrap(), 5);
            let b = ets_forecast(&ets_fit(&shifted, model).unwrap(), 5);
            for (x, z) in a.iter().zip(&b) {
                assert!((x + c - z).abs() < 1e-6, "{model:?}: {x} + c vs {z}");
            }
        }
    }

    #[test]
    fn short_series_rejected() {
        assert!(matches!(
            ets_fit_select(&[1.0; 9]),
            Err(Error::InsufficientData { needed: 10, got: 9 })
        ));
    }
}
