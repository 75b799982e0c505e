//! Autoregressions fitted by least squares, AIC order selection and
//! recursive multi-step forecasts.

use nalgebra::{DMatrix, DVector};

use super::ols::{least_squares, log_sigma2};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ArFit {
    pub order_p: usize,
    pub intercept: Option<f64>,
    pub coeffs: Vec<f64>,
    pub sigma2_hat: f64,
    pub aic: f64,
    pub effective_sample: usize,
    /// Set when the design was singular and the minimum-norm solution was used.
    pub rank_deficient: bool,
}

impl ArFit {
    /// One-step fitted value given the `order_p` most recent values, oldest first.
    pub fn predict_next(&self, recent: &[f64]) -> f64 {
        let p = self.order_p;
        let mut v = self.intercept.unwrap_or(0.0);
        for (k, a) in self.coeffs.iter().enumerate() {
            v += a * recent[p - 1 - k];
        }
        v
    }
}

/// How the default maximum lag is derived from the sample size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MaxLagRule {
    /// `12 * floor((T / 100)^{1/4})`
    #[default]
    Literal,
    /// `floor(12 * (T / 100)^{1/4})`
    Rounded,
    Fixed(usize),
}

impl MaxLagRule {
    /// Maximum lag for a sample of length `t_len`, capped at `floor(T / 4)`.
    pub fn max_lag(self, t_len: usize) -> usize {
        let q = (t_len as f64 / 100.0).powf(0.25);
        let raw = match self {
            MaxLagRule::Literal => 12 * q.floor() as usize,
            MaxLagRule::Rounded => (12.0 * q).floor() as usize,
            MaxLagRule::Fixed(p) => p,
        };
        raw.min(t_len / 4)
    }
}

fn design(series: &[f64], p: usize, start: usize, with_intercept: bool) -> DMatrix<f64> {
    let rows = series.len() - start;
    let off = usize::from(with_intercept);
    DMatrix::from_fn(rows, p + off, |i, j| {
        if with_intercept && j == 0 {
            1.0
        } else {
            series[start + i - (j + 1 - off)]
        }
    })
}

fn check_finite(series: &[f64]) -> Result<()> {
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("series contains non-finite values"));
    }
    Ok(())
}

/// Least squares on rows `start..T` (0-based), conditioning on `start >= p`
/// earlier observations.
fn fit_rows(series: &[f64], p: usize, with_intercept: bool, start: usize) -> ArFit {
    let x = design(series, p, start, with_intercept);
    let y = &series[start..];
    let sol = least_squares(x.clone(), y);
    let beta = DVector::from_column_slice(&sol.beta);
    let resid = DVector::from_column_slice(y) - x * beta;
    let n = y.len();
    let sigma2_hat = resid.norm_squared() / n as f64;
    let k = p + usize::from(with_intercept);
    let (intercept, coeffs) = if with_intercept {
        (Some(sol.beta[0]), sol.beta[1..].to_vec())
    } else {
        (None, sol.beta)
    };
    ArFit {
        order_p: p,
        intercept,
        coeffs,
        sigma2_hat,
        aic: n as f64 * log_sigma2(sigma2_hat) + 2.0 * k as f64,
        effective_sample: n,
        rank_deficient: sol.rank_deficient,
    }
}

/// AR(p) by OLS on rows `t = p+1..T`.
pub fn ar_fit(series: &[f64], p: usize, with_intercept: bool) -> Result<ArFit> {
    check_finite(series)?;
    Error::require_len(series.len(), p + usize::from(with_intercept) + 2)?;
    Ok(fit_rows(series, p, with_intercept, p))
}

/// AIC selection over `p = 0..=p_max` on the common sample `t = p_max+1..T`,
/// followed by a refit of the winner on its own maximal sample. `None` uses
/// [`MaxLagRule::Literal`].
pub fn ar_select_aic(series: &[f64], p_max: Option<usize>, with_intercept: bool) -> Result<ArFit> {
    let p_max = p_max.unwrap_or_else(|| MaxLagRule::Literal.max_lag(series.len()));
    let (best, _) = ar_select_scores(series, p_max, with_intercept)?;
    Ok(fit_rows(series, best, with_intercept, best))
}

pub fn ar_select_with_rule(series: &[f64], rule: MaxLagRule, with_intercept: bool) -> Result<ArFit> {
    ar_select_aic(series, Some(rule.max_lag(series.len())), with_intercept)
}

/// Common-sample AIC for every order `0..=p_max`, and the selected order.
///
/// All candidate designs are leading column blocks of one matrix, so one Gram
/// matrix serves every order; a failed Cholesky falls back to the
/// minimum-norm fit.
pub fn ar_select_scores(series: &[f64], p_max: usize, with_intercept: bool) -> Result<(usize, Vec<f64>)> {
    check_finite(series)?;
    Error::require_len(series.len(), p_max + 3)?;
    let off = usize::from(with_intercept);
    let x = design(series, p_max, p_max, with_intercept);
    let y = DVector::from_column_slice(&series[p_max..]);
    let n = y.len();
    let gram = x.transpose() * &x;
    let xty = x.transpose() * &y;
    let yty = y.norm_squared();

    let mut scores = Vec::with_capacity(p_max + 1);
    for p in 0..=p_max {
        let k = p + off;
        let rss = if k == 0 {
            yty
        } else {
            let g = gram.view((0, 0), (k, k)).into_owned();
            let b = xty.rows(0, k).into_owned();
            match g.cholesky() {
                Some(ch) => {
                    let beta = ch.solve(&b);
                    // yty - b'beta loses accuracy when the fit is nearly exact;
                    // recompute from residuals in that case
                    let fast = yty - beta.dot(&b);
                    if fast > 1e-8 * yty {
                        fast
                    } else {
                        (&y - x.columns(0, k) * beta).norm_squared()
                    }
                }
                None => {
                    let xs = x.columns(0, k).into_owned();
                    let sol = least_squares(xs.clone(), y.as_slice());
                    (&y - xs * DVector::from_column_slice(&sol.beta)).norm_squared()
                }
            }
        };
        scores.push(n as f64 * log_sigma2(rss.max(0.0) / n as f64) + 2.0 * k as f64);
    }
    let mut best = 0;
    for (p, &s) in scores.iter().enumerate() {
        if s < scores[best] {
            best = p;
        }
    }
    Ok((best, scores))
}

/// Recursive `h`-step forecasts continuing `history`; known values are used
/// wherever the recursion reaches back into the sample.
pub fn ar_forecast(fit: &ArFit, history: &[f64], h: usize) -> Result<Vec<f64>> {
    let p = fit.order_p;
    if history.len() < p {
        return Err(Error::invalid(format!(
            "history of length {} is shorter than the AR order {p}",
            history.len()
        )));
    }
    let mut buf: Vec<f64> = history[history.len() - p..].to_vec();
    let mut out = Vec::with_capacity(h);
    for _ in 0..h {
        let next = fit.predict_next(&buf[buf.len() - p..]);
        buf.push(next);
        out.push(next);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn normals(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    fn ar1(phi: f64, n: usize, seed: u64) -> Vec<f64> {
        let e = normals(n, seed);
        let mut y = vec![e[0] / (1.0 - phi * phi).sqrt()];
        for t in 1..n {
            y.push(phi * y[t - 1] + e[t]);
        }
        y
    }

    #[test]
    fn exact_recursion_recovered() {
        let y: Vec<f64> = (0..20).map(|t| 0.5f64.powi(t)).collect();
        let f = ar_fit(&y, 1, false).unwrap();
        assert!((f.coeffs[0] - 0.5).abs() < 1e-12);
        assert!(f.sigma2_hat < 1e-25);
        assert!(f.aic.is_finite());
    }

    #[test]
    fn white_noise_and_ar1_coefficients() {
        for seed in [1, 2, 3] {
            let f = ar_fit(&normals(5000, seed), 1, false).unwrap();
            assert!(f.coeffs[0].abs() < 0.05);
        }
        let f = ar_fit(&ar1(0.5, 5000, 11), 1, false).unwrap();
        assert!((f.coeffs[0] - 0.5).abs() < 0.05);
        assert_eq!(f.effective_sample, 4999);
    }

    #[test]
    fn max_lag_rules() {
        assert_eq!(MaxLagRule::Literal.max_lag(300), 12);
        assert_eq!(MaxLagRule::Literal.max_lag(1600), 24);
        assert_eq!(MaxLagRule::Rounded.max_lag(300), 15);
        assert_eq!(MaxLagRule::Literal.max_lag(40), 0);
        assert_eq!(MaxLagRule::Fixed(30).max_lag(60), 15);
    }

    #[test]
    fn white_noise_mostly_selects_zero() {
        let zeros = (0..200)
            .filter(|&s| ar_select_aic(&normals(1000, 100 + s), None, false).unwrap().order_p == 0)
            .count();
        assert!(zeros >= 100, "p = 0 in {zeros} of 200 runs");
    }

    #[test]
    fn gram_scores_match_direct_fits() {
        let y = ar1(0.6, 300, 5);
        let p_max = 6;
        let (_, scores) = ar_select_scores(&y, p_max, true).unwrap();
        for (p, s) in scores.iter().enumerate() {
            // direct fit of order p on the same common sample
            let f = fit_rows(&y, p, true, p_max);
            assert!((f.aic - s).abs() < 1e-8 * s.abs().max(1.0), "p = {p}");
        }
    }

    #[test]
    fn selected_aic_beats_extremes() {
        let y = ar1(0.7, 400, 9);
        let (best, scores) = ar_select_scores(&y, 12, true).unwrap();
        assert!(scores[best] <= scores[0] && scores[best] <= scores[12]);
        let fit = ar_select_aic(&y, Some(12), true).unwrap();
        assert_eq!(fit.order_p, best);
        assert_eq!(fit.effective_sample, 400 - best);
    }

    #[test]
    fn forecast_examples() {
        let fit = ArFit {
            order_p: 1,
            intercept: None,
            coeffs: vec![0.5],
            sigma2_hat: 1.0,
            aic: 0.0,
            effective_sample: 10,
            rank_deficient: false,
        };
        assert_eq!(ar_forecast(&fit, &[7.0, 2.0], 3).unwrap(), vec![1.0, 0.5, 0.25]);
        let flat = ArFit {
            order_p: 0,
            intercept: Some(3.5),
            coeffs: vec![],
            ..fit.clone()
        };
        assert_eq!(ar_forecast(&flat, &[], 4).unwrap(), vec![3.5; 4]);
        let two = ArFit { order_p: 2, coeffs: vec![0.1, 0.2], ..fit };
        assert!(ar_forecast(&two, &[1.0], 1).is_err());
    }

    #[test]
    fn long_horizon_reaches_process_mean() {
        let fit = ar_fit(&ar1(0.6, 500, 4).iter().map(|v| v + 2.0).collect::<Vec<_>>(), 3, true).unwrap();
        let mean = fit.intercept.unwrap() / (1.0 - fit.coeffs.iter().sum::<f64>());
        let f = ar_forecast(&fit, &[1.0, -4.0, 9.0], 500).unwrap();
        assert!((f[499] - mean).abs() < 1e-6);
    }

    #[test]
    fn one_step_reproduces_fitted_values() {
        let y = ar1(0.4, 120, 21);
        let fit = ar_fit(&y, 3, true).unwrap();
        let x = design(&y, 3, 3, true);
        let mut beta = vec![fit.intercept.unwrap()];
        beta.extend(&fit.coeffs);
        let fitted = x * DVector::from_vec(beta);
        for t in 3..y.len() {
            let f = ar_forecast(&fit, &y[..t], 1).unwrap()[0];
            assert!((f - fitted[t - 3]).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_with_intercept_is_flagged() {
        let fit = ar_fit(&[4.0; 30], 2, true).unwrap();
        assert!(fit.rank_deficient);
        let f = ar_forecast(&fit, &[4.0; 30], 5).unwrap();
        assert!(f.iter().all(|v| (v - 4.0).abs() < 1e-9));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn selection_never_worse_than_bounds(seed in 0u64..1000, p_max in 1usize..8) {
            let y = ar1(0.3, 150, seed);
            let (best, scores) = ar_select_scores(&y, p_max, false).unwrap();
            prop_assert!(scores[best] <= scores[0]);
            prop_assert!(scores[best] <= scores[p_max]);
            prop_assert!(scores[..best].iter().all(|s| *s > scores[best]));
        }
    }
}
