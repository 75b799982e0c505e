//! Heterogeneous autoregression on daily, weekly and monthly averages.

use nalgebra::{DMatrix, DVector};

use super::ols::least_squares;
use crate::error::{Error, Result};

pub const HAR_WEEK: usize = 5;
pub const HAR_MONTH: usize = 22;

#[derive(Debug, Clone, PartialEq)]
pub struct HarFit {
    pub beta0: f64,
    pub beta_d: f64,
    pub beta_w: f64,
    pub beta_m: f64,
    pub sigma2_hat: f64,
    pub rank_deficient: bool,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

impl HarFit {
    /// Prediction from a history holding at least 22 values.
    fn predict_next(&self, hist: &[f64]) -> f64 {
        let n = hist.len();
        self.beta0
            + self.beta_d * hist[n - 1]
            + self.beta_w * mean(&hist[n - HAR_WEEK..])
            + self.beta_m * mean(&hist[n - HAR_MONTH..])
    }
}

pub fn har_fit(series: &[f64]) -> Result<HarFit> {
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("series contains non-finite values"));
    }
    Error::require_len(series.len(), HAR_MONTH + 2)?;
    let rows = series.len() - HAR_MONTH;
    let x = DMatrix::from_fn(rows, 4, |i, j| {
        let t = HAR_MONTH + i;
        match j {
            0 => 1.0,
            1 => series[t - 1],
            2 => mean(&series[t - HAR_WEEK..t]),
            _ => mean(&series[t - HAR_MONTH..t]),
        }
    });
    let y = &series[HAR_MONTH..];
    let sol = least_squares(x.clone(), y);
    let resid = DVector::from_column_slice(y) - x * DVector::from_column_slice(&sol.beta);
    Ok(HarFit {
        beta0: sol.beta[0],
        beta_d: sol.beta[1],
        beta_w: sol.beta[2],
        beta_m: sol.beta[3],
        sigma2_hat: resid.norm_squared() / rows as f64,
        rank_deficient: sol.rank_deficient,
    })
}

/// Recursive forecasts; the weekly and monthly averages absorb earlier
/// forecasts as the horizon grows.
pub fn har_forecast(fit: &HarFit, history: &[f64], h: usize) -> Result<Vec<f64>> {
    if history.len() < HAR_MONTH {
        return Err(Error::invalid(format!(
            "HAR forecasting needs {HAR_MONTH} past values, got {}",
            history.len()
        )));
    }
    let mut buf = history[history.len() - HAR_MONTH..].to_vec();
    let mut out = Vec::with_capacity(h);
    for _ in 0..h {
        let next = fit.predict_next(&buf[buf.len() - HAR_MONTH..]);
        buf.push(next);
        out.push(next);
    }
    Ok(out)
}
