//! Estimators of the level of a type II fractionally integrated series and
//! the variance theory of the regression-based estimator.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::fracdiff::{frac_diff, r_sequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeanMethod {
    Arithmetic,
    Robinson,
    Shimotsu,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanEstimate {
    pub mu_hat: f64,
    pub method: MeanMethod,
    pub d_used: Option<f64>,
    /// Weight on the sample mean (Shimotsu only).
    pub weight_v: Option<f64>,
}

fn mean(series: &[f64]) -> f64 {
    series.iter().sum::<f64>() / series.len() as f64
}

fn constant_value(series: &[f64]) -> Option<f64> {
    let first = *series.first()?;
    series.iter().all(|&v| v == first).then_some(first)
}

pub fn arithmetic_mean(series: &[f64]) -> Result<MeanEstimate> {
    Error::require_len(series.len(), 1)?;
    Ok(MeanEstimate {
        mu_hat: mean(series),
        method: MeanMethod::Arithmetic,
        d_used: None,
        weight_v: None,
    })
}

/// OLS slope of `Delta^d_+ y_t` on `r_t`: `sum r_t z_t / sum r_t^2`.
///
/// A constant series returns its value exactly.
pub fn robinson_mean(series: &[f64], d: f64) -> Result<MeanEstimate> {
    Error::require_len(series.len(), 2)?;
    if !d.is_finite() {
        return Err(Error::invalid("d must be finite"));
    }
    let mu_hat = match constant_value(series) {
        Some(c) => c,
        None => {
            let z = frac_diff(series, d)?;
            let r = r_sequence(d, series.len())?;
            let num: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
            let den: f64 = r.iter().map(|a| a * a).sum();
            num / den
        }
    };
    Ok(MeanEstimate {
        mu_hat,
        method: MeanMethod::Robinson,
        d_used: Some(d),
        weight_v: None,
    })
}

/// Weight on the sample mean: 1 up to `d = 1/2`, a cosine taper on
/// `(1/2, 3/4)`, and 0 from `3/4` on.
pub fn shimotsu_weight(d: f64) -> f64 {
    if d <= 0.5 {
        1.0
    } else if d < 0.75 {
        0.5 * (1.0 + (4.0 * PI * d).cos())
    } else {
        0.0
    }
}

/// `v(d) * mean(y) + (1 - v(d)) * y_1`.
pub fn shimotsu_mean(series: &[f64], d: f64) -> Result<MeanEstimate> {
    Error::require_len(series.len(), 1)?;
    if !d.is_finite() {
        return Err(Error::invalid("d must be finite"));
    }
    let v = shimotsu_weight(d);
    let mu_hat = if v == 1.0 {
        mean(series)
    } else if v == 0.0 {
        series[0]
    } else {
        v * mean(series) + (1.0 - v) * series[0]
    };
    Ok(MeanEstimate {
        mu_hat,
        method: MeanMethod::Shimotsu,
        d_used: Some(d),
        weight_v: Some(v),
    })
}

pub fn estimate_mean(series: &[f64], method: MeanMethod, d: f64) -> Result<MeanEstimate> {
    match method {
        MeanMethod::Arithmetic => arithmetic_mean(series),
        MeanMethod::Robinson => robinson_mean(series, d),
        MeanMethod::Shimotsu => shimotsu_mean(series, d),
    }
}

/// Whether the open-interval formulas may be evaluated at their endpoints
/// by continuity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Open,
    Closed,
}

fn check_stationary(d: f64) -> Result<()> {
    if d > 0.0 && d < 0.5 {
        Ok(())
    } else {
        Err(Error::invalid(format!("d = {d} outside (0, 1/2)")))
    }
}

/// `(pi d / sin(pi d))^2`, equal to 1 at `d = 0`.
fn pi_d_over_sin_sq(d: f64) -> f64 {
    if d == 0.0 {
        1.0
    } else {
        let x = PI * d;
        (x / x.sin()).powi(2)
    }
}

/// Asymptotic variance ratio of the regression estimator to the sample mean,
/// `(1 - 4 d^2) (pi d)^2 / sin^2(pi d)`.
pub fn reff(d: f64, domain: Domain) -> Result<f64> {
    match domain {
        Domain::Open => check_stationary(d)?,
        Domain::Closed if (0.0..=0.5).contains(&d) => {}
        Domain::Closed => return Err(Error::invalid(format!("d = {d} outside [0, 1/2]"))),
    }
    Ok((1.0 - 4.0 * d * d) * pi_d_over_sin_sq(d))
}

/// Limit of `T^{1-2d} var(mu_hat(d))`:
/// `omega^2 (1 - 2d) (pi d)^2 / (Gamma(d+1)^2 sin^2(pi d))`.
pub fn prop1_limit(d: f64, omega2: f64) -> Result<f64> {
    check_stationary(d)?;
    check_omega(omega2)?;
    Ok(omega2 * (1.0 - 2.0 * d) * pi_d_over_sin_sq(d) / gamma(d + 1.0).powi(2))
}

/// Limit of `T^{1-2d} var(mean(y))`: `omega^2 / (Gamma(1+d)^2 (2d + 1))`.
pub fn tanaka_limit(d: f64, omega2: f64) -> Result<f64> {
    check_stationary(d)?;
    check_omega(omega2)?;
    Ok(omega2 / (gamma(1.0 + d).powi(2) * (2.0 * d + 1.0)))
}

fn check_omega(omega2: f64) -> Result<()> {
    if omega2 > 0.0 && omega2.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("long-run variance must be positive"))
    }
}

/// Exact finite-sample variance of the regression estimator given the
/// short-memory autocovariances `acf[h] = gamma_x(h)`. Lags past `T - 1` are
/// ignored; missing lags count as zero.
pub fn mu_hat_variance_exact(d: f64, acf: &[f64], t_len: usize) -> Result<f64> {
    Error::require_len(t_len, 1)?;
    let g0 = *acf
        .first()
        .ok_or_else(|| Error::invalid("autocovariance sequence is empty"))?;
    if !(g0 > 0.0) {
        return Err(Error::invalid("gamma(0) must be positive"));
    }
    let r = r_sequence(d, t_len)?;
    let ss: f64 = r.iter().map(|v| v * v).sum();
    let mut num = g0 * ss;
    for (h, &gh) in acf.iter().enumerate().take(t_len).skip(1) {
        if gh == 0.0 {
            continue;
        }
        let cross: f64 = r[..t_len - h].iter().zip(&r[h..]).map(|(a, b)| a * b).sum();
        num += 2.0 * gh * cross;
    }
    Ok(num / (ss * ss))
}
