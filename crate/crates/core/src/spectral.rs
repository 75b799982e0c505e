//! Fourier frequencies, the raw periodogram and the ARFI(p, d) spectral shape.
//!
//! The periodogram uses the `1 / (2 pi T)` normalization at the Fourier
//! frequencies `2 pi j / T`, `j = 1..floor((T - 1) / 2)`. The series is not
//! demeaned: adding a constant leaves every ordinate at a nonzero Fourier
//! frequency unchanged. Any positive rescaling cancels in the concentrated
//! Whittle objectives, so the normalization never affects an estimate.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Smallest sample the periodogram accepts.
pub const MIN_PERIODOGRAM_LEN: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Periodogram {
    pub t_len: usize,
    pub frequencies: Vec<f64>,
    pub ordinates: Vec<f64>,
}

impl Periodogram {
    pub fn len(&self) -> usize {
        self.ordinates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordinates.is_empty()
    }
}

/// Number of usable Fourier frequencies for a sample of length `t_len`.
pub fn n_frequencies(t_len: usize) -> usize {
    t_len.saturating_sub(1) / 2
}

pub fn fourier_frequency(j: usize, t_len: usize) -> f64 {
    2.0 * PI * j as f64 / t_len as f64
}

/// Full periodogram over `j = 1..floor((T - 1) / 2)`.
pub fn periodogram(series: &[f64]) -> Result<Periodogram> {
    periodogram_leading(series, n_frequencies(series.len()))
}

/// The first `m` periodogram ordinates only; local estimators never look past
/// their bandwidth, and the direct DFT costs `O(T)` per ordinate.
pub fn periodogram_leading(series: &[f64], m: usize) -> Result<Periodogram> {
    let t_len = series.len();
    Error::require_len(t_len, MIN_PERIODOGRAM_LEN)?;
    let n = n_frequencies(t_len);
    if m > n {
        return Err(Error::invalid(format!(
            "requested {m} ordinates but only {n} Fourier frequencies exist for T = {t_len}"
        )));
    }
    // cos/sin of 2 pi k / T for k = 0..T; the phase of t * j is taken mod T,
    // so no error accumulates along the sum.
    let (cos_tab, sin_tab): (Vec<f64>, Vec<f64>) = (0..t_len)
        .map(|k| {
            let w = 2.0 * PI * k as f64 / t_len as f64;
            (w.cos(), w.sin())
        })
        .unzip();
    let scale = 1.0 / (2.0 * PI * t_len as f64);
    let mut frequencies = Vec::with_capacity(m);
    let mut ordinates = Vec::with_capacity(m);
    for j in 1..=m {
        let (mut re, mut im) = (0.0, 0.0);
        let mut idx = 0usize;
        for &y in series {
            re += y * cos_tab[idx];
            im -= y * sin_tab[idx];
            idx += j;
            if idx >= t_len {
                idx -= t_len;
            }
        }
        frequencies.push(fourier_frequency(j, t_len));
        ordinates.push(scale * (re * re + im * im));
    }
    Ok(Periodogram {
        t_len,
        frequencies,
        ordinates,
    })
}

/// `log |2 sin(lambda / 2)|`, the log-modulus of `1 - e^{-i lambda}`.
pub(crate) fn log_two_sin_half(lambda: f64) -> f64 {
    (2.0 * (0.5 * lambda).sin()).abs().ln()
}

/// Spectral shape of an ARFI(p, d) model with unit innovation variance:
/// `g(l) = |2 sin(l / 2)|^{-2d} |1 - sum_k a_k e^{-i k l}|^{-2}`.
///
/// The AR polynomial is not required to be stationary.
pub fn arfi_spectral_shape(d: f64, ar: &[f64], freqs: &[f64]) -> Result<Vec<f64>> {
    if !d.is_finite() || ar.iter().any(|a| !a.is_finite()) {
        return Err(Error::invalid("shape parameters must be finite"));
    }
    freqs
        .iter()
        .map(|&lambda| {
            if !(lambda > 0.0 && lambda <= PI) {
                return Err(Error::invalid(format!(
                    "frequency {lambda} outside (0, pi]"
                )));
            }
            let (mut re, mut im) = (1.0, 0.0);
            for (k, a) in ar.iter().enumerate() {
                let w = (k + 1) as f64 * lambda;
                re -= a * w.cos();
                im += a * w.sin();
            }
            let ar_mod2 = re * re + im * im;
            Ok((-2.0 * d * log_two_sin_half(lambda)).exp() / ar_mod2)
        })
        .collect()
}
