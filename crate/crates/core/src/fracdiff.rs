//! Binomial coefficients of `(1 - L)^d` and the truncated (type II)
//! fractional filters built from them.
//!
//! Coefficients come from the ratio recursion
//! `pi_j(d) = pi_{j-1}(d) * (j - 1 - d) / j`, which stays finite for any
//! length and yields exact zeros past `j = d` for nonnegative integer `d`.
//!
//! Filters are direct convolutions, `O(T^2)` in the series length. Every
//! experiment in this crate stays below a few thousand observations, where
//! the direct sum is fast enough and exact in its truncation.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};

/// Expansion coefficients `pi_0(d), ..., pi_{n-1}(d)` of `(1 - L)^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffSeq {
    pub order: f64,
    pub values: Vec<f64>,
}

impl CoeffSeq {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_order(d: f64) -> Result<()> {
    if d.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("fractional order must be finite, got {d}")))
    }
}

fn coeff_values(d: f64, n: usize) -> Vec<f64> {
    let mut values = Vec::with_capacity(n);
    if n == 0 {
        return values;
    }
    values.push(1.0);
    for j in 1..n {
        let jf = j as f64;
        values.push(values[j - 1] * (jf - 1.0 - d) / jf);
    }
    values
}

/// Coefficients of `(1 - L)^d`. Pass `-d` to get the integration filter.
pub fn pi_coeffs(d: f64, n: usize) -> Result<CoeffSeq> {
    check_order(d)?;
    if n == 0 {
        return Err(Error::invalid("coefficient count must be at least 1"));
    }
    Ok(CoeffSeq {
        order: d,
        values: coeff_values(d, n),
    })
}

/// Truncated convolution `out[t] = sum_{j<=t} coeffs[j] * x[t - j]`.
pub(crate) fn convolve_truncated(coeffs: &[f64], x: &[f64]) -> Vec<f64> {
    debug_assert!(coeffs.len() >= x.len());
    let mut out = Vec::with_capacity(x.len());
    for t in 0..x.len() {
        let mut acc = 0.0;
        for (c, v) in coeffs[..=t].iter().zip(x[..=t].iter().rev()) {
            acc += c * v;
        }
        out.push(acc);
    }
    out
}

/// Truncated fractional difference `Delta^d_+ x_t`, values before the
/// first observation treated as zero.
pub fn frac_diff(series: &[f64], d: f64) -> Result<Vec<f64>> {
    check_order(d)?;
    if series.is_empty() {
        return Err(Error::invalid("cannot filter an empty series"));
    }
    Ok(convolve_truncated(&coeff_values(d, series.len()), series))
}

/// Truncated fractional integration `Delta^{-d}_+ x_t`.
pub fn frac_integrate(series: &[f64], d: f64) -> Result<Vec<f64>> {
    frac_diff(series, -d)
}

/// Deterministic regressor `r_t = sum_{j<t} pi_j(d)`, `t = 1..T`: the
/// filtered image of a unit constant.
pub fn r_sequence(d: f64, t_len: usize) -> Result<Vec<f64>> {
    let pi = pi_coeffs(d, t_len)?;
    let mut acc = 0.0;
    Ok(pi
        .values
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect())
}

/// Shared store of coefficient sequences keyed on the exact bits of `d`.
///
/// Only the longest sequence requested so far is kept per order; shorter
/// requests are served as prefixes. Concurrent inserts of the same order
/// compute identical values, so whichever write lands last is harmless.
#[derive(Debug, Default)]
pub struct CoeffCache {
    pi: RwLock<HashMap<u64, Arc<Vec<f64>>>>,
}

impl CoeffCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// At least `n` coefficients of `(1 - L)^d`.
    pub fn coeffs(&self, d: f64, n: usize) -> Result<Arc<Vec<f64>>> {
        check_order(d)?;
        let key = d.to_bits();
        if let Some(v) = self.pi.read().expect("coefficient cache poisoned").get(&key) {
            if v.len() >= n {
                return Ok(Arc::clone(v));
            }
        }
        let fresh = Arc::new(coeff_values(d, n.max(1)));
        let mut guard = self.pi.write().expect("coefficient cache poisoned");
        let slot = guard.entry(key).or_insert_with(|| Arc::clone(&fresh));
        if slot.len() < fresh.len() {
            *slot = Arc::clone(&fresh);
        }
        Ok(Arc::clone(slot))
    }

    pub fn frac_diff(&self, series: &[f64], d: f64) -> Result<Vec<f64>> {
        if series.is_empty() {
            return Err(Error::invalid("cannot filter an empty series"));
        }
        let c = self.coeffs(d, series.len())?;
        Ok(convolve_truncated(&c, series))
    }

    /// `r_1..r_n` for order `d`, computed as partial sums of cached coefficients.
    pub fn r_sequence(&self, d: f64, n: usize) -> Result<Vec<f64>> {
        let c = self.coeffs(d, n)?;
        let mut acc = 0.0;
        Ok(c[..n]
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect())
    }

    pub fn len(&self) -> usize {
        self.pi.read().expect("coefficient cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use statrs::function::gamma::gamma;

    #[test]
    fn small_coefficient_tables() {
        assert_eq!(pi_coeffs(0.5, 3).unwrap().values, vec![1.0, -0.5, -0.125]);
        let integ = pi_coeffs(-0.4, 3).unwrap().values;
        assert_abs_diff_eq!(integ[1], 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(integ[2], 0.28, epsilon = 1e-15);
        assert_eq!(pi_coeffs(1.0, 4).unwrap().values, vec![1.0, -1.0, 0.0, 0.0]);
        // integer order terminates exactly
        let two = pi_coeffs(2.0, 6).unwrap().values;
        assert_eq!(two, vec![1.0, -2.0, 1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(pi_coeffs(f64::NAN, 3), Err(Error::InvalidArgument(_))));
        assert!(matches!(pi_coeffs(0.3, 0), Err(Error::InvalidArgument(_))));
        assert!(matches!(frac_diff(&[], 0.3), Err(Error::InvalidArgument(_))));
        assert!(matches!(frac_diff(&[1.0], f64::INFINITY), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn differencing_coefficients_negative_and_increasing() {
        for &d in &[0.1, 0.4, 0.5, 0.9] {
            let v = pi_coeffs(d, 500).unwrap().values;
            for j in 1..v.len() {
                assert!(v[j] < 0.0);
                if j > 1 {
                    assert!(v[j] > v[j - 1]);
                }
            }
        }
    }

    #[test]
    fn first_difference_keeps_initial_value() {
        assert_eq!(frac_diff(&[1.0, 1.0, 1.0], 1.0).unwrap(), vec![1.0, 0.0, 0.0]);
        assert_eq!(frac_integrate(&[1.0, 0.0, 0.0], 1.0).unwrap(), vec![1.0, 1.0, 1.0]);
        let half = frac_integrate(&[1.0, 0.0, 0.0, 0.0], 0.5).unwrap();
        for (a, b) in half.iter().zip([1.0, 0.5, 0.375, 0.3125]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn constant_filters_to_scaled_r() {
        let c = 3.7;
        let y = vec![c; 50];
        let z = frac_diff(&y, 0.5).unwrap();
        let r = r_sequence(0.5, 50).unwrap();
        for (a, b) in z.iter().zip(&r) {
            assert_abs_diff_eq!(*a, c * b, epsilon = 1e-13);
        }
    }

    #[test]
    fn r_sequence_examples() {
        assert_eq!(r_sequence(0.5, 3).unwrap(), vec![1.0, 0.5, 0.375]);
        assert_eq!(r_sequence(1.0, 5).unwrap(), vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        let r = r_sequence(0.3, 1000).unwrap();
        // independent route: pi_{t-1}(d - 1) by its own recursion
        let alt = pi_coeffs(0.3 - 1.0, 1000).unwrap().values;
        assert_abs_diff_eq!(r[999], alt[999], epsilon = 1e-12);
    }

    #[test]
    fn r_identity_over_orders() {
        for k in 1..=9 {
            let d = k as f64 / 10.0;
            let r = r_sequence(d, 10_000).unwrap();
            let alt = pi_coeffs(d - 1.0, 10_000).unwrap().values;
            for (a, b) in r.iter().zip(&alt) {
                assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn asymptotic_rates() {
        let d = 0.4;
        let t = 100_000usize;
        let r = r_sequence(d, t).unwrap();
        let ratio = r[t - 1] * gamma(1.0 - d) * (t as f64).powf(d);
        assert!((ratio - 1.0).abs() < 0.01, "r_t ratio {ratio}");

        let j = 100_000usize;
        let p = pi_coeffs(-d, j + 1).unwrap().values;
        let ratio = p[j] * gamma(d) * (j as f64).powf(1.0 - d);
        assert!((ratio - 1.0).abs() < 0.01, "pi_j ratio {ratio}");
    }

    #[test]
    fn cache_serves_prefixes() {
        let cache = CoeffCache::new();
        let long = cache.coeffs(0.5, 100).unwrap();
        let short = cache.coeffs(0.5, 10).unwrap();
        assert!(Arc::ptr_eq(&long, &short));
        assert_eq!(cache.len(), 1);
        let grown = cache.coeffs(0.5, 200).unwrap();
        assert_eq!(grown.len(), 200);
        assert_eq!(&grown[..100], &long[..]);
        let x: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
        assert_eq!(cache.frac_diff(&x, 0.5).unwrap(), frac_diff(&x, 0.5).unwrap());
        assert_eq!(cache.r_sequence(0.3, 20).unwrap(), r_sequence(0.3, 20).unwrap());
    }

    #[test]
    fn cache_concurrent_inserts_agree() {
        use rayon::prelude::*;
        let cache = CoeffCache::new();
        let out: Vec<Vec<f64>> = (0..64)
            .into_par_iter()
            .map(|i| cache.coeffs(0.45, 50 + i).unwrap()[..50].to_vec())
            .collect();
        for v in &out {
            assert_eq!(v, &out[0]);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn filters_invert_each_other(
            d in -1.0f64..1.5,
            x in proptest::collection::vec(-10.0f64..10.0, 1..120),
        ) {
            let back = frac_diff(&frac_integrate(&x, d).unwrap(), d).unwrap();
            let fwd = frac_integrate(&frac_diff(&x, d).unwrap(), d).unwrap();
            for i in 0..x.len() {
                prop_assert!((back[i] - x[i]).abs() < 1e-10);
                prop_assert!((fwd[i] - x[i]).abs() < 1e-10);
            }
        }
    }
}
