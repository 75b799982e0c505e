//! Estimators of the memory parameter `d`: local Whittle, the global
//! semiparametric Whittle estimator, and parametric ARFI(p, d) Whittle with
//! a fixed order or AIC order selection.
//!
//! The local estimator works with `lambda^{2d}` near the origin; the
//! parametric objectives use the exact `|2 sin(lambda / 2)|^{-2d}` factor over
//! the whole band.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::optim::{nelder_mead, SimplexOptions, DEFAULT_SCALAR_TOL};
use crate::spectral::{self, log_two_sin_half, Periodogram};

pub use crate::optim::minimize_scalar;

/// Search interval for `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DInterval {
    pub lo: f64,
    pub hi: f64,
}

impl DInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_finite() && hi.is_finite() && lo < hi {
            Ok(Self { lo, hi })
        } else {
            Err(Error::invalid(format!("bad d interval [{lo}, {hi}]")))
        }
    }

    pub fn clamp(&self, d: f64) -> f64 {
        d.clamp(self.lo, self.hi)
    }

    pub fn contains(&self, d: f64) -> bool {
        d >= self.lo && d <= self.hi
    }
}

impl Default for DInterval {
    fn default() -> Self {
        Self { lo: -0.5, hi: 1.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MemoryMethod {
    LocalWhittle,
    Gsw,
    WhittleAic,
    WhittleFixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryEstimate {
    pub d_hat: f64,
    pub method: MemoryMethod,
    pub bandwidth_m: Option<usize>,
    pub ar_order_p: Option<usize>,
    pub ar_coeffs: Vec<f64>,
    pub objective_value: f64,
    pub approx_variance: f64,
    /// Implied innovation variance `(2 pi / n) sum_j I_j / g_j` (Whittle fits).
    pub sigma2_hat: Option<f64>,
    /// `2 n Q + 2 (p + 1)` (Whittle fits).
    pub aic: Option<f64>,
}

/// `m = floor(T^alpha)`, clamped to `[2, floor((T - 1) / 2)]`.
pub fn lw_bandwidth(t_len: usize, alpha: f64) -> Result<usize> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("bandwidth exponent {alpha} outside (0, 1)")));
    }
    Error::require_len(t_len, spectral::MIN_PERIODOGRAM_LEN)?;
    let m = (t_len as f64).powf(alpha).floor() as usize;
    Ok(m.clamp(2, spectral::n_frequencies(t_len)))
}

fn check_power(p: &Periodogram, series: &[f64]) -> Result<()> {
    let total: f64 = series.iter().map(|v| v * v).sum();
    let power: f64 = p.ordinates.iter().sum();
    if !(power > 1e-24 * total / (2.0 * std::f64::consts::PI)) || !power.is_finite() {
        return Err(Error::DegenerateInput(
            "no periodogram power at the frequencies used".into(),
        ));
    }
    Ok(())
}

/// Local Whittle estimate from the first `m` Fourier frequencies, minimizing
/// `R(d) = log(mean_j lambda_j^{2d} I_j) - 2 d mean_j log lambda_j`.
pub fn local_whittle(series: &[f64], m: usize, interval: DInterval) -> Result<MemoryEstimate> {
    let n = spectral::n_frequencies(series.len());
    if m < 2 || m > n {
        return Err(Error::invalid(format!(
            "bandwidth {m} outside [2, {n}] for T = {}",
            series.len()
        )));
    }
    let pg = spectral::periodogram_leading(series, m)?;
    check_power(&pg, series)?;
    let log_l: Vec<f64> = pg.frequencies.iter().map(|l| l.ln()).collect();
    let mean_log = log_l.iter().sum::<f64>() / m as f64;
    let scale = pg.ordinates.iter().sum::<f64>() / m as f64;
    let ord: Vec<f64> = pg.ordinates.iter().map(|v| v / scale).collect();
    let objective = |d: f64| {
        let s: f64 = ord
            .iter()
            .zip(&log_l)
            .map(|(i, l)| i * (2.0 * d * l).exp())
            .sum();
        (s / m as f64).ln() - 2.0 * d * mean_log
    };
    let (d_hat, value) = minimize_scalar(objective, interval.lo, interval.hi, DEFAULT_SCALAR_TOL)?;
    Ok(MemoryEstimate {
        d_hat,
        method: MemoryMethod::LocalWhittle,
        bandwidth_m: Some(m),
        ar_order_p: None,
        ar_coeffs: Vec::new(),
        objective_value: value + scale.ln(),
        approx_variance: 1.0 / (4.0 * m as f64),
        sigma2_hat: None,
        aic: None,
    })
}

/// Precomputed full-band quantities for the parametric Whittle objective.
struct WhittleProblem {
    t_len: usize,
    n: usize,
    freqs: Vec<f64>,
    ord: Vec<f64>,
    ord_scale: f64,
    log2sin: Vec<f64>,
    mean_log2sin: f64,
    /// `cos(k lambda_j)` and `sin(k lambda_j)`, row `k - 1`, for k = 1..=p_max.
    cos_tab: Vec<Vec<f64>>,
    sin_tab: Vec<Vec<f64>>,
}

const INNER_BASE_EVALS: usize = 300;

impl WhittleProblem {
    fn new(series: &[f64], p_max: usize) -> Result<Self> {
        let t_len = series.len();
        let needed = (2 * (p_max + 1) + 1).max(spectral::MIN_PERIODOGRAM_LEN);
        Error::require_len(t_len, needed)?;
        let pg = spectral::periodogram(series)?;
        check_power(&pg, series)?;
        let n = pg.len();
        let ord_scale = pg.ordinates.iter().sum::<f64>() / n as f64;
        let ord: Vec<f64> = pg.ordinates.iter().map(|v| v / ord_scale).collect();
        let log2sin: Vec<f64> = pg.frequencies.iter().map(|&l| log_two_sin_half(l)).collect();
        let mean_log2sin = log2sin.iter().sum::<f64>() / n as f64;
        let cos_tab = (1..=p_max)
            .map(|k| pg.frequencies.iter().map(|l| (k as f64 * l).cos()).collect())
            .collect();
        let sin_tab = (1..=p_max)
            .map(|k| pg.frequencies.iter().map(|l| (k as f64 * l).sin()).collect())
            .collect();
        Ok(Self {
            t_len,
            n,
            freqs: pg.frequencies,
            ord,
            ord_scale,
            log2sin,
            mean_log2sin,
            cos_tab,
            sin_tab,
        })
    }

    /// `I_j |2 sin|^{2d}`, rescaled to unit mean; returns the log of the scale.
    fn weights(&self, d: f64) -> (Vec<f64>, f64) {
        let mut w: Vec<f64> = self
            .ord
            .iter()
            .zip(&self.log2sin)
            .map(|(i, l)| i * (2.0 * d * l).exp())
            .collect();
        let s = w.iter().sum::<f64>() / self.n as f64;
        w.iter_mut().for_each(|v| *v /= s);
        (w, s.ln())
    }

    fn ar_mod2(&self, ar: &[f64], j: usize) -> f64 {
        let (mut re, mut im) = (1.0, 0.0);
        for (k, a) in ar.iter().enumerate() {
            re -= a * self.cos_tab[k][j];
            im += a * self.sin_tab[k][j];
        }
        re * re + im * im
    }

    /// Concentrated objective given prepared weights for `d`.
    fn q_with(&self, w: &[f64], log_scale: f64, d: f64, ar: &[f64]) -> f64 {
        let mut fit = 0.0;
        let mut log_ar = 0.0;
        for (j, wj) in w.iter().enumerate() {
            let m2 = self.ar_mod2(ar, j);
            fit += wj * m2;
            log_ar += m2.ln();
        }
        let n = self.n as f64;
        (fit / n).ln() + log_scale + self.ord_scale.ln() - 2.0 * d * self.mean_log2sin - log_ar / n
    }

    fn q(&self, d: f64, ar: &[f64]) -> f64 {
        let (w, ls) = self.weights(d);
        self.q_with(&w, ls, d, ar)
    }

    /// Minimizer of `sum_j w_j |A_j|^2` over AR coefficients: the Yule-Walker
    /// system on autocovariances implied by the d-filtered periodogram.
    fn yule_walker_start(&self, w: &[f64], p: usize) -> Vec<f64> {
        let c: Vec<f64> = (0..=p)
            .map(|k| {
                if k == 0 {
                    w.iter().sum()
                } else {
                    w.iter().zip(&self.cos_tab[k - 1]).map(|(a, b)| a * b).sum()
                }
            })
            .collect();
        let toeplitz = DMatrix::from_fn(p, p, |i, k| c[i.abs_diff(k)]);
        let rhs = DVector::from_iterator(p, c[1..].iter().copied());
        match toeplitz.cholesky() {
            Some(ch) => ch.solve(&rhs).iter().copied().collect(),
            None => vec![0.0; p],
        }
    }

    /// Profile out the AR coefficients at fixed `d`.
    fn profile(&self, d: f64, p: usize, budget_scale: usize) -> (Vec<f64>, f64, bool) {
        let (w, ls) = self.weights(d);
        if p == 0 {
            return (Vec::new(), self.q_with(&w, ls, d, &[]), true);
        }
        let start = self.yule_walker_start(&w, p);
        let steps: Vec<f64> = start.iter().map(|a| 0.05 + 0.05 * a.abs()).collect();
        let opts = SimplexOptions {
            max_evals: INNER_BASE_EVALS * (p + 1) * budget_scale,
            f_tol: 1e-11,
            x_tol: 1e-7,
        };
        let r = nelder_mead(|a| self.q_with(&w, ls, d, a), &start, &steps, &opts);
        (r.x, r.value, r.converged)
    }

    fn fisher_variance(&self, ar: &[f64]) -> Option<f64> {
        let p = ar.len();
        let dim = p + 1;
        let mut info = DMatrix::<f64>::zeros(dim, dim);
        let mut grad = vec![0.0; dim];
        for j in 0..self.n {
            let (mut re, mut im) = (1.0, 0.0);
            for (k, a) in ar.iter().enumerate() {
                re -= a * self.cos_tab[k][j];
                im += a * self.sin_tab[k][j];
            }
            let m2 = re * re + im * im;
            grad[0] = -2.0 * self.log2sin[j];
            for k in 0..p {
                grad[k + 1] = 2.0 * (re * self.cos_tab[k][j] - im * self.sin_tab[k][j]) / m2;
            }
            for a in 0..dim {
                for b in 0..dim {
                    info[(a, b)] += grad[a] * grad[b];
                }
            }
        }
        info /= 2.0 * self.n as f64;
        let inv = info.cholesky()?.inverse();
        let v = inv[(0, 0)] / self.t_len as f64;
        (v.is_finite() && v > 0.0).then_some(v)
    }

    fn sigma2(&self, d: f64, ar: &[f64]) -> f64 {
        let g = spectral::arfi_spectral_shape(d, ar, &self.freqs).unwrap_or_default();
        let s: f64 = self
            .ord
            .iter()
            .zip(&g)
            .map(|(i, gj)| i * self.ord_scale / gj)
            .sum();
        2.0 * std::f64::consts::PI * s / self.n as f64
    }

    fn fit(&self, p: usize, interval: DInterval, method: MemoryMethod) -> Result<MemoryEstimate> {
        let (d_hat, _) = minimize_scalar(
            |d| self.profile(d, p, 1).1,
            interval.lo,
            interval.hi,
            DEFAULT_SCALAR_TOL,
        )?;
        let (ar, value, converged) = self.profile(d_hat, p, 4);
        if !converged {
            return Err(Error::failed(
                format!("AR({p}) coefficients did not converge at d = {d_hat}"),
                Some((d_hat, value)),
            ));
        }
        let n = self.n as f64;
        let approx_variance = match method {
            MemoryMethod::Gsw => p as f64 / self.t_len as f64,
            _ => self
                .fisher_variance(&ar)
                .unwrap_or((p + 1) as f64 / self.t_len as f64),
        };
        Ok(MemoryEstimate {
            d_hat,
            method,
            bandwidth_m: None,
            ar_order_p: Some(p),
            sigma2_hat: Some(self.sigma2(d_hat, &ar)),
            ar_coeffs: ar,
            objective_value: value,
            approx_variance,
            aic: Some(2.0 * n * value + 2.0 * (p + 1) as f64),
        })
    }
}

/// Parametric ARFI(p, d) Whittle estimate with `p` fixed.
///
/// `d` is profiled with [`minimize_scalar`]; at each probe the AR
/// coefficients minimize the concentrated objective
/// `Q(d, a) = log(mean_j I_j / g_j) + mean_j log g_j` by Nelder-Mead, started
/// from the Yule-Walker solution of the `d`-filtered spectrum.
pub fn whittle_arfi(series: &[f64], p: usize, interval: DInterval) -> Result<MemoryEstimate> {
    WhittleProblem::new(series, p)?.fit(p, interval, MemoryMethod::WhittleFixed)
}

/// AR coefficients and objective value of the ARFI(p, d) Whittle fit with
/// `d` held fixed.
pub fn whittle_profile(series: &[f64], p: usize, d: f64) -> Result<(Vec<f64>, f64)> {
    if !d.is_finite() {
        return Err(Error::invalid("d must be finite"));
    }
    let prob = WhittleProblem::new(series, p)?;
    let (ar, value, converged) = prob.profile(d, p, 4);
    if !converged {
        return Err(Error::failed("AR coefficients did not converge", Some((d, value))));
    }
    Ok((ar, value))
}

/// Objective `Q(d, a)` of the concentrated ARFI Whittle likelihood.
pub fn whittle_objective(series: &[f64], d: f64, ar: &[f64]) -> Result<f64> {
    Ok(WhittleProblem::new(series, ar.len())?.q(d, ar))
}

/// `floor(ln T)`, the lag order used by the global semiparametric estimator.
pub fn log_order(t_len: usize) -> usize {
    (t_len.max(1) as f64).ln().floor() as usize
}

/// Global semiparametric Whittle: ARFI(p, d) with `p = floor(ln T)`.
pub fn gsw(series: &[f64], interval: DInterval) -> Result<MemoryEstimate> {
    Error::require_len(series.len(), 8)?;
    let p = log_order(series.len());
    WhittleProblem::new(series, p)?.fit(p, interval, MemoryMethod::Gsw)
}

/// Every candidate from a Whittle-AIC run, in order `p = 0..=p_max`.
#[derive(Debug, Clone)]
pub struct WhittleAicFit {
    pub selected: MemoryEstimate,
    pub candidates: Vec<Result<MemoryEstimate>>,
}

/// Parametric Whittle with the AR order chosen by AIC over `0..=p_max`
/// (default `floor(ln T)`). Ties go to the smaller order.
pub fn whittle_aic(series: &[f64], p_max: Option<usize>, interval: DInterval) -> Result<MemoryEstimate> {
    whittle_aic_full(series, p_max, interval).map(|f| f.selected)
}

pub fn whittle_aic_full(
    series: &[f64],
    p_max: Option<usize>,
    interval: DInterval,
) -> Result<WhittleAicFit> {
    Error::require_len(series.len(), 8)?;
    let p_max = p_max.unwrap_or_else(|| log_order(series.len()));
    let prob = WhittleProblem::new(series, p_max)?;
    let candidates: Vec<Result<MemoryEstimate>> = (0..=p_max)
        .map(|p| prob.fit(p, interval, MemoryMethod::WhittleFixed))
        .collect();
    let mut selected: Option<&MemoryEstimate> = None;
    for est in candidates.iter().flatten() {
        let aic = est.aic.unwrap_or(f64::INFINITY);
        if selected.is_none_or(|s| aic < s.aic.unwrap_or(f64::INFINITY)) {
            selected = Some(est);
        }
    }
    let mut selected = match selected {
        Some(s) => s.clone(),
        None => {
            return Err(candidates
                .into_iter()
                .rev()
                .find_map(|c| c.err())
                .unwrap_or_else(|| Error::failed("no AR order could be fitted", None)))
        }
    };
    selected.method = MemoryMethod::WhittleAic;
    Ok(WhittleAicFit {
        selected,
        candidates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn normals(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn bandwidth_rule() {
        assert_eq!(lw_bandwidth(300, 0.65).unwrap(), 40);
        assert_eq!(lw_bandwidth(500, 0.65).unwrap(), 56);
        assert_eq!(lw_bandwidth(60, 0.5).unwrap(), 7);
        assert_eq!(lw_bandwidth(5, 0.1).unwrap(), 2);
        assert!(lw_bandwidth(300, 1.0).is_err());
        assert!(lw_bandwidth(300, 0.0).is_err());
    }

    #[test]
    fn gsw_orders() {
        assert_eq!(log_order(300), 5);
        assert_eq!(log_order(60), 4);
        assert_eq!(log_order(1500), 7);
    }

    #[test]
    fn lw_scale_and_shift_invariant() {
        let y = crate::fracdiff::frac_integrate(&normals(500, 1), 0.4).unwrap();
        let m = lw_bandwidth(500, 0.65).unwrap();
        let base = local_whittle(&y, m, DInterval::default()).unwrap();
        let scaled: Vec<f64> = y.iter().map(|v| 10.0 * v).collect();
        let shifted: Vec<f64> = y.iter().map(|v| v + 7.0).collect();
        let a = local_whittle(&scaled, m, DInterval::default()).unwrap();
        let b = local_whittle(&shifted, m, DInterval::default()).unwrap();
        assert!((a.d_hat - base.d_hat).abs() < 1e-8);
        assert!((b.d_hat - base.d_hat).abs() < 1e-8);
        assert_eq!(base.approx_variance, 1.0 / (4.0 * m as f64));
        assert!(DInterval::default().contains(base.d_hat));
    }

    #[test]
    fn lw_rejects_constant_and_bad_bandwidth() {
        let y = vec![3.0; 100];
        assert!(matches!(
            local_whittle(&y, 10, DInterval::default()),
            Err(Error::DegenerateInput(_))
        ));
        let z = normals(100, 2);
        assert!(local_whittle(&z, 1, DInterval::default()).is_err());
        assert!(local_whittle(&z, 50, DInterval::default()).is_err());
    }

    #[test]
    fn whittle_recovers_ar1_at_zero_memory() {
        // oracle: OLS AR(1) slope on the same data
        let mut errs = Vec::new();
        for seed in 0..20 {
            let e = normals(2000, 100 + seed);
            let mut x = vec![0.0; 2000];
            x[0] = e[0] / (1.0f64 - 0.25).sqrt();
            for t in 1..2000 {
                x[t] = 0.5 * x[t - 1] + e[t];
            }
            let (ar, _) = whittle_profile(&x, 1, 0.0).unwrap();
            let num: f64 = (1..2000).map(|t| x[t] * x[t - 1]).sum();
            let den: f64 = (1..2000).map(|t| x[t - 1] * x[t - 1]).sum();
            assert!((ar[0] - num / den).abs() < 0.02, "{} vs {}", ar[0], num / den);
            errs.push(ar[0] - 0.5);
        }
        assert!(errs.iter().all(|e| e.abs() < 0.05));
    }

    #[test]
    fn whittle_objective_matches_shape_definition() {
        let y = normals(101, 5);
        let (d, ar) = (0.3, [0.4, -0.1]);
        let q = whittle_objective(&y, d, &ar).unwrap();
        let pg = spectral::periodogram(&y).unwrap();
        let g = spectral::arfi_spectral_shape(d, &ar, &pg.frequencies).unwrap();
        let n = pg.len() as f64;
        let direct = (pg.ordinates.iter().zip(&g).map(|(i, gj)| i / gj).sum::<f64>() / n).ln()
            + g.iter().map(|v| v.ln()).sum::<f64>() / n;
        assert!((q - direct).abs() < 1e-10);
    }

    #[test]
    fn whittle_fits_are_scale_and_shift_invariant() {
        let y = crate::fracdiff::frac_integrate(&normals(200, 11), 0.4).unwrap();
        let s: Vec<f64> = y.iter().map(|v| 3.0 * v - 2.0).collect();
        for p in [0usize, 1] {
            let a = whittle_arfi(&y, p, DInterval::default()).unwrap();
            let b = whittle_arfi(&s, p, DInterval::default()).unwrap();
            assert!((a.d_hat - b.d_hat).abs() < 1e-8, "p={p}: {} {}", a.d_hat, b.d_hat);
            assert!(a.sigma2_hat.unwrap() > 0.0 && a.approx_variance > 0.0);
        }
        let g1 = gsw(&y, DInterval::default()).unwrap();
        let g2 = gsw(&s, DInterval::default()).unwrap();
        assert!((g1.d_hat - g2.d_hat).abs() < 1e-6);
        assert_eq!(g1.ar_order_p, Some(5));
        assert_eq!(g1.approx_variance, 5.0 / 200.0);
    }

    #[test]
    fn aic_picks_smallest_minimum_and_reports_candidates() {
        let y = crate::fracdiff::frac_integrate(&normals(300, 21), 0.4).unwrap();
        let fit = whittle_aic_full(&y, None, DInterval::default()).unwrap();
        assert_eq!(fit.candidates.len(), 6);
        let best = fit
            .candidates
            .iter()
            .flatten()
            .map(|c| c.aic.unwrap())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(fit.selected.aic.unwrap(), best);
        assert_eq!(fit.selected.method, MemoryMethod::WhittleAic);
        let again = whittle_aic(&y, None, DInterval::default()).unwrap();
        assert_eq!(again, fit.selected);
    }

    #[test]
    fn whittle_white_noise_sigma2() {
        let y = normals(2001, 8);
        let e = whittle_arfi(&y, 0, DInterval::default()).unwrap();
        assert!(e.d_hat.abs() < 0.1);
        assert!((e.sigma2_hat.unwrap() - 1.0).abs() < 0.1);
        // ARFI(0, d) Fisher variance is 6 / (pi^2 T)
        let v = 6.0 / (std::f64::consts::PI.powi(2) * 2001.0);
        assert!((e.approx_variance / v - 1.0).abs() < 0.05);
    }
}
