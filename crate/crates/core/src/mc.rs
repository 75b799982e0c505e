//! Simulated fractionally integrated processes and the Monte Carlo studies
//! for memory estimation, mean estimation and forecasting.
//!
//! Replication `r` of every cell draws its innovations from ChaCha8 seeded
//! with `seed_base + r` on a fixed stream, so all estimators or methods in a
//! cell see the same series and results do not depend on scheduling.
//! Replications run on the rayon pool; squared errors are collected in
//! replication order and summed sequentially.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fipipe::{forecast_dispatch, FiConfig, ForecastMethod};
use crate::fracdiff::frac_integrate;
use crate::meanest::{arithmetic_mean, robinson_mean, shimotsu_mean, MeanMethod};
use crate::memest::{gsw, local_whittle, lw_bandwidth, whittle_aic, whittle_arfi, DInterval};

pub const AR1_PHI: f64 = 0.5;
pub const MA9_COEFFS: [f64; 10] = [1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1];
/// ChaCha stream carrying the innovations.
pub const INNOVATION_STREAM: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Innovation {
    Iid,
    Ar1,
    Ma9,
}

impl Innovation {
    pub const ALL: [Innovation; 3] = [Innovation::Iid, Innovation::Ar1, Innovation::Ma9];

    /// Long-run variance of the unit-variance-driven innovation process.
    pub fn long_run_variance(self) -> f64 {
        match self {
            Innovation::Iid => 1.0,
            Innovation::Ar1 => 1.0 / (1.0 - AR1_PHI).powi(2),
            Innovation::Ma9 => MA9_COEFFS.iter().sum::<f64>().powi(2),
        }
    }
}

impl fmt::Display for Innovation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Innovation::Iid => "iid",
            Innovation::Ar1 => "ar1",
            Innovation::Ma9 => "ma9",
        })
    }
}

impl FromStr for Innovation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "iid" => Ok(Innovation::Iid),
            "ar1" => Ok(Innovation::Ar1),
            "ma9" => Ok(Innovation::Ma9),
            other => Err(Error::invalid(format!("unknown innovation '{other}'"))),
        }
    }
}

/// Initialization of the AR(1) innovations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Ar1Start {
    /// `x_1 = e_1 / sqrt(1 - phi^2)`.
    #[default]
    Stationary,
    /// Start at zero and discard this many values.
    BurnIn(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DgpSpec {
    pub d: f64,
    pub innovation: Innovation,
    pub t_len: usize,
    pub seed: u64,
    pub ar1_start: Ar1Start,
}

impl DgpSpec {
    pub fn new(d: f64, innovation: Innovation, t_len: usize, seed: u64) -> Self {
        Self {
            d,
            innovation,
            t_len,
            seed,
            ar1_start: Ar1Start::default(),
        }
    }
}

/// `n` standard normal draws from ChaCha8 keyed by `(seed, stream)`.
pub fn standard_normals(seed: u64, stream: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Short-memory innovations `x_1..x_T` for `spec`.
pub fn simulate_innovations(spec: &DgpSpec) -> Vec<f64> {
    let t = spec.t_len;
    match spec.innovation {
        Innovation::Iid => standard_normals(spec.seed, INNOVATION_STREAM, t),
        Innovation::Ar1 => match spec.ar1_start {
            Ar1Start::Stationary => {
                let e = standard_normals(spec.seed, INNOVATION_STREAM, t);
                let mut x = Vec::with_capacity(t);
                for (i, ei) in e.iter().enumerate() {
                    let v = if i == 0 {
                        ei / (1.0 - AR1_PHI * AR1_PHI).sqrt()
                    } else {
                        AR1_PHI * x[i - 1] + ei
                    };
                    x.push(v);
                }
                x
            }
            Ar1Start::BurnIn(b) => {
                let e = standard_normals(spec.seed, INNOVATION_STREAM, t + b);
                let mut prev = 0.0;
                let mut x = Vec::with_capacity(t);
                for (i, ei) in e.iter().enumerate() {
                    prev = AR1_PHI * prev + ei;
                    if i >= b {
                        x.push(prev);
                    }
                }
                x
            }
        },
        Innovation::Ma9 => {
            // nine pre-sample draws come first
            let q = MA9_COEFFS.len() - 1;
            let e = standard_normals(spec.seed, INNOVATION_STREAM, t + q);
            (0..t)
                .map(|i| MA9_COEFFS.iter().enumerate().map(|(k, c)| c * e[i + q - k]).sum())
                .collect()
        }
    }
}

/// A type II FI(d) series with zero mean driven by the innovations of `spec`.
pub fn simulate_fi(spec: &DgpSpec) -> Result<Vec<f64>> {
    if !spec.d.is_finite() {
        return Err(Error::invalid("d must be finite"));
    }
    frac_integrate(&simulate_innovations(spec), spec.d)
}

/// Autocovariances `gamma(0..=max_lag)` of the innovation process.
pub fn innovation_acf(innovation: Innovation, max_lag: usize) -> Vec<f64> {
    (0..=max_lag)
        .map(|h| match innovation {
            Innovation::Iid => f64::from(u8::from(h == 0)),
            Innovation::Ar1 => AR1_PHI.powi(h as i32) / (1.0 - AR1_PHI * AR1_PHI),
            Innovation::Ma9 => MA9_COEFFS
                .iter()
                .zip(MA9_COEFFS.iter().skip(h))
                .map(|(a, b)| a * b)
                .sum(),
        })
        .collect()
}

/// Order-sensitive fingerprint of a series' bit patterns.
pub fn series_fingerprint(series: &[f64]) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    for v in series {
        v.to_bits().hash(&mut h);
    }
    h.finish()
}

/// Cells are the product `ds x innovations x t_lens`.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyGrid {
    pub ds: Vec<f64>,
    pub innovations: Vec<Innovation>,
    pub t_lens: Vec<usize>,
    pub reps: usize,
    pub seed_base: u64,
    pub ar1_start: Ar1Start,
}

impl StudyGrid {
    fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::invalid("replications must be positive"));
        }
        if self.ds.is_empty() || self.innovations.is_empty() || self.t_lens.is_empty() {
            return Err(Error::invalid("study grid has an empty axis"));
        }
        if self.ds.iter().any(|d| !d.is_finite()) {
            return Err(Error::invalid("d values must be finite"));
        }
        Ok(())
    }

    fn cells(&self) -> Vec<(f64, Innovation, usize)> {
        let mut out = Vec::new();
        for &d in &self.ds {
            for &inn in &self.innovations {
                for &t in &self.t_lens {
                    out.push((d, inn, t));
                }
            }
        }
        out
    }

    fn spec(&self, d: f64, innovation: Innovation, t_len: usize, rep: usize) -> DgpSpec {
        DgpSpec {
            d,
            innovation,
            t_len,
            seed: self.seed_base.wrapping_add(rep as u64),
            ar1_start: self.ar1_start,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StudyKind {
    Memory,
    Mean,
    Forecast,
}

impl fmt::Display for StudyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StudyKind::Memory => "d",
            StudyKind::Mean => "mean",
            StudyKind::Forecast => "forecast",
        })
    }
}

impl FromStr for StudyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "d" => Ok(StudyKind::Memory),
            "mean" => Ok(StudyKind::Mean),
            "forecast" => Ok(StudyKind::Forecast),
            other => Err(Error::invalid(format!("unknown study kind '{other}'"))),
        }
    }
}

/// One cell of a study. `replications` counts successful replications and
/// `failures` the excluded ones; `mse` is NaN when nothing succeeded.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyReport {
    pub study: StudyKind,
    pub d: f64,
    pub innovation: Innovation,
    pub t_len: usize,
    pub method: String,
    pub horizon: Option<usize>,
    pub mse: f64,
    /// Forecast studies only: MSE over the benchmark's MSE in the same cell.
    pub relative_mse: Option<f64>,
    pub replications: usize,
    pub failures: usize,
    pub seed_base: u64,
}

/// Fold per-replication squared errors (None for failures) in order.
fn summarize(errors: impl Iterator<Item = Option<f64>>) -> (f64, usize, usize) {
    let (mut sum, mut ok, mut failed) = (0.0, 0usize, 0usize);
    for e in errors {
        match e {
            Some(v) => {
                sum += v;
                ok += 1;
            }
            None => failed += 1,
        }
    }
    let mse = if ok > 0 { sum / ok as f64 } else { f64::NAN };
    (mse, ok, failed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DEstimator {
    /// Local Whittle at bandwidth `floor(T^alpha)`.
    Lw(f64),
    Gsw,
    WhittleAic,
    /// Parametric Whittle with a fixed AR order.
    WhittleFixed(usize),
}

impl DEstimator {
    pub fn label(&self) -> String {
        match self {
            DEstimator::Lw(a) => format!("LW(T^{a})"),
            DEstimator::Gsw => "GSW".into(),
            DEstimator::WhittleAic => "W_AIC".into(),
            DEstimator::WhittleFixed(p) => format!("W(p={p})"),
        }
    }
}

/// Identifiers: `lw:<alpha>`, `gsw`, `w-aic`, `w:<p>`.
impl fmt::Display for DEstimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DEstimator::Lw(a) => write!(f, "lw:{a}"),
            DEstimator::Gsw => f.write_str("gsw"),
            DEstimator::WhittleAic => f.write_str("w-aic"),
            DEstimator::WhittleFixed(p) => write!(f, "w:{p}"),
        }
    }
}

impl FromStr for DEstimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "gsw" {
            return Ok(DEstimator::Gsw);
        }
        if s == "w-aic" || s == "waic" {
            return Ok(DEstimator::WhittleAic);
        }
        if let Some(a) = s.strip_prefix("lw:") {
            if let Ok(a) = a.parse::<f64>() {
                return Ok(DEstimator::Lw(a));
            }
        }
        if let Some(p) = s.strip_prefix("w:") {
            if let Ok(p) = p.parse::<usize>() {
                return Ok(DEstimator::WhittleFixed(p));
            }
        }
        Err(Error::invalid(format!("unknown estimator '{s}'")))
    }
}

/// Optimization windows for the memory study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DStudyOptions {
    pub lw_interval: DInterval,
    /// Parametric Whittle fits (GSW, W_AIC, fixed order). The default is wide
    /// on the left so AR unit-root factors can trade off against `d`.
    pub whittle_interval: DInterval,
}

impl Default for DStudyOptions {
    fn default() -> Self {
        Self {
            lw_interval: DInterval::default(),
            whittle_interval: DInterval { lo: -10.5, hi: 1.5 },
        }
    }
}

pub fn estimate_d(est: DEstimator, series: &[f64], opts: &DStudyOptions) -> Result<f64> {
    let e = match est {
        DEstimator::Lw(alpha) => {
            local_whittle(series, lw_bandwidth(series.len(), alpha)?, opts.lw_interval)?
        }
        DEstimator::Gsw => gsw(series, opts.whittle_interval)?,
        DEstimator::WhittleAic => whittle_aic(series, None, opts.whittle_interval)?,
        DEstimator::WhittleFixed(p) => whittle_arfi(series, p, opts.whittle_interval)?,
    };
    Ok(e.d_hat)
}

/// MSE of `d_hat` per cell and estimator.
pub fn mc_d_study(grid: &StudyGrid, estimators: &[DEstimator], opts: &DStudyOptions) -> Result<Vec<StudyReport>> {
    grid.validate()?;
    if estimators.is_empty() {
        return Err(Error::invalid("no estimators given"));
    }
    let mut out = Vec::new();
    for (d, inn, t) in grid.cells() {
        let per_rep: Vec<Vec<Option<f64>>> = (0..grid.reps)
            .into_par_iter()
            .map(|r| {
                let y = simulate_fi(&grid.spec(d, inn, t, r));
                estimators
                    .iter()
                    .map(|&e| {
                        let y = y.as_ref().ok()?;
                        estimate_d(e, y, opts).ok().map(|dh| (dh - d).powi(2))
                    })
                    .collect()
            })
            .collect();
        for (k, est) in estimators.iter().enumerate() {
            let (mse, ok, failed) = summarize(per_rep.iter().map(|v| v[k]));
            out.push(StudyReport {
                study: StudyKind::Memory,
                d,
                innovation: inn,
                t_len: t,
                method: est.label(),
                horizon: None,
                mse,
                relative_mse: None,
                replications: ok,
                failures: failed,
                seed_base: grid.seed_base,
            });
        }
    }
    Ok(out)
}

pub fn mean_method_label(m: MeanMethod) -> &'static str {
    match m {
        MeanMethod::Arithmetic => "arithmetic",
        MeanMethod::Shimotsu => "Shimotsu",
        MeanMethod::Robinson => "Robinson",
    }
}

/// MSE of the arithmetic, Shimotsu and Robinson means (true mean zero), with
/// `d` estimated once per replication by local Whittle at `floor(T^lw_alpha)`.
pub fn mc_mean_study(grid: &StudyGrid, lw_alpha: f64) -> Result<Vec<StudyReport>> {
    grid.validate()?;
    let methods = [MeanMethod::Arithmetic, MeanMethod::Shimotsu, MeanMethod::Robinson];
    let mut out = Vec::new();
    for (d, inn, t) in grid.cells() {
        let per_rep: Vec<[Option<f64>; 3]> = (0..grid.reps)
            .into_par_iter()
            .map(|r| {
                let run = || -> Result<[Option<f64>; 3]> {
                    let y = simulate_fi(&grid.spec(d, inn, t, r))?;
                    let d_hat = local_whittle(&y, lw_bandwidth(t, lw_alpha)?, DInterval::default())?.d_hat;
                    let sq = |v: Result<crate::meanest::MeanEstimate>| v.ok().map(|m| m.mu_hat * m.mu_hat);
                    Ok([
                        sq(arithmetic_mean(&y)),
                        sq(shimotsu_mean(&y, d_hat)),
                        sq(robinson_mean(&y, d_hat)),
                    ])
                };
                run().unwrap_or([None; 3])
            })
            .collect();
        for (k, m) in methods.iter().enumerate() {
            let (mse, ok, failed) = summarize(per_rep.iter().map(|v| v[k]));
            out.push(StudyReport {
                study: StudyKind::Mean,
                d,
                innovation: inn,
                t_len: t,
                method: mean_method_label(*m).to_string(),
                horizon: None,
                mse,
                relative_mse: None,
                replications: ok,
                failures: failed,
                seed_base: grid.seed_base,
            });
        }
    }
    Ok(out)
}

/// Forecast MSE per cell, method and horizon. Each replication simulates
/// `T + max(horizons)` points, fits every method once on the first `T` and
/// scores the forecast of `y_{T+h}`. Relative MSEs divide by the FI(0.5)
/// benchmark, which is evaluated even when not listed in `methods`.
pub fn mc_forecast_study(
    grid: &StudyGrid,
    horizons: &[usize],
    methods: &[ForecastMethod],
    cfg: &FiConfig,
) -> Result<Vec<StudyReport>> {
    grid.validate()?;
    if horizons.is_empty() || horizons.contains(&0) {
        return Err(Error::invalid("horizons must be nonempty and positive"));
    }
    if methods.is_empty() {
        return Err(Error::invalid("no methods given"));
    }
    let h_max = *horizons.iter().max().unwrap_or(&1);
    let mut roster: Vec<ForecastMethod> = methods.to_vec();
    let base_idx = match roster.iter().position(|m| *m == ForecastMethod::BENCHMARK) {
        Some(i) => i,
        None => {
            roster.push(ForecastMethod::BENCHMARK);
            roster.len() - 1
        }
    };

    let mut out = Vec::new();
    for (d, inn, t) in grid.cells() {
        // per replication, per method: squared errors at each listed horizon
        let per_rep: Vec<Vec<Option<Vec<f64>>>> = (0..grid.reps)
            .into_par_iter()
            .map(|r| {
                let y = simulate_fi(&grid.spec(d, inn, t + h_max, r)).ok();
                roster
                    .iter()
                    .map(|&m| {
                        let y = y.as_ref()?;
                        let f = forecast_dispatch(m, &y[..t], h_max, cfg).ok()?;
                        Some(horizons.iter().map(|&h| (y[t + h - 1] - f.forecasts[h - 1]).powi(2)).collect())
                    })
                    .collect()
            })
            .collect();
        for (hi, &h) in horizons.iter().enumerate() {
            let cell = |k: usize| summarize(per_rep.iter().map(|v| v[k].as_ref().map(|e| e[hi])));
            let (base_mse, _, _) = cell(base_idx);
            for (k, m) in methods.iter().enumerate() {
                let (mse, ok, failed) = cell(k);
                out.push(StudyReport {
                    study: StudyKind::Forecast,
                    d,
                    innovation: inn,
                    t_len: t,
                    method: m.label(),
                    horizon: Some(h),
                    mse,
                    relative_mse: Some(relative(mse, base_mse)),
                    replications: ok,
                    failures: failed,
                    seed_base: grid.seed_base,
                });
            }
        }
    }
    Ok(out)
}

/// `a / b`, with 0/0 reported as 1.
pub fn relative(a: f64, b: f64) -> f64 {
    if a == 0.0 && b == 0.0 {
        1.0
    } else {
        a / b
    }
}
