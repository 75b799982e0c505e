//! Pseudo-out-of-sample evaluation: rolling or expanding windows, one origin
//! step at a time, MSE and relative MSE per method and horizon.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fipipe::{forecast_dispatch, FiConfig, ForecastMethod};
use crate::mc::relative;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WindowScheme {
    Rolling(usize),
    /// Expanding window starting from this many observations.
    Expanding(usize),
}

impl WindowScheme {
    pub fn size(self) -> usize {
        match self {
            WindowScheme::Rolling(w) | WindowScheme::Expanding(w) => w,
        }
    }

    /// Estimation window for the origin at 0-based index `t0`.
    fn window(self, series: &[f64], t0: usize) -> &[f64] {
        match self {
            WindowScheme::Rolling(w) => &series[t0 + 1 - w..=t0],
            WindowScheme::Expanding(_) => &series[..=t0],
        }
    }
}

/// `rolling:<W>` or `expanding:<W>`.
impl fmt::Display for WindowScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WindowScheme::Rolling(w) => write!(f, "rolling:{w}"),
            WindowScheme::Expanding(w) => write!(f, "expanding:{w}"),
        }
    }
}

impl FromStr for WindowScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("bad window '{s}'"));
        let (kind, size) = s.trim().split_once(':').ok_or_else(bad)?;
        let size: usize = size.trim().parse().map_err(|_| bad())?;
        match kind.trim() {
            "rolling" => Ok(WindowScheme::Rolling(size)),
            "expanding" => Ok(WindowScheme::Expanding(size)),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoosConfig {
    pub window: WindowScheme,
    pub horizons: Vec<usize>,
    pub methods: Vec<ForecastMethod>,
    pub baseline: ForecastMethod,
    /// Drop an origin from every method at a horizon when any method fails there.
    pub aligned: bool,
    /// 0-based index of the earliest target; earlier targets are skipped.
    pub first_target: Option<usize>,
    pub fi: FiConfig,
}

impl PoosConfig {
    pub fn new(window: WindowScheme, horizons: Vec<usize>, methods: Vec<ForecastMethod>) -> Self {
        Self {
            window,
            horizons,
            methods,
            baseline: ForecastMethod::BENCHMARK,
            aligned: true,
            first_target: None,
            fi: FiConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalCell {
    pub method: String,
    pub window: WindowScheme,
    pub horizon: usize,
    /// NaN when no origin could be scored.
    pub mse: f64,
    /// MSE over the baseline's MSE in the same row.
    pub ratio: f64,
    pub count: usize,
    pub failures: usize,
    /// Set when the baseline MSE is zero; 0/0 is reported as a ratio of 1.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalTable {
    pub baseline: String,
    pub cells: Vec<EvalCell>,
}

impl EvalTable {
    pub fn get(&self, method: &str, window: WindowScheme, horizon: usize) -> Option<&EvalCell> {
        self.cells
            .iter()
            .find(|c| c.method == method && c.window == window && c.horizon == horizon)
    }

    pub fn total_failures(&self) -> usize {
        self.cells.iter().map(|c| c.failures).sum()
    }
}

fn validate(series: &[f64], cfg: &PoosConfig) -> Result<()> {
    if cfg.horizons.is_empty() || cfg.horizons.contains(&0) {
        return Err(Error::invalid("horizons must be nonempty and positive"));
    }
    if cfg.methods.is_empty() {
        return Err(Error::invalid("no methods given"));
    }
    if !cfg.methods.contains(&cfg.baseline) {
        return Err(Error::invalid(format!("baseline {} is not among the methods", cfg.baseline.label())));
    }
    if cfg.window.size() == 0 {
        return Err(Error::invalid("window size must be positive"));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("series contains non-finite values"));
    }
    let h_min = *cfg.horizons.iter().min().unwrap_or(&1);
    Error::require_len(series.len(), cfg.window.size() + h_min)
}

/// Run the evaluation. Every method refits at every origin; forecasts for all
/// horizons come from a single fit per origin.
pub fn poos_run(series: &[f64], cfg: &PoosConfig) -> Result<EvalTable> {
    validate(series, cfg)?;
    let n = series.len();
    let w = cfg.window.size();
    let h_max = *cfg.horizons.iter().max().unwrap_or(&1);
    let h_min = *cfg.horizons.iter().min().unwrap_or(&1);
    let first_origin = w - 1;
    let earliest = cfg.first_target.map_or(first_origin, |f| f.saturating_sub(h_max).max(first_origin));
    let last_origin = n - 1 - h_min;
    let origins: Vec<usize> = (earliest..=last_origin).collect();

    let jobs: Vec<(usize, usize)> = origins
        .iter()
        .flat_map(|&t0| (0..cfg.methods.len()).map(move |k| (t0, k)))
        .collect();
    let results: Vec<Option<Vec<f64>>> = jobs
        .par_iter()
        .map(|&(t0, k)| {
            let window = cfg.window.window(series, t0);
            let h = h_max.min(n - 1 - t0);
            forecast_dispatch(cfg.methods[k], window, h, &cfg.fi).ok().map(|r| r.forecasts)
        })
        .collect();
    let m = cfg.methods.len();
    let at = |oi: usize, k: usize| &results[oi * m + k];

    let mut cells = Vec::new();
    for &h in &cfg.horizons {
        let mut sums = vec![0.0; m];
        let mut counts = vec![0usize; m];
        let mut failures = vec![0usize; m];
        for (oi, &t0) in origins.iter().enumerate() {
            let target = t0 + h;
            if target >= n || cfg.first_target.is_some_and(|f| target < f) || t0 < first_origin {
                continue;
            }
            let any_failed = (0..m).any(|k| at(oi, k).is_none());
            for k in 0..m {
                match at(oi, k) {
                    None => failures[k] += 1,
                    Some(f) if !(cfg.aligned && any_failed) => {
                        sums[k] += (series[target] - f[h - 1]).powi(2);
                        counts[k] += 1;
                    }
                    Some(_) => {}
                }
            }
        }
        let mses: Vec<f64> = (0..m)
            .map(|k| if counts[k] > 0 { sums[k] / counts[k] as f64 } else { f64::NAN })
            .collect();
        let base = cfg.methods.iter().position(|x| *x == cfg.baseline).unwrap_or(0);
        for k in 0..m {
            cells.push(EvalCell {
                method: cfg.methods[k].label(),
                window: cfg.window,
                horizon: h,
                mse: mses[k],
                ratio: relative(mses[k], mses[base]),
                count: counts[k],
                failures: failures[k],
                degenerate: mses[base] == 0.0,
            });
        }
    }
    Ok(EvalTable {
        baseline: cfg.baseline.label(),
        cells,
    })
}

/// Rolling windows of each size plus an expanding window, all scored on the
/// same targets: the first target is set by the largest window.
pub fn window_size_study(
    series: &[f64],
    sizes: &[usize],
    expanding_initial: usize,
    h: usize,
    methods: &[ForecastMethod],
    baseline: ForecastMethod,
    fi: &FiConfig,
) -> Result<EvalTable> {
    if sizes.is_empty() {
        return Err(Error::invalid("no window sizes given"));
    }
    let largest = sizes.iter().copied().chain([expanding_initial]).max().unwrap_or(1);
    if largest == 0 {
        return Err(Error::invalid("window sizes must be positive"));
    }
    let first_target = largest - 1 + h;
    if first_target >= series.len() {
        return Err(Error::InsufficientData {
            needed: first_target + 1,
            got: series.len(),
        });
    }
    let schemes = sizes
        .iter()
        .map(|&s| WindowScheme::Rolling(s))
        .chain([WindowScheme::Expanding(expanding_initial)]);
    let mut table = EvalTable {
        baseline: baseline.label(),
        cells: Vec::new(),
    };
    for scheme in schemes {
        let cfg = PoosConfig {
            window: scheme,
            horizons: vec![h],
            methods: methods.to_vec(),
            baseline,
            aligned: true,
            first_target: Some(first_target),
            fi: *fi,
        };
        table.cells.extend(poos_run(series, &cfg)?.cells);
    }
    Ok(table)
}
