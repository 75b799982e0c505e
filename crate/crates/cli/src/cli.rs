//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};

use longmem::fipipe::{forecast_dispatch, FiConfig, ForecastMethod};
use longmem::harness::{poos_run, window_size_study, EvalTable, PoosConfig, WindowScheme};
use longmem::mc::{
    estimate_d, mc_d_study, mc_forecast_study, mc_mean_study, simulate_fi, DEstimator, DStudyOptions, DgpSpec,
    Innovation, StudyReport,
};
use longmem::meanest::{estimate_mean, MeanMethod};
use longmem::memest::{gsw, local_whittle, lw_bandwidth, whittle_aic, whittle_arfi, DInterval, MemoryEstimate};

use crate::config::{parse_lag_rule, Config, StudyPlan};
use crate::error::{DataError, DataResult};
use crate::fetch::{fetch_series, FetchConfig, UreqTransport};
use crate::series::{fmt_f64, read_csv_series, series_to_csv, ColumnRef, ColumnSpec, Frequency, SeriesFrame};
use crate::tables::{
    eval_table_csv, eval_table_markdown, plot_data_csv, study_reports_csv, study_reports_markdown,
};
use crate::transform::{transform, TransformKind};

pub const DEFAULT_POOS_METHODS: &str = "fi:0.5,fi-lw:0.5,fi-lw:0.65,fi-lw:0.8,fi1,lar,ets,mean";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Csv,
    Md,
}

#[derive(Debug, Parser)]
#[command(name = "longmem", version, about = "Fractional-integration forecasting toolkit")]
pub struct Cli {
    /// Seed for simulation; overrides study seeds in config files.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Csv)]
    pub out: OutFormat,
    /// Experiment file (key = value lines with [section] headers).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct InputArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    pub input: PathBuf,
    /// Value column, by header name or 0-based position.
    #[arg(long, default_value = "1")]
    pub col: String,
    /// Date column, by name or position, or `none`. `auto` uses column 0
    /// when its first entry parses as a date.
    #[arg(long, default_value = "auto")]
    pub date_col: String,
}

impl InputArgs {
    fn load(&self, err: &mut dyn Write) -> DataResult<SeriesFrame> {
        let spec = ColumnSpec {
            date: match self.date_col.as_str() {
                "none" => None,
                "auto" => first_field_is_date(&self.input)?.then_some(ColumnRef::Index(0)),
                c => Some(ColumnRef::from_str(c)?),
            },
            value: ColumnRef::from_str(&self.col)?,
            ..Default::default()
        };
        let ing = read_csv_series(&self.input, &spec)?;
        if ing.dropped_missing > 0 {
            writeln!(err, "note: dropped {} missing values", ing.dropped_missing)?;
        }
        if !ing.invalid_lines.is_empty() {
            writeln!(err, "note: skipped unparseable lines {:?}", ing.invalid_lines)?;
        }
        Ok(ing.frame)
    }
}

fn first_field_is_date(path: &Path) -> DataResult<bool> {
    let mut rdr = csv::Reader::from_path(path)?;
    Ok(match rdr.records().next() {
        Some(rec) => rec?.get(0).is_some_and(|f| crate::series::parse_date(f).is_some()),
        None => false,
    })
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate an FI(d) series with the given innovations.
    Simulate {
        #[arg(long, allow_hyphen_values = true)]
        d: f64,
        /// iid, ar1 or ma9.
        #[arg(long, default_value = "iid")]
        innov: String,
        #[arg(long = "T")]
        t_len: usize,
        /// Mean added to the simulated series.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        mu: f64,
    },
    /// Estimate the memory parameter d.
    EstimateD {
        #[command(flatten)]
        input: InputArgs,
        /// lw, gsw, w-aic or w:<p>.
        #[arg(long, default_value = "lw")]
        method: String,
        /// Bandwidth exponent for lw.
        #[arg(long, default_value_t = 0.65)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        lo: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        hi: Option<f64>,
    },
    /// Estimate the mean given d (or d from local Whittle).
    EstimateMu {
        #[command(flatten)]
        input: InputArgs,
        /// arithmetic, robinson or shimotsu.
        #[arg(long, default_value = "robinson")]
        method: String,
        #[arg(long, allow_hyphen_values = true)]
        d: Option<f64>,
        /// Bandwidth exponent used when --d is absent.
        #[arg(long, default_value_t = 0.65)]
        alpha: f64,
    },
    /// Forecast the end of a series.
    Forecast {
        #[command(flatten)]
        input: InputArgs,
        /// Method id, e.g. fi:0.5, fi-lw:0.65, fi1, lar, ar1, ets, har, mean, naive.
        #[arg(long, default_value = "fi:0.5")]
        method: String,
        #[arg(long, default_value_t = 1)]
        h: usize,
        /// literal, rounded or fixed:<p>.
        #[arg(long, default_value = "literal")]
        lag_rule: String,
    },
    /// Pseudo-out-of-sample evaluation.
    Poos {
        #[command(flatten)]
        input: InputArgs,
        /// rolling:<W> or expanding:<W>.
        #[arg(long, default_value = "rolling:180")]
        window: String,
        #[arg(long, default_value = "1,3,6,12,24,48")]
        horizons: String,
        #[arg(long, default_value = DEFAULT_POOS_METHODS)]
        methods: String,
        #[arg(long, default_value = "fi:0.5")]
        baseline: String,
        /// Score each method on its own successful origins.
        #[arg(long)]
        no_align: bool,
        /// Also write (method, window, horizon, mse) rows here.
        #[arg(long)]
        plot_data: Option<PathBuf>,
        #[arg(long, default_value = "literal")]
        lag_rule: String,
    },
    /// Compare rolling window sizes and an expanding window on common targets.
    WindowStudy {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value = "60,120,180,240,360")]
        sizes: String,
        #[arg(long, default_value_t = 360)]
        expanding: usize,
        #[arg(long, default_value_t = 1)]
        h: usize,
        #[arg(long, default_value = DEFAULT_POOS_METHODS)]
        methods: String,
        #[arg(long, default_value = "fi:0.5")]
        baseline: String,
        #[arg(long)]
        plot_data: Option<PathBuf>,
    },
    /// Run the Monte Carlo studies listed in --config.
    McStudy {
        /// Override the replication count of every study.
        #[arg(long)]
        reps: Option<usize>,
        /// Write one file per study here instead of printing.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Download a series as CSV (cached per day).
    Fetch {
        #[arg(long)]
        series_id: String,
        /// URL template with a {series_id} placeholder.
        #[arg(long)]
        template: Option<String>,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        /// Cache date (YYYY-MM-DD); defaults to today.
        #[arg(long)]
        date: Option<String>,
    },
    /// Inflation or realized-volatility transforms.
    Transform {
        #[command(flatten)]
        input: InputArgs,
        /// yoy, mom, mom-compound or logvol.
        #[arg(long)]
        kind: String,
        /// Use 100((P_t/P_{t-1})^12 - 1) for mom.
        #[arg(long)]
        compound: bool,
        /// Override the inferred frequency (monthly, daily, irregular).
        #[arg(long)]
        freq: Option<String>,
    },
}

fn list<T: FromStr>(s: &str, what: &str) -> DataResult<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<T>().map_err(|_| DataError::Invalid(format!("bad {what} '{x}'"))))
        .collect()
}

fn methods(s: &str) -> DataResult<Vec<ForecastMethod>> {
    Ok(list::<String>(s, "method")?
        .iter()
        .map(|m| ForecastMethod::from_str(m))
        .collect::<Result<_, _>>()?)
}

fn lag_rule(s: &str) -> DataResult<FiConfig> {
    Ok(FiConfig {
        lag_rule: parse_lag_rule(s).ok_or_else(|| DataError::Invalid(format!("bad lag rule '{s}'")))?,
        ..Default::default()
    })
}

fn eval_output(t: &EvalTable, fmt: OutFormat, plot: Option<&Path>) -> DataResult<String> {
    if let Some(p) = plot {
        std::fs::write(p, plot_data_csv(t)?)?;
    }
    Ok(match fmt {
        OutFormat::Csv => eval_table_csv(t)?,
        OutFormat::Md => eval_table_markdown(t),
    })
}

fn study_output(r: &[StudyReport], fmt: OutFormat) -> DataResult<String> {
    Ok(match fmt {
        OutFormat::Csv => study_reports_csv(r)?,
        OutFormat::Md => study_reports_markdown(r),
    })
}

fn estimate_row(e: &MemoryEstimate) -> String {
    format!(
        "d_hat,m,p,variance\n{},{},{},{}\n",
        fmt_f64(e.d_hat),
        e.bandwidth_m.map(|m| m.to_string()).unwrap_or_default(),
        e.ar_order_p.map(|p| p.to_string()).unwrap_or_default(),
        fmt_f64(e.approx_variance)
    )
}

fn execute(cli: &Cli, err: &mut Vec<u8>) -> DataResult<String> {
    let seed = cli.seed.unwrap_or(0);
    match &cli.command {
        Command::Simulate { d, innov, t_len, mu } => {
            let inn = Innovation::from_str(innov)?;
            let y = simulate_fi(&DgpSpec::new(*d, inn, *t_len, seed))?;
            let frame = SeriesFrame::from_values("sim", y.iter().map(|v| v + mu).collect());
            Ok(series_to_csv(&frame))
        }
        Command::EstimateD {
            input,
            method,
            alpha,
            lo,
            hi,
        } => {
            let y = input.load(err)?.values;
            let est = match method.as_str() {
                "lw" => DEstimator::Lw(*alpha),
                m => DEstimator::from_str(m)?,
            };
            let default = match est {
                DEstimator::Lw(_) => DInterval::default(),
                _ => DStudyOptions::default().whittle_interval,
            };
            let iv = DInterval::new(lo.unwrap_or(default.lo), hi.unwrap_or(default.hi))?;
            let e = match est {
                DEstimator::Lw(a) => local_whittle(&y, lw_bandwidth(y.len(), a)?, iv)?,
                DEstimator::Gsw => gsw(&y, iv)?,
                DEstimator::WhittleAic => whittle_aic(&y, None, iv)?,
                DEstimator::WhittleFixed(p) => whittle_arfi(&y, p, iv)?,
            };
            Ok(estimate_row(&e))
        }
        Command::EstimateMu { input, method, d, alpha } => {
            let y = input.load(err)?.values;
            let m = match method.as_str() {
                "arithmetic" => MeanMethod::Arithmetic,
                "robinson" => MeanMethod::Robinson,
                "shimotsu" => MeanMethod::Shimotsu,
                other => return Err(DataError::Invalid(format!("unknown mean method '{other}'"))),
            };
            let d = match d {
                Some(d) => *d,
                None => estimate_d(DEstimator::Lw(*alpha), &y, &DStudyOptions::default())?,
            };
            let e = estimate_mean(&y, m, d)?;
            Ok(format!("mu_hat,method,d_used\n{},{method},{}\n", fmt_f64(e.mu_hat), fmt_f64(d)))
        }
        Command::Forecast {
            input,
            method,
            h,
            lag_rule: rule,
        } => {
            let y = input.load(err)?.values;
            let m = ForecastMethod::from_str(method)?;
            let r = forecast_dispatch(m, &y, *h, &lag_rule(rule)?)?;
            let mut out = String::from("h,forecast\n");
            for (k, f) in r.forecasts.iter().enumerate() {
                out.push_str(&format!("{},{}\n", k + 1, fmt_f64(*f)));
            }
            Ok(out)
        }
        Command::Poos {
            input,
            window,
            horizons,
            methods: ms,
            baseline,
            no_align,
            plot_data,
            lag_rule: rule,
        } => {
            let y = input.load(err)?.values;
            let cfg = PoosConfig {
                window: WindowScheme::from_str(window)?,
                horizons: list(horizons, "horizon")?,
                methods: methods(ms)?,
                baseline: ForecastMethod::from_str(baseline)?,
                aligned: !no_align,
                first_target: None,
                fi: lag_rule(rule)?,
            };
            eval_output(&poos_run(&y, &cfg)?, cli.out, plot_data.as_deref())
        }
        Command::WindowStudy {
            input,
            sizes,
            expanding,
            h,
            methods: ms,
            baseline,
            plot_data,
        } => {
            let y = input.load(err)?.values;
            let t = window_size_study(
                &y,
                &list::<usize>(sizes, "size")?,
                *expanding,
                *h,
                &methods(ms)?,
                ForecastMethod::from_str(baseline)?,
                &FiConfig::default(),
            )?;
            eval_output(&t, cli.out, plot_data.as_deref())
        }
        Command::McStudy { reps, out_dir } => {
            let path = cli
                .config
                .as_ref()
                .ok_or_else(|| DataError::Invalid("mc-study needs --config".into()))?;
            let cfg = Config::parse(&std::fs::read_to_string(path)?)?;
            let studies = cfg.studies()?;
            if studies.is_empty() {
                return Err(DataError::Invalid("config defines no [study] sections".into()));
            }
            let mut all = Vec::new();
            for mut s in studies {
                if let Some(r) = reps {
                    s.grid.reps = *r;
                }
                if let Some(seed) = cli.seed {
                    s.grid.seed_base = seed;
                }
                let rows = match &s.plan {
                    StudyPlan::Memory { estimators, options } => mc_d_study(&s.grid, estimators, options)?,
                    StudyPlan::Mean { lw_alpha } => mc_mean_study(&s.grid, *lw_alpha)?,
                    StudyPlan::Forecast { horizons, methods, fi } => mc_forecast_study(&s.grid, horizons, methods, fi)?,
                };
                if let Some(dir) = out_dir {
                    std::fs::create_dir_all(dir)?;
                    let ext = match cli.out {
                        OutFormat::Csv => "csv",
                        OutFormat::Md => "md",
                    };
                    std::fs::write(dir.join(format!("{}.{ext}", s.name)), study_output(&rows, cli.out)?)?;
                }
                all.extend(rows);
            }
            if out_dir.is_some() {
                Ok(String::new())
            } else {
                study_output(&all, cli.out)
            }
        }
        Command::Fetch {
            series_id,
            template,
            cache_dir,
            date,
        } => {
            let mut cfg = FetchConfig::from_env();
            if let Some(t) = template {
                cfg.template = t.clone();
            }
            if let Some(c) = cache_dir {
                cfg.cache_dir = c.clone();
            }
            let date = match date {
                Some(s) => crate::series::parse_date(s).ok_or_else(|| DataError::Invalid(format!("bad date '{s}'")))?,
                None => chrono::Local::now().date_naive(),
            };
            Ok(series_to_csv(&fetch_series(series_id, &cfg, date, &UreqTransport)?))
        }
        Command::Transform {
            input,
            kind,
            compound,
            freq,
        } => {
            let mut frame = input.load(err)?;
            if let Some(f) = freq {
                frame.frequency = Frequency::from_str(f)?;
            }
            let kind = match TransformKind::from_str(kind)? {
                TransformKind::Mom { .. } if *compound => TransformKind::Mom { compound: true },
                k => k,
            };
            Ok(series_to_csv(&transform(&frame, kind)?))
        }
    }
}

/// Run with explicit arguments and sinks; returns the process exit code
/// (0 success, 1 operation error, 2 usage error).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    // notes are buffered so the work can run inside a rayon pool
    let mut notes = Vec::new();
    let result = match cli.threads {
        Some(0) => Err(DataError::Invalid("--threads must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| DataError::Invalid(e.to_string()))
            .and_then(|pool| pool.install(|| execute(&cli, &mut notes))),
        None => execute(&cli, &mut notes),
    };
    let _ = err.write_all(&notes);
    match result {
        Ok(text) => match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                1
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}
