//! Flat `key = value` experiment files with `[section]` headers.
//!
//! ```text
//! format = 1
//! # comment
//! [study.table1]
//! kind = d
//! ds = 0.4
//! ```
//!
//! Keys before the first header belong to the unnamed top-level section.
//! A `format = 1` key is required there.

use std::collections::BTreeMap;
use std::str::FromStr;

use longmem::fipipe::{FiConfig, ForecastMethod};
use longmem::mc::{Ar1Start, DEstimator, DStudyOptions, Innovation, StudyGrid, StudyKind};
use longmem::memest::DInterval;
use longmem::models::MaxLagRule;

use crate::error::{DataError, DataResult};

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Section {
    pub name: String,
    pub line: usize,
    entries: BTreeMap<String, (String, usize)>,
}

impl Section {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    fn err(&self, key: &str, message: String) -> DataError {
        let line = self.entries.get(key).map_or(self.line, |(_, l)| *l);
        DataError::Config { line, message }
    }

    pub fn parse<T: FromStr>(&self, key: &str) -> DataResult<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| self.err(key, format!("bad value '{v}' for '{key}'")))
            })
            .transpose()
    }

    pub fn require<T: FromStr>(&self, key: &str) -> DataResult<T> {
        self.parse(key)?.ok_or_else(|| self.err(key, format!("[{}] needs '{key}'", self.name)))
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> DataResult<Option<Vec<T>>> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<T>().map_err(|_| self.err(key, format!("bad item '{s}' in '{key}'"))))
                    .collect()
            })
            .transpose()
    }

    pub fn require_list<T: FromStr>(&self, key: &str) -> DataResult<Vec<T>> {
        self.list(key)?.ok_or_else(|| self.err(key, format!("[{}] needs '{key}'", self.name)))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Config {
    /// Top-level section first, then sections in file order.
    pub sections: Vec<Section>,
}

impl Config {
    pub fn parse(text: &str) -> DataResult<Self> {
        let mut sections = vec![Section::default()];
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') || s.starts_with(';') {
                continue;
            }
            if let Some(rest) = s.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .map(str::trim)
                    .filter(|n| !n.is_empty())
                    .ok_or(DataError::Config {
                        line,
                        message: format!("malformed section header '{s}'"),
                    })?;
                if sections.iter().any(|x| x.name == name) {
                    return Err(DataError::Config {
                        line,
                        message: format!("duplicate section [{name}]"),
                    });
                }
                sections.push(Section {
                    name: name.to_string(),
                    line,
                    entries: BTreeMap::new(),
                });
                continue;
            }
            let (k, v) = s.split_once('=').ok_or(DataError::Config {
                line,
                message: format!("expected key = value, got '{s}'"),
            })?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(DataError::Config {
                    line,
                    message: "empty key".into(),
                });
            }
            let sec = sections.last_mut().expect("top-level section exists");
            if sec.entries.insert(k.to_string(), (v.to_string(), line)).is_some() {
                return Err(DataError::Config {
                    line,
                    message: format!("duplicate key '{k}'"),
                });
            }
        }
        match sections[0].get("format") {
            Some(FORMAT_VERSION) => Ok(Self { sections }),
            Some(other) => Err(DataError::Config {
                line: sections[0].entries["format"].1,
                message: format!("unsupported format version '{other}'"),
            }),
            None => Err(DataError::Config {
                line: 1,
                message: "missing 'format = 1'".into(),
            }),
        }
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    /// Sections named `study` or `study.<name>`, in file order.
    pub fn studies(&self) -> DataResult<Vec<StudySpec>> {
        self.sections
            .iter()
            .filter(|s| s.name == "study" || s.name.starts_with("study."))
            .map(StudySpec::from_section)
            .collect()
    }
}

fn parse_ar1_start(s: &str) -> Option<Ar1Start> {
    match s {
        "stationary" => Some(Ar1Start::Stationary),
        _ => s.strip_prefix("burnin:")?.parse().ok().map(Ar1Start::BurnIn),
    }
}

pub fn parse_lag_rule(s: &str) -> Option<MaxLagRule> {
    match s {
        "literal" => Some(MaxLagRule::Literal),
        "rounded" => Some(MaxLagRule::Rounded),
        _ => s.strip_prefix("fixed:")?.parse().ok().map(MaxLagRule::Fixed),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StudyPlan {
    Memory {
        estimators: Vec<DEstimator>,
        options: DStudyOptions,
    },
    Mean {
        lw_alpha: f64,
    },
    Forecast {
        horizons: Vec<usize>,
        methods: Vec<ForecastMethod>,
        fi: FiConfig,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudySpec {
    pub name: String,
    pub grid: StudyGrid,
    pub plan: StudyPlan,
}

impl StudySpec {
    /// Keys: `kind` (d | mean | forecast), `ds`, `innovations`, `T`, `reps`,
    /// `seed`, optional `ar1_start` (stationary | burnin:N); for `d`:
    /// `estimators`, `lw_lo`, `lw_hi`, `whittle_lo`, `whittle_hi`; for `mean`:
    /// `lw_alpha`; for `forecast`: `horizons`, `methods`, `lag_rule`
    /// (literal | rounded | fixed:N), `min_len`.
    pub fn from_section(sec: &Section) -> DataResult<Self> {
        let kind: String = sec.require("kind")?;
        let kind = StudyKind::from_str(&kind).map_err(|e| sec.err("kind", e.to_string()))?;
        let ar1_start = match sec.get("ar1_start") {
            None => Ar1Start::Stationary,
            Some(v) => parse_ar1_start(v).ok_or_else(|| sec.err("ar1_start", format!("bad ar1_start '{v}'")))?,
        };
        let innovations = sec
            .require_list::<String>("innovations")?
            .iter()
            .map(|s| Innovation::from_str(s).map_err(|e| sec.err("innovations", e.to_string())))
            .collect::<DataResult<Vec<_>>>()?;
        let grid = StudyGrid {
            ds: sec.require_list("ds")?,
            innovations,
            t_lens: sec.require_list("T")?,
            reps: sec.require("reps")?,
            seed_base: sec.parse("seed")?.unwrap_or(0),
            ar1_start,
        };
        let interval = |lo: &str, hi: &str, default: DInterval| -> DataResult<DInterval> {
            let lo = sec.parse(lo)?.unwrap_or(default.lo);
            let hi = sec.parse(hi)?.unwrap_or(default.hi);
            DInterval::new(lo, hi).map_err(|e| sec.err("kind", e.to_string()))
        };
        let plan = match kind {
            StudyKind::Memory => {
                let defaults = DStudyOptions::default();
                let estimators = sec
                    .require_list::<String>("estimators")?
                    .iter()
                    .map(|s| DEstimator::from_str(s).map_err(|e| sec.err("estimators", e.to_string())))
                    .collect::<DataResult<Vec<_>>>()?;
                StudyPlan::Memory {
                    estimators,
                    options: DStudyOptions {
                        lw_interval: interval("lw_lo", "lw_hi", defaults.lw_interval)?,
                        whittle_interval: interval("whittle_lo", "whittle_hi", defaults.whittle_interval)?,
                    },
                }
            }
            StudyKind::Mean => StudyPlan::Mean {
                lw_alpha: sec.parse("lw_alpha")?.unwrap_or(0.65),
            },
            StudyKind::Forecast => {
                let methods = sec
                    .require_list::<String>("methods")?
                    .iter()
                    .map(|s| ForecastMethod::from_str(s).map_err(|e| sec.err("methods", e.to_string())))
                    .collect::<DataResult<Vec<_>>>()?;
                let mut fi = FiConfig::default();
                if let Some(v) = sec.get("lag_rule") {
                    fi.lag_rule = parse_lag_rule(v).ok_or_else(|| sec.err("lag_rule", format!("bad lag_rule '{v}'")))?;
                }
                if let Some(n) = sec.parse("min_len")? {
                    fi.min_len = n;
                }
                StudyPlan::Forecast {
                    horizons: sec.require_list("horizons")?,
                    methods,
                    fi,
                }
            }
        };
        Ok(Self {
            name: sec.name.strip_prefix("study.").unwrap_or(&sec.name).to_string(),
            grid,
            plan,
        })
    }
}
