//! Public-CSV download client with an on-disk cache.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;

use crate::error::{DataError, DataResult};
use crate::series::{read_series_from, ColumnSpec, SeriesFrame};

pub const DEFAULT_TEMPLATE: &str = "https://fred.stlouisfed.org/graph/fredgraph.csv?id={series_id}";
pub const TEMPLATE_ENV: &str = "LONGMEM_FETCH_TEMPLATE";
pub const CACHE_DIR_ENV: &str = "LONGMEM_CACHE_DIR";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

/// Minimal HTTP GET abstraction so tests can stub the network.
pub trait Transport {
    fn get(&self, url: &str) -> Result<HttpResponse, String>;
}

pub struct UreqTransport;

impl Transport for UreqTransport {
    fn get(&self, url: &str) -> Result<HttpResponse, String> {
        match ureq::get(url).call() {
            Ok(mut resp) => {
                let status = resp.status().as_u16();
                let body = resp.body_mut().read_to_string().map_err(|e| e.to_string())?;
                Ok(HttpResponse { status, body })
            }
            Err(ureq::Error::StatusCode(status)) => Ok(HttpResponse {
                status,
                body: String::new(),
            }),
            Err(e) => Err(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchConfig {
    /// URL with a `{series_id}` placeholder.
    pub template: String,
    pub cache_dir: PathBuf,
}

impl FetchConfig {
    /// Defaults, overridden by the environment.
    pub fn from_env() -> Self {
        Self {
            template: std::env::var(TEMPLATE_ENV).unwrap_or_else(|_| DEFAULT_TEMPLATE.to_string()),
            cache_dir: std::env::var_os(CACHE_DIR_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| std::env::temp_dir().join("longmem-cache")),
        }
    }
}

pub fn cache_path(cache_dir: &Path, series_id: &str, date: NaiveDate) -> PathBuf {
    cache_dir.join(format!("{series_id}_{}.csv", date.format("%Y-%m-%d")))
}

fn parse(body: &str, series_id: &str) -> DataResult<SeriesFrame> {
    Ok(read_series_from(body.as_bytes(), series_id, &ColumnSpec::default())?.frame)
}

/// Fetch `series_id`, reusing the cache entry for `date` when present.
pub fn fetch_series(
    series_id: &str,
    cfg: &FetchConfig,
    date: NaiveDate,
    transport: &dyn Transport,
) -> DataResult<SeriesFrame> {
    if series_id.is_empty() || !series_id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
        return Err(DataError::Invalid(format!("bad series id '{series_id}'")));
    }
    let cached = cache_path(&cfg.cache_dir, series_id, date);
    if let Ok(body) = std::fs::read_to_string(&cached) {
        return parse(&body, series_id);
    }
    let url = cfg.template.replace("{series_id}", series_id);
    let resp = transport.get(&url).map_err(|message| DataError::Fetch { status: None, message })?;
    if !(200..300).contains(&resp.status) {
        return Err(DataError::Fetch {
            status: Some(resp.status),
            message: format!("GET {url} failed"),
        });
    }
    let frame = parse(&resp.body, series_id)?;
    std::fs::create_dir_all(&cfg.cache_dir)?;
    std::fs::write(&cached, &resp.body)?;
    Ok(frame)
}
