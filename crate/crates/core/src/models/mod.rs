//! Short-memory building blocks and forecasting competitors.

pub mod ar;
pub mod ets;
pub mod har;
mod ols;

pub use ar::{ar_fit, ar_forecast, ar_select_aic, ar_select_scores, ar_select_with_rule, ArFit, MaxLagRule};
pub use ets::{ets_fit, ets_fit_fixed, ets_fit_select, ets_forecast, EtsFit, EtsModel, EtsParams};
pub use har::{har_fit, har_forecast, HarFit};
