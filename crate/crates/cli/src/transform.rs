//! Inflation and realized-volatility transforms.

use std::str::FromStr;

use crate::error::{DataError, DataResult};
use crate::series::{Frequency, SeriesFrame};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformKind {
    /// `100 (P_t / P_{t-12} - 1)`
    Yoy,
    /// `1200 log(P_t / P_{t-1})`, or `100 ((P_t / P_{t-1})^12 - 1)` when compounded.
    Mom { compound: bool },
    /// `0.5 log(RV_t)`
    LogVol,
}

impl FromStr for TransformKind {
    type Err = DataError;

    fn from_str(s: &str) -> DataResult<Self> {
        match s {
            "yoy" => Ok(TransformKind::Yoy),
            "mom" => Ok(TransformKind::Mom { compound: false }),
            "mom-compound" => Ok(TransformKind::Mom { compound: true }),
            "logvol" => Ok(TransformKind::LogVol),
            _ => Err(DataError::Invalid(format!("unknown transform '{s}'"))),
        }
    }
}

fn positive(values: &[f64], i: usize) -> DataResult<f64> {
    let v = values[i];
    if v > 0.0 {
        Ok(v)
    } else {
        Err(DataError::Transform {
            message: format!("nonpositive value {v}"),
            index: i,
        })
    }
}

pub fn transform(frame: &SeriesFrame, kind: TransformKind) -> DataResult<SeriesFrame> {
    let lag = match kind {
        TransformKind::Yoy => 12,
        TransformKind::Mom { .. } => 1,
        TransformKind::LogVol => 0,
    };
    if lag > 0 && frame.frequency != Frequency::Monthly {
        return Err(DataError::Invalid(format!(
            "{kind:?} needs a monthly series, got {}",
            frame.frequency
        )));
    }
    let v = &frame.values;
    let out: Vec<f64> = (lag..v.len())
        .map(|t| match kind {
            TransformKind::Yoy => {
                let base = v[t - 12];
                if base == 0.0 {
                    return Err(DataError::Transform {
                        message: "zero base price".into(),
                        index: t - 12,
                    });
                }
                Ok(100.0 * (v[t] / base - 1.0))
            }
            TransformKind::Mom { compound } => {
                let ratio = positive(v, t)? / positive(v, t - 1)?;
                Ok(if compound {
                    100.0 * (ratio.powi(12) - 1.0)
                } else {
                    1200.0 * ratio.ln()
                })
            }
            TransformKind::LogVol => Ok(0.5 * positive(v, t)?.ln()),
        })
        .collect::<DataResult<_>>()?;
    Ok(SeriesFrame {
        name: frame.name.clone(),
        timestamps: frame.timestamps.as_ref().map(|ts| ts[lag.min(ts.len())..].to_vec()),
        values: out,
        frequency: frame.frequency,
    })
}
