//! CSV and markdown writers (and CSV readers) for evaluation tables and study
//! reports, plus plot-data export.

use std::str::FromStr;

use longmem::harness::{EvalCell, EvalTable, WindowScheme};
use longmem::mc::{Innovation, StudyKind, StudyReport};

use crate::error::{DataError, DataResult};
use crate::series::fmt_f64;

const EVAL_HEADER: [&str; 9] = [
    "baseline", "method", "window", "horizon", "mse", "ratio", "count", "failures", "degenerate",
];
const STUDY_HEADER: [&str; 11] = [
    "study",
    "d",
    "innovation",
    "T",
    "method",
    "horizon",
    "mse",
    "relative_mse",
    "replications",
    "failures",
    "seed_base",
];

fn csv_text(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> DataResult<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| DataError::Invalid(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| DataError::Invalid(e.to_string()))
}

/// Plain-text table with columns padded to equal width.
fn markdown(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells.iter().zip(&width).map(|(c, w)| format!("{c:<w$}")).collect();
        format!("| {} |\n", padded.join(" | "))
    };
    let mut out = line(header.to_vec());
    out.push_str(&format!(
        "|{}|\n",
        width.iter().map(|w| "-".repeat(w + 2)).collect::<Vec<_>>().join("|")
    ));
    for r in rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    out
}

fn short(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.4}")
    } else {
        v.to_string()
    }
}

fn eval_rows(t: &EvalTable, float: fn(f64) -> String) -> Vec<Vec<String>> {
    t.cells
        .iter()
        .map(|c| {
            vec![
                t.baseline.clone(),
                c.method.clone(),
                c.window.to_string(),
                c.horizon.to_string(),
                float(c.mse),
                float(c.ratio),
                c.count.to_string(),
                c.failures.to_string(),
                c.degenerate.to_string(),
            ]
        })
        .collect()
}

pub fn eval_table_csv(t: &EvalTable) -> DataResult<String> {
    csv_text(&EVAL_HEADER, eval_rows(t, fmt_f64).into_iter())
}

pub fn eval_table_markdown(t: &EvalTable) -> String {
    markdown(&EVAL_HEADER, &eval_rows(t, short))
}

/// `method,window,horizon,mse` rows for external plotting.
pub fn plot_data_csv(t: &EvalTable) -> DataResult<String> {
    csv_text(
        &["method", "window", "horizon", "mse"],
        t.cells
            .iter()
            .map(|c| vec![c.method.clone(), c.window.to_string(), c.horizon.to_string(), fmt_f64(c.mse)]),
    )
}

fn field<T: FromStr>(rec: &csv::StringRecord, i: usize, line: usize) -> DataResult<T> {
    rec.get(i)
        .and_then(|s| s.parse::<T>().ok())
        .ok_or_else(|| DataError::Ingest {
            message: format!("bad field {i}"),
            lines: vec![line],
        })
}

fn opt_field<T: FromStr>(rec: &csv::StringRecord, i: usize, line: usize) -> DataResult<Option<T>> {
    match rec.get(i) {
        Some("") => Ok(None),
        _ => field(rec, i, line).map(Some),
    }
}

fn check_header(rdr: &mut csv::Reader<&[u8]>, expected: &[&str]) -> DataResult<()> {
    let h = rdr.headers()?;
    if h.iter().ne(expected.iter().copied()) {
        return Err(DataError::Ingest {
            message: format!("unexpected header {h:?}"),
            lines: vec![1],
        });
    }
    Ok(())
}

pub fn read_eval_table_csv(text: &str) -> DataResult<EvalTable> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    check_header(&mut rdr, &EVAL_HEADER)?;
    let mut table = EvalTable::default();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        table.baseline = field(&rec, 0, line)?;
        let window: String = field(&rec, 2, line)?;
        table.cells.push(EvalCell {
            method: field(&rec, 1, line)?,
            window: WindowScheme::from_str(&window)?,
            horizon: field(&rec, 3, line)?,
            mse: field(&rec, 4, line)?,
            ratio: field(&rec, 5, line)?,
            count: field(&rec, 6, line)?,
            failures: field(&rec, 7, line)?,
            degenerate: field(&rec, 8, line)?,
        });
    }
    Ok(table)
}

fn study_rows(reports: &[StudyReport], float: fn(f64) -> String) -> Vec<Vec<String>> {
    reports
        .iter()
        .map(|r| {
            vec![
                r.study.to_string(),
                float(r.d),
                r.innovation.to_string(),
                r.t_len.to_string(),
                r.method.clone(),
                r.horizon.map(|h| h.to_string()).unwrap_or_default(),
                float(r.mse),
                r.relative_mse.map(float).unwrap_or_default(),
                r.replications.to_string(),
                r.failures.to_string(),
                r.seed_base.to_string(),
            ]
        })
        .collect()
}

pub fn study_reports_csv(reports: &[StudyReport]) -> DataResult<String> {
    csv_text(&STUDY_HEADER, study_rows(reports, fmt_f64).into_iter())
}

pub fn study_reports_markdown(reports: &[StudyReport]) -> String {
    fn d_fmt(v: f64) -> String {
        if v.is_finite() && v.abs() >= 1e-3 {
            format!("{v:.4}")
        } else {
            format!("{v:.3e}")
        }
    }
    markdown(&STUDY_HEADER, &study_rows(reports, d_fmt))
}

pub fn read_study_reports_csv(text: &str) -> DataResult<Vec<StudyReport>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    check_header(&mut rdr, &STUDY_HEADER)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let study: String = field(&rec, 0, line)?;
        let innovation: String = field(&rec, 2, line)?;
        out.push(StudyReport {
            study: StudyKind::from_str(&study)?,
            d: field(&rec, 1, line)?,
            innovation: Innovation::from_str(&innovation)?,
            t_len: field(&rec, 3, line)?,
            method: field(&rec, 4, line)?,
            horizon: opt_field(&rec, 5, line)?,
            mse: field(&rec, 6, line)?,
            relative_mse: opt_field(&rec, 7, line)?,
            replications: field(&rec, 8, line)?,
            failures: field(&rec, 9, line)?,
            seed_base: field(&rec, 10, line)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> EvalTable {
        EvalTable {
            baseline: "FI(0.5)".into(),
            cells: vec![
                EvalCell {
                    method: "FI(0.5)".into(),
                    window: WindowScheme::Rolling(180),
                    horizon: 1,
                    mse: 0.1 + 0.2,
                    ratio: 1.0,
                    count: 600,
                    failures: 0,
                    degenerate: false,
                },
                EvalCell {
                    method: "FI(T^0.65)".into(),
                    window: WindowScheme::Expanding(360),
                    horizon: 12,
                    mse: f64::NAN,
                    ratio: f64::NAN,
                    count: 0,
                    failures: 3,
                    degenerate: true,
                },
            ],
        }
    }

    fn same_f64(a: f64, b: f64) -> bool {
        a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan())
    }

    #[test]
    fn eval_table_round_trip() {
        let t = table();
        let back = read_eval_table_csv(&eval_table_csv(&t).unwrap()).unwrap();
        assert_eq!(back.baseline, t.baseline);
        for (a, b) in t.cells.iter().zip(&back.cells) {
            assert!(same_f64(a.mse, b.mse) && same_f64(a.ratio, b.ratio));
            assert_eq!((a.count, a.failures, a.degenerate, a.window), (b.count, b.failures, b.degenerate, b.window));
        }
        assert!(eval_table_markdown(&t).lines().all(|l| l.len() == eval_table_markdown(&t).lines().next().unwrap().len()));
    }

    #[test]
    fn study_round_trip() {
        let reports = vec![
            StudyReport {
                study: StudyKind::Forecast,
                d: 0.4,
                innovation: Innovation::Ma9,
                t_len: 300,
                method: "FI(T^0.8)".into(),
                horizon: Some(12),
                mse: 1.0 / 3.0,
                relative_mse: Some(0.987_654_321_012_345_6),
                replications: 499,
                failures: 1,
                seed_base: u64::MAX,
            },
            StudyReport {
                study: StudyKind::Memory,
                d: 0.7,
                innovation: Innovation::Iid,
                t_len: 60,
                method: "W(p=0)".into(),
                horizon: None,
                mse: 2.2e-5,
                relative_mse: None,
                replications: 200,
                failures: 0,
                seed_base: 0,
            },
        ];
        let text = study_reports_csv(&reports).unwrap();
        assert_eq!(read_study_reports_csv(&text).unwrap(), reports);
        assert!(text.ends_with('\n') && !text.contains('\r'));
    }

    #[test]
    fn plot_data_columns() {
        let text = plot_data_csv(&table()).unwrap();
        assert!(text.starts_with("method,window,horizon,mse\n"));
        assert_eq!(text.lines().count(), 3);
    }
}
