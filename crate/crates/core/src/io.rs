// SPDX-License-Identifier: Apache-2.0

//! Text formats shared by the library and the command line.
//!
//! Tabular files are comma-separated UTF-8 with a header line and LF line
//! endings. Dates are ISO `YYYY-MM-DD`. Fitted models are versioned TOML
//! documents.

use std::io::{Read, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::baseline::{BaselineModel, DesignSpec};
use crate::calendar::CountSeries;
use crate::detector::ScanResult;
use crate::error::{Error, Result};
use crate::evaluation::{AmocPoint, EvaluationReport};
use crate::profiles::{BimodalForm, ProfileBank, ProfileFamily, ProfileShape};
use crate::simulator::{LabeledSeries, OutbreakTruth};

pub const BASELINE_FORMAT: &str = "mlrss-baseline";
pub const BANK_FORMAT: &str = "mlrss-profile-bank";
pub const FORMAT_VERSION: u32 = 1;

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input)
}

fn parse_date(field: &str, line: u64) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(field, "%Y-%m-%d")
        .map_err(|e| Error::Parse(format!("line {line}: bad date '{field}': {e}")))
}

fn field<'a>(record: &'a csv::StringRecord, idx: usize, name: &str) -> Result<&'a str> {
    let line = record.position().map_or(0, |p| p.line());
    record
        .get(idx)
        .ok_or_else(|| Error::Parse(format!("line {line}: missing column '{name}'")))
}

fn parse_num<T: std::str::FromStr>(record: &csv::StringRecord, idx: usize, name: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let line = record.position().map_or(0, |p| p.line());
    let raw = field(record, idx, name)?;
    raw.parse()
        .map_err(|e| Error::Parse(format!("line {line}: bad {name} '{raw}': {e}")))
}

fn into_string(buf: Vec<u8>) -> String {
    String::from_utf8(buf).expect("writers emit UTF-8")
}

// --- counts -----------------------------------------------------------------

pub fn read_counts<R: Read>(input: R) -> Result<CountSeries> {
    let mut rdr = reader(input);
    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let date = parse_date(field(&rec, 0, "date")?, line)?;
        let count: u64 = parse_num(&rec, 1, "count")?;
        records.push((date, count));
    }
    CountSeries::from_records(&records)
}

pub fn write_counts(series: &CountSeries) -> String {
    let mut w = writer(Vec::new());
    w.write_record(["date", "count"]).expect("in-memory write");
    for (i, c) in series.counts.iter().enumerate() {
        let date = series.date(i as u32 + 1).to_string();
        w.write_record([date, c.to_string()]).expect("in-memory write");
    }
    into_string(w.into_inner().expect("in-memory flush"))
}

// --- simulation truth ---------------------------------------------------------

/// Per-day truth sidecar: baseline mean and total outbreak excess.
pub fn write_truth(labeled: &LabeledSeries) -> String {
    let mut w = writer(Vec::new());
    w.write_record(["date", "day", "lambda", "delta"]).expect("in-memory write");
    for (i, (l, d)) in labeled.lambda.iter().zip(&labeled.delta).enumerate() {
        let t = i as u32 + 1;
        w.write_record([
            labeled.series.date(t).to_string(),
            t.to_string(),
            l.to_string(),
            d.to_string(),
        ])
        .expect("in-memory write");
    }
    into_string(w.into_inner().expect("in-memory flush"))
}

/// Outbreak table; dates are resolved against the series start.
pub fn write_outbreaks(series: &CountSeries, outbreaks: &[OutbreakTruth]) -> String {
    let mut w = writer(Vec::new());
    w.write_record([
        "index",
        "start",
        "peak",
        "effective_first",
        "effective_last",
        "peak_excess",
        "truncated",
    ])
    .expect("in-memory write");
    for (i, o) in outbreaks.iter().enumerate() {
        w.write_record([
            i.to_string(),
            series.date(o.start).to_string(),
            series.date(o.peak_day).to_string(),
            series.date(o.effective_first).to_string(),
            series.date(o.effective_last).to_string(),
            o.peak_excess.to_string(),
            o.truncated.to_string(),
        ])
        .expect("in-memory write");
    }
    into_string(w.into_inner().expect("in-memory flush"))
}

pub fn read_outbreaks<R: Read>(input: R, series_start: NaiveDate) -> Result<Vec<OutbreakTruth>> {
    let mut rdr = reader(input);
    let day = |date: NaiveDate, line: u64| -> Result<u32> {
        let offset = (date - series_start).num_days();
        if offset < 0 {
            return Err(Error::RangeMismatch(format!(
                "line {line}: {date} precedes the series start {series_start}"
            )));
        }
        Ok(offset as u32 + 1)
    };
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let date_at = |idx, name| -> Result<u32> { day(parse_date(field(&rec, idx, name)?, line)?, line) };
        out.push(OutbreakTruth {
            start: date_at(1, "start")?,
            peak_day: date_at(2, "peak")?,
            effective_first: date_at(3, "effective_first")?,
            effective_last: date_at(4, "effective_last")?,
            peak_excess: parse_num(&rec, 5, "peak_excess")?,
            truncated: parse_num(&rec, 6, "truncated")?,
        });
    }
    Ok(out)
}

// --- scores -------------------------------------------------------------------

/// One output row of a score file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub day: u32,
    /// `None` for methods without a scan statistic.
    pub log_r: Option<f64>,
    pub t_star: Option<u32>,
    pub score: f64,
    pub saturated: bool,
    pub remediated: usize,
}

impl From<&ScanResult> for ScoreRow {
    fn from(r: &ScanResult) -> Self {
        Self {
            day: r.day,
            log_r: Some(r.log_r),
            t_star: Some(r.t_star),
            score: r.score,
            saturated: r.saturated,
            remediated: r.remediated,
        }
    }
}

impl ScoreRow {
    pub fn plain(day: u32, score: f64) -> Self {
        Self {
            day,
            log_r: None,
            t_star: None,
            score,
            saturated: false,
            remediated: 0,
        }
    }
}

pub fn write_scores(series: &CountSeries, method: &str, rows: &[ScoreRow]) -> String {
    let mut w = writer(Vec::new());
    w.write_record(["date", "day", "method", "log_r", "t_star", "score", "saturated", "remediated"])
        .expect("in-memory write");
    for r in rows {
        w.write_record([
            series.date(r.day).to_string(),
            r.day.to_string(),
            method.to_string(),
            r.log_r.map(|v| v.to_string()).unwrap_or_default(),
            r.t_star.map(|v| v.to_string()).unwrap_or_default(),
            r.score.to_string(),
            r.saturated.to_string(),
            r.remediated.to_string(),
        ])
        .expect("in-memory write");
    }
    into_string(w.into_inner().expect("in-memory flush"))
}

/// Reads a score file; returns the first date and the rows in day order.
pub fn read_scores<R: Read>(input: R) -> Result<(NaiveDate, Vec<ScoreRow>)> {
    let mut rdr = reader(input);
    let mut first = None;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let date = parse_date(field(&rec, 0, "date")?, line)?;
        first.get_or_insert(date);
        let day: u32 = parse_num(&rec, 1, "day")?;
        if day as usize != rows.len() + 1 {
            return Err(Error::RangeMismatch(format!(
                "line {line}: expected day {}, found {day}",
                rows.len() + 1
            )));
        }
        let opt = |idx, name| -> Result<Option<String>> {
            let raw = field(&rec, idx, name)?;
            Ok((!raw.is_empty()).then(|| raw.to_string()))
        };
        rows.push(ScoreRow {
            day,
            log_r: opt(3, "log_r")?
                .map(|s| s.parse().map_err(|e| Error::Parse(format!("line {line}: bad log_r: {e}"))))
                .transpose()?,
            t_star: opt(4, "t_star")?
                .map(|s| s.parse().map_err(|e| Error::Parse(format!("line {line}: bad t_star: {e}"))))
                .transpose()?,
            score: parse_num(&rec, 5, "score")?,
            saturated: parse_num(&rec, 6, "saturated")?,
            remediated: parse_num(&rec, 7, "remediated")?,
        });
    }
    let first = first.ok_or_else(|| Error::InsufficientData("score file has no records".into()))?;
    Ok((first, rows))
}

// --- evaluation ---------------------------------------------------------------

/// Plot-ready AMOC table; the first two columns are the curve itself.
pub fn write_amoc(curve: &[AmocPoint]) -> String {
    let mut w = writer(Vec::new());
    w.write_record(["false_alarm_rate", "mean_delay", "missed", "threshold", "mean_detected_delay"])
        .expect("in-memory write");
    for p in curve {
        w.write_record([
            p.false_alarm_rate.to_string(),
            p.penalized_mean_delay.to_string(),
            p.missed.to_string(),
            p.threshold.to_string(),
            p.mean_delay.map(|d| d.to_string()).unwrap_or_default(),
        ])
        .expect("in-memory write");
    }
    into_string(w.into_inner().expect("in-memory flush"))
}

#[derive(Serialize)]
struct ReportSummary {
    threshold: f64,
    alarms: usize,
    false_alarms: usize,
    outbreak_free_days: usize,
    false_alarm_rate: f64,
    outbreaks: usize,
    missed: usize,
    penalized_mean_delay: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean_delay: Option<f64>,
    detection: Vec<DetectionRow>,
}

#[derive(Serialize)]
struct DetectionRow {
    start: u32,
    window_last: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    first_alarm: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delay: Option<u32>,
}

/// Structured-text summary of one evaluation.
pub fn write_report(report: &EvaluationReport) -> Result<String> {
    let summary = ReportSummary {
        threshold: report.threshold,
        alarms: report.alarms.len(),
        false_alarms: report.false_alarms,
        outbreak_free_days: report.outbreak_free_days,
        false_alarm_rate: report.false_alarm_rate,
        outbreaks: report.detections.len(),
        missed: report.missed,
        penalized_mean_delay: report.penalized_mean_delay,
        mean_delay: report.mean_delay,
        detection: report
            .detections
            .iter()
            .map(|d| DetectionRow {
                start: d.start,
                window_last: d.window_last,
                first_alarm: d.first_alarm,
                delay: d.delay(),
            })
            .collect(),
    };
    Ok(toml::to_string(&summary)?)
}

// --- fitted models ------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct Coefficient {
    name: String,
    value: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct BaselineFile {
    format: String,
    version: u32,
    converged: bool,
    deviance: f64,
    design: DesignSpec,
    coefficients: Vec<Coefficient>,
}

fn check_header(format: &str, version: u32, expected: &str) -> Result<()> {
    if format != expected {
        return Err(Error::Parse(format!("expected a {expected} document, found '{format}'")));
    }
    if version != FORMAT_VERSION {
        return Err(Error::Parse(format!(
            "unsupported {expected} version {version} (this build reads version {FORMAT_VERSION})"
        )));
    }
    Ok(())
}

pub fn write_baseline(model: &BaselineModel) -> Result<String> {
    let file = BaselineFile {
        format: BASELINE_FORMAT.into(),
        version: FORMAT_VERSION,
        converged: model.converged,
        deviance: model.fit_deviance,
        design: model.spec.clone(),
        coefficients: model
            .spec
            .column_names()
            .into_iter()
            .zip(&model.beta)
            .map(|(name, &value)| Coefficient { name, value })
            .collect(),
    };
    Ok(toml::to_string(&file)?)
}

pub fn read_baseline(text: &str) -> Result<BaselineModel> {
    let file: BaselineFile = toml::from_str(text)?;
    check_header(&file.format, file.version, BASELINE_FORMAT)?;
    let names = file.design.column_names();
    if names.len() != file.coefficients.len()
        || names.iter().zip(&file.coefficients).any(|(n, c)| *n != c.name)
    {
        return Err(Error::Parse(format!(
            "coefficient names do not match the design columns {names:?}"
        )));
    }
    let mut model = BaselineModel::from_coefficients(
        file.design,
        file.coefficients.iter().map(|c| c.value).collect(),
    )?;
    model.converged = file.converged;
    model.fit_deviance = file.deviance;
    Ok(model)
}

#[derive(Debug, Serialize, Deserialize)]
struct BankFile {
    format: String,
    version: u32,
    family: ProfileFamily,
    #[serde(default)]
    bimodal_form: BimodalForm,
    columns: Vec<String>,
    theta: Vec<Vec<f64>>,
}

fn theta_columns(family: ProfileFamily) -> Vec<String> {
    let names: &[&str] = match family {
        ProfileFamily::BimodalGaussian => &["c", "mu1", "mu2", "sigma"],
        _ => &["c", "mu", "sigma"],
    };
    names.iter().map(|s| s.to_string()).collect()
}

pub fn write_bank(bank: &ProfileBank) -> Result<String> {
    let family = bank.family();
    let bimodal_form = match bank.shapes()[0] {
        ProfileShape::BimodalGaussian { form, .. } => form,
        _ => BimodalForm::default(),
    };
    let file = BankFile {
        format: BANK_FORMAT.into(),
        version: FORMAT_VERSION,
        family,
        bimodal_form,
        columns: theta_columns(family),
        theta: bank.shapes().iter().map(|s| s.theta()).collect(),
    };
    Ok(toml::to_string(&file)?)
}

pub fn read_bank(text: &str) -> Result<ProfileBank> {
    let file: BankFile = toml::from_str(text)?;
    check_header(&file.format, file.version, BANK_FORMAT)?;
    if file.columns != theta_columns(file.family) {
        return Err(Error::Parse(format!(
            "{} bank must have columns {:?}",
            file.family.tag(),
            theta_columns(file.family)
        )));
    }
    let shapes = file
        .theta
        .iter()
        .map(|row| ProfileShape::from_theta(file.family, file.bimodal_form, row))
        .collect::<Result<Vec<_>>>()?;
    ProfileBank::new(shapes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn date(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    #[test]
    fn count_file_layout() {
        let s = CountSeries::new(date(2024, 12, 31), vec![3, 0, 12]);
        let text = write_counts(&s);
        assert_eq!(text, "date,count\n2024-12-31,3\n2025-01-01,0\n2025-01-02,12\n");
        assert_eq!(read_counts(text.as_bytes()).unwrap(), s);
    }

    #[test]
    fn count_file_gap_is_named() {
        let err = read_counts("date,count\n2024-01-01,3\n2024-01-02,4\n2024-01-05,1\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("2024-01-02 followed by 2024-01-05"), "{err}");
    }

    #[test]
    fn count_file_rejects_negative_counts() {
        assert!(read_counts("date,count\n2024-01-01,-3\n".as_bytes()).is_err());
    }

    #[test]
    fn baseline_document_round_trip() {
        let spec = DesignSpec::surveillance();
        let beta: Vec<f64> = (0..16).map(|i| 0.1 * i as f64 - 0.37).collect();
        let mut model = BaselineModel::from_coefficients(spec, beta).unwrap();
        model.fit_deviance = 812.25;
        let text = write_baseline(&model).unwrap();
        assert!(text.contains("format = \"mlrss-baseline\""));
        assert!(text.contains("name = \"weekday:cos2\""));
        assert_eq!(read_baseline(&text).unwrap(), model);
    }

    #[test]
    fn baseline_version_checked() {
        let model = BaselineModel::from_coefficients(DesignSpec::intercept_only(), vec![1.0, 0.5]).unwrap();
        let text = write_baseline(&model).unwrap().replace("version = 1", "version = 9");
        assert!(read_baseline(&text).unwrap_err().to_string().contains("version 9"));
    }

    #[test]
    fn bank_document() {
        let bank = ProfileBank::new(vec![
            ProfileShape::bimodal(3.0, 4.0, 11.0, 6.5),
            ProfileShape::bimodal(2.5, 3.0, 12.0, 5.0),
        ])
        .unwrap();
        let text = write_bank(&bank).unwrap();
        assert!(text.contains("family = \"bimodal\""));
        assert_eq!(read_bank(&text).unwrap(), bank);
    }

    #[test]
    fn outbreak_table_round_trip() {
        let s = CountSeries::new(date(2024, 1, 1), vec![0; 100]);
        let obs = vec![OutbreakTruth {
            start: 10,
            peak_day: 17,
            peak_excess: 12.5,
            effective_first: 10,
            effective_last: 24,
            truncated: false,
        }];
        let text = write_outbreaks(&s, &obs);
        assert_eq!(read_outbreaks(text.as_bytes(), s.start).unwrap(), obs);
    }

    #[test]
    fn score_rows_round_trip() {
        let s = CountSeries::new(date(2024, 1, 1), vec![0; 2]);
        let rows = vec![
            ScoreRow { day: 1, log_r: Some(0.0), t_star: Some(1), score: 0.0, saturated: false, remediated: 0 },
            ScoreRow { day: 2, log_r: Some(-1.25), t_star: Some(1), score: 0.125, saturated: false, remediated: 2 },
        ];
        let text = write_scores(&s, "mlrss", &rows);
        let (first, back) = read_scores(text.as_bytes()).unwrap();
        assert_eq!(first, s.start);
        assert_eq!(back, rows);
        let plain = write_scores(&s, "ewma", &[ScoreRow::plain(1, 0.5)]);
        assert_eq!(plain.lines().nth(1), Some("2024-01-01,1,ewma,,,0.5,false,0"));
    }

    proptest! {
        #[test]
        fn bank_theta_survives_text(rows in proptest::collection::vec((1e-3f64..1e3, -50.0f64..50.0, 1e-3f64..1e3), 1..8)) {
            let shapes: Vec<_> = rows.iter().map(|&(c, mu, s)| ProfileShape::gaussian(c, mu, s)).collect();
            let bank = ProfileBank::new(shapes).unwrap();
            prop_assert_eq!(read_bank(&write_bank(&bank).unwrap()).unwrap(), bank);
        }
    }
}
