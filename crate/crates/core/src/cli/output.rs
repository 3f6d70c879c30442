//! CSV files written by `simulate` and `sweep-gamma`.
//!
//! - `runs.csv`: `policy,run,t,regret`
//! - `aggregate.csv`: `policy,t,mean,p10,p90,lb_curve`

use std::path::Path;

use super::CliError;
use crate::harness::AggregateResult;

pub const AGGREGATE_COLUMNS: [&str; 6] = ["policy", "t", "mean", "p10", "p90", "lb_curve"];

/// Formats with 12 significant digits, shortest form.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    rounded.to_string()
}

pub fn runs_csv(result: &AggregateResult) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["policy", "run", "t", "regret"])?;
    for p in &result.policies {
        for (run, trace) in p.traces.iter().enumerate() {
            for (t, r) in trace.checkpoints.iter().zip(&trace.cumulative_regret) {
                w.write_record([
                    p.label.clone(),
                    run.to_string(),
                    t.to_string(),
                    fmt_num(*r),
                ])?;
            }
        }
    }
    w.into_inner().map_err(|e| CliError::Plot(e.to_string()))
}

pub fn aggregate_csv(result: &AggregateResult) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(AGGREGATE_COLUMNS)?;
    for p in &result.policies {
        for (i, t) in result.checkpoints.iter().enumerate() {
            w.write_record([
                p.label.clone(),
                t.to_string(),
                fmt_num(p.mean[i]),
                fmt_num(p.p10[i]),
                fmt_num(p.p90[i]),
                fmt_num(result.lb_curve[i]),
            ])?;
        }
    }
    w.into_inner().map_err(|e| CliError::Plot(e.to_string()))
}

/// One policy's rows of an aggregate CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateSeries {
    pub policy: String,
    pub t: Vec<u64>,
    pub mean: Vec<f64>,
    pub p10: Vec<f64>,
    pub p90: Vec<f64>,
    pub lb_curve: Vec<f64>,
}

/// Reads an aggregate CSV, grouping rows by policy in order of first appearance.
pub fn read_aggregate(path: &Path) -> Result<Vec<AggregateSeries>, CliError> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let mut index = [0usize; 6];
    for (slot, name) in index.iter_mut().zip(AGGREGATE_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| CliError::Plot(format!("{}: missing column `{name}`", path.display())))?;
    }
    let mut series: Vec<AggregateSeries> = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let field = |i: usize| record.get(index[i]).unwrap_or("").trim();
        let num = |i: usize| -> Result<f64, CliError> {
            field(i).parse().map_err(|_| {
                CliError::Plot(format!(
                    "row {}: column `{}` is not a number: {:?}",
                    row + 2,
                    AGGREGATE_COLUMNS[i],
                    field(i)
                ))
            })
        };
        let t: u64 = field(1)
            .parse()
            .map_err(|_| CliError::Plot(format!("row {}: bad time {:?}", row + 2, field(1))))?;
        let policy = field(0).to_string();
        let pos = match series.iter().position(|s| s.policy == policy) {
            Some(p) => p,
            None => {
                series.push(AggregateSeries {
                    policy,
                    t: vec![],
                    mean: vec![],
                    p10: vec![],
                    p90: vec![],
                    lb_curve: vec![],
                });
                series.len() - 1
            }
        };
        let s = &mut series[pos];
        s.t.push(t);
        s.mean.push(num(2)?);
        s.p10.push(num(3)?);
        s.p90.push(num(4)?);
        s.lb_curve.push(num(5)?);
    }
    if series.is_empty() {
        return Err(CliError::Plot(format!("{}: no data rows", path.display())));
    }
    Ok(series)
}
