use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::run::RegretTrace;

/// Mean cumulative regret and its `2 x standard error` band for one policy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyCurve {
    pub policy: String,
    pub mean: Vec<f64>,
    pub se2: Vec<f64>,
}

impl PolicyCurve {
    pub fn final_mean(&self) -> f64 {
        self.mean.last().copied().unwrap_or(0.0)
    }

    pub fn final_se2(&self) -> f64 {
        self.se2.last().copied().unwrap_or(0.0)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AggregateResult {
    pub curves: Vec<PolicyCurve>,
}

impl AggregateResult {
    pub fn curve(&self, policy: &str) -> Option<&PolicyCurve> {
        self.curves.iter().find(|c| c.policy == policy)
    }
}

/// Sample mean and `2 x` standard error of the mean.
pub fn mean_se2(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, 2.0 * (var / n).sqrt())
}

/// Aggregate the traces of a single policy.
pub fn aggregate_traces(traces: &[RegretTrace]) -> Result<PolicyCurve> {
    let first = traces.first().ok_or_else(|| Error::InvalidArgument("no traces to aggregate".into()))?;
    if traces.len() < 2 {
        return Err(Error::InvalidArgument("standard errors need at least 2 traces".into()));
    }
    let len = first.cumulative.len();
    if traces.iter().any(|t| t.cumulative.len() != len || t.policy != first.policy) {
        return Err(Error::InvalidArgument("traces differ in length or policy".into()));
    }
    let mut mean = Vec::with_capacity(len);
    let mut se2 = Vec::with_capacity(len);
    let mut column = vec![0.0; traces.len()];
    for i in 0..len {
        for (c, t) in column.iter_mut().zip(traces) {
            *c = t.cumulative[i];
        }
        let (m, s) = mean_se2(&column);
        mean.push(m);
        se2.push(s);
    }
    Ok(PolicyCurve { policy: first.policy.clone(), mean, se2 })
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    step: usize,
    policy: String,
    mean_regret: f64,
    se2: f64,
}

/// CSV with columns `step,policy,mean_regret,se2`, grouped by policy in
/// result order, steps counted from 1.
pub fn write_csv<W: Write>(result: &AggregateResult, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(["step", "policy", "mean_regret", "se2"])?;
    for curve in &result.curves {
        for (i, (&m, &s)) in curve.mean.iter().zip(&curve.se2).enumerate() {
            w.serialize(CsvRow { step: i + 1, policy: curve.policy.clone(), mean_regret: m, se2: s })?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(result: &AggregateResult, path: &Path) -> Result<()> {
    write_csv(result, std::fs::File::create(path)?)
}

/// Inverse of [`write_csv`].
pub fn parse_csv<R: Read>(reader: R) -> Result<AggregateResult> {
    let mut r = csv::Reader::from_reader(reader);
    let mut curves: Vec<PolicyCurve> = Vec::new();
    for row in r.deserialize() {
        let row: CsvRow = row?;
        let idx = match curves.iter().position(|c| c.policy == row.policy) {
            Some(i) => i,
            None => {
                curves.push(PolicyCurve { policy: row.policy.clone(), mean: Vec::new(), se2: Vec::new() });
                curves.len() - 1
            }
        };
        let curve = &mut curves[idx];
        if row.step != curve.mean.len() + 1 {
            return Err(Error::InvalidArgument(format!("policy {} step {} out of order", row.policy, row.step)));
        }
        curve.mean.push(row.mean_regret);
        curve.se2.push(row.se2);
    }
    Ok(AggregateResult { curves })
}

pub fn read_csv(path: &Path) -> Result<AggregateResult> {
    parse_csv(std::fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(values: &[f64]) -> RegretTrace {
        RegretTrace { policy: "p".into(), seed: 0, cumulative: values.to_vec() }
    }

    #[test]
    fn mean_and_band() {
        let c = aggregate_traces(&[trace(&[1.0, 2.0]), trace(&[3.0, 2.0])]).unwrap();
        assert_eq!(c.mean, vec![2.0, 2.0]);
        // sd = sqrt(2), se = 1
        assert!((c.se2[0] - 2.0).abs() < 1e-12);
        assert_eq!(c.se2[1], 0.0);
        assert!(aggregate_traces(&[trace(&[1.0])]).is_err());
        assert!(aggregate_traces(&[trace(&[1.0]), trace(&[1.0, 2.0])]).is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let r = AggregateResult {
            curves: vec![
                PolicyCurve { policy: "a".into(), mean: vec![0.1, 0.1 + 0.2, 1e-300], se2: vec![0.0, 1.0 / 3.0, 7.0] },
                PolicyCurve { policy: "b".into(), mean: vec![5.0, 6.0, 7.5], se2: vec![0.5, 0.25, 0.125] },
            ],
        };
        let mut buf = Vec::new();
        write_csv(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 3 * 2 + 1);
        assert!(text.starts_with("step,policy,mean_regret,se2\n"));
        assert_eq!(parse_csv(buf.as_slice()).unwrap(), r);

        let mut empty = Vec::new();
        write_csv(&AggregateResult::default(), &mut empty).unwrap();
        assert_eq!(String::from_utf8(empty).unwrap(), "step,policy,mean_regret,se2\n");
    }
}
