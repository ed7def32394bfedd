use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nav_agent::TrialRecord;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("no records to score")]
    Empty,
    #[error("record {index} has non-positive shortest length {length}")]
    NonPositiveShortest { index: usize, length: f64 },
}

/// What the metrics need from one trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub success: bool,
    /// Exploration attempts (panoramas) used.
    pub detections: usize,
    pub path_length: f64,
    pub shortest_length: f64,
}

impl From<&TrialRecord> for MetricRecord {
    fn from(r: &TrialRecord) -> Self {
        Self {
            success: r.success,
            detections: r.detections_made,
            path_length: r.path_length,
            shortest_length: r.shortest_length,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SdfMode {
    /// S·d/max(2, d): full credit for any successful trial.
    #[default]
    AsWritten,
    /// S·2/max(2, d): credit shrinks once more than two attempts were needed.
    Penalizing,
}

fn s(r: &MetricRecord) -> f64 {
    if r.success {
        1.0
    } else {
        0.0
    }
}

/// Success rate in percent.
pub fn sr(records: &[MetricRecord]) -> Result<f64, MetricError> {
    if records.is_empty() {
        return Err(MetricError::Empty);
    }
    Ok(100.0 * records.iter().map(s).sum::<f64>() / records.len() as f64)
}

/// Success weighted by shortest over actual path length, in percent.
pub fn spl(records: &[MetricRecord]) -> Result<f64, MetricError> {
    if records.is_empty() {
        return Err(MetricError::Empty);
    }
    let mut total = 0.0;
    for (index, r) in records.iter().enumerate() {
        if r.shortest_length.is_nan() || r.shortest_length <= 0.0 {
            return Err(MetricError::NonPositiveShortest {
                index,
                length: r.shortest_length,
            });
        }
        total += s(r) * r.shortest_length / r.path_length.max(r.shortest_length);
    }
    Ok(100.0 * total / records.len() as f64)
}

/// Success weighted by detection frequency, in percent.
pub fn sdf(records: &[MetricRecord], mode: SdfMode) -> Result<f64, MetricError> {
    if records.is_empty() {
        return Err(MetricError::Empty);
    }
    let total: f64 = records
        .iter()
        .map(|r| {
            let d = r.detections as f64;
            let num = match mode {
                SdfMode::AsWritten => d,
                SdfMode::Penalizing => 2.0,
            };
            s(r) * num / d.max(2.0)
        })
        .sum();
    Ok(100.0 * total / records.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(success: bool, detections: usize, p: f64, l: f64) -> MetricRecord {
        MetricRecord {
            success,
            detections,
            path_length: p,
            shortest_length: l,
        }
    }

    #[test]
    fn success_rate() {
        let r = [
            rec(true, 1, 1.0, 1.0),
            rec(true, 1, 1.0, 1.0),
            rec(false, 1, 1.0, 1.0),
        ];
        assert!((sr(&r).unwrap() - 66.666_666_666_666_67).abs() < 1e-9);
        assert_eq!(sr(&r[2..]).unwrap(), 0.0);
        assert_eq!(sr(&r[..2]).unwrap(), 100.0);
        assert_eq!(sr(&[]), Err(MetricError::Empty));
    }

    #[test]
    fn path_length_weighting() {
        assert!((spl(&[rec(true, 1, 12.0, 10.0)]).unwrap() - 83.333_333_333_333_33).abs() < 1e-9);
        assert_eq!(spl(&[rec(true, 1, 10.0, 10.0)]).unwrap(), 100.0);
        assert_eq!(spl(&[rec(false, 1, 3.0, 10.0)]).unwrap(), 0.0);
        assert!(matches!(
            spl(&[rec(true, 1, 3.0, 0.0)]),
            Err(MetricError::NonPositiveShortest { index: 0, .. })
        ));
    }

    #[test]
    fn detection_frequency_modes() {
        let two = [rec(true, 2, 1.0, 1.0)];
        assert_eq!(sdf(&two, SdfMode::AsWritten).unwrap(), 100.0);
        assert_eq!(sdf(&two, SdfMode::Penalizing).unwrap(), 100.0);
        assert_eq!(
            sdf(&[rec(false, 5, 1.0, 1.0)], SdfMode::Penalizing).unwrap(),
            0.0
        );
        let four = [rec(true, 4, 1.0, 1.0)];
        assert_eq!(sdf(&four, SdfMode::AsWritten).unwrap(), 100.0);
        assert_eq!(sdf(&four, SdfMode::Penalizing).unwrap(), 50.0);
    }
}
