//! National t10 distribution and per-department strength measures.
//!
//! Averaged measures — m10 (median t10), g10 (geometric mean of 1+t10), and
//! p10 (mean national percentile) — are computed over senior faculty
//! (associate and full professors) with a known t10. Cumulative measures cN
//! count a department's faculty of all ranks whose t10 strictly exceeds the
//! national senior N-th percentile threshold. Faculty with an uncollected
//! t10 are excluded from numerators and denominators alike; a t10 of 0 is a
//! real value (fewer than ten cited papers) and is retained.
//!
//! Everything here is a pure function over immutable snapshots; output
//! ordering is deterministic by university name.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::roster::Snapshot;

/// Cumulative-measure percentile levels: c10 through c90.
pub const CUMULATIVE_LEVELS: [u32; 9] = [10, 20, 30, 40, 50, 60, 70, 80, 90];

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("no senior faculty with a known t10")]
    EmptyDistribution,
    #[error("percentile {0} outside (0, 100)")]
    PercentileRange(f64),
    #[error("empty input")]
    EmptyInput,
    #[error("metrics csv: {0}")]
    Csv(String),
}

/// Sorted t10 values of every senior faculty member with a known t10.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NationalDistribution {
    values: Vec<u32>,
}

impl NationalDistribution {
    /// Build from raw values. Errors when empty.
    pub fn new(mut values: Vec<u32>) -> Result<Self, MetricsError> {
        if values.is_empty() {
            return Err(MetricsError::EmptyDistribution);
        }
        values.sort_unstable();
        Ok(NationalDistribution { values })
    }

    /// Senior faculty with known t10, over the whole snapshot.
    pub fn from_snapshot(snapshot: &Snapshot) -> Result<Self, MetricsError> {
        Self::new(
            snapshot
                .faculty
                .iter()
                .filter(|f| f.is_senior())
                .filter_map(|f| f.t10)
                .collect(),
        )
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Nearest-rank percentile: the value at 1-based index ceil(q/100 · n)
    /// of the sorted list.
    pub fn percentile_threshold(&self, q: f64) -> Result<u32, MetricsError> {
        if !(q > 0.0 && q < 100.0) {
            return Err(MetricsError::PercentileRange(q));
        }
        let n = self.values.len();
        let rank = (q * n as f64 / 100.0).ceil() as usize;
        let index = rank.clamp(1, n) - 1;
        Ok(self.values[index])
    }

    /// Percent of the distribution strictly below `v`.
    pub fn percentile_of(&self, v: u32) -> f64 {
        let below = self.values.partition_point(|&x| x < v);
        100.0 * below as f64 / self.values.len() as f64
    }
}

/// Median t10.
pub fn compute_m10(senior_t10s: &[u32]) -> Result<f64, MetricsError> {
    if senior_t10s.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut sorted = senior_t10s.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    Ok(if n % 2 == 1 {
        sorted[n / 2] as f64
    } else {
        (sorted[n / 2 - 1] as f64 + sorted[n / 2] as f64) / 2.0
    })
}

/// Geometric mean of (1 + t10), computed in the log domain.
pub fn compute_g10(senior_t10s: &[u32]) -> Result<f64, MetricsError> {
    if senior_t10s.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let log_sum: f64 = senior_t10s.iter().map(|&v| (1.0 + v as f64).ln()).sum();
    Ok((log_sum / senior_t10s.len() as f64).exp())
}

/// Mean national percentile of the department's senior t10 values.
pub fn compute_p10(
    senior_t10s: &[u32],
    national: &NationalDistribution,
) -> Result<f64, MetricsError> {
    if senior_t10s.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let sum: f64 = senior_t10s.iter().map(|&v| national.percentile_of(v)).sum();
    Ok(sum / senior_t10s.len() as f64)
}

/// Count of faculty (all ranks, known t10) with t10 strictly greater than
/// the threshold.
pub fn compute_cn(all_faculty_t10s: &[u32], threshold: u32) -> usize {
    all_faculty_t10s.iter().filter(|&&v| v > threshold).count()
}

/// Per-program strength measures.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricVector {
    pub university: String,
    pub m10: f64,
    pub g10: f64,
    pub p10: f64,
    /// cN keyed by N ∈ {10, 20, ..., 90}.
    pub c: BTreeMap<u32, usize>,
    /// Senior faculty with a known t10 (the averaged-measure denominator).
    pub senior_count: usize,
    /// All tenure-track faculty of the program.
    pub total_count: usize,
    /// True when the program had no usable senior faculty and carries
    /// sentinel averaged measures (m10 = 0, g10 = 1, p10 = 0).
    pub degenerate: bool,
}

impl MetricVector {
    /// Look up a measure by its serialized name: `m10`, `g10`, `p10`, or
    /// `c10`..`c90`.
    pub fn measure(&self, name: &str) -> Option<f64> {
        match name {
            "m10" => Some(self.m10),
            "g10" => Some(self.g10),
            "p10" => Some(self.p10),
            _ => {
                let n: u32 = name.strip_prefix('c')?.parse().ok()?;
                self.c.get(&n).map(|&count| count as f64)
            }
        }
    }
}

/// Compute one [`MetricVector`] per program. Programs are keyed by
/// university; a university listing multiple departments is pooled into one
/// program. Departments with zero usable senior faculty receive sentinel
/// averaged measures and are flagged, so a full ranking can still be
/// emitted.
pub fn compute_metric_table(snapshot: &Snapshot) -> Result<Vec<MetricVector>, MetricsError> {
    let national = NationalDistribution::from_snapshot(snapshot)?;
    let thresholds: Vec<(u32, u32)> = CUMULATIVE_LEVELS
        .iter()
        .map(|&n| Ok((n, national.percentile_threshold(n as f64)?)))
        .collect::<Result<_, MetricsError>>()?;

    let mut programs: BTreeMap<&str, (Vec<u32>, Vec<u32>, usize)> = BTreeMap::new();
    for f in &snapshot.faculty {
        let entry = programs.entry(f.university.as_str()).or_default();
        entry.2 += 1;
        if let Some(t10) = f.t10 {
            entry.1.push(t10);
            if f.is_senior() {
                entry.0.push(t10);
            }
        }
    }

    let mut table = Vec::with_capacity(programs.len());
    for (university, (senior_t10s, all_t10s, total_count)) in programs {
        let degenerate = senior_t10s.is_empty();
        let (m10, g10, p10) = if degenerate {
            (0.0, 1.0, 0.0)
        } else {
            (
                compute_m10(&senior_t10s)?,
                compute_g10(&senior_t10s)?,
                compute_p10(&senior_t10s, &national)?,
            )
        };
        let c = thresholds
            .iter()
            .map(|&(n, threshold)| (n, compute_cn(&all_t10s, threshold)))
            .collect();
        table.push(MetricVector {
            university: university.to_owned(),
            m10,
            g10,
            p10,
            c,
            senior_count: senior_t10s.len(),
            total_count,
            degenerate,
        });
    }
    Ok(table)
}

/// Serialize a metric table to the `metrics.csv` interchange schema:
/// `university,m10,g10,p10,c10,...,c90,senior_count,total_count`.
pub fn write_metrics_csv(table: &[MetricVector]) -> String {
    let mut out = String::from("university,m10,g10,p10");
    for n in CUMULATIVE_LEVELS {
        let _ = write!(out, ",c{n}");
    }
    out.push_str(",senior_count,total_count\n");
    for v in table {
        let _ = write!(out, "{},{},{},{}", csv_field(&v.university), v.m10, v.g10, v.p10);
        for n in CUMULATIVE_LEVELS {
            let _ = write!(out, ",{}", v.c.get(&n).copied().unwrap_or(0));
        }
        let _ = writeln!(out, ",{},{}", v.senior_count, v.total_count);
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Parse a `metrics.csv` file written by [`write_metrics_csv`].
pub fn read_metrics_csv(bytes: &[u8]) -> Result<Vec<MetricVector>, MetricsError> {
    let mut reader = csv::ReaderBuilder::new().from_reader(bytes);
    let headers = reader
        .headers()
        .map_err(|e| MetricsError::Csv(e.to_string()))?
        .clone();
    let mut expected = vec!["university".to_owned(), "m10".into(), "g10".into(), "p10".into()];
    expected.extend(CUMULATIVE_LEVELS.iter().map(|n| format!("c{n}")));
    expected.push("senior_count".into());
    expected.push("total_count".into());
    let actual: Vec<String> = headers.iter().map(|h| h.trim().to_owned()).collect();
    if actual != expected {
        return Err(MetricsError::Csv(format!(
            "header mismatch: expected {expected:?}, found {actual:?}"
        )));
    }

    let mut table = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| MetricsError::Csv(e.to_string()))?;
        let row = i + 2;
        let parse_f64 = |idx: usize, name: &str| -> Result<f64, MetricsError> {
            record
                .get(idx)
                .unwrap_or("")
                .trim()
                .parse()
                .map_err(|_| MetricsError::Csv(format!("row {row}: bad {name}")))
        };
        let parse_usize = |idx: usize, name: &str| -> Result<usize, MetricsError> {
            record
                .get(idx)
                .unwrap_or("")
                .trim()
                .parse()
                .map_err(|_| MetricsError::Csv(format!("row {row}: bad {name}")))
        };
        let mut c = BTreeMap::new();
        for (offset, &n) in CUMULATIVE_LEVELS.iter().enumerate() {
            c.insert(n, parse_usize(4 + offset, &format!("c{n}"))?);
        }
        let senior_count = parse_usize(13, "senior_count")?;
        table.push(MetricVector {
            university: record.get(0).unwrap_or("").trim().to_owned(),
            m10: parse_f64(1, "m10")?,
            g10: parse_f64(2, "g10")?,
            p10: parse_f64(3, "p10")?,
            c,
            senior_count,
            total_count: parse_usize(14, "total_count")?,
            degenerate: senior_count == 0,
        });
    }
    Ok(table)
}
