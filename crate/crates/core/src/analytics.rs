//! Ranking-comparison statistics: correlations, rank-difference and
//! score-delta distributions, snapshot cohort analysis, profile-bias and
//! department-size reports, and the publication-count ranking comparison.
//!
//! All operations are pure over immutable inputs. Reports are exported as
//! JSON plus plot-ready CSVs by the writers at the bottom of the module.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::metrics::NationalDistribution;
use crate::model::RankingTable;
use crate::roster::{FacultyId, IdentityMap, ScoreSource, ScoreTable, Snapshot};

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("length mismatch: {0} vs {1} (need equal lengths >= 2)")]
    Shape(usize, usize),
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("university sets differ: {} only in a, {} only in b", only_a.len(), only_b.len())]
    Coverage {
        only_a: Vec<String>,
        only_b: Vec<String>,
    },
    #[error("score for {university:?} is {score}; log transform requires positive values")]
    NonPositiveScore { university: String, score: f64 },
    #[error("only {0} universities in the common intersection; need at least 3")]
    InsufficientData(usize),
    #[error("bin width must be positive, got {0}")]
    BadBinWidth(f64),
    #[error("group size must be positive")]
    BadGroupSize,
}

/// R², Pearson, and Spearman for one ranking pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationTriple {
    pub r_squared: f64,
    pub pearson: f64,
    pub spearman: f64,
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<(), AnalyticsError> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(AnalyticsError::Shape(x.len(), y.len()));
    }
    Ok(())
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, AnalyticsError> {
    check_pair(x, y)?;
    let (mx, my) = (mean(x), mean(y));
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        cov += (a - mx) * (b - my);
        var_x += (a - mx) * (a - mx);
        var_y += (b - my) * (b - my);
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(AnalyticsError::DegenerateInput("zero variance"));
    }
    Ok(cov / (var_x * var_y).sqrt())
}

/// Average ranks (1-based), with midranks for ties.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap_or(std::cmp::Ordering::Equal));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && values[order[end + 1]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end+1 share the midrank
        let midrank = (start + 1 + end + 1) as f64 / 2.0;
        for &idx in &order[start..=end] {
            ranks[idx] = midrank;
        }
        start = end + 1;
    }
    ranks
}

/// Spearman rank correlation: Pearson of the midranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, AnalyticsError> {
    check_pair(x, y)?;
    pearson(&midranks(x), &midranks(y))
}

/// Coefficient of determination of `pred` against `actual`:
/// `1 - SS_res / SS_tot`. This is not the squared Pearson correlation
/// unless `pred` is the least-squares affine fit of `actual`.
pub fn r_squared(pred: &[f64], actual: &[f64]) -> Result<f64, AnalyticsError> {
    check_pair(pred, actual)?;
    let ma = mean(actual);
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (&p, &a) in pred.iter().zip(actual) {
        ss_res += (p - a) * (p - a);
        ss_tot += (a - ma) * (a - ma);
    }
    if ss_tot == 0.0 {
        return Err(AnalyticsError::DegenerateInput("actual has zero variance"));
    }
    Ok(1.0 - ss_res / ss_tot)
}

/// All three statistics for a (prediction, actual) pair.
pub fn correlation_triple(pred: &[f64], actual: &[f64]) -> Result<CorrelationTriple, AnalyticsError> {
    Ok(CorrelationTriple {
        r_squared: r_squared(pred, actual)?,
        pearson: pearson(pred, actual)?,
        spearman: spearman(pred, actual)?,
    })
}

/// Five-number summary of one rank-difference group, with 1.5·IQR whiskers.
/// `min`/`max` are the whisker ends; data beyond them land in `outliers`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxplotSummary {
    pub group_label: String,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub outliers: Vec<f64>,
}

/// Quantile by linear interpolation between order statistics.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let position = p * (n - 1) as f64;
    let low = position.floor() as usize;
    let high = position.ceil() as usize;
    let frac = position - low as f64;
    sorted[low] + frac * (sorted[high] - sorted[low])
}

fn five_number_summary(label: String, values: &[f64]) -> BoxplotSummary {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let q1 = quantile(&sorted, 0.25);
    let median = quantile(&sorted, 0.5);
    let q3 = quantile(&sorted, 0.75);
    let iqr = q3 - q1;
    let low_fence = q1 - 1.5 * iqr;
    let high_fence = q3 + 1.5 * iqr;
    let inside: Vec<f64> = sorted
        .iter()
        .copied()
        .filter(|&v| v >= low_fence && v <= high_fence)
        .collect();
    let whisker_low = inside.first().copied().unwrap_or(q1).min(q1);
    let whisker_high = inside.last().copied().unwrap_or(q3).max(q3);
    let outliers = sorted
        .iter()
        .copied()
        .filter(|&v| v < low_fence || v > high_fence)
        .collect();
    BoxplotSummary {
        group_label: label,
        min: whisker_low,
        q1,
        median,
        q3,
        max: whisker_high,
        outliers,
    }
}

fn coverage_check(
    a: &BTreeSet<&str>,
    b: &BTreeSet<&str>,
) -> Result<(), AnalyticsError> {
    if a == b {
        return Ok(());
    }
    Err(AnalyticsError::Coverage {
        only_a: a.difference(b).map(|s| (*s).to_owned()).collect(),
        only_b: b.difference(a).map(|s| (*s).to_owned()).collect(),
    })
}

/// Absolute rank differences |rank_a − rank_b| per university, grouped by
/// `a`'s rank order into consecutive buckets of `group_size` (the last
/// bucket may be ragged), each summarized as a box plot.
pub fn rank_difference_report(
    a: &RankingTable,
    b: &RankingTable,
    group_size: usize,
) -> Result<Vec<BoxplotSummary>, AnalyticsError> {
    if group_size == 0 {
        return Err(AnalyticsError::BadGroupSize);
    }
    let set_a: BTreeSet<&str> = a.rows.iter().map(|r| r.university.as_str()).collect();
    let set_b: BTreeSet<&str> = b.rows.iter().map(|r| r.university.as_str()).collect();
    coverage_check(&set_a, &set_b)?;

    let rank_b: BTreeMap<&str, u32> = b
        .rows
        .iter()
        .map(|r| (r.university.as_str(), r.rank))
        .collect();
    let diffs: Vec<f64> = a
        .rows
        .iter()
        .map(|r| (r.rank as f64 - rank_b[r.university.as_str()] as f64).abs())
        .collect();

    Ok(diffs
        .chunks(group_size)
        .enumerate()
        .map(|(i, chunk)| {
            let start = i * group_size + 1;
            let end = i * group_size + chunk.len();
            five_number_summary(format!("{start}-{end}"), chunk)
        })
        .collect())
}

/// Histogram of per-university score deltas (b − a) in half-open bins of
/// `bin_width` aligned at 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaHistogram {
    pub bin_width: f64,
    /// bin index → count; a delta d lands in bin floor(d / bin_width).
    pub bins: BTreeMap<i64, usize>,
}

impl DeltaHistogram {
    pub fn total(&self) -> usize {
        self.bins.values().sum()
    }

    /// (bin_start, count) pairs in ascending bin order.
    pub fn bin_starts(&self) -> Vec<(f64, usize)> {
        self.bins
            .iter()
            .map(|(&idx, &count)| (clean_float(idx as f64 * self.bin_width), count))
            .collect()
    }
}

// Strip float-representation dust from bin boundaries (e.g. -0.30000000000000004).
fn clean_float(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

fn bin_index(delta: f64, width: f64) -> i64 {
    let quotient = delta / width;
    let mut idx = quotient.floor() as i64;
    // Values within representation error below a boundary belong to the
    // upper bin (half-open bins aligned at exact multiples of the width).
    let upper = (idx + 1) as f64 * width;
    if (delta - upper).abs() <= width * 1e-9 {
        idx += 1;
    }
    idx
}

/// Per-university score change (score_b − score_a) binned half-open,
/// aligned at 0.
pub fn score_delta_histogram(
    a: &ScoreTable,
    b: &ScoreTable,
    bin_width: f64,
) -> Result<DeltaHistogram, AnalyticsError> {
    if !(bin_width > 0.0) || !bin_width.is_finite() {
        return Err(AnalyticsError::BadBinWidth(bin_width));
    }
    let set_a: BTreeSet<&str> = a.entries.keys().map(String::as_str).collect();
    let set_b: BTreeSet<&str> = b.entries.keys().map(String::as_str).collect();
    coverage_check(&set_a, &set_b)?;

    let mut bins: BTreeMap<i64, usize> = BTreeMap::new();
    for (university, &score_a) in &a.entries {
        let delta = b.entries[university] - score_a;
        *bins.entry(bin_index(delta, bin_width)).or_insert(0) += 1;
    }
    Ok(DeltaHistogram { bin_width, bins })
}

/// Direction of a move, judged by the earlier snapshot's ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MoveDirection {
    Up,
    Down,
    Same,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MoverRecord {
    pub faculty_a: FacultyId,
    pub faculty_b: FacultyId,
    pub name: String,
    pub from_university: String,
    pub to_university: String,
    pub direction: MoveDirection,
}

/// Aggregate cohort counts and the paper-style fractions. Fractions are
/// `None` when their denominator is zero; faculty with a missing t10 are
/// counted separately and never enter a denominator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohortStats {
    pub continuing: usize,
    pub new_count: usize,
    pub mover_count: usize,
    pub departed_count: usize,
    pub promoted_count: usize,
    pub new_below_dest_mean: usize,
    pub new_at_or_above_dest_mean: usize,
    pub new_missing_t10: usize,
    pub new_below_dest_mean_fraction: Option<f64>,
    pub movers_up: usize,
    pub movers_down: usize,
    pub movers_same: usize,
    pub movers_unknown_direction: usize,
    pub movers_at_or_below_origin_mean: usize,
    pub movers_above_origin_mean: usize,
    pub movers_missing_t10: usize,
    pub movers_at_or_below_origin_mean_fraction: Option<f64>,
}

/// Cohort classification of two matched snapshots. Every `b` faculty member
/// is exactly one of continuing / mover / new; every `a` faculty member is
/// exactly one of continuing / mover / departed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohortReport {
    pub new: Vec<FacultyId>,
    pub movers: Vec<MoverRecord>,
    /// Matched pairs whose rank rose between the snapshots (id in a, id in b).
    pub promoted: Vec<(FacultyId, FacultyId)>,
    pub departed: Vec<FacultyId>,
    pub stats: CohortStats,
}

fn department_mean_t10(snapshot: &Snapshot) -> BTreeMap<&str, f64> {
    let mut sums: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for f in &snapshot.faculty {
        if let Some(t10) = f.t10 {
            let entry = sums.entry(f.university.as_str()).or_insert((0.0, 0));
            entry.0 += t10 as f64;
            entry.1 += 1;
        }
    }
    sums.into_iter()
        .map(|(u, (sum, count))| (u, sum / count as f64))
        .collect()
}

fn fraction(numerator: usize, denominator: usize) -> Option<f64> {
    (denominator > 0).then(|| numerator as f64 / denominator as f64)
}

/// Classify cohorts across two snapshots and compute the movement and
/// strength statistics. Department mean t10 values are computed over all
/// faculty of the department (the member under test included) with a known
/// t10. `ranks_a` supplies the earlier ranking for mover direction; without
/// it every direction is `Unknown`.
pub fn snapshot_cohort_report(
    a: &Snapshot,
    b: &Snapshot,
    map: &IdentityMap,
    ranks_a: Option<&RankingTable>,
) -> CohortReport {
    let matched_b: BTreeSet<&FacultyId> = map.matches.values().collect();
    let mean_a = department_mean_t10(a);
    let mean_b = department_mean_t10(b);

    let mut stats = CohortStats {
        continuing: 0,
        new_count: 0,
        mover_count: 0,
        departed_count: 0,
        promoted_count: 0,
        new_below_dest_mean: 0,
        new_at_or_above_dest_mean: 0,
        new_missing_t10: 0,
        new_below_dest_mean_fraction: None,
        movers_up: 0,
        movers_down: 0,
        movers_same: 0,
        movers_unknown_direction: 0,
        movers_at_or_below_origin_mean: 0,
        movers_above_origin_mean: 0,
        movers_missing_t10: 0,
        movers_at_or_below_origin_mean_fraction: None,
    };

    let mut movers = Vec::new();
    let mut promoted = Vec::new();
    for (id_a, id_b) in &map.matches {
        let rec_a = a.faculty_by_id(id_a).expect("map ids come from snapshot a");
        let rec_b = b.faculty_by_id(id_b).expect("map ids come from snapshot b");
        if rec_b.rank > rec_a.rank {
            promoted.push((id_a.clone(), id_b.clone()));
        }
        if rec_a.university == rec_b.university {
            stats.continuing += 1;
            continue;
        }

        let direction = match ranks_a {
            Some(table) => {
                match (
                    table.rank_of(&rec_a.university),
                    table.rank_of(&rec_b.university),
                ) {
                    (Some(from), Some(to)) if to < from => MoveDirection::Up,
                    (Some(from), Some(to)) if to > from => MoveDirection::Down,
                    (Some(_), Some(_)) => MoveDirection::Same,
                    _ => MoveDirection::Unknown,
                }
            }
            None => MoveDirection::Unknown,
        };
        match direction {
            MoveDirection::Up => stats.movers_up += 1,
            MoveDirection::Down => stats.movers_down += 1,
            MoveDirection::Same => stats.movers_same += 1,
            MoveDirection::Unknown => stats.movers_unknown_direction += 1,
        }

        match rec_a.t10 {
            Some(t10) => {
                // origin mean is defined: rec_a itself contributes to it
                let origin_mean = mean_a[rec_a.university.as_str()];
                if (t10 as f64) <= origin_mean {
                    stats.movers_at_or_below_origin_mean += 1;
                } else {
                    stats.movers_above_origin_mean += 1;
                }
            }
            None => stats.movers_missing_t10 += 1,
        }

        movers.push(MoverRecord {
            faculty_a: id_a.clone(),
            faculty_b: id_b.clone(),
            name: rec_b.name_canonical.clone(),
            from_university: rec_a.university.clone(),
            to_university: rec_b.university.clone(),
            direction,
        });
    }

    let mut new = Vec::new();
    for f in &b.faculty {
        if matched_b.contains(&f.faculty_id) {
            continue;
        }
        new.push(f.faculty_id.clone());
        match f.t10 {
            Some(t10) => {
                let dest_mean = mean_b[f.university.as_str()];
                if (t10 as f64) < dest_mean {
                    stats.new_below_dest_mean += 1;
                } else {
                    stats.new_at_or_above_dest_mean += 1;
                }
            }
            None => stats.new_missing_t10 += 1,
        }
    }

    let departed: Vec<FacultyId> = a
        .faculty
        .iter()
        .filter(|f| !map.matches.contains_key(&f.faculty_id))
        .map(|f| f.faculty_id.clone())
        .collect();

    stats.new_count = new.len();
    stats.mover_count = movers.len();
    stats.departed_count = departed.len();
    stats.promoted_count = promoted.len();
    stats.new_below_dest_mean_fraction = fraction(
        stats.new_below_dest_mean,
        stats.new_below_dest_mean + stats.new_at_or_above_dest_mean,
    );
    stats.movers_at_or_below_origin_mean_fraction = fraction(
        stats.movers_at_or_below_origin_mean,
        stats.movers_at_or_below_origin_mean + stats.movers_above_origin_mean,
    );

    CohortReport {
        new,
        movers,
        promoted,
        departed,
        stats,
    }
}

/// Per-decile counts of senior faculty with and without a profile, plus
/// separate median t10 values for the two groups.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasReport {
    /// Index k covers the k-th national t10 decile (0 = bottom).
    pub deciles: Vec<DecileBias>,
    pub median_with_profile: Option<f64>,
    pub median_without_profile: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecileBias {
    pub decile: usize,
    pub with_profile: usize,
    pub without_profile: usize,
}

/// Bucket senior faculty with known t10 by national t10 decile, split by
/// profile presence. The decile of a value is the number of decile
/// thresholds it strictly exceeds, matching the cumulative-measure
/// convention.
pub fn profile_bias_report(
    snapshot: &Snapshot,
    national: &NationalDistribution,
) -> Result<BiasReport, AnalyticsError> {
    let thresholds: Vec<u32> = (1..10)
        .map(|k| {
            national
                .percentile_threshold(k as f64 * 10.0)
                .expect("decile percentiles are in range")
        })
        .collect();

    let mut deciles: Vec<DecileBias> = (0..10)
        .map(|decile| DecileBias {
            decile,
            with_profile: 0,
            without_profile: 0,
        })
        .collect();
    let mut with_values = Vec::new();
    let mut without_values = Vec::new();
    for f in &snapshot.faculty {
        if !f.is_senior() {
            continue;
        }
        let Some(t10) = f.t10 else { continue };
        let bucket = thresholds.iter().filter(|&&t| t10 > t).count();
        if f.has_scholar_profile {
            deciles[bucket].with_profile += 1;
            with_values.push(t10);
        } else {
            deciles[bucket].without_profile += 1;
            without_values.push(t10);
        }
    }

    let median = |values: &[u32]| crate::metrics::compute_m10(values).ok();
    Ok(BiasReport {
        deciles,
        median_with_profile: median(&with_values),
        median_without_profile: median(&without_values),
    })
}

/// Correlation rows and the average model from comparing the scholar
/// ranking against a publication-count ranking and the peer-assessment
/// scores.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsrComparison {
    /// (pair label, triple), in table order: usn_vs_scholar,
    /// usn_vs_csrankings, scholar_vs_csrankings, usn_vs_average.
    pub rows: Vec<(String, CorrelationTriple)>,
    /// Mean of scholar score and scale-aligned log publication score, over
    /// the common university set.
    pub average_model: ScoreTable,
}

fn std_dev(values: &[f64]) -> f64 {
    let m = mean(values);
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64).sqrt()
}

/// Compare three score tables on their common universities. The
/// publication-count scores are log-transformed, then affine-rescaled to
/// the scholar scores' mean and standard deviation; the average model is
/// the mean of the scholar and rescaled series. All statistics are computed
/// over the three-way intersection, and the R² column is the coefficient of
/// determination of the first series against the second (squared Pearson is
/// derivable from the Pearson column).
pub fn csrankings_comparison(
    scholar: &ScoreTable,
    csr: &ScoreTable,
    usn: &ScoreTable,
) -> Result<CsrComparison, AnalyticsError> {
    for (university, &score) in &csr.entries {
        if score <= 0.0 {
            return Err(AnalyticsError::NonPositiveScore {
                university: university.clone(),
                score,
            });
        }
    }

    let common: Vec<&String> = scholar
        .entries
        .keys()
        .filter(|u| csr.entries.contains_key(*u) && usn.entries.contains_key(*u))
        .collect();
    if common.len() < 3 {
        return Err(AnalyticsError::InsufficientData(common.len()));
    }

    let scholar_values: Vec<f64> = common.iter().map(|u| scholar.entries[*u]).collect();
    let usn_values: Vec<f64> = common.iter().map(|u| usn.entries[*u]).collect();
    let log_csr: Vec<f64> = common.iter().map(|u| csr.entries[*u].ln()).collect();

    let (ms, ss) = (mean(&scholar_values), std_dev(&scholar_values));
    let (ml, sl) = (mean(&log_csr), std_dev(&log_csr));
    if sl == 0.0 {
        return Err(AnalyticsError::DegenerateInput(
            "log-transformed scores have zero variance",
        ));
    }
    let aligned: Vec<f64> = log_csr.iter().map(|&v| ms + (v - ml) / sl * ss).collect();
    let average: Vec<f64> = scholar_values
        .iter()
        .zip(&aligned)
        .map(|(&s, &c)| (s + c) / 2.0)
        .collect();

    let mut average_model = ScoreTable::new(ScoreSource::Scholar, usn.year);
    for (university, &score) in common.iter().zip(&average) {
        average_model.entries.insert((*university).clone(), score);
    }

    let rows = vec![
        (
            "usn_vs_scholar".to_owned(),
            correlation_triple(&scholar_values, &usn_values)?,
        ),
        (
            "usn_vs_csrankings".to_owned(),
            correlation_triple(&aligned, &usn_values)?,
        ),
        (
            "scholar_vs_csrankings".to_owned(),
            correlation_triple(&aligned, &scholar_values)?,
        ),
        (
            "usn_vs_average".to_owned(),
            correlation_triple(&average, &usn_values)?,
        ),
    ];

    Ok(CsrComparison {
        rows,
        average_model,
    })
}

/// Order statistics of department sizes, plus the optional size-vs-score
/// correlation over universities present in both inputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeptSizeStats {
    pub median: f64,
    /// Smallest size among the most frequent ones when tied.
    pub mode: usize,
    pub min: usize,
    pub max: usize,
    pub size_score_pearson: Option<f64>,
}

pub fn dept_size_stats(snapshot: &Snapshot, scores: Option<&ScoreTable>) -> DeptSizeStats {
    let mut sizes: Vec<usize> = snapshot.departments.iter().map(|d| d.size).collect();
    sizes.sort_unstable();
    let n = sizes.len();
    let median = if n == 0 {
        0.0
    } else if n % 2 == 1 {
        sizes[n / 2] as f64
    } else {
        (sizes[n / 2 - 1] + sizes[n / 2]) as f64 / 2.0
    };
    let mut frequency: BTreeMap<usize, usize> = BTreeMap::new();
    for &s in &sizes {
        *frequency.entry(s).or_insert(0) += 1;
    }
    let mode = frequency
        .iter()
        .max_by_key(|(size, count)| (**count, std::cmp::Reverse(**size)))
        .map(|(&size, _)| size)
        .unwrap_or(0);

    let size_score_pearson = scores.and_then(|table| {
        let mut per_university: BTreeMap<&str, usize> = BTreeMap::new();
        for d in &snapshot.departments {
            *per_university.entry(d.university.as_str()).or_insert(0) += d.size;
        }
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (university, &size) in &per_university {
            if let Some(&score) = table.entries.get(*university) {
                xs.push(size as f64);
                ys.push(score);
            }
        }
        pearson(&xs, &ys).ok()
    });

    DeptSizeStats {
        median,
        mode,
        min: sizes.first().copied().unwrap_or(0),
        max: sizes.last().copied().unwrap_or(0),
        size_score_pearson,
    }
}

// ---------------------------------------------------------------------------
// Plot-ready CSV writers
// ---------------------------------------------------------------------------

/// `boxplot.csv`: `group,min,q1,median,q3,max` plus trailing outlier fields.
pub fn boxplot_csv(summaries: &[BoxplotSummary]) -> String {
    let mut out = String::from("group,min,q1,median,q3,max,outliers\n");
    for s in summaries {
        let _ = write!(
            out,
            "{},{},{},{},{},{}",
            s.group_label, s.min, s.q1, s.median, s.q3, s.max
        );
        for o in &s.outliers {
            let _ = write!(out, ",{o}");
        }
        out.push('\n');
    }
    out
}

/// `hist.csv`: `bin_start,count`.
pub fn histogram_csv(histogram: &DeltaHistogram) -> String {
    let mut out = String::from("bin_start,count\n");
    for (start, count) in histogram.bin_starts() {
        let _ = writeln!(out, "{start},{count}");
    }
    out
}

/// `correlations.csv`: `pair,r_squared,pearson,spearman`.
pub fn correlations_csv(rows: &[(String, CorrelationTriple)]) -> String {
    let mut out = String::from("pair,r_squared,pearson,spearman\n");
    for (label, t) in rows {
        let _ = writeln!(out, "{},{},{},{}", label, t.r_squared, t.pearson, t.spearman);
    }
    out
}

/// `bias.csv`: `decile,with_profile,without_profile`.
pub fn bias_csv(report: &BiasReport) -> String {
    let mut out = String::from("decile,with_profile,without_profile\n");
    for d in &report.deciles {
        let _ = writeln!(out, "{},{},{}", d.decile, d.with_profile, d.without_profile);
    }
    out
}

/// `cohort.csv`: one row per classified faculty member.
pub fn cohort_csv(report: &CohortReport) -> String {
    let mut out = String::from("cohort,faculty_id,from_university,to_university,direction\n");
    for id in &report.new {
        let _ = writeln!(out, "new,{id},,,");
    }
    for m in &report.movers {
        let direction = match m.direction {
            MoveDirection::Up => "up",
            MoveDirection::Down => "down",
            MoveDirection::Same => "same",
            MoveDirection::Unknown => "unknown",
        };
        let _ = writeln!(
            out,
            "mover,{},{},{},{}",
            m.faculty_b, m.from_university, m.to_university, direction
        );
    }
    for id in &report.departed {
        let _ = writeln!(out, "departed,{id},,,");
    }
    for (_, id_b) in &report.promoted {
        let _ = writeln!(out, "promoted,{id_b},,,");
    }
    out
}


#[cfg(test)]
mod prop_tests {
    use super::*;
    use crate::model::rank_programs;
    use proptest::prelude::*;

    fn paired_vectors() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (3usize..40).prop_flat_map(|n| {
            (
                proptest::collection::vec(-50.0f64..50.0, n),
                proptest::collection::vec(-50.0f64..50.0, n),
            )
        })
    }

    proptest! {
        #[test]
        fn spearman_invariant_under_strictly_increasing_transforms((x, y) in paired_vectors()) {
            // cube preserves order and ties exactly
            let cubed: Vec<f64> = x.iter().map(|v| v * v * v).collect();
            match (spearman(&x, &y), spearman(&cubed, &y)) {
                (Ok(a), Ok(b)) => prop_assert!((a - b).abs() < 1e-12, "{a} vs {b}"),
                (Err(_), Err(_)) => {}
                (a, b) => return Err(TestCaseError::fail(format!("diverged: {a:?} vs {b:?}"))),
            }
        }

        #[test]
        fn pearson_invariant_under_positive_affine_maps(
            (x, y) in paired_vectors(),
            a in 0.1f64..10.0,
            b in -100.0f64..100.0,
        ) {
            let mapped: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            match (pearson(&x, &y), pearson(&mapped, &y)) {
                (Ok(p), Ok(q)) => prop_assert!((p - q).abs() < 1e-12, "{p} vs {q}"),
                (Err(_), Err(_)) => {}
                (p, q) => return Err(TestCaseError::fail(format!("diverged: {p:?} vs {q:?}"))),
            }
        }

        /// R² equals squared Pearson exactly when the prediction is the
        /// least-squares affine fit of the actual values.
        #[test]
        fn r_squared_equals_pearson_squared_for_ls_fit((x, y) in paired_vectors()) {
            let (mx, my) = (mean(&x), mean(&y));
            let var_x: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
            let cov: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
            prop_assume!(var_x > 1e-9);
            let slope = cov / var_x;
            let fit: Vec<f64> = x.iter().map(|v| my + slope * (v - mx)).collect();
            match (r_squared(&fit, &y), pearson(&x, &y)) {
                (Ok(r2), Ok(r)) => prop_assert!((r2 - r * r).abs() < 1e-9, "{r2} vs {}", r * r),
                (Err(_), Err(_)) => {}
                (r2, r) => return Err(TestCaseError::fail(format!("diverged: {r2:?} vs {r:?}"))),
            }
        }

        #[test]
        fn rank_difference_is_symmetric_as_a_multiset(
            scores_a in proptest::collection::btree_map("[A-Z][a-z]{1,5}", 0.0f64..5.0, 4..30),
            deltas in proptest::collection::vec(-1.0f64..1.0, 30),
            group_size in 1usize..10,
        ) {
            let mut table_a = ScoreTable::new(ScoreSource::Scholar, 0);
            table_a.entries = scores_a;
            let mut table_b = table_a.clone();
            for (delta, value) in deltas.iter().zip(table_b.entries.values_mut()) {
                *value += delta;
            }
            let ranks_a = rank_programs(&table_a);
            let ranks_b = rank_programs(&table_b);

            let collect = |report: Vec<BoxplotSummary>, a: &crate::model::RankingTable, b: &crate::model::RankingTable| {
                // recompute raw diffs for the multiset check
                let rb: std::collections::BTreeMap<&str, u32> =
                    b.rows.iter().map(|r| (r.university.as_str(), r.rank)).collect();
                let mut d: Vec<i64> = a
                    .rows
                    .iter()
                    .map(|r| (r.rank as i64 - rb[r.university.as_str()] as i64).abs())
                    .collect();
                d.sort_unstable();
                (report.len(), d)
            };
            let (groups_ab, diffs_ab) = collect(
                rank_difference_report(&ranks_a, &ranks_b, group_size).unwrap(),
                &ranks_a,
                &ranks_b,
            );
            let (groups_ba, diffs_ba) = collect(
                rank_difference_report(&ranks_b, &ranks_a, group_size).unwrap(),
                &ranks_b,
                &ranks_a,
            );
            prop_assert_eq!(groups_ab, groups_ba);
            prop_assert_eq!(diffs_ab, diffs_ba);
        }

        #[test]
        fn histogram_counts_sum_to_table_size(
            scores in proptest::collection::btree_map("[A-Z][a-z]{1,5}", 0.0f64..5.0, 1..40),
            deltas in proptest::collection::vec(-2.0f64..2.0, 40),
            bin_width in 0.05f64..1.0,
        ) {
            let mut table_a = ScoreTable::new(ScoreSource::Scholar, 0);
            table_a.entries = scores;
            let mut table_b = table_a.clone();
            for (delta, value) in deltas.iter().zip(table_b.entries.values_mut()) {
                *value += delta;
            }
            let h = score_delta_histogram(&table_a, &table_b, bin_width).unwrap();
            prop_assert_eq!(h.total(), table_a.entries.len());
        }

        #[test]
        fn cohort_classification_is_a_partition(seed in 0u64..150, departments in 1usize..8) {
            let (a, b) = crate::synth::synth_snapshot_pair(departments, seed);
            let map = crate::roster::match_faculty(&a, &b);
            let report = snapshot_cohort_report(&a, &b, &map, None);
            prop_assert_eq!(
                report.stats.continuing + report.stats.mover_count + report.stats.new_count,
                b.faculty.len()
            );
            prop_assert_eq!(
                report.stats.continuing + report.stats.mover_count + report.stats.departed_count,
                a.faculty.len()
            );
            // no faculty id appears in two cohorts
            let mut b_side: Vec<&FacultyId> = report.new.iter().collect();
            b_side.extend(report.movers.iter().map(|m| &m.faculty_b));
            let before = b_side.len();
            b_side.sort();
            b_side.dedup();
            prop_assert_eq!(b_side.len(), before);
        }
    }
}
