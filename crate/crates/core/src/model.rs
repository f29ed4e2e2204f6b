//! Fixed-intercept regression models over square-root-transformed strength
//! measures, ensemble averaging, and ranking tables.
//!
//! Each pair model predicts a peer-assessment score from one averaged and
//! one cumulative measure:
//!
//! ```text
//! s = 1 + beta1 * sqrt(a) + beta2 * sqrt(c)
//! ```
//!
//! The intercept is pinned at 1 (a program with no cited research is
//! "marginal"), so fitting reduces to a 2x2 normal-equation solve. An
//! ensemble averages its member models' coefficients; by linearity its
//! prediction equals the mean of the member predictions. The published
//! four-term model ships as a frozen constant so scoring needs no fitting
//! data.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::MetricVector;
use crate::roster::{ScoreSource, ScoreTable};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("only {0} universities present in both tables; need at least 3")]
    InsufficientData(usize),
    #[error("singular normal matrix for ({averaged}, c{cumulative_n}); features are collinear")]
    SingularFit {
        averaged: AveragedMeasure,
        cumulative_n: u32,
    },
    #[error("metric vector for {university:?} lacks measure {measure:?}")]
    MissingMeasure { university: String, measure: String },
    #[error("unknown averaged measure {0:?}")]
    UnknownMeasure(String),
    #[error("bad ensemble pair spec {0:?}; expected e.g. m10:40")]
    BadPairSpec(String),
    #[error("model json: {0}")]
    Json(#[from] serde_json::Error),
}

/// The averaged measure of a pair model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AveragedMeasure {
    M10,
    G10,
    P10,
}

impl AveragedMeasure {
    pub fn as_str(self) -> &'static str {
        match self {
            AveragedMeasure::M10 => "m10",
            AveragedMeasure::G10 => "g10",
            AveragedMeasure::P10 => "p10",
        }
    }
}

impl fmt::Display for AveragedMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AveragedMeasure {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, ModelError> {
        match s {
            "m10" => Ok(AveragedMeasure::M10),
            "g10" => Ok(AveragedMeasure::G10),
            "p10" => Ok(AveragedMeasure::P10),
            other => Err(ModelError::UnknownMeasure(other.to_owned())),
        }
    }
}

/// One fitted (averaged, cumulative) regression with the intercept fixed
/// at 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairModel {
    pub averaged: AveragedMeasure,
    pub cumulative_n: u32,
    pub beta1: f64,
    pub beta2: f64,
}

impl PairModel {
    pub fn cumulative_name(&self) -> String {
        format!("c{}", self.cumulative_n)
    }
}

/// Intercept-plus-coefficients scoring formula over sqrt-transformed
/// measures. This is the shape shared by fitted ensembles and the published
/// constant model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub intercept: f64,
    /// measure name (`m10`, `g10`, `p10`, `cN`) → coefficient.
    pub coefficients: BTreeMap<String, f64>,
}

impl LinearModel {
    /// The published four-term scoring formula:
    /// `s = 1 + 0.058*sqrt(m10) + 0.059*sqrt(g10) + 0.121*sqrt(c40) + 0.127*sqrt(c60)`.
    pub fn published() -> Self {
        let mut coefficients = BTreeMap::new();
        coefficients.insert("m10".to_owned(), 0.058);
        coefficients.insert("g10".to_owned(), 0.059);
        coefficients.insert("c40".to_owned(), 0.121);
        coefficients.insert("c60".to_owned(), 0.127);
        LinearModel {
            intercept: 1.0,
            coefficients,
        }
    }

    /// Score one program: intercept + sum of coefficient * sqrt(measure).
    pub fn score(&self, v: &MetricVector) -> Result<f64, ModelError> {
        let mut score = self.intercept;
        for (measure, coefficient) in &self.coefficients {
            let value = v.measure(measure).ok_or_else(|| ModelError::MissingMeasure {
                university: v.university.clone(),
                measure: measure.clone(),
            })?;
            score += coefficient * value.sqrt();
        }
        Ok(score)
    }

    /// Score a whole metric table into a [`ScoreTable`].
    pub fn score_table(&self, metrics: &[MetricVector], year: i32) -> Result<ScoreTable, ModelError> {
        let mut table = ScoreTable::new(ScoreSource::Scholar, year);
        for v in metrics {
            table.entries.insert(v.university.clone(), self.score(v)?);
        }
        Ok(table)
    }
}

/// Member pair models plus their coefficient average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub members: Vec<PairModel>,
    pub model: LinearModel,
}

/// Fit one pair model by the 2x2 normal equations over the universities
/// present in both the metric table and the score table. Features are
/// square roots of the measures; the target is `score - 1`.
pub fn fit_pair_model(
    metrics: &[MetricVector],
    scores: &ScoreTable,
    averaged: AveragedMeasure,
    cumulative_n: u32,
) -> Result<PairModel, ModelError> {
    let cumulative = format!("c{cumulative_n}");
    let mut rows = Vec::new();
    for v in metrics {
        let Some(score) = scores.entries.get(&v.university) else {
            continue;
        };
        let a = v
            .measure(averaged.as_str())
            .ok_or_else(|| ModelError::MissingMeasure {
                university: v.university.clone(),
                measure: averaged.as_str().to_owned(),
            })?;
        let c = v.measure(&cumulative).ok_or_else(|| ModelError::MissingMeasure {
            university: v.university.clone(),
            measure: cumulative.clone(),
        })?;
        rows.push((a.sqrt(), c.sqrt(), score - 1.0));
    }
    if rows.len() < 3 {
        return Err(ModelError::InsufficientData(rows.len()));
    }

    let (mut sxx, mut sxy, mut syy, mut sxt, mut syt) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y, t) in &rows {
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
        sxt += x * t;
        syt += y * t;
    }
    let det = sxx * syy - sxy * sxy;
    let scale = (sxx * syy).max(f64::MIN_POSITIVE);
    if det.abs() / scale <= 1e-12 {
        return Err(ModelError::SingularFit {
            averaged,
            cumulative_n,
        });
    }
    Ok(PairModel {
        averaged,
        cumulative_n,
        beta1: (sxt * syy - syt * sxy) / det,
        beta2: (syt * sxx - sxt * sxy) / det,
    })
}

/// Fit every configured (averaged, cumulative) pair and average the member
/// coefficients: each measure's ensemble coefficient is the sum of that
/// measure's coefficients over all members divided by the member count, so
/// the ensemble prediction equals the mean of the member predictions.
pub fn build_ensemble(
    metrics: &[MetricVector],
    scores: &ScoreTable,
    config: &[(AveragedMeasure, u32)],
) -> Result<EnsembleModel, ModelError> {
    let mut members = Vec::with_capacity(config.len());
    for &(averaged, n) in config {
        members.push(fit_pair_model(metrics, scores, averaged, n)?);
    }
    let mut coefficients: BTreeMap<String, f64> = BTreeMap::new();
    for member in &members {
        *coefficients.entry(member.averaged.as_str().to_owned()).or_insert(0.0) += member.beta1;
        *coefficients.entry(member.cumulative_name()).or_insert(0.0) += member.beta2;
    }
    let count = members.len() as f64;
    for value in coefficients.values_mut() {
        *value /= count;
    }
    Ok(EnsembleModel {
        members,
        model: LinearModel {
            intercept: 1.0,
            coefficients,
        },
    })
}

/// Parse an ensemble configuration such as `m10:40,m10:60,g10:40,g10:60`.
pub fn parse_ensemble_config(spec: &str) -> Result<Vec<(AveragedMeasure, u32)>, ModelError> {
    spec.split(',')
        .map(|pair| {
            let (a, n) = pair
                .trim()
                .split_once(':')
                .ok_or_else(|| ModelError::BadPairSpec(pair.to_owned()))?;
            let averaged = a.trim().parse()?;
            let n: u32 = n
                .trim()
                .parse()
                .map_err(|_| ModelError::BadPairSpec(pair.to_owned()))?;
            if !crate::metrics::CUMULATIVE_LEVELS.contains(&n) {
                return Err(ModelError::BadPairSpec(pair.to_owned()));
            }
            Ok((averaged, n))
        })
        .collect()
}

/// The default ensemble configuration: {m10, g10} x {c40, c60}, the four
/// terms of the published model.
pub fn default_ensemble_config() -> Vec<(AveragedMeasure, u32)> {
    vec![
        (AveragedMeasure::M10, 40),
        (AveragedMeasure::M10, 60),
        (AveragedMeasure::G10, 40),
        (AveragedMeasure::G10, 60),
    ]
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    intercept: f64,
    coefficients: BTreeMap<String, f64>,
    members: Vec<PairModel>,
}

fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

/// Serialize a model to JSON with 9 significant digits per coefficient.
pub fn model_to_json(model: &EnsembleModel) -> String {
    let file = ModelFile {
        intercept: round_sig(model.model.intercept, 9),
        coefficients: model
            .model
            .coefficients
            .iter()
            .map(|(k, &v)| (k.clone(), round_sig(v, 9)))
            .collect(),
        members: model
            .members
            .iter()
            .map(|m| PairModel {
                beta1: round_sig(m.beta1, 9),
                beta2: round_sig(m.beta2, 9),
                ..m.clone()
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("model serializes")
}

/// Deserialize a model written by [`model_to_json`].
pub fn model_from_json(json: &[u8]) -> Result<EnsembleModel, ModelError> {
    let file: ModelFile = serde_json::from_slice(json)?;
    Ok(EnsembleModel {
        members: file.members,
        model: LinearModel {
            intercept: file.intercept,
            coefficients: file.coefficients,
        },
    })
}

/// A scored, ranked list of programs in descending score order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankingTable {
    pub rows: Vec<RankedRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedRow {
    pub university: String,
    pub score: f64,
    pub rank: u32,
}

impl RankingTable {
    pub fn rank_of(&self, university: &str) -> Option<u32> {
        self.rows
            .iter()
            .find(|r| r.university == university)
            .map(|r| r.rank)
    }

    /// Serialize to the `scores.csv` schema `university,score,rank`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("university,score,rank\n");
        for row in &self.rows {
            let university = if row.university.contains([',', '"', '\n', '\r']) {
                format!("\"{}\"", row.university.replace('"', "\"\""))
            } else {
                row.university.clone()
            };
            out.push_str(&format!("{},{},{}\n", university, row.score, row.rank));
        }
        out
    }
}

/// Rank programs by descending score with competition ("1224") ranking:
/// equal scores share the smaller rank and the next rank skips. Tie display
/// order is alphabetical by university.
pub fn rank_programs(scores: &ScoreTable) -> RankingTable {
    let mut entries: Vec<(&String, f64)> = scores.entries.iter().map(|(u, &s)| (u, s)).collect();
    entries.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.0.cmp(b.0))
    });
    let mut rows: Vec<RankedRow> = Vec::with_capacity(entries.len());
    for (i, (university, score)) in entries.into_iter().enumerate() {
        let rank = match rows.last() {
            Some(prev) if prev.score == score => prev.rank,
            _ => (i + 1) as u32,
        };
        rows.push(RankedRow {
            university: university.clone(),
            score,
            rank,
        });
    }
    RankingTable { rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::collections::BTreeMap;

    pub(crate) fn metric_vector(university: &str, m10: f64, g10: f64, p10: f64, c_counts: &[usize; 9]) -> MetricVector {
        let c: BTreeMap<u32, usize> = crate::metrics::CUMULATIVE_LEVELS
            .iter()
            .zip(c_counts.iter())
            .map(|(&n, &v)| (n, v))
            .collect();
        MetricVector {
            university: university.to_owned(),
            m10,
            g10,
            p10,
            c,
            senior_count: 10,
            total_count: 20,
            degenerate: false,
        }
    }

    fn published_inputs(m10: f64, g10: f64, c40: usize, c60: usize) -> MetricVector {
        metric_vector("X", m10, g10, 0.0, &[0, 0, 0, c40, 0, c60, 0, 0, 0])
    }

    #[test]
    fn published_model_intercept_only_at_zero() {
        let v = published_inputs(0.0, 0.0, 0, 0);
        assert_relative_eq!(LinearModel::published().score(&v).unwrap(), 1.0);
    }

    #[test]
    fn published_model_hand_evaluations() {
        let model = LinearModel::published();
        let v = published_inputs(100.0, 100.0, 25, 16);
        assert_relative_eq!(model.score(&v).unwrap(), 3.283, epsilon = 1e-9);
        let v = published_inputs(4.0, 9.0, 4, 1);
        assert_relative_eq!(model.score(&v).unwrap(), 1.662, epsilon = 1e-9);
    }

    #[test]
    fn score_rejects_missing_measure() {
        let mut v = published_inputs(1.0, 1.0, 1, 1);
        v.c.remove(&60);
        assert!(matches!(
            LinearModel::published().score(&v),
            Err(ModelError::MissingMeasure { .. })
        ));
    }

    fn synthetic_table(beta1: f64, beta2: f64) -> (Vec<MetricVector>, ScoreTable) {
        let mut metrics = Vec::new();
        let mut scores = ScoreTable::new(ScoreSource::Usn, 2022);
        for i in 0..12usize {
            let m10 = (i * i) as f64;
            let c40 = i;
            let v = metric_vector(
                &format!("U{i:02}"),
                m10,
                1.0,
                0.0,
                &[0, 0, 0, c40, 0, 0, 0, 0, 0],
            );
            let score = 1.0 + beta1 * m10.sqrt() + beta2 * (c40 as f64).sqrt();
            scores.entries.insert(v.university.clone(), score);
            metrics.push(v);
        }
        (metrics, scores)
    }

    #[test]
    fn fit_recovers_noiseless_coefficients() {
        let (metrics, scores) = synthetic_table(0.5, 0.25);
        let model = fit_pair_model(&metrics, &scores, AveragedMeasure::M10, 40).unwrap();
        assert_relative_eq!(model.beta1, 0.5, epsilon = 1e-9);
        assert_relative_eq!(model.beta2, 0.25, epsilon = 1e-9);
    }

    #[test]
    fn fit_rejects_identical_feature_vectors() {
        let mut metrics = Vec::new();
        let mut scores = ScoreTable::new(ScoreSource::Usn, 2022);
        for i in 0..5 {
            let v = published_inputs(4.0, 1.0, 2, 0);
            let mut v = v;
            v.university = format!("U{i}");
            scores.entries.insert(v.university.clone(), 2.0);
            metrics.push(v);
        }
        assert!(matches!(
            fit_pair_model(&metrics, &scores, AveragedMeasure::M10, 40),
            Err(ModelError::SingularFit { .. })
        ));
    }

    #[test]
    fn fit_requires_three_common_universities() {
        let (metrics, mut scores) = synthetic_table(0.5, 0.25);
        scores.entries = scores.entries.into_iter().take(2).collect();
        assert!(matches!(
            fit_pair_model(&metrics, &scores, AveragedMeasure::M10, 40),
            Err(ModelError::InsufficientData(2))
        ));
    }

    #[test]
    fn ensemble_of_one_is_that_model() {
        let (metrics, scores) = synthetic_table(0.5, 0.25);
        let ensemble =
            build_ensemble(&metrics, &scores, &[(AveragedMeasure::M10, 40)]).unwrap();
        assert_eq!(ensemble.members.len(), 1);
        assert_relative_eq!(ensemble.model.coefficients["m10"], 0.5, epsilon = 1e-9);
        assert_relative_eq!(ensemble.model.coefficients["c40"], 0.25, epsilon = 1e-9);
    }

    #[test]
    fn ensemble_duplicate_members_average_to_one() {
        let (metrics, scores) = synthetic_table(0.5, 0.25);
        let once = build_ensemble(&metrics, &scores, &[(AveragedMeasure::M10, 40)]).unwrap();
        let twice = build_ensemble(
            &metrics,
            &scores,
            &[(AveragedMeasure::M10, 40), (AveragedMeasure::M10, 40)],
        )
        .unwrap();
        for (k, v) in &once.model.coefficients {
            assert_relative_eq!(twice.model.coefficients[k], *v, epsilon = 1e-12);
        }
    }

    /// Data where every default-config feature pair is non-collinear,
    /// scored by the published model.
    fn four_term_table() -> (Vec<MetricVector>, ScoreTable) {
        let mut metrics = Vec::new();
        let mut scores = ScoreTable::new(ScoreSource::Usn, 2022);
        let published = LinearModel::published();
        for i in 0..10usize {
            let v = metric_vector(
                &format!("U{i}"),
                (i * i) as f64,
                (2 * i + 1) as f64,
                i as f64,
                &[9 - i.min(9), 0, 0, i, 0, i / 2, 0, 0, 0],
            );
            scores
                .entries
                .insert(v.university.clone(), published.score(&v).unwrap());
            metrics.push(v);
        }
        (metrics, scores)
    }

    #[test]
    fn default_ensemble_has_four_terms() {
        let (metrics, scores) = four_term_table();
        let ensemble = build_ensemble(&metrics, &scores, &default_ensemble_config()).unwrap();
        assert_eq!(ensemble.members.len(), 4);
        let keys: Vec<&str> = ensemble.model.coefficients.keys().map(String::as_str).collect();
        assert_eq!(keys, vec!["c40", "c60", "g10", "m10"]);
    }

    #[test]
    fn ensemble_prediction_is_mean_of_members() {
        let (metrics, scores) = synthetic_table(0.5, 0.25);
        let config = [
            (AveragedMeasure::M10, 40),
            (AveragedMeasure::G10, 40),
        ];
        let ensemble = build_ensemble(&metrics, &scores, &config).unwrap();
        for v in &metrics {
            let mean_of_members: f64 = ensemble
                .members
                .iter()
                .map(|m| {
                    1.0 + m.beta1 * v.measure(m.averaged.as_str()).unwrap().sqrt()
                        + m.beta2 * v.measure(&m.cumulative_name()).unwrap().sqrt()
                })
                .sum::<f64>()
                / ensemble.members.len() as f64;
            let averaged = ensemble.model.score(v).unwrap();
            assert_relative_eq!(mean_of_members, averaged, epsilon = 1e-12);
        }
    }

    #[test]
    fn model_json_roundtrip() {
        let (metrics, scores) = four_term_table();
        let ensemble = build_ensemble(&metrics, &scores, &default_ensemble_config()).unwrap();
        let json = model_to_json(&ensemble);
        let back = model_from_json(json.as_bytes()).unwrap();
        assert_eq!(back.members.len(), 4);
        for (k, v) in &ensemble.model.coefficients {
            assert_relative_eq!(back.model.coefficients[k], *v, max_relative = 1e-8);
        }
    }

    #[test]
    fn parse_ensemble_config_specs() {
        let pairs = parse_ensemble_config("m10:40, g10:60").unwrap();
        assert_eq!(
            pairs,
            vec![(AveragedMeasure::M10, 40), (AveragedMeasure::G10, 60)]
        );
        assert!(parse_ensemble_config("m10:45").is_err());
        assert!(parse_ensemble_config("x10:40").is_err());
        assert!(parse_ensemble_config("m10").is_err());
    }

    #[test]
    fn ranking_uses_competition_ties() {
        let mut scores = ScoreTable::new(ScoreSource::Scholar, 2022);
        scores.entries.insert("A".into(), 3.2);
        scores.entries.insert("B".into(), 3.2);
        scores.entries.insert("C".into(), 2.0);
        let table = rank_programs(&scores);
        let ranks: Vec<(&str, u32)> = table
            .rows
            .iter()
            .map(|r| (r.university.as_str(), r.rank))
            .collect();
        assert_eq!(ranks, vec![("A", 1), ("B", 1), ("C", 3)]);
    }

    #[test]
    fn ranking_single_and_all_equal() {
        let mut one = ScoreTable::new(ScoreSource::Scholar, 2022);
        one.entries.insert("A".into(), 1.0);
        assert_eq!(rank_programs(&one).rows[0].rank, 1);

        let mut equal = ScoreTable::new(ScoreSource::Scholar, 2022);
        for u in ["A", "B", "C", "D"] {
            equal.entries.insert(u.into(), 2.5);
        }
        let table = rank_programs(&equal);
        assert!(table.rows.iter().all(|r| r.rank == 1));
    }
}
