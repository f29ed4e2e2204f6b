//! Batch command-line frontend tying ingestion, harvesting (fixture mode),
//! metrics, fitting, scoring, ranking, and comparison into reproducible
//! runs with file outputs.
//!
//! Every subcommand reads declared inputs, writes declared outputs under
//! `--out`, and prints a one-line summary. Identical inputs and flags
//! produce byte-identical outputs. Exit codes: 0 on success, 1 on
//! validation or data errors, 2 on usage errors.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use chrono::NaiveDate;
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::analytics::{
    bias_csv, boxplot_csv, cohort_csv, correlation_triple, correlations_csv, csrankings_comparison,
    dept_size_stats, histogram_csv, profile_bias_report, rank_difference_report,
    score_delta_histogram, snapshot_cohort_report, AnalyticsError,
};
use crate::harvest::{
    harvest_faculty, FetchPolicy, FixtureStore, HarvestError, HarvestOutcome,
};
use crate::metrics::{
    compute_metric_table, read_metrics_csv, write_metrics_csv, MetricsError, NationalDistribution,
};
use crate::model::{
    build_ensemble, model_from_json, model_to_json, parse_ensemble_config, rank_programs,
    LinearModel, ModelError,
};
use crate::roster::{
    match_faculty, parse_roster_labeled, parse_score_table, RosterError, ScoreSource, ScoreTable,
    Snapshot,
};
use crate::synth;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Roster(#[from] RosterError),
    #[error(transparent)]
    Harvest(#[from] HarvestError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Parser)]
#[command(
    name = "citerank",
    version,
    about = "Citation-based ranking of CS doctoral programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a roster CSV and persist it as a snapshot directory.
    Ingest {
        /// Roster CSV (see README for the schema).
        #[arg(long)]
        roster: PathBuf,
        /// Snapshot label, e.g. 2022.
        #[arg(long)]
        label: String,
        /// Collection date (YYYY-MM-DD).
        #[arg(long, default_value = "2021-12-01")]
        collected_at: NaiveDate,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fill missing citation measures from the fixture store.
    Harvest {
        /// Snapshot directory produced by `ingest`.
        #[arg(long)]
        snapshot: PathBuf,
        /// Fixture store root (`<root>/<profile_id>/page-<n>.html`).
        #[arg(long)]
        fixtures: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Seconds between simulated requests.
        #[arg(long, default_value_t = 3.0)]
        min_interval_secs: f64,
        /// Per-faculty time budget in seconds; overruns abort that faculty.
        #[arg(long, default_value_t = 300.0)]
        budget_secs: f64,
        /// Fetch from the live site instead of fixtures (requires --policy).
        #[arg(long)]
        live: bool,
        /// Fetch-policy file for live mode.
        #[arg(long)]
        policy: Option<PathBuf>,
        /// Harvest date stamped on collected records (YYYY-MM-DD).
        #[arg(long, default_value = "2021-12-01")]
        collected_at: NaiveDate,
    },
    /// Compute per-program strength measures into metrics.csv.
    Metrics {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit an ensemble of fixed-intercept pair models.
    Fit {
        /// metrics.csv from `metrics`.
        #[arg(long)]
        metrics: PathBuf,
        /// Peer-assessment scores (university,score).
        #[arg(long)]
        usn: PathBuf,
        /// Pairs like m10:40,m10:60,g10:40,g10:60.
        #[arg(long, default_value = "m10:40,m10:60,g10:40,g10:60")]
        ensemble: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score programs with the published or a fitted model.
    Score {
        /// `published` or a model JSON path from `fit`.
        #[arg(long)]
        model: String,
        #[arg(long)]
        metrics: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank a score table with competition ranking.
    Rank {
        /// Score CSV (university,score[,rank]).
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare two rankings: rank differences, score deltas, correlations.
    Compare {
        /// Prediction-side score CSV.
        #[arg(long)]
        a: PathBuf,
        /// Reference-side score CSV.
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value_t = 30)]
        group_size: usize,
        #[arg(long, default_value_t = 0.1)]
        bin_width: f64,
        /// Publication-count scores; adds the comparison matrix and the
        /// average model (treats `a` as the scholar scores and `b` as the
        /// peer-assessment scores).
        #[arg(long)]
        csrankings: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify faculty cohorts across two snapshots.
    Cohort {
        /// Earlier snapshot directory.
        #[arg(long)]
        a: PathBuf,
        /// Later snapshot directory.
        #[arg(long)]
        b: PathBuf,
        /// Score CSV ranking the earlier snapshot (for mover direction).
        #[arg(long)]
        ranks_a: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Profile-presence bias over the national t10 distribution.
    Bias {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Emit the full report bundle, or a seeded synthetic dataset.
    Export {
        #[arg(long)]
        snapshot: Option<PathBuf>,
        #[arg(long)]
        usn: Option<PathBuf>,
        #[arg(long)]
        csrankings: Option<PathBuf>,
        /// Generate a synthetic dataset with this many programs instead of
        /// reading a snapshot.
        #[arg(long)]
        synthetic: Option<usize>,
        /// Seed for synthetic data generation.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parse `args` and execute one subcommand. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = err.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(err) => {
            eprintln!("error: {err}");
            1
        }
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| CliError::Io {
            path: parent.to_owned(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn load_scores(path: &Path, source: ScoreSource) -> Result<ScoreTable, CliError> {
    Ok(parse_score_table(&read_file(path)?, source, 0)?)
}

fn write_score_csv(table: &ScoreTable) -> String {
    let mut out = String::from("university,score\n");
    for (university, score) in &table.entries {
        let field = if university.contains([',', '"', '\n', '\r']) {
            format!("\"{}\"", university.replace('"', "\"\""))
        } else {
            university.clone()
        };
        out.push_str(&format!("{field},{score}\n"));
    }
    out
}

fn execute(command: Command) -> Result<String, CliError> {
    match command {
        Command::Ingest {
            roster,
            label,
            collected_at,
            out,
        } => {
            let snapshot = parse_roster_labeled(&read_file(&roster)?, &label, collected_at)?;
            let dir = snapshot.save(&out)?;
            Ok(format!(
                "ingested {} faculty across {} departments -> {}",
                snapshot.faculty.len(),
                snapshot.departments.len(),
                dir.display()
            ))
        }

        Command::Harvest {
            snapshot,
            fixtures,
            out,
            min_interval_secs,
            budget_secs,
            live,
            policy: _,
            collected_at,
        } => {
            if live {
                return Err(CliError::Invalid(
                    "live harvesting is not bundled; run against the fixture store".to_owned(),
                ));
            }
            let policy = FetchPolicy::new(
                Duration::from_secs_f64(min_interval_secs.max(0.0)),
                Duration::from_secs_f64(budget_secs.max(0.0)),
                "citerank/0.1 (offline fixture harvester)",
            )?;
            let loaded = Snapshot::load(&snapshot)?;
            let store = FixtureStore::new(&fixtures);
            let mut collected = 0usize;
            let mut aborted = 0usize;
            let mut ambiguous = 0usize;
            let mut not_found = 0usize;
            let mut faculty = loaded.faculty.clone();
            let missing: Vec<usize> = faculty
                .iter()
                .enumerate()
                .filter(|(_, f)| f.t10.is_none())
                .map(|(i, _)| i)
                .collect();
            for i in missing.iter().copied() {
                match harvest_faculty(&store, &faculty[i], &policy, collected_at) {
                    Ok(HarvestOutcome::Collected(record)) => {
                        faculty[i].t10 = Some(record.t10);
                        faculty[i].h_index = record.h_index.or(faculty[i].h_index);
                        faculty[i].i10 = record.i10.or(faculty[i].i10);
                        faculty[i].collection_method = record.method;
                        collected += 1;
                    }
                    Ok(HarvestOutcome::Aborted { .. }) => aborted += 1,
                    Err(HarvestError::AmbiguousProfile { .. }) => ambiguous += 1,
                    Err(HarvestError::ProfileNotFound { .. }) => not_found += 1,
                    Err(other) => return Err(other.into()),
                }
            }
            let updated = Snapshot {
                faculty,
                ..loaded
            };
            let dir = updated.save(&out)?;
            Ok(format!(
                "harvested {collected} of {} missing t10 (aborted {aborted}, ambiguous {ambiguous}, no profile {not_found}) -> {}",
                missing.len(),
                dir.display()
            ))
        }

        Command::Metrics { snapshot, out } => {
            let loaded = Snapshot::load(&snapshot)?;
            let table = compute_metric_table(&loaded)?;
            let path = out.join("metrics.csv");
            write_file(&path, &write_metrics_csv(&table))?;
            let degenerate = table.iter().filter(|v| v.degenerate).count();
            Ok(format!(
                "computed measures for {} programs ({} without usable senior t10) -> {}",
                table.len(),
                degenerate,
                path.display()
            ))
        }

        Command::Fit {
            metrics,
            usn,
            ensemble,
            out,
        } => {
            let table = read_metrics_csv(&read_file(&metrics)?)?;
            let scores = load_scores(&usn, ScoreSource::Usn)?;
            let config = parse_ensemble_config(&ensemble)?;
            let model = build_ensemble(&table, &scores, &config)?;
            let path = out.join("model.json");
            write_file(&path, &model_to_json(&model))?;
            let coefficients: Vec<String> = model
                .model
                .coefficients
                .iter()
                .map(|(k, v)| format!("{k}={v:.4}"))
                .collect();
            Ok(format!(
                "fitted {} pair models; ensemble {} -> {}",
                model.members.len(),
                coefficients.join(" "),
                path.display()
            ))
        }

        Command::Score {
            model,
            metrics,
            out,
        } => {
            let table = read_metrics_csv(&read_file(&metrics)?)?;
            let linear = if model == "published" {
                LinearModel::published()
            } else {
                model_from_json(&read_file(Path::new(&model))?)?.model
            };
            let scores = linear.score_table(&table, 0)?;
            let ranking = rank_programs(&scores);
            let path = out.join("scores.csv");
            write_file(&path, &ranking.to_csv())?;
            Ok(format!(
                "scored {} programs with the {} model -> {}",
                ranking.rows.len(),
                if model == "published" { "published" } else { "fitted" },
                path.display()
            ))
        }

        Command::Rank { scores, out } => {
            let table = load_scores(&scores, ScoreSource::Scholar)?;
            let ranking = rank_programs(&table);
            let path = out.join("ranking.csv");
            write_file(&path, &ranking.to_csv())?;
            Ok(format!(
                "ranked {} programs -> {}",
                ranking.rows.len(),
                path.display()
            ))
        }

        Command::Compare {
            a,
            b,
            group_size,
            bin_width,
            csrankings,
            out,
        } => {
            let table_a = load_scores(&a, ScoreSource::Scholar)?;
            let table_b = load_scores(&b, ScoreSource::Scholar)?;
            let ranks_a = rank_programs(&table_a);
            let ranks_b = rank_programs(&table_b);

            let boxplots = rank_difference_report(&ranks_a, &ranks_b, group_size)?;
            write_file(&out.join("boxplot.csv"), &boxplot_csv(&boxplots))?;

            let histogram = score_delta_histogram(&table_a, &table_b, bin_width)?;
            write_file(&out.join("hist.csv"), &histogram_csv(&histogram))?;

            let mut extra = String::new();
            if let Some(csr_path) = csrankings {
                let csr = load_scores(&csr_path, ScoreSource::CsRankings)?;
                let comparison = csrankings_comparison(&table_a, &csr, &table_b)?;
                write_file(
                    &out.join("correlations.csv"),
                    &correlations_csv(&comparison.rows),
                )?;
                write_file(
                    &out.join("average_scores.csv"),
                    &write_score_csv(&comparison.average_model),
                )?;
                extra = format!(
                    ", comparison matrix over {} programs",
                    comparison.average_model.entries.len()
                );
            } else {
                let xs: Vec<f64> = table_a.entries.values().copied().collect();
                let ys: Vec<f64> = table_a
                    .entries
                    .keys()
                    .map(|u| table_b.entries[u])
                    .collect();
                let triple = correlation_triple(&xs, &ys)?;
                write_file(
                    &out.join("correlations.csv"),
                    &correlations_csv(&[("a_vs_b".to_owned(), triple)]),
                )?;
            }
            Ok(format!(
                "compared {} programs in {} groups{} -> {}",
                table_a.entries.len(),
                boxplots.len(),
                extra,
                out.display()
            ))
        }

        Command::Cohort { a, b, ranks_a, out } => {
            let snap_a = Snapshot::load(&a)?;
            let snap_b = Snapshot::load(&b)?;
            let ranking = match ranks_a {
                Some(path) => Some(rank_programs(&load_scores(&path, ScoreSource::Scholar)?)),
                None => None,
            };
            let map = match_faculty(&snap_a, &snap_b);
            let report = snapshot_cohort_report(&snap_a, &snap_b, &map, ranking.as_ref());
            write_file(&out.join("cohort.csv"), &cohort_csv(&report))?;
            write_file(
                &out.join("cohort.json"),
                &serde_json::to_string_pretty(&report).expect("report serializes"),
            )?;
            Ok(format!(
                "classified {} continuing, {} movers, {} new, {} departed ({} ambiguous names) -> {}",
                report.stats.continuing,
                report.stats.mover_count,
                report.stats.new_count,
                report.stats.departed_count,
                map.ambiguous.len(),
                out.display()
            ))
        }

        Command::Bias { snapshot, out } => {
            let loaded = Snapshot::load(&snapshot)?;
            let national = NationalDistribution::from_snapshot(&loaded)?;
            let report = profile_bias_report(&loaded, &national)?;
            write_file(&out.join("bias.csv"), &bias_csv(&report))?;
            write_file(
                &out.join("bias.json"),
                &serde_json::to_string_pretty(&report).expect("report serializes"),
            )?;
            Ok(format!(
                "bucketed {} senior faculty by national t10 decile -> {}",
                report
                    .deciles
                    .iter()
                    .map(|d| d.with_profile + d.without_profile)
                    .sum::<usize>(),
                out.display()
            ))
        }

        Command::Export {
            snapshot,
            usn,
            csrankings,
            synthetic,
            seed,
            out,
        } => {
            if let Some(programs) = synthetic {
                return export_synthetic(programs, seed, &out);
            }
            let Some(snapshot) = snapshot else {
                return Err(CliError::Invalid(
                    "export needs either --snapshot or --synthetic".to_owned(),
                ));
            };
            export_reports(&snapshot, usn.as_deref(), csrankings.as_deref(), &out)
        }
    }
}

/// Generate a seeded synthetic dataset: raw roster, persisted snapshot,
/// matching peer-assessment / publication-count score tables, and a
/// noiseless fit-recovery pair (`fit` on it returns beta1 = 0.5,
/// beta2 = 0.25 for the m10:40 pair).
fn export_synthetic(programs: usize, seed: u64, out: &Path) -> Result<String, CliError> {
    let snapshot = synth::synth_snapshot(programs, seed, "synthetic");
    write_file(
        &out.join("roster.csv"),
        &crate::roster::serialize_roster(&snapshot),
    )?;
    snapshot.save(out)?;
    let metrics = compute_metric_table(&snapshot)?;
    let usn = synth::synth_usn_scores(&metrics, 0.1, seed);
    write_file(&out.join("usn.csv"), &write_score_csv(&usn))?;
    let csr = synth::synth_csrankings_scores(&metrics, seed);
    write_file(&out.join("csrankings.csv"), &write_score_csv(&csr))?;

    let (fit_metrics, fit_usn) = synth::synth_fit_dataset(
        programs,
        crate::model::AveragedMeasure::M10,
        40,
        0.5,
        0.25,
        0.0,
        seed,
    );
    write_file(&out.join("fit_metrics.csv"), &write_metrics_csv(&fit_metrics))?;
    write_file(&out.join("fit_usn.csv"), &write_score_csv(&fit_usn))?;

    Ok(format!(
        "generated synthetic dataset: {} programs, {} faculty (seed {seed}) -> {}",
        programs,
        snapshot.faculty.len(),
        out.display()
    ))
}

/// The full report bundle for one snapshot: metrics, published-model
/// scores and ranking, bias and size reports, national percentiles, and —
/// when reference scores are supplied — the comparison matrix.
fn export_reports(
    snapshot_dir: &Path,
    usn: Option<&Path>,
    csrankings: Option<&Path>,
    out: &Path,
) -> Result<String, CliError> {
    let snapshot = Snapshot::load(snapshot_dir)?;
    let metrics = compute_metric_table(&snapshot)?;
    write_file(&out.join("metrics.csv"), &write_metrics_csv(&metrics))?;

    let scores = LinearModel::published().score_table(&metrics, 0)?;
    let ranking = rank_programs(&scores);
    write_file(&out.join("scores.csv"), &ranking.to_csv())?;

    let national = NationalDistribution::from_snapshot(&snapshot)?;
    let mut percentiles = String::from("percentile,t10\n");
    for q in [10, 20, 30, 40, 50, 60, 70, 80, 90, 95, 98, 99] {
        percentiles.push_str(&format!(
            "{q},{}\n",
            national.percentile_threshold(q as f64)?
        ));
    }
    write_file(&out.join("percentiles.csv"), &percentiles)?;

    let bias = profile_bias_report(&snapshot, &national)?;
    write_file(&out.join("bias.csv"), &bias_csv(&bias))?;

    let usn_table = match usn {
        Some(path) => Some(load_scores(path, ScoreSource::Usn)?),
        None => None,
    };
    let sizes = dept_size_stats(&snapshot, usn_table.as_ref());
    write_file(
        &out.join("sizes.json"),
        &serde_json::to_string_pretty(&sizes).expect("stats serialize"),
    )?;

    let mut extra = String::new();
    if let (Some(usn_table), Some(csr_path)) = (&usn_table, csrankings) {
        let csr = load_scores(csr_path, ScoreSource::CsRankings)?;
        let comparison = csrankings_comparison(&scores, &csr, usn_table)?;
        write_file(
            &out.join("correlations.csv"),
            &correlations_csv(&comparison.rows),
        )?;
        write_file(
            &out.join("average_scores.csv"),
            &write_score_csv(&comparison.average_model),
        )?;
        extra = ", with comparison matrix".to_owned();
    }

    Ok(format!(
        "exported reports for {} programs{} -> {}",
        metrics.len(),
        extra,
        out.display()
    ))
}
