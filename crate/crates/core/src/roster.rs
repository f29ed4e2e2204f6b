//! Domain types, name normalization, and ingestion of rosters, citation
//! records, and score tables into immutable snapshots.
//!
//! A [`Snapshot`] is one dated, validated dataset of departments, faculty,
//! and citation measures. Snapshots are immutable after validation and may
//! be shared freely across threads; ingestion itself is single-threaded per
//! file.
//!
//! ## Roster CSV schema
//!
//! UTF-8, header required:
//!
//! ```text
//! faculty_id,name,university,department,rank,scholar_id,t10,h_index,i10,collection_method
//! ```
//!
//! An empty cell means the value is absent. `rank` must be one of
//! `assistant`, `associate`, `full`; rows for clinical/adjunct/emeritus
//! titles are the data curator's job to exclude and are rejected here only
//! through the rank enum. A missing t10 is represented as absent, never as
//! zero: zero is a meaningful value (fewer than ten cited papers).
//!
//! ## Score CSV schema
//!
//! ```text
//! university,score
//! ```
//!
//! Peer-assessment scores must lie in [1.0, 5.0]; publication-count scores
//! must be strictly positive (a later log transform requires it).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// Errors raised while ingesting or validating roster data.
#[derive(Debug, Error)]
pub enum RosterError {
    #[error("invalid name: {0:?} has no usable characters")]
    InvalidName(String),
    #[error("missing required column {column:?}")]
    Schema { column: String },
    #[error("row {row}: {detail}")]
    Value { row: usize, detail: String },
    #[error("duplicate key {key:?}")]
    Duplicate { key: String },
    #[error("{source_name} score {score} for {university:?} outside {expected}")]
    Range {
        source_name: &'static str,
        university: String,
        score: f64,
        expected: &'static str,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("snapshot metadata: {0}")]
    Meta(#[from] serde_json::Error),
    #[error("snapshot failed validation: {0}")]
    Invalid(String),
}

/// Tenure-track rank. The parser rejects anything outside this enum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rank {
    Assistant,
    Associate,
    Full,
}

impl Rank {
    /// Senior faculty are associate and full professors.
    pub fn is_senior(self) -> bool {
        !matches!(self, Rank::Assistant)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Rank::Assistant => "assistant",
            Rank::Associate => "associate",
            Rank::Full => "full",
        }
    }

    pub fn parse(token: &str) -> Option<Rank> {
        match token {
            "assistant" => Some(Rank::Assistant),
            "associate" => Some(Rank::Associate),
            "full" => Some(Rank::Full),
            _ => None,
        }
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How a citation measure was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollectionMethod {
    Auto,
    Manual,
    CarriedForward,
}

impl CollectionMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            CollectionMethod::Auto => "auto",
            CollectionMethod::Manual => "manual",
            CollectionMethod::CarriedForward => "carried_forward",
        }
    }

    pub fn parse(token: &str) -> Option<CollectionMethod> {
        match token {
            "auto" => Some(CollectionMethod::Auto),
            "manual" => Some(CollectionMethod::Manual),
            "carried_forward" => Some(CollectionMethod::CarriedForward),
            _ => None,
        }
    }
}

/// Opaque stable identifier of a faculty member within one snapshot.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FacultyId(pub String);

impl fmt::Display for FacultyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for FacultyId {
    fn from(s: &str) -> Self {
        FacultyId(s.to_owned())
    }
}

/// One tenure-track professor with identity, appointment, and citation data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacultyRecord {
    pub faculty_id: FacultyId,
    pub name_raw: String,
    pub name_canonical: String,
    pub university: String,
    pub department: String,
    pub rank: Rank,
    pub has_scholar_profile: bool,
    pub scholar_profile_id: Option<String>,
    /// Citations of the 10th most-cited paper; absent when never collected.
    pub t10: Option<u32>,
    pub h_index: Option<u32>,
    pub i10: Option<u32>,
    pub collection_method: CollectionMethod,
}

impl FacultyRecord {
    pub fn is_senior(&self) -> bool {
        self.rank.is_senior()
    }
}

/// A department and its tenure-track head count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepartmentRecord {
    pub university: String,
    pub department_name: String,
    pub size: usize,
}

/// A dated, validated collection of departments, faculty, and citation data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub label: String,
    pub departments: Vec<DepartmentRecord>,
    pub faculty: Vec<FacultyRecord>,
    pub collected_at: NaiveDate,
}

/// Where a score table came from. Determines the range checks applied at
/// ingest: peer-assessment scores live in [1, 5], publication-count scores
/// must be positive, and model scores are unconstrained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreSource {
    Usn,
    CsRankings,
    Scholar,
}

/// A validated university → score map from one source and year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub source: ScoreSource,
    pub year: i32,
    pub entries: BTreeMap<String, f64>,
}

impl ScoreTable {
    pub fn new(source: ScoreSource, year: i32) -> Self {
        ScoreTable {
            source,
            year,
            entries: BTreeMap::new(),
        }
    }

    pub fn universities(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

/// Result of cross-snapshot faculty matching: matched id pairs plus the
/// name collisions that were reported instead of guessed.
#[derive(Debug, Clone, Default, Serialize)]
pub struct IdentityMap {
    /// faculty_id in snapshot `a` → faculty_id in snapshot `b`.
    pub matches: BTreeMap<FacultyId, FacultyId>,
    pub ambiguous: Vec<AmbiguousMatch>,
}

/// A canonical-name collision that could not be resolved by the stated rules.
#[derive(Debug, Clone, Serialize)]
pub struct AmbiguousMatch {
    pub canonical_name: String,
    pub in_a: Vec<FacultyId>,
    pub in_b: Vec<FacultyId>,
}

const ROSTER_COLUMNS: [&str; 10] = [
    "faculty_id",
    "name",
    "university",
    "department",
    "rank",
    "scholar_id",
    "t10",
    "h_index",
    "i10",
    "collection_method",
];

/// Fold a raw name to its canonical form: lowercase, diacritics folded to
/// ASCII, `"Last, First"` reordered to `"first last"`, whitespace collapsed,
/// punctuation stripped except hyphens.
///
/// Characters that survive are ASCII letters, digits, hyphens, and single
/// spaces; anything else (including non-Latin scripts that do not decompose
/// to ASCII) is dropped. Input that leaves nothing usable is rejected, which
/// keeps the function idempotent on its own output.
pub fn normalize_name(raw: &str) -> Result<String, RosterError> {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return Err(RosterError::InvalidName(raw.to_owned()));
    }

    // "Last, First" → "First Last"; the first comma is the pivot.
    let reordered = match trimmed.split_once(',') {
        Some((last, first)) => format!("{} {}", first.trim(), last.trim()),
        None => trimmed.to_owned(),
    };

    let mut folded = String::with_capacity(reordered.len());
    for c in reordered.chars().flat_map(char::to_lowercase) {
        fold_to_ascii(c, &mut folded);
    }

    let mut out = String::with_capacity(folded.len());
    let mut pending_space = false;
    for c in folded.chars() {
        if c.is_whitespace() {
            pending_space = true;
        } else if c.is_ascii_alphanumeric() || c == '-' {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(c.to_ascii_lowercase());
        }
        // other punctuation and unfoldable characters are dropped
    }

    if out.is_empty() {
        return Err(RosterError::InvalidName(raw.to_owned()));
    }
    Ok(out)
}

/// Letters whose NFKD form has no ASCII skeleton get a small manual map.
fn ascii_skeleton(c: char) -> Option<&'static str> {
    Some(match c {
        'æ' => "ae",
        'œ' => "oe",
        'ø' => "o",
        'ß' => "ss",
        'đ' | 'ð' => "d",
        'ħ' => "h",
        'ł' => "l",
        'ŋ' => "n",
        'þ' => "th",
        'ı' => "i",
        _ => return None,
    })
}

/// Append the ASCII decomposition of one char. Combining marks are dropped
/// after NFKD; NFKD output is folded through the manual map as well (for
/// forms like `ǽ` that decompose to `æ` plus a mark).
fn fold_to_ascii(c: char, out: &mut String) {
    if c.is_ascii() {
        out.push(c);
        return;
    }
    if let Some(mapped) = ascii_skeleton(c) {
        out.push_str(mapped);
        return;
    }
    for d in c.to_string().nfkd() {
        if is_combining_mark(d) {
            continue;
        }
        if let Some(mapped) = ascii_skeleton(d) {
            out.push_str(mapped);
        } else {
            out.push(d);
        }
    }
}

fn parse_optional_u32(field: &str, row: usize, column: &str) -> Result<Option<u32>, RosterError> {
    let field = field.trim();
    if field.is_empty() {
        return Ok(None);
    }
    field.parse::<u32>().map(Some).map_err(|_| RosterError::Value {
        row,
        detail: format!("column {column:?}: {field:?} is not a non-negative integer"),
    })
}

/// Parse a roster CSV into an unlabeled snapshot. Label and collection date
/// default to empty / 1970-01-01; [`Snapshot::load`] fills them from
/// `meta.json` when reading a persisted snapshot directory.
pub fn parse_roster(bytes: &[u8]) -> Result<Snapshot, RosterError> {
    parse_roster_labeled(bytes, "", NaiveDate::default())
}

/// Parse a roster CSV with explicit snapshot metadata.
pub fn parse_roster_labeled(
    bytes: &[u8],
    label: &str,
    collected_at: NaiveDate,
) -> Result<Snapshot, RosterError> {
    let mut reader = csv::ReaderBuilder::new().from_reader(bytes);
    let headers = reader.headers()?.clone();
    let mut column_index = HashMap::new();
    for (i, h) in headers.iter().enumerate() {
        column_index.insert(h.trim().to_owned(), i);
    }
    for required in ROSTER_COLUMNS {
        if !column_index.contains_key(required) {
            return Err(RosterError::Schema {
                column: required.to_owned(),
            });
        }
    }
    let col = |name: &str| column_index[name];

    let mut faculty = Vec::new();
    let mut seen_ids = BTreeSet::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 2; // 1-based, after the header
        let field = |name: &str| record.get(col(name)).unwrap_or("").trim();

        let faculty_id = field("faculty_id");
        if faculty_id.is_empty() {
            return Err(RosterError::Value {
                row,
                detail: "empty faculty_id".to_owned(),
            });
        }
        if !seen_ids.insert(faculty_id.to_owned()) {
            return Err(RosterError::Duplicate {
                key: faculty_id.to_owned(),
            });
        }

        let rank_token = field("rank");
        let rank = Rank::parse(rank_token).ok_or_else(|| RosterError::Value {
            row,
            detail: format!("rank {rank_token:?} is not one of assistant/associate/full"),
        })?;

        let name_raw = field("name");
        let name_canonical = normalize_name(name_raw).map_err(|_| RosterError::Value {
            row,
            detail: format!("name {name_raw:?} has no usable characters"),
        })?;

        let scholar = field("scholar_id");
        let scholar_profile_id = (!scholar.is_empty()).then(|| scholar.to_owned());

        let method_token = field("collection_method");
        let collection_method = if method_token.is_empty() {
            CollectionMethod::Manual
        } else {
            CollectionMethod::parse(method_token).ok_or_else(|| RosterError::Value {
                row,
                detail: format!("collection_method {method_token:?} unknown"),
            })?
        };

        let university = field("university").to_owned();
        let department = field("department").to_owned();
        if university.is_empty() || department.is_empty() {
            return Err(RosterError::Value {
                row,
                detail: "university and department must be non-empty".to_owned(),
            });
        }

        faculty.push(FacultyRecord {
            faculty_id: FacultyId(faculty_id.to_owned()),
            name_raw: name_raw.to_owned(),
            name_canonical,
            university,
            department,
            rank,
            has_scholar_profile: scholar_profile_id.is_some(),
            scholar_profile_id,
            t10: parse_optional_u32(field("t10"), row, "t10")?,
            h_index: parse_optional_u32(field("h_index"), row, "h_index")?,
            i10: parse_optional_u32(field("i10"), row, "i10")?,
            collection_method,
        });
    }

    let snapshot = Snapshot {
        label: label.to_owned(),
        departments: derive_departments(&faculty),
        faculty,
        collected_at,
    };
    let violations = snapshot.violations();
    if !violations.is_empty() {
        return Err(RosterError::Invalid(violations.join("; ")));
    }
    Ok(snapshot)
}

fn derive_departments(faculty: &[FacultyRecord]) -> Vec<DepartmentRecord> {
    let mut sizes: BTreeMap<(String, String), usize> = BTreeMap::new();
    for f in faculty {
        *sizes
            .entry((f.university.clone(), f.department.clone()))
            .or_insert(0) += 1;
    }
    sizes
        .into_iter()
        .map(|((university, department_name), size)| DepartmentRecord {
            university,
            department_name,
            size,
        })
        .collect()
}

/// Serialize a snapshot's roster back to the CSV interchange schema.
/// `parse_roster(serialize_roster(s))` reproduces `s` up to label/date.
pub fn serialize_roster(snapshot: &Snapshot) -> String {
    let mut out = String::new();
    out.push_str(&ROSTER_COLUMNS.join(","));
    out.push('\n');
    for f in &snapshot.faculty {
        let opt = |v: Option<u32>| v.map(|x| x.to_string()).unwrap_or_default();
        let fields = [
            f.faculty_id.0.clone(),
            f.name_raw.clone(),
            f.university.clone(),
            f.department.clone(),
            f.rank.as_str().to_owned(),
            f.scholar_profile_id.clone().unwrap_or_default(),
            opt(f.t10),
            opt(f.h_index),
            opt(f.i10),
            f.collection_method.as_str().to_owned(),
        ];
        let quoted: Vec<String> = fields.iter().map(|s| csv_escape(s)).collect();
        out.push_str(&quoted.join(","));
        out.push('\n');
    }
    out
}

fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_owned()
    }
}

#[derive(Serialize, Deserialize)]
struct SnapshotMeta {
    label: String,
    collected_at: NaiveDate,
}

impl Snapshot {
    /// List every invariant violation in this snapshot. A validated snapshot
    /// returns an empty list.
    pub fn violations(&self) -> Vec<String> {
        let mut violations = Vec::new();
        let mut ids = BTreeSet::new();
        for f in &self.faculty {
            if !ids.insert(&f.faculty_id) {
                violations.push(format!("duplicate faculty_id {}", f.faculty_id));
            }
            if !f.has_scholar_profile && f.scholar_profile_id.is_some() {
                violations.push(format!(
                    "{}: scholar_profile_id present without has_scholar_profile",
                    f.faculty_id
                ));
            }
            match normalize_name(&f.name_raw) {
                Ok(canonical) if canonical == f.name_canonical => {}
                _ => violations.push(format!(
                    "{}: name_canonical {:?} does not match normalize({:?})",
                    f.faculty_id, f.name_canonical, f.name_raw
                )),
            }
            let dept_listed = self
                .departments
                .iter()
                .any(|d| d.university == f.university && d.department_name == f.department);
            if !dept_listed {
                violations.push(format!(
                    "{}: department ({}, {}) missing from department list",
                    f.faculty_id, f.university, f.department
                ));
            }
        }
        for d in &self.departments {
            let count = self
                .faculty
                .iter()
                .filter(|f| f.university == d.university && f.department == d.department_name)
                .count();
            if d.size == 0 {
                violations.push(format!(
                    "department ({}, {}) has size 0",
                    d.university, d.department_name
                ));
            }
            if count != d.size {
                violations.push(format!(
                    "department ({}, {}) size {} but {} faculty reference it",
                    d.university, d.department_name, d.size, count
                ));
            }
        }
        violations
    }

    /// Persist as a directory `<dir>/snapshot-<label>/` holding `roster.csv`
    /// and `meta.json`. Returns the snapshot directory path.
    pub fn save(&self, parent: &Path) -> Result<std::path::PathBuf, RosterError> {
        let dir = parent.join(format!("snapshot-{}", self.label));
        fs::create_dir_all(&dir)?;
        fs::write(dir.join("roster.csv"), serialize_roster(self))?;
        let meta = SnapshotMeta {
            label: self.label.clone(),
            collected_at: self.collected_at,
        };
        fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta)?)?;
        Ok(dir)
    }

    /// Load a snapshot directory written by [`Snapshot::save`].
    pub fn load(dir: &Path) -> Result<Snapshot, RosterError> {
        let meta: SnapshotMeta = serde_json::from_slice(&fs::read(dir.join("meta.json"))?)?;
        let roster = fs::read(dir.join("roster.csv"))?;
        parse_roster_labeled(&roster, &meta.label, meta.collected_at)
    }

    pub fn universities(&self) -> BTreeSet<&str> {
        self.faculty.iter().map(|f| f.university.as_str()).collect()
    }

    pub fn faculty_by_id(&self, id: &FacultyId) -> Option<&FacultyRecord> {
        self.faculty.iter().find(|f| &f.faculty_id == id)
    }
}

/// Parse a two-column `university,score` CSV with source-specific range
/// checks.
pub fn parse_score_table(
    bytes: &[u8],
    source: ScoreSource,
    year: i32,
) -> Result<ScoreTable, RosterError> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(bytes);
    let headers = reader.headers()?.clone();
    let header_fields: Vec<&str> = headers.iter().map(str::trim).collect();
    if header_fields.first() != Some(&"university") || header_fields.get(1) != Some(&"score") {
        return Err(RosterError::Schema {
            column: "university,score".to_owned(),
        });
    }

    let mut table = ScoreTable::new(source, year);
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 2;
        let university = record.get(0).unwrap_or("").trim().to_owned();
        let score_field = record.get(1).unwrap_or("").trim();
        if university.is_empty() {
            return Err(RosterError::Value {
                row,
                detail: "empty university".to_owned(),
            });
        }
        let score: f64 = score_field.parse().map_err(|_| RosterError::Value {
            row,
            detail: format!("score {score_field:?} is not a number"),
        })?;
        check_score_range(source, &university, score)?;
        if table.entries.insert(university.clone(), score).is_some() {
            return Err(RosterError::Duplicate { key: university });
        }
    }
    Ok(table)
}

fn check_score_range(source: ScoreSource, university: &str, score: f64) -> Result<(), RosterError> {
    if !score.is_finite() {
        return Err(RosterError::Range {
            source_name: source_name(source),
            university: university.to_owned(),
            score,
            expected: "finite values",
        });
    }
    match source {
        ScoreSource::Usn if !(1.0..=5.0).contains(&score) => Err(RosterError::Range {
            source_name: "usn",
            university: university.to_owned(),
            score,
            expected: "[1.0, 5.0]",
        }),
        ScoreSource::CsRankings if score <= 0.0 => Err(RosterError::Range {
            source_name: "csrankings",
            university: university.to_owned(),
            score,
            expected: "(0, inf)",
        }),
        _ => Ok(()),
    }
}

fn source_name(source: ScoreSource) -> &'static str {
    match source {
        ScoreSource::Usn => "usn",
        ScoreSource::CsRankings => "csrankings",
        ScoreSource::Scholar => "scholar",
    }
}

/// Match faculty across two snapshots by canonical name.
///
/// A pair matches iff the canonical names are equal and either the
/// university is the same or the name is nationally unique in both
/// snapshots (the mover case). Each faculty member is matched at most once;
/// collisions the rules cannot resolve are reported in
/// [`IdentityMap::ambiguous`] rather than guessed. Within one (name,
/// university) cell, identical faculty-id sets on both sides are matched
/// id-to-id so that a snapshot always matches itself exactly.
pub fn match_faculty(a: &Snapshot, b: &Snapshot) -> IdentityMap {
    let mut by_name_a: BTreeMap<&str, Vec<&FacultyRecord>> = BTreeMap::new();
    let mut by_name_b: BTreeMap<&str, Vec<&FacultyRecord>> = BTreeMap::new();
    for f in &a.faculty {
        by_name_a.entry(&f.name_canonical).or_default().push(f);
    }
    for f in &b.faculty {
        by_name_b.entry(&f.name_canonical).or_default().push(f);
    }

    let mut map = IdentityMap::default();
    for (name, group_a) in &by_name_a {
        let Some(group_b) = by_name_b.get(name) else {
            continue; // departed candidates; absent from the map
        };

        let mut unmatched_a: Vec<&FacultyRecord> = group_a.clone();
        let mut unmatched_b: Vec<&FacultyRecord> = group_b.clone();

        // Same-university pass.
        let universities: BTreeSet<&str> =
            unmatched_a.iter().map(|f| f.university.as_str()).collect();
        for university in universities {
            let cell_a: Vec<&FacultyRecord> = unmatched_a
                .iter()
                .copied()
                .filter(|f| f.university == university)
                .collect();
            let cell_b: Vec<&FacultyRecord> = unmatched_b
                .iter()
                .copied()
                .filter(|f| f.university == university)
                .collect();
            if cell_a.is_empty() || cell_b.is_empty() {
                continue;
            }
            let ids_a: BTreeSet<&FacultyId> = cell_a.iter().map(|f| &f.faculty_id).collect();
            let ids_b: BTreeSet<&FacultyId> = cell_b.iter().map(|f| &f.faculty_id).collect();
            if cell_a.len() == 1 && cell_b.len() == 1 {
                map.matches.insert(
                    cell_a[0].faculty_id.clone(),
                    cell_b[0].faculty_id.clone(),
                );
            } else if ids_a == ids_b {
                for id in ids_a {
                    map.matches.insert(id.clone(), id.clone());
                }
            } else {
                map.ambiguous.push(AmbiguousMatch {
                    canonical_name: (*name).to_owned(),
                    in_a: cell_a.iter().map(|f| f.faculty_id.clone()).collect(),
                    in_b: cell_b.iter().map(|f| f.faculty_id.clone()).collect(),
                });
            }
            let consumed_a: BTreeSet<&FacultyId> = cell_a.iter().map(|f| &f.faculty_id).collect();
            let consumed_b: BTreeSet<&FacultyId> = cell_b.iter().map(|f| &f.faculty_id).collect();
            unmatched_a.retain(|f| !consumed_a.contains(&f.faculty_id));
            unmatched_b.retain(|f| !consumed_b.contains(&f.faculty_id));
        }

        // Mover pass: only a nationally unique name in both snapshots may
        // cross universities.
        if unmatched_a.len() == 1
            && unmatched_b.len() == 1
            && group_a.len() == 1
            && group_b.len() == 1
        {
            map.matches.insert(
                unmatched_a[0].faculty_id.clone(),
                unmatched_b[0].faculty_id.clone(),
            );
        } else if !unmatched_a.is_empty() && !unmatched_b.is_empty() {
            map.ambiguous.push(AmbiguousMatch {
                canonical_name: (*name).to_owned(),
                in_a: unmatched_a.iter().map(|f| f.faculty_id.clone()).collect(),
                in_b: unmatched_b.iter().map(|f| f.faculty_id.clone()).collect(),
            });
        }
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;

    fn faculty(id: &str, name: &str, university: &str, rank: Rank, t10: Option<u32>) -> FacultyRecord {
        FacultyRecord {
            faculty_id: FacultyId(id.to_owned()),
            name_raw: name.to_owned(),
            name_canonical: normalize_name(name).unwrap(),
            university: university.to_owned(),
            department: "Computer Science".to_owned(),
            rank,
            has_scholar_profile: false,
            scholar_profile_id: None,
            t10,
            h_index: None,
            i10: None,
            collection_method: CollectionMethod::Manual,
        }
    }

    pub(crate) fn snapshot_from(faculty: Vec<FacultyRecord>) -> Snapshot {
        Snapshot {
            label: "test".to_owned(),
            departments: derive_departments(&faculty),
            faculty,
            collected_at: NaiveDate::from_ymd_opt(2021, 12, 1).unwrap(),
        }
    }

    const VALID_CSV: &str = "\
faculty_id,name,university,department,rank,scholar_id,t10,h_index,i10,collection_method
f1,Ada One,MIT,Computer Science,full,s1,120,30,80,auto
f2,Bob Two,MIT,Computer Science,associate,,55,,,manual
f3,Cab Three,MIT,Computer Science,assistant,s3,10,5,3,auto
";

    #[test]
    fn normalize_folds_diacritics_and_punctuation() {
        assert_eq!(normalize_name("José A. Smith ").unwrap(), "jose a smith");
    }

    #[test]
    fn normalize_reorders_last_first() {
        assert_eq!(normalize_name("SMITH, John").unwrap(), "john smith");
    }

    #[test]
    fn normalize_collapses_whitespace() {
        assert_eq!(normalize_name("Wei   Wang").unwrap(), "wei wang");
    }

    #[test]
    fn normalize_keeps_hyphens() {
        assert_eq!(normalize_name("Jean-Pierre Müller").unwrap(), "jean-pierre muller");
    }

    #[test]
    fn normalize_rejects_empty() {
        assert!(matches!(normalize_name("   "), Err(RosterError::InvalidName(_))));
        assert!(matches!(normalize_name("..."), Err(RosterError::InvalidName(_))));
    }

    #[test]
    fn parse_roster_loads_valid_csv() {
        let s = parse_roster(VALID_CSV.as_bytes()).unwrap();
        assert_eq!(s.faculty.len(), 3);
        assert_eq!(s.departments.len(), 1);
        assert_eq!(s.departments[0].size, 3);
        assert_eq!(s.faculty[0].t10, Some(120));
        assert_eq!(s.faculty[1].scholar_profile_id, None);
        assert!(!s.faculty[1].has_scholar_profile);
        assert!(s.violations().is_empty());
    }

    #[test]
    fn parse_roster_rejects_excluded_rank() {
        let csv = VALID_CSV.replace("associate", "adjunct");
        match parse_roster(csv.as_bytes()) {
            Err(RosterError::Value { row, .. }) => assert_eq!(row, 3),
            other => panic!("expected ValueError, got {other:?}"),
        }
    }

    #[test]
    fn parse_roster_rejects_missing_column() {
        let csv = VALID_CSV.replace("rank", "title");
        match parse_roster(csv.as_bytes()) {
            Err(RosterError::Schema { column }) => assert_eq!(column, "rank"),
            other => panic!("expected SchemaError, got {other:?}"),
        }
    }

    #[test]
    fn parse_roster_rejects_duplicate_id() {
        let csv = VALID_CSV.replace("f2", "f1");
        assert!(matches!(
            parse_roster(csv.as_bytes()),
            Err(RosterError::Duplicate { .. })
        ));
    }

    #[test]
    fn parse_roster_rejects_negative_t10() {
        let csv = VALID_CSV.replace(",120,", ",-5,");
        assert!(matches!(
            parse_roster(csv.as_bytes()),
            Err(RosterError::Value { .. })
        ));
    }

    #[test]
    fn missing_t10_is_absent_not_zero() {
        let csv = VALID_CSV.replace(",55,", ",,");
        let s = parse_roster(csv.as_bytes()).unwrap();
        assert_eq!(s.faculty[1].t10, None);
    }

    #[test]
    fn score_table_accepts_in_range_usn() {
        let t = parse_score_table(b"university,score\nMIT,4.9\n", ScoreSource::Usn, 2022).unwrap();
        assert_eq!(t.entries["MIT"], 4.9);
    }

    #[test]
    fn score_table_rejects_out_of_range_usn() {
        assert!(matches!(
            parse_score_table(b"university,score\nX,5.5\n", ScoreSource::Usn, 2022),
            Err(RosterError::Range { .. })
        ));
    }

    #[test]
    fn score_table_rejects_nonpositive_csrankings() {
        assert!(matches!(
            parse_score_table(b"university,score\nY,0.0\n", ScoreSource::CsRankings, 2022),
            Err(RosterError::Range { .. })
        ));
    }

    #[test]
    fn score_table_rejects_duplicates() {
        assert!(matches!(
            parse_score_table(
                b"university,score\nMIT,4.9\nMIT,4.8\n",
                ScoreSource::Usn,
                2022
            ),
            Err(RosterError::Duplicate { .. })
        ));
    }

    #[test]
    fn roster_roundtrip_is_identity() {
        let s = parse_roster(VALID_CSV.as_bytes()).unwrap();
        let back = parse_roster(serialize_roster(&s).as_bytes()).unwrap();
        assert_eq!(s.faculty, back.faculty);
        assert_eq!(s.departments, back.departments);
    }

    #[test]
    fn snapshot_save_load_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let s = parse_roster_labeled(
            VALID_CSV.as_bytes(),
            "2022",
            NaiveDate::from_ymd_opt(2021, 12, 1).unwrap(),
        )
        .unwrap();
        let path = s.save(dir.path()).unwrap();
        assert!(path.ends_with("snapshot-2022"));
        let loaded = Snapshot::load(&path).unwrap();
        assert_eq!(s, loaded);
    }

    #[test]
    fn self_match_is_identity() {
        let s = parse_roster(VALID_CSV.as_bytes()).unwrap();
        let map = match_faculty(&s, &s);
        assert_eq!(map.matches.len(), s.faculty.len());
        assert!(map.ambiguous.is_empty());
        for (k, v) in &map.matches {
            assert_eq!(k, v);
        }
    }

    #[test]
    fn self_match_with_duplicate_names_uses_ids() {
        let s = snapshot_from(vec![
            faculty("f1", "John Smith", "MIT", Rank::Full, Some(100)),
            faculty("f2", "John Smith", "MIT", Rank::Associate, Some(50)),
        ]);
        let map = match_faculty(&s, &s);
        assert_eq!(map.matches.len(), 2);
        assert!(map.ambiguous.is_empty());
    }

    #[test]
    fn mover_matches_only_when_nationally_unique() {
        let a = snapshot_from(vec![faculty("a1", "Ada One", "MIT", Rank::Full, Some(100))]);
        let b = snapshot_from(vec![faculty("b9", "Ada One", "Stanford", Rank::Full, None)]);
        let map = match_faculty(&a, &b);
        assert_eq!(map.matches[&FacultyId("a1".into())], FacultyId("b9".into()));
    }

    #[test]
    fn duplicate_name_across_universities_is_ambiguous() {
        let a = snapshot_from(vec![faculty("a1", "Ada One", "MIT", Rank::Full, Some(100))]);
        let b = snapshot_from(vec![
            faculty("b1", "Ada One", "Stanford", Rank::Full, None),
            faculty("b2", "Ada One", "Berkeley", Rank::Full, None),
        ]);
        let map = match_faculty(&a, &b);
        assert!(map.matches.is_empty());
        assert_eq!(map.ambiguous.len(), 1);
        assert_eq!(map.ambiguous[0].in_b.len(), 2);
    }

    #[test]
    fn new_faculty_absent_from_map() {
        let a = snapshot_from(vec![faculty("a1", "Ada One", "MIT", Rank::Full, Some(100))]);
        let b = snapshot_from(vec![
            faculty("b1", "Ada One", "MIT", Rank::Full, Some(120)),
            faculty("b2", "New Person", "MIT", Rank::Assistant, Some(5)),
        ]);
        let map = match_faculty(&a, &b);
        assert_eq!(map.matches.len(), 1);
        assert!(!map
            .matches
            .values()
            .any(|v| v == &FacultyId("b2".into())));
    }
}
