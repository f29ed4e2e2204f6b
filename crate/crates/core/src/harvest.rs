//! Profile-page parsing and citation harvesting against a local fixture
//! store, plus the politeness and timeout contract any fetcher must obey.
//!
//! Live scraping is out of scope; the authoritative page source is a frozen
//! fixture store whose markup contract is documented here and tested
//! bit-exactly. Parsing is pure and thread-safe; fetch scheduling is
//! strictly sequential per host.
//!
//! ## Fixture markup contract
//!
//! Profile pages (`fixtures/<profile_id>/page-<n>.html`, `n` starting at 1):
//!
//! ```html
//! <div class="profile" data-profile-id="ID">...</div>
//! <table class="indices">
//!   <tr><td class="index-name">h-index</td><td class="index-value">15</td></tr>
//!   <tr><td class="index-name">i10-index</td><td class="index-value">11</td></tr>
//! </table>
//! <table class="publications">
//!   <tr class="pub-row"><td class="pub-title">T</td><td class="pub-cites">1,024</td></tr>
//! </table>
//! ```
//!
//! The `div.profile` (with `data-profile-id`) and `table.publications` are
//! required; the indices table is optional. Citation cells may carry
//! thousands separators (`,`, `.`, regular/no-break/thin spaces), which are
//! normalized at parse time.
//!
//! Manual-search pages (`fixtures/search/<query-hash>.html`, where the hash
//! is the first 16 hex digits of SHA-256 over `"<canonical name> <university>"`):
//!
//! ```html
//! <div class="search-results">
//!   <div class="candidate" data-profile-id="ID">...</div>
//! </div>
//! ```
//!
//! Zero candidates means the profile was not found; two or more are an
//! ambiguity that is reported, never guessed.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use chrono::NaiveDate;
use scraper::{Html, Selector};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::roster::{CollectionMethod, FacultyId, FacultyRecord};

/// Errors raised while parsing fixtures or resolving profiles.
#[derive(Debug, Error)]
pub enum HarvestError {
    #[error("page has no publications table")]
    MissingPublicationTable,
    #[error("page has no profile id")]
    MissingProfileId,
    #[error("publication row {row}: citation cell {text:?} is not a count")]
    BadCitationCell { row: usize, text: String },
    #[error("index {name:?} has non-numeric value {text:?}")]
    BadIndexValue { name: String, text: String },
    #[error("page has no search-results block")]
    MissingSearchResults,
    #[error("cannot merge pages from profiles {0:?} and {1:?}")]
    MixedProfiles(String, String),
    #[error("cannot merge an empty page list")]
    EmptyMerge,
    #[error("no profile found for {faculty}")]
    ProfileNotFound { faculty: FacultyId },
    #[error("{count} candidate profiles for {faculty}; not guessing")]
    AmbiguousProfile { faculty: FacultyId, count: usize },
    #[error("fetch policy requires positive {0}")]
    InvalidPolicy(&'static str),
    #[error("io error reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Publications and aggregate indices extracted from one or more pages of a
/// single profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScholarProfile {
    pub profile_id: String,
    /// (title, citations); non-increasing by citations once `complete`.
    pub publications: Vec<(String, u32)>,
    pub h_index: Option<u32>,
    pub i10: Option<u32>,
    /// True once every pagination page has been merged.
    pub complete: bool,
}

impl ScholarProfile {
    pub fn citation_counts(&self) -> Vec<u32> {
        self.publications.iter().map(|(_, c)| *c).collect()
    }

    /// h-index recomputed from the listed publications. Meaningful on
    /// complete profiles; a mismatch with the page's stated value is a
    /// warning for the caller, not an error — pages can list more papers
    /// than their stats reflect.
    pub fn recomputed_h_index(&self) -> u32 {
        h_index_of(&self.citation_counts())
    }

    /// `(stated, recomputed)` when the page's h-index disagrees with the
    /// one recomputed from a complete publication list.
    pub fn h_index_mismatch(&self) -> Option<(u32, u32)> {
        if !self.complete {
            return None;
        }
        let stated = self.h_index?;
        let recomputed = self.recomputed_h_index();
        (stated != recomputed).then_some((stated, recomputed))
    }
}

/// Pacing and abort contract for any fetcher.
#[derive(Debug, Clone)]
pub struct FetchPolicy {
    min_interval: Duration,
    per_faculty_budget: Duration,
    pub user_agent: String,
}

impl FetchPolicy {
    pub fn new(
        min_interval: Duration,
        per_faculty_budget: Duration,
        user_agent: &str,
    ) -> Result<Self, HarvestError> {
        if min_interval.is_zero() {
            return Err(HarvestError::InvalidPolicy("min_interval"));
        }
        if per_faculty_budget.is_zero() {
            return Err(HarvestError::InvalidPolicy("per_faculty_budget"));
        }
        Ok(FetchPolicy {
            min_interval,
            per_faculty_budget,
            user_agent: user_agent.to_owned(),
        })
    }

    pub fn min_interval(&self) -> Duration {
        self.min_interval
    }

    pub fn per_faculty_budget(&self) -> Duration {
        self.per_faculty_budget
    }
}

impl Default for FetchPolicy {
    /// 3 s between requests, 300 s per-faculty budget.
    fn default() -> Self {
        FetchPolicy::new(
            Duration::from_secs(3),
            Duration::from_secs(300),
            "citerank/0.1 (offline fixture harvester)",
        )
        .expect("default policy is valid")
    }
}

/// Earliest instant a conforming fetcher may issue the next request.
pub fn next_fetch_time(policy: &FetchPolicy, last_request: Duration) -> Duration {
    last_request + policy.min_interval
}

/// Virtual clock for a sequential fetcher. Each request occupies one full
/// `min_interval` of simulated time; the simulator refuses requests that
/// would push total elapsed time past the per-faculty budget.
#[derive(Debug)]
pub struct FetchSimulator<'p> {
    policy: &'p FetchPolicy,
    request_times: Vec<Duration>,
    elapsed: Duration,
}

impl<'p> FetchSimulator<'p> {
    pub fn new(policy: &'p FetchPolicy) -> Self {
        FetchSimulator {
            policy,
            request_times: Vec::new(),
            elapsed: Duration::ZERO,
        }
    }

    /// Schedule one request. Returns false — and schedules nothing — when
    /// the budget would be exceeded.
    pub fn try_request(&mut self) -> bool {
        let completes = self.elapsed + self.policy.min_interval;
        if completes > self.policy.per_faculty_budget {
            return false;
        }
        let issue_at = match self.request_times.last() {
            Some(&last) => next_fetch_time(self.policy, last),
            None => Duration::ZERO,
        };
        self.request_times.push(issue_at);
        self.elapsed = completes;
        true
    }

    pub fn request_times(&self) -> &[Duration] {
        &self.request_times
    }

    pub fn elapsed(&self) -> Duration {
        self.elapsed
    }
}

/// A harvested citation measurement for one faculty member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CitationRecord {
    pub faculty_id: FacultyId,
    pub t10: u32,
    pub h_index: Option<u32>,
    pub i10: Option<u32>,
    pub method: CollectionMethod,
    pub collected_at: NaiveDate,
}

/// Outcome of harvesting one faculty member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HarvestOutcome {
    Collected(CitationRecord),
    /// The simulated fetch plan exceeded the per-faculty budget; t10 stays
    /// uncollected.
    Aborted {
        pages_fetched: usize,
        elapsed: Duration,
    },
}

/// Citations of the 10th most-cited paper; 0 when fewer than ten papers.
pub fn derive_t10(citations: &[u32]) -> u32 {
    let mut sorted = citations.to_vec();
    sorted.sort_unstable_by(|x, y| y.cmp(x));
    sorted.get(9).copied().unwrap_or(0)
}

/// Largest x such that at least x papers have at least x citations.
pub fn h_index_of(citations: &[u32]) -> u32 {
    let mut sorted = citations.to_vec();
    sorted.sort_unstable_by(|x, y| y.cmp(x));
    let mut h = 0u32;
    for (i, &c) in sorted.iter().enumerate() {
        let position = (i + 1) as u32;
        if c >= position {
            h = position;
        } else {
            break;
        }
    }
    h
}

fn selector(css: &str) -> Selector {
    Selector::parse(css).expect("static selector")
}

/// Strip grouping separators and parse a citation count.
fn parse_citation_count(text: &str) -> Option<u32> {
    let cleaned: String = text
        .trim()
        .chars()
        .filter(|c| !matches!(c, ',' | '.' | ' ' | '\u{00A0}' | '\u{2009}' | '\u{202F}'))
        .collect();
    if cleaned.is_empty() || !cleaned.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    cleaned.parse().ok()
}

/// Parse one fixture profile page into a partial profile (`complete =
/// false` until pages are merged). Publication rows are kept in listed
/// order; aggregate indices are extracted when the indices table is
/// present.
pub fn parse_profile_page(html: &[u8]) -> Result<ScholarProfile, HarvestError> {
    let document = Html::parse_document(&String::from_utf8_lossy(html));

    let profile_id = document
        .select(&selector("div.profile"))
        .next()
        .and_then(|div| div.value().attr("data-profile-id"))
        .map(str::to_owned)
        .ok_or(HarvestError::MissingProfileId)?;

    let publications_table = document
        .select(&selector("table.publications"))
        .next()
        .ok_or(HarvestError::MissingPublicationTable)?;

    let title_sel = selector("td.pub-title");
    let cites_sel = selector("td.pub-cites");
    let mut publications = Vec::new();
    for (i, row) in publications_table.select(&selector("tr.pub-row")).enumerate() {
        let title = row
            .select(&title_sel)
            .next()
            .map(|td| td.text().collect::<String>().trim().to_owned())
            .unwrap_or_default();
        let cites_text = row
            .select(&cites_sel)
            .next()
            .map(|td| td.text().collect::<String>())
            .unwrap_or_default();
        let citations =
            parse_citation_count(&cites_text).ok_or_else(|| HarvestError::BadCitationCell {
                row: i + 1,
                text: cites_text.trim().to_owned(),
            })?;
        publications.push((title, citations));
    }

    let mut h_index = None;
    let mut i10 = None;
    if let Some(indices) = document.select(&selector("table.indices")).next() {
        let name_sel = selector("td.index-name");
        let value_sel = selector("td.index-value");
        for row in indices.select(&selector("tr")) {
            let name = row
                .select(&name_sel)
                .next()
                .map(|td| td.text().collect::<String>().trim().to_lowercase())
                .unwrap_or_default();
            let value_text = row
                .select(&value_sel)
                .next()
                .map(|td| td.text().collect::<String>())
                .unwrap_or_default();
            if name.is_empty() {
                continue;
            }
            let value =
                parse_citation_count(&value_text).ok_or_else(|| HarvestError::BadIndexValue {
                    name: name.clone(),
                    text: value_text.trim().to_owned(),
                })?;
            match name.as_str() {
                "h-index" => h_index = Some(value),
                "i10-index" => i10 = Some(value),
                _ => {}
            }
        }
    }

    Ok(ScholarProfile {
        profile_id,
        publications,
        h_index,
        i10,
        complete: false,
    })
}

/// Candidate profile ids listed on a manual-search fixture page.
pub fn parse_search_page(html: &[u8]) -> Result<Vec<String>, HarvestError> {
    let document = Html::parse_document(&String::from_utf8_lossy(html));
    let results = document
        .select(&selector("div.search-results"))
        .next()
        .ok_or(HarvestError::MissingSearchResults)?;
    Ok(results
        .select(&selector("div.candidate"))
        .filter_map(|c| c.value().attr("data-profile-id"))
        .map(str::to_owned)
        .collect())
}

/// Merge pagination pages of one profile: publications concatenated and
/// re-sorted non-increasing (duplicates kept; the listing is
/// row-authoritative), aggregate indices taken from the first page.
pub fn merge_profile_pages(pages: Vec<ScholarProfile>) -> Result<ScholarProfile, HarvestError> {
    let mut iter = pages.into_iter();
    let mut merged = iter.next().ok_or(HarvestError::EmptyMerge)?;
    for page in iter {
        if page.profile_id != merged.profile_id {
            return Err(HarvestError::MixedProfiles(
                merged.profile_id,
                page.profile_id,
            ));
        }
        merged.publications.extend(page.publications);
    }
    merged.publications.sort_by(|a, b| b.1.cmp(&a.1));
    merged.complete = true;
    Ok(merged)
}

/// Filesystem-backed page source following the documented fixture layout.
#[derive(Debug, Clone)]
pub struct FixtureStore {
    root: PathBuf,
}

impl FixtureStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        FixtureStore { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn read(&self, path: PathBuf) -> Result<Vec<u8>, HarvestError> {
        fs::read(&path).map_err(|source| HarvestError::Io { path, source })
    }

    /// Number of consecutive `page-<n>.html` files starting at 1.
    pub fn profile_page_count(&self, profile_id: &str) -> usize {
        let mut n = 0;
        while self
            .root
            .join(profile_id)
            .join(format!("page-{}.html", n + 1))
            .is_file()
        {
            n += 1;
        }
        n
    }

    pub fn profile_page(&self, profile_id: &str, page: usize) -> Result<Vec<u8>, HarvestError> {
        self.read(self.root.join(profile_id).join(format!("page-{page}.html")))
    }

    pub fn search_page(&self, query: &str) -> Option<Result<Vec<u8>, HarvestError>> {
        let path = self
            .root
            .join("search")
            .join(format!("{}.html", search_query_hash(query)));
        path.is_file().then(|| self.read(path))
    }
}

/// Search query used for faculty without a known profile id.
pub fn search_query(faculty: &FacultyRecord) -> String {
    format!("{} {}", faculty.name_canonical, faculty.university)
}

/// First 16 hex digits of SHA-256 over the query string.
pub fn search_query_hash(query: &str) -> String {
    let digest = Sha256::digest(query.as_bytes());
    let mut hex = String::with_capacity(16);
    for byte in &digest[..8] {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}

/// Resolve one faculty member's profile through the fixture store, derive
/// t10, and stamp the collection method (`auto` when a profile id was
/// already on the roster, `manual` when resolved through the search
/// fixtures). Aborts — leaving t10 uncollected — when the simulated fetch
/// plan exceeds the per-faculty budget.
pub fn harvest_faculty(
    store: &FixtureStore,
    faculty: &FacultyRecord,
    policy: &FetchPolicy,
    collected_at: NaiveDate,
) -> Result<HarvestOutcome, HarvestError> {
    let mut sim = FetchSimulator::new(policy);

    let (profile_id, method) = match &faculty.scholar_profile_id {
        Some(id) => (id.clone(), CollectionMethod::Auto),
        None => {
            if !sim.try_request() {
                return Ok(HarvestOutcome::Aborted {
                    pages_fetched: 0,
                    elapsed: sim.elapsed(),
                });
            }
            let page = store
                .search_page(&search_query(faculty))
                .transpose()?
                .ok_or_else(|| HarvestError::ProfileNotFound {
                    faculty: faculty.faculty_id.clone(),
                })?;
            let candidates = parse_search_page(&page)?;
            match candidates.len() {
                0 => {
                    return Err(HarvestError::ProfileNotFound {
                        faculty: faculty.faculty_id.clone(),
                    })
                }
                1 => (candidates.into_iter().next().unwrap(), CollectionMethod::Manual),
                count => {
                    return Err(HarvestError::AmbiguousProfile {
                        faculty: faculty.faculty_id.clone(),
                        count,
                    })
                }
            }
        }
    };

    let page_count = store.profile_page_count(&profile_id);
    if page_count == 0 {
        return Err(HarvestError::ProfileNotFound {
            faculty: faculty.faculty_id.clone(),
        });
    }

    let mut pages = Vec::with_capacity(page_count);
    for page in 1..=page_count {
        if !sim.try_request() {
            return Ok(HarvestOutcome::Aborted {
                pages_fetched: page - 1,
                elapsed: sim.elapsed(),
            });
        }
        pages.push(parse_profile_page(&store.profile_page(&profile_id, page)?)?);
    }

    let profile = merge_profile_pages(pages)?;
    Ok(HarvestOutcome::Collected(CitationRecord {
        faculty_id: faculty.faculty_id.clone(),
        t10: derive_t10(&profile.citation_counts()),
        h_index: profile.h_index,
        i10: profile.i10,
        method,
        collected_at,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roster::{normalize_name, Rank};

    pub(crate) fn profile_page_html(profile_id: &str, pubs: &[(&str, &str)], indices: Option<(&str, &str)>) -> String {
        let mut html = String::from("<!DOCTYPE html><html><body>\n");
        html.push_str(&format!(
            "<div class=\"profile\" data-profile-id=\"{profile_id}\"><span class=\"profile-name\">x</span></div>\n"
        ));
        if let Some((h, i10)) = indices {
            html.push_str("<table class=\"indices\">\n");
            html.push_str(&format!(
                "<tr><td class=\"index-name\">h-index</td><td class=\"index-value\">{h}</td></tr>\n"
            ));
            html.push_str(&format!(
                "<tr><td class=\"index-name\">i10-index</td><td class=\"index-value\">{i10}</td></tr>\n"
            ));
            html.push_str("</table>\n");
        }
        html.push_str("<table class=\"publications\">\n");
        for (title, cites) in pubs {
            html.push_str(&format!(
                "<tr class=\"pub-row\"><td class=\"pub-title\">{title}</td><td class=\"pub-cites\">{cites}</td></tr>\n"
            ));
        }
        html.push_str("</table>\n</body></html>\n");
        html
    }

    fn faculty_with_profile(id: &str, profile: Option<&str>) -> FacultyRecord {
        FacultyRecord {
            faculty_id: FacultyId(id.to_owned()),
            name_raw: "Ada One".to_owned(),
            name_canonical: normalize_name("Ada One").unwrap(),
            university: "MIT".to_owned(),
            department: "Computer Science".to_owned(),
            rank: Rank::Full,
            has_scholar_profile: profile.is_some(),
            scholar_profile_id: profile.map(str::to_owned),
            t10: None,
            h_index: None,
            i10: None,
            collection_method: CollectionMethod::Manual,
        }
    }

    #[test]
    fn derive_t10_takes_tenth_element() {
        let counts = [500, 400, 300, 250, 200, 150, 120, 100, 90, 80, 70, 60];
        assert_eq!(derive_t10(&counts), 80);
    }

    #[test]
    fn derive_t10_is_zero_under_ten_papers() {
        assert_eq!(derive_t10(&[900, 800, 700, 600, 500, 400, 300, 200, 100]), 0);
        assert_eq!(derive_t10(&[]), 0);
    }

    #[test]
    fn derive_t10_handles_ties() {
        assert_eq!(derive_t10(&[7; 10]), 7);
    }

    #[test]
    fn h_index_of_counts_qualifying_papers() {
        assert_eq!(h_index_of(&[10, 8, 5, 4, 3]), 4);
        assert_eq!(h_index_of(&[]), 0);
        assert_eq!(h_index_of(&[0, 0]), 0);
        assert_eq!(h_index_of(&[1]), 1);
    }

    #[test]
    fn parse_extracts_rows_and_indices() {
        let pubs: Vec<(String, String)> = (0..12)
            .map(|i| (format!("Paper {i}"), format!("{}", 500 - i * 40)))
            .collect();
        let pub_refs: Vec<(&str, &str)> = pubs.iter().map(|(t, c)| (t.as_str(), c.as_str())).collect();
        let html = profile_page_html("prof1", &pub_refs, Some(("15", "11")));
        let profile = parse_profile_page(html.as_bytes()).unwrap();
        assert_eq!(profile.profile_id, "prof1");
        assert_eq!(profile.publications.len(), 12);
        assert_eq!(profile.h_index, Some(15));
        assert_eq!(profile.i10, Some(11));
        assert!(!profile.complete);
        assert_eq!(profile.publications[0], ("Paper 0".to_owned(), 500));
    }

    #[test]
    fn parse_accepts_empty_publication_table() {
        let html = profile_page_html("prof1", &[], None);
        let profile = parse_profile_page(html.as_bytes()).unwrap();
        assert!(profile.publications.is_empty());
        assert_eq!(profile.h_index, None);
    }

    #[test]
    fn parse_strips_thousands_separators() {
        let html = profile_page_html("prof1", &[("Big", "1,024")], None);
        let profile = parse_profile_page(html.as_bytes()).unwrap();
        assert_eq!(profile.publications[0].1, 1024);
    }

    #[test]
    fn parse_rejects_missing_publication_table() {
        let html = "<html><body><div class=\"profile\" data-profile-id=\"p\"></div></body></html>";
        assert!(matches!(
            parse_profile_page(html.as_bytes()),
            Err(HarvestError::MissingPublicationTable)
        ));
    }

    #[test]
    fn parse_rejects_non_numeric_citation_cell() {
        let html = profile_page_html("prof1", &[("Bad", "n/a")], None);
        match parse_profile_page(html.as_bytes()) {
            Err(HarvestError::BadCitationCell { row, text }) => {
                assert_eq!(row, 1);
                assert_eq!(text, "n/a");
            }
            other => panic!("expected BadCitationCell, got {other:?}"),
        }
    }

    #[test]
    fn merge_concatenates_and_sorts() {
        let mk = |counts: &[u32]| ScholarProfile {
            profile_id: "p".to_owned(),
            publications: counts.iter().map(|&c| (format!("t{c}"), c)).collect(),
            h_index: Some(9),
            i10: None,
            complete: false,
        };
        let pages = vec![
            mk(&(0..20).map(|i| 100 - i).collect::<Vec<_>>()),
            mk(&(0..20).map(|i| 80 - i).collect::<Vec<_>>()),
            mk(&[3, 2, 1]),
        ];
        let merged = merge_profile_pages(pages).unwrap();
        assert_eq!(merged.publications.len(), 43);
        assert!(merged.complete);
        assert!(merged
            .publications
            .windows(2)
            .all(|w| w[0].1 >= w[1].1));
        assert_eq!(merged.h_index, Some(9));
    }

    #[test]
    fn merge_single_page_is_identity_plus_complete() {
        let page = ScholarProfile {
            profile_id: "p".to_owned(),
            publications: vec![("a".into(), 5), ("b".into(), 3)],
            h_index: None,
            i10: None,
            complete: false,
        };
        let merged = merge_profile_pages(vec![page.clone()]).unwrap();
        assert_eq!(merged.publications, page.publications);
        assert!(merged.complete);
    }

    #[test]
    fn h_index_mismatch_is_reported_only_on_complete_profiles() {
        let page = ScholarProfile {
            profile_id: "p".to_owned(),
            publications: (0..12).map(|i| (format!("t{i}"), 100 - i)).collect(),
            h_index: Some(15), // page states more than the 12 listed rows allow
            i10: None,
            complete: false,
        };
        assert_eq!(page.h_index_mismatch(), None);
        let merged = merge_profile_pages(vec![page]).unwrap();
        assert_eq!(merged.h_index_mismatch(), Some((15, 12)));
    }

    #[test]
    fn merge_keeps_duplicate_titles() {
        let mk = |c| ScholarProfile {
            profile_id: "p".to_owned(),
            publications: vec![("Same Title".to_owned(), c)],
            h_index: None,
            i10: None,
            complete: false,
        };
        let merged = merge_profile_pages(vec![mk(5), mk(5)]).unwrap();
        assert_eq!(merged.publications.len(), 2);
    }

    #[test]
    fn merge_rejects_mixed_profiles() {
        let mk = |id: &str| ScholarProfile {
            profile_id: id.to_owned(),
            publications: vec![],
            h_index: None,
            i10: None,
            complete: false,
        };
        assert!(matches!(
            merge_profile_pages(vec![mk("a"), mk("b")]),
            Err(HarvestError::MixedProfiles(_, _))
        ));
    }

    #[test]
    fn next_fetch_time_is_additive() {
        let policy = FetchPolicy::default();
        assert_eq!(
            next_fetch_time(&policy, Duration::ZERO),
            Duration::from_secs(3)
        );
        assert_eq!(
            next_fetch_time(&policy, Duration::from_secs(10)),
            Duration::from_secs(13)
        );
    }

    #[test]
    fn policy_rejects_zero_interval() {
        assert!(matches!(
            FetchPolicy::new(Duration::ZERO, Duration::from_secs(300), "x"),
            Err(HarvestError::InvalidPolicy("min_interval"))
        ));
    }

    #[test]
    fn simulator_respects_gaps_and_budget() {
        let policy = FetchPolicy::default();
        let mut sim = FetchSimulator::new(&policy);
        for _ in 0..100 {
            assert!(sim.try_request());
        }
        assert_eq!(sim.elapsed(), Duration::from_secs(300));
        assert!(!sim.try_request(), "101st request must exceed the budget");
        let times = sim.request_times();
        assert_eq!(times.len(), 100);
        for pair in times.windows(2) {
            assert!(pair[1] - pair[0] >= policy.min_interval());
        }
    }

    fn write_profile_fixture(root: &Path, profile_id: &str, pages: &[Vec<(String, String)>]) {
        let dir = root.join(profile_id);
        fs::create_dir_all(&dir).unwrap();
        for (i, page) in pages.iter().enumerate() {
            let refs: Vec<(&str, &str)> = page.iter().map(|(t, c)| (t.as_str(), c.as_str())).collect();
            fs::write(
                dir.join(format!("page-{}.html", i + 1)),
                profile_page_html(profile_id, &refs, Some(("20", "30"))),
            )
            .unwrap();
        }
    }

    #[test]
    fn harvest_collects_t10_from_single_page() {
        let dir = tempfile::tempdir().unwrap();
        let pubs: Vec<(String, String)> = (0..12)
            .map(|i| (format!("P{i}"), format!("{}", 500 - i * 40)))
            .collect();
        write_profile_fixture(dir.path(), "prof1", &[pubs]);
        let store = FixtureStore::new(dir.path());
        let faculty = faculty_with_profile("f1", Some("prof1"));
        let date = NaiveDate::from_ymd_opt(2021, 12, 1).unwrap();
        match harvest_faculty(&store, &faculty, &FetchPolicy::default(), date).unwrap() {
            HarvestOutcome::Collected(record) => {
                assert_eq!(record.t10, 140); // 10th of 500,460,...: 500-9*40
                assert_eq!(record.method, CollectionMethod::Auto);
                assert_eq!(record.h_index, Some(20));
            }
            other => panic!("expected Collected, got {other:?}"),
        }
    }

    #[test]
    fn harvest_aborts_on_budget_overrun() {
        let dir = tempfile::tempdir().unwrap();
        let page: Vec<(String, String)> = vec![("P".to_owned(), "5".to_owned())];
        let pages: Vec<Vec<(String, String)>> = (0..101).map(|_| page.clone()).collect();
        write_profile_fixture(dir.path(), "long", &pages);
        let store = FixtureStore::new(dir.path());
        let faculty = faculty_with_profile("f1", Some("long"));
        let date = NaiveDate::from_ymd_opt(2021, 12, 1).unwrap();
        match harvest_faculty(&store, &faculty, &FetchPolicy::default(), date).unwrap() {
            HarvestOutcome::Aborted { pages_fetched, elapsed } => {
                assert_eq!(pages_fetched, 100);
                assert_eq!(elapsed, Duration::from_secs(300));
            }
            other => panic!("expected Aborted, got {other:?}"),
        }
    }

    #[test]
    fn harvest_reports_ambiguous_search() {
        let dir = tempfile::tempdir().unwrap();
        let faculty = faculty_with_profile("f1", None);
        let query = search_query(&faculty);
        let search_dir = dir.path().join("search");
        fs::create_dir_all(&search_dir).unwrap();
        fs::write(
            search_dir.join(format!("{}.html", search_query_hash(&query))),
            "<div class=\"search-results\">\
             <div class=\"candidate\" data-profile-id=\"x\"></div>\
             <div class=\"candidate\" data-profile-id=\"y\"></div>\
             </div>",
        )
        .unwrap();
        let store = FixtureStore::new(dir.path());
        let date = NaiveDate::from_ymd_opt(2021, 12, 1).unwrap();
        assert!(matches!(
            harvest_faculty(&store, &faculty, &FetchPolicy::default(), date),
            Err(HarvestError::AmbiguousProfile { count: 2, .. })
        ));
    }

    #[test]
    fn harvest_resolves_unique_search_candidate_as_manual() {
        let dir = tempfile::tempdir().unwrap();
        let faculty = faculty_with_profile("f1", None);
        let query = search_query(&faculty);
        let search_dir = dir.path().join("search");
        fs::create_dir_all(&search_dir).unwrap();
        fs::write(
            search_dir.join(format!("{}.html", search_query_hash(&query))),
            "<div class=\"search-results\"><div class=\"candidate\" data-profile-id=\"only\"></div></div>",
        )
        .unwrap();
        let pubs: Vec<(String, String)> = (0..10).map(|i| (format!("P{i}"), "9".to_owned())).collect();
        write_profile_fixture(dir.path(), "only", &[pubs]);
        let store = FixtureStore::new(dir.path());
        let date = NaiveDate::from_ymd_opt(2021, 12, 1).unwrap();
        match harvest_faculty(&store, &faculty, &FetchPolicy::default(), date).unwrap() {
            HarvestOutcome::Collected(record) => {
                assert_eq!(record.t10, 9);
                assert_eq!(record.method, CollectionMethod::Manual);
            }
            other => panic!("expected Collected, got {other:?}"),
        }
    }
}

#[cfg(test)]
mod prop_tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        /// With h computed from the full list: at least ten qualifying
        /// papers force the tenth count up to h, and fewer keep it at or
        /// below h.
        #[test]
        fn t10_and_h_index_are_consistent(citations in proptest::collection::vec(0u32..5000, 0..60)) {
            let h = h_index_of(&citations);
            let t10 = derive_t10(&citations);
            if h >= 10 {
                prop_assert!(t10 >= h, "h={h} t10={t10}");
            } else {
                prop_assert!(t10 <= h, "h={h} t10={t10}");
            }
        }

        #[test]
        fn derive_t10_is_permutation_invariant(citations in proptest::collection::vec(0u32..5000, 0..40)) {
            let expected = derive_t10(&citations);
            let mut reversed = citations.clone();
            reversed.reverse();
            prop_assert_eq!(derive_t10(&reversed), expected);
            let mut sorted = citations.clone();
            sorted.sort_unstable();
            prop_assert_eq!(derive_t10(&sorted), expected);
            let mut rotated = citations.clone();
            if !rotated.is_empty() {
                rotated.rotate_left(citations.len() / 2);
            }
            prop_assert_eq!(derive_t10(&rotated), expected);
        }

        #[test]
        fn derive_t10_is_monotone(
            citations in proptest::collection::vec(0u32..5000, 1..40),
            index in any::<prop::sample::Index>(),
            bump in 1u32..1000,
        ) {
            let before = derive_t10(&citations);
            let mut bumped = citations.clone();
            let i = index.index(bumped.len());
            bumped[i] = bumped[i].saturating_add(bump);
            prop_assert!(derive_t10(&bumped) >= before);
        }

        #[test]
        fn simulated_gaps_never_undercut_the_interval(
            interval_ms in 1u64..10_000,
            budget_ms in 1u64..100_000,
            requests in 1usize..200,
        ) {
            let policy = FetchPolicy::new(
                Duration::from_millis(interval_ms),
                Duration::from_millis(budget_ms),
                "test",
            ).unwrap();
            let mut sim = FetchSimulator::new(&policy);
            for _ in 0..requests {
                if !sim.try_request() {
                    break;
                }
            }
            prop_assert!(sim.elapsed() <= policy.per_faculty_budget());
            for pair in sim.request_times().windows(2) {
                prop_assert!(pair[1] - pair[0] >= policy.min_interval());
            }
        }
    }
}
