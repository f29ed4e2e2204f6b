//! Seeded synthetic dataset generation for demos and self-tests.
//!
//! Everything here is deterministic in the seed: the same seed produces the
//! same snapshot, score tables, and fit datasets byte for byte.

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::metrics::MetricVector;
use crate::model::{AveragedMeasure, LinearModel};
use crate::roster::{
    normalize_name, CollectionMethod, FacultyId, FacultyRecord, Rank, ScoreSource, ScoreTable,
    Snapshot,
};

const FIRST_NAMES: [&str; 24] = [
    "Ada", "Boris", "Carmen", "Daniela", "Edgar", "Fatima", "Grace", "Hugo", "Irene", "Jorge",
    "Katya", "Liang", "Mira", "Noor", "Olga", "Pierre", "Quinn", "Rosa", "Sven", "Tomás", "Uma",
    "Vera", "Wei", "Yusuf",
];

const LAST_NAMES: [&str; 32] = [
    "Abara", "Bennett", "Castillo", "Dvořák", "Eriksen", "Farouk", "García", "Hansen", "Ishida",
    "Jensen", "Kowalski", "Larsson", "Méndez", "Novák", "Okafor", "Petrov", "Quispe", "Rahman",
    "Silva", "Tanaka", "Umarov", "Vasquez", "Weber", "Xu", "Yamamoto", "Zhāng", "Lind-Olsen",
    "Brown", "Keller", "Moreau", "Svoboda", "Haddad",
];

const UNIVERSITIES: [&str; 30] = [
    "Alderbrook University",
    "Birchwood Institute of Technology",
    "Cedarview University",
    "Driftwater State University",
    "Elmhollow University",
    "Fernridge Institute",
    "Glenmoor University",
    "Harborlight University",
    "Ironpine State University",
    "Junipero College",
    "Kestrel Valley University",
    "Larkspur University",
    "Mapleton Institute of Technology",
    "Northgate University",
    "Oakmere State University",
    "Pinehurst University",
    "Quarrybrook University",
    "Riverbend University",
    "Stonebridge Institute",
    "Thornfield University",
    "Umberhill University",
    "Violetmoor College",
    "Westerly State University",
    "Xanthe Institute",
    "Yellowpine University",
    "Zephyr Bay University",
    "Ashgrove University",
    "Bluewater Polytechnic",
    "Coppermine University",
    "Dunmore State University",
];

/// Standard normal deviate by Box–Muller.
pub fn gaussian(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn synth_t10(rng: &mut ChaCha8Rng, rank: Rank) -> u32 {
    let (mu, sigma) = if rank.is_senior() { (4.6, 1.1) } else { (3.2, 1.0) };
    let value = (mu + sigma * gaussian(rng)).exp();
    // a t10 of 0 models faculty with fewer than ten cited papers
    if rng.gen_bool(0.02) {
        0
    } else {
        value.min(5000.0) as u32
    }
}

/// Generate one validated snapshot with `departments` programs.
pub fn synth_snapshot(departments: usize, seed: u64, label: &str) -> Snapshot {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut faculty = Vec::new();
    let mut id = 0usize;
    for d in 0..departments {
        let university = UNIVERSITIES[d % UNIVERSITIES.len()];
        let size = rng.gen_range(4..=28);
        for _ in 0..size {
            id += 1;
            let rank = match rng.gen_range(0..10) {
                0..=2 => Rank::Assistant,
                3..=5 => Rank::Associate,
                _ => Rank::Full,
            };
            let name_raw = format!(
                "{} {}",
                FIRST_NAMES[rng.gen_range(0..FIRST_NAMES.len())],
                LAST_NAMES[rng.gen_range(0..LAST_NAMES.len())]
            );
            let has_profile = rng.gen_bool(0.85);
            let t10 = if rng.gen_bool(0.01) {
                None
            } else {
                Some(synth_t10(&mut rng, rank))
            };
            faculty.push(FacultyRecord {
                faculty_id: FacultyId(format!("f{id:05}")),
                name_canonical: normalize_name(&name_raw).expect("pool names are valid"),
                name_raw,
                university: university.to_owned(),
                department: "Computer Science".to_owned(),
                rank,
                has_scholar_profile: has_profile,
                scholar_profile_id: has_profile.then(|| format!("sp{id:05}")),
                t10,
                h_index: None,
                i10: None,
                collection_method: if has_profile {
                    CollectionMethod::Auto
                } else {
                    CollectionMethod::Manual
                },
            });
        }
    }
    let departments = derive_departments(&faculty);
    Snapshot {
        label: label.to_owned(),
        departments,
        faculty,
        collected_at: NaiveDate::from_ymd_opt(2021, 12, 1).unwrap(),
    }
}

fn derive_departments(faculty: &[FacultyRecord]) -> Vec<crate::roster::DepartmentRecord> {
    let mut sizes: std::collections::BTreeMap<(String, String), usize> =
        std::collections::BTreeMap::new();
    for f in faculty {
        *sizes
            .entry((f.university.clone(), f.department.clone()))
            .or_insert(0) += 1;
    }
    sizes
        .into_iter()
        .map(
            |((university, department_name), size)| crate::roster::DepartmentRecord {
                university,
                department_name,
                size,
            },
        )
        .collect()
}

/// Evolve a snapshot into a successor: most faculty continue (some
/// promoted), a few move to another university, the rest depart, and new
/// assistant professors join. Returns the pair.
pub fn synth_snapshot_pair(departments: usize, seed: u64) -> (Snapshot, Snapshot) {
    let a = synth_snapshot(departments, seed, "t0");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let universities: Vec<String> = a
        .universities()
        .into_iter()
        .map(str::to_owned)
        .collect();

    let mut faculty = Vec::new();
    let mut id = 100_000usize;
    for f in &a.faculty {
        let fate = rng.gen_range(0..100);
        if fate < 75 {
            // continuing, possibly promoted
            let mut next = f.clone();
            id += 1;
            next.faculty_id = FacultyId(format!("g{id:05}"));
            if rng.gen_bool(0.2) {
                next.rank = match f.rank {
                    Rank::Assistant => Rank::Associate,
                    _ => Rank::Full,
                };
            }
            faculty.push(next);
        } else if fate < 85 {
            // mover
            let mut next = f.clone();
            id += 1;
            next.faculty_id = FacultyId(format!("g{id:05}"));
            let target = &universities[rng.gen_range(0..universities.len())];
            if *target != f.university {
                next.university = target.clone();
            }
            faculty.push(next);
        }
        // else departed
    }
    let new_count = a.faculty.len() / 4;
    for _ in 0..new_count {
        id += 1;
        let name_raw = format!(
            "{} {}",
            FIRST_NAMES[rng.gen_range(0..FIRST_NAMES.len())],
            LAST_NAMES[rng.gen_range(0..LAST_NAMES.len())]
        );
        let has_profile = rng.gen_bool(0.9);
        faculty.push(FacultyRecord {
            faculty_id: FacultyId(format!("g{id:05}")),
            name_canonical: normalize_name(&name_raw).expect("pool names are valid"),
            name_raw,
            university: universities[rng.gen_range(0..universities.len())].clone(),
            department: "Computer Science".to_owned(),
            rank: Rank::Assistant,
            has_scholar_profile: has_profile,
            scholar_profile_id: has_profile.then(|| format!("sp{id:05}")),
            t10: (!rng.gen_bool(0.05)).then(|| synth_t10(&mut rng, Rank::Assistant)),
            h_index: None,
            i10: None,
            collection_method: CollectionMethod::Manual,
        });
    }

    let departments = derive_departments(&faculty);
    let b = Snapshot {
        label: "t1".to_owned(),
        departments,
        faculty,
        collected_at: NaiveDate::from_ymd_opt(2022, 12, 1).unwrap(),
    };
    (a, b)
}

/// Peer-assessment-style scores generated from the published formula plus
/// Gaussian noise, clamped to the survey's [1, 5] range.
pub fn synth_usn_scores(metrics: &[MetricVector], noise_sigma: f64, seed: u64) -> ScoreTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let published = LinearModel::published();
    let mut table = ScoreTable::new(ScoreSource::Usn, 2022);
    for v in metrics {
        let score = published.score(v).expect("metric vectors carry all measures")
            + noise_sigma * gaussian(&mut rng);
        table
            .entries
            .insert(v.university.clone(), score.clamp(1.0, 5.0));
    }
    table
}

/// Publication-count-style scores: exponential in the published score with
/// noise, so they are positive and roughly log-linear in program strength.
pub fn synth_csrankings_scores(metrics: &[MetricVector], seed: u64) -> ScoreTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let published = LinearModel::published();
    let mut table = ScoreTable::new(ScoreSource::CsRankings, 2022);
    for v in metrics {
        let base = published.score(v).expect("metric vectors carry all measures");
        let score = ((base - 1.0) * 1.3 + 0.25 * gaussian(&mut rng)).exp();
        table.entries.insert(v.university.clone(), score);
    }
    table
}

/// Metric table plus scores generated exactly as
/// `1 + beta1*sqrt(a) + beta2*sqrt(c)` (plus optional Gaussian noise) for
/// one (averaged, cumulative) pair. With zero noise a fit recovers the betas
/// to machine precision.
pub fn synth_fit_dataset(
    programs: usize,
    averaged: AveragedMeasure,
    cumulative_n: u32,
    beta1: f64,
    beta2: f64,
    noise_sigma: f64,
    seed: u64,
) -> (Vec<MetricVector>, ScoreTable) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut metrics = Vec::with_capacity(programs);
    let mut scores = ScoreTable::new(ScoreSource::Usn, 2022);
    for i in 0..programs {
        let a_value = rng.gen_range(0.0..25.0_f64);
        let c_value = rng.gen_range(0..=16u32) as usize;
        let (m10, g10, p10) = match averaged {
            AveragedMeasure::M10 => (a_value, 1.0, 0.0),
            AveragedMeasure::G10 => (0.0, a_value.max(1.0), 0.0),
            AveragedMeasure::P10 => (0.0, 1.0, a_value),
        };
        let mut c = std::collections::BTreeMap::new();
        for n in crate::metrics::CUMULATIVE_LEVELS {
            c.insert(n, if n == cumulative_n { c_value } else { 0 });
        }
        let v = MetricVector {
            university: format!("Program {i:03}"),
            m10,
            g10,
            p10,
            c,
            senior_count: 5,
            total_count: 10,
            degenerate: false,
        };
        let a_feature = v.measure(averaged.as_str()).unwrap().sqrt();
        let c_feature = (c_value as f64).sqrt();
        let score = 1.0 + beta1 * a_feature + beta2 * c_feature
            + noise_sigma * gaussian(&mut rng);
        scores.entries.insert(v.university.clone(), score);
        metrics.push(v);
    }
    (metrics, scores)
}
