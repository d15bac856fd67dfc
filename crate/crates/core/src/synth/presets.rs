use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::spec::{AnomalyPlant, GeneratorSpec, InstitutionSpec, PlantKind, YearSpan};

const COUNTRIES: [&str; 10] = ["SA", "IN", "EG", "PK", "US", "CN", "DE", "BR", "IQ", "GB"];

/// World growth the baseline universe is centred on.
pub const WORLD_GROWTH_PCT: f64 = 8.7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniverseParams {
    pub seed: u64,
    pub institutions: usize,
    /// Mean baseline records per institution per year.
    pub base_output: u32,
    /// Institutions (the first ones) given a funnel-passing surge.
    pub planted_surges: usize,
    /// Also plant one hyperprolific, one external and one cross-group author.
    pub author_plants: bool,
}

impl Default for UniverseParams {
    fn default() -> Self {
        Self {
            seed: 0,
            institutions: 50,
            base_output: 100,
            planted_surges: 3,
            author_plants: true,
        }
    }
}

pub fn institution_id(k: usize) -> String {
    format!("inst{k:03}")
}

/// A 2019-2023 universe whose baseline growth is drawn within 20% of the
/// world rate. Planted surges multiply last-year output fivefold and hand
/// most of the extra first authorships to foreign partners.
pub fn universe(p: UniverseParams) -> GeneratorSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed ^ 0x005e_ed0f_u64);
    let lo = (p.base_output / 2).max(45);
    let hi = (p.base_output * 3 / 2).max(lo + 1);
    let institutions = (0..p.institutions)
        .map(|k| {
            let base = rng.gen_range(lo..=hi);
            InstitutionSpec {
                id: institution_id(k),
                name: None,
                country: COUNTRIES[k % COUNTRIES.len()].parse().expect("listed code"),
                base_output_per_year: base,
                growth_pct: WORLD_GROWTH_PCT * rng.gen_range(0.8..=1.2),
                authors_pool_size: base * 3,
                mean_authors_per_record: 3.9,
                domestic_collab_prob: rng.gen_range(0.05..0.25),
                intl_collab_prob: rng.gen_range(0.2..0.6),
            }
        })
        .collect();
    let mut anomalies = Vec::new();
    for k in 0..p.planted_surges.min(p.institutions) {
        anomalies.push(AnomalyPlant {
            id: Some(format!("surge-{}", institution_id(k))),
            active_years: vec![2023],
            kind: PlantKind::OutputSurge {
                institution: institution_id(k),
                surge_multiplier: 5.0,
                outsourced_fraction: 0.8,
                partners: Vec::new(),
            },
        });
    }
    if p.author_plants && p.institutions >= 4 {
        anomalies.push(AnomalyPlant {
            id: Some("hyperprolific".into()),
            active_years: vec![2023],
            kind: PlantKind::HyperprolificAuthor {
                institution: institution_id(0),
                author_id: None,
                yearly_count: 40,
            },
        });
        anomalies.push(AnomalyPlant {
            id: Some("external".into()),
            active_years: vec![2022, 2023],
            kind: PlantKind::ExternalAuthor {
                host: institution_id(1),
                home: institution_id(p.institutions - 1),
                author_id: None,
                records: 6,
                secondary_fraction: 0.67,
            },
        });
        anomalies.push(AnomalyPlant {
            id: Some("cross-group".into()),
            active_years: vec![2022, 2023],
            kind: PlantKind::CrossGroupAuthor {
                institutions: (0..3).map(institution_id).collect(),
                author_id: None,
                records_per_institution: 4,
            },
        });
    }
    GeneratorSpec {
        seed: p.seed,
        years: YearSpan { start: 2019, end: 2023 },
        author_year_cap: 20,
        institutions,
        anomalies,
    }
}
