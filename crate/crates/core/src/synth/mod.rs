//! Synthetic corpora with planted anomalies, the naive recomputation used to
//! cross-check the indicator table, and the published-table fixtures.

pub mod fixture;
mod generate;
pub mod oracle;
mod presets;
mod spec;

pub use fixture::{published_fixture, FixtureBundle, FixtureGroup};
pub use generate::{generate, generate_with, registry_for, ExpectationRules, ExpectedFlag, Generated, PlantTruth};
pub use oracle::{oracle_metrics, OracleParams};
pub use spec::{AnomalyPlant, GeneratorSpec, InstitutionSpec, PlantKind, YearSpan};
pub use presets::{institution_id, universe, UniverseParams, WORLD_GROWTH_PCT};
