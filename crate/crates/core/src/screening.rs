//! Selection funnel, study-versus-control comparison and per-institution
//! red-flag dossiers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::authorship::{hyperprolific_authors, Evidence as FlagEvidence, FlagKind, FlagRecord, HyperprolificRule};
use crate::corpus::{Corpus, InstitutionId};
use crate::error::{Error, Result};
use crate::indicators::{
    competition_rank, group_summary, tallies, Direction, GroupSummary, MultiAffiliationRule, YearTallies,
};
use crate::network::GraphStats;
use crate::scalar::{display_tenths, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FunnelConfig {
    pub top_n_by_output: usize,
    pub growth_threshold_pct: Option<f64>,
    pub growth_multiple_of_world: Option<f64>,
    pub world_growth_pct: f64,
    pub top_k_rank: u32,
    pub start_year: i32,
    pub end_year: i32,
}

impl Default for FunnelConfig {
    fn default() -> Self {
        Self {
            top_n_by_output: 1000,
            growth_threshold_pct: Some(130.0),
            growth_multiple_of_world: Some(15.0),
            world_growth_pct: 8.7,
            top_k_rank: 20,
            start_year: 2019,
            end_year: 2023,
        }
    }
}

impl FunnelConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.top_n_by_output == 0 {
            problems.push("top_n_by_output must be positive".to_string());
        }
        if self.top_k_rank == 0 {
            problems.push("top_k_rank must be positive".to_string());
        }
        if self.start_year >= self.end_year {
            problems.push(format!(
                "start_year {} must precede end_year {}",
                self.start_year, self.end_year
            ));
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        match (self.growth_threshold_pct, self.growth_multiple_of_world) {
            (None, None) => problems.push("set growth_threshold_pct or growth_multiple_of_world".to_string()),
            (abs, mult) => {
                if abs.is_some_and(|v| !positive(v)) {
                    problems.push("growth_threshold_pct must be positive".to_string());
                }
                if mult.is_some_and(|v| !positive(v)) {
                    problems.push("growth_multiple_of_world must be positive".to_string());
                }
                if mult.is_some() && !positive(self.world_growth_pct) {
                    problems.push("world_growth_pct must be positive".to_string());
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }

    /// The larger of the absolute threshold and the world multiple.
    pub fn growth_threshold<S: Scalar>(&self) -> S {
        let abs = self.growth_threshold_pct.map(S::from_decimal);
        let rel = self
            .growth_multiple_of_world
            .map(|m| S::from_decimal(m) * S::from_decimal(self.world_growth_pct));
        match (abs, rel) {
            (Some(a), Some(r)) => {
                if a >= r {
                    a
                } else {
                    r
                }
            }
            (Some(a), None) => a,
            (None, Some(r)) => r,
            (None, None) => S::zero(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Exclusion {
    pub institution_id: InstitutionId,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Stage {
    pub stage_name: String,
    pub surviving_ids: Vec<InstitutionId>,
    pub excluded: Vec<Exclusion>,
}

/// Everything needed to re-derive an institution's funnel outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunnelEvidence<S> {
    pub institution_id: InstitutionId,
    pub output_start: u64,
    pub output_end: u64,
    pub output_rank: u32,
    pub top_n: usize,
    pub growth_pct: Option<S>,
    pub growth_threshold: S,
    /// End minus start, in percentage points.
    pub first_author_change: Option<S>,
    pub first_author_drop_rank: Option<u32>,
    pub intl_collab_change: Option<S>,
    pub intl_collab_rise_rank: Option<u32>,
    pub top_k: u32,
}

impl<S: Scalar> FunnelEvidence<S> {
    pub fn passes_output(&self) -> bool {
        self.output_rank as usize <= self.top_n
    }

    pub fn passes_growth(&self) -> bool {
        self.growth_pct.is_some_and(|g| g > self.growth_threshold)
    }

    pub fn passes_dynamics(&self) -> bool {
        let within = |r: Option<u32>| r.is_some_and(|r| r <= self.top_k);
        within(self.first_author_drop_rank) || within(self.intl_collab_rise_rank)
    }

    pub fn passes(&self) -> bool {
        self.passes_output() && self.passes_growth() && self.passes_dynamics()
    }
}

impl<S: Copy> FunnelEvidence<S> {
    pub fn map_values<T>(&self, f: impl Fn(S) -> T) -> FunnelEvidence<T> {
        FunnelEvidence {
            institution_id: self.institution_id.clone(),
            output_start: self.output_start,
            output_end: self.output_end,
            output_rank: self.output_rank,
            top_n: self.top_n,
            growth_pct: self.growth_pct.map(&f),
            growth_threshold: f(self.growth_threshold),
            first_author_change: self.first_author_change.map(&f),
            first_author_drop_rank: self.first_author_drop_rank,
            intl_collab_change: self.intl_collab_change.map(&f),
            intl_collab_rise_rank: self.intl_collab_rise_rank,
            top_k: self.top_k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScreeningResult<S> {
    pub config: FunnelConfig,
    pub stages: Vec<Stage>,
    pub final_flagged: Vec<InstitutionId>,
    /// Institutions that reached the ranking stage's universe (stage 1).
    pub evidence: BTreeMap<InstitutionId, FunnelEvidence<S>>,
    pub warnings: Vec<String>,
}

impl<S: Copy> ScreeningResult<S> {
    /// Same result with every scalar converted, e.g. to exact strings for
    /// serialization.
    pub fn map_values<T>(&self, f: impl Fn(S) -> T) -> ScreeningResult<T> {
        ScreeningResult {
            config: self.config.clone(),
            stages: self.stages.clone(),
            final_flagged: self.final_flagged.clone(),
            evidence: self.evidence.iter().map(|(k, v)| (k.clone(), v.map_values(&f))).collect(),
            warnings: self.warnings.clone(),
        }
    }
}

impl<S: Scalar> ScreeningResult<S> {
    /// Box-style stage counts, one per line, ending with `final: N`.
    pub fn summary(&self) -> String {
        let c = &self.config;
        let mut out = format!("Selection funnel {} -> {}\n", c.start_year, c.end_year);
        for (i, stage) in self.stages.iter().enumerate() {
            let _ = writeln!(
                out,
                "stage {i} {}: {} retained, {} excluded",
                stage.stage_name,
                stage.surviving_ids.len(),
                stage.excluded.len()
            );
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        let _ = writeln!(out, "final: {}", self.final_flagged.len());
        out
    }
}

struct Measures<S> {
    start: YearTallies,
    end: YearTallies,
    fa_change: Option<S>,
    ic_change: Option<S>,
}

pub fn run_funnel<S: Scalar>(corpus: &Corpus, config: &FunnelConfig) -> Result<ScreeningResult<S>> {
    config.validate()?;
    for year in [config.start_year, config.end_year] {
        if !corpus.has_year(year) {
            return Err(Error::MissingYear(year));
        }
    }
    let rule = MultiAffiliationRule::default();
    let threshold: S = config.growth_threshold();
    let input: Vec<InstitutionId> = corpus.institutions().cloned().collect();

    let measures: BTreeMap<&InstitutionId, Measures<S>> = input
        .par_iter()
        .map(|id| {
            let start = tallies(corpus, id.as_str(), config.start_year, rule)?;
            let end = tallies(corpus, id.as_str(), config.end_year, rule)?;
            let change = |a: Option<S>, b: Option<S>| a.zip(b).map(|(a, b)| b - a);
            let fa_change = change(start.first_author_pct(), end.first_author_pct());
            let ic_change = change(start.intl_collab_pct(), end.intl_collab_pct());
            Ok((
                id,
                Measures {
                    start,
                    end,
                    fa_change,
                    ic_change,
                },
            ))
        })
        .collect::<Result<_>>()?;

    let mut stages = vec![Stage {
        stage_name: "input corpus".into(),
        surviving_ids: input.clone(),
        excluded: Vec::new(),
    }];
    let mut warnings = Vec::new();

    // Stage 1: top-n by end-year output, ties included.
    let active: Vec<(InstitutionId, u64)> = measures
        .iter()
        .filter(|(_, m)| m.end.output > 0)
        .map(|(id, m)| ((*id).clone(), m.end.output))
        .collect();
    if active.len() < config.top_n_by_output {
        warnings.push(format!(
            "only {} institutions have {} output; stage 1 keeps all of them (top_n_by_output = {})",
            active.len(),
            config.end_year,
            config.top_n_by_output
        ));
    }
    let output_ranks: BTreeMap<InstitutionId, u32> = competition_rank(active, Direction::Descending)
        .into_iter()
        .map(|e| (e.institution_id, e.rank))
        .collect();
    let mut stage1 = Stage {
        stage_name: format!("top {} by {} output", config.top_n_by_output, config.end_year),
        surviving_ids: Vec::new(),
        excluded: Vec::new(),
    };
    for id in &input {
        match output_ranks.get(id) {
            Some(&r) if r as usize <= config.top_n_by_output => stage1.surviving_ids.push(id.clone()),
            Some(&r) => stage1.excluded.push(Exclusion {
                institution_id: id.clone(),
                reason: format!("output rank {r} > top_n {}", config.top_n_by_output),
            }),
            None => stage1.excluded.push(Exclusion {
                institution_id: id.clone(),
                reason: format!("no {} output", config.end_year),
            }),
        }
    }

    // Stage-3 ranks are computed over the whole stage-1 universe.
    let ranks_by = |value: &dyn Fn(&Measures<S>) -> Option<S>, dir: Direction| -> BTreeMap<InstitutionId, u32> {
        let values = stage1
            .surviving_ids
            .iter()
            .filter_map(|id| value(&measures[id]).map(|v| (id.clone(), v)))
            .collect();
        competition_rank(values, dir)
            .into_iter()
            .map(|e| (e.institution_id, e.rank))
            .collect()
    };
    let fa_ranks = ranks_by(&|m| m.fa_change, Direction::Ascending);
    let ic_ranks = ranks_by(&|m| m.ic_change, Direction::Descending);

    let mut evidence = BTreeMap::new();
    for id in &stage1.surviving_ids {
        let m = &measures[id];
        evidence.insert(
            id.clone(),
            FunnelEvidence {
                institution_id: id.clone(),
                output_start: m.start.output,
                output_end: m.end.output,
                output_rank: output_ranks[id],
                top_n: config.top_n_by_output,
                growth_pct: crate::indicators::growth_pct(m.start.output, m.end.output),
                growth_threshold: threshold,
                first_author_change: m.fa_change,
                first_author_drop_rank: fa_ranks.get(id).copied(),
                intl_collab_change: m.ic_change,
                intl_collab_rise_rank: ic_ranks.get(id).copied(),
                top_k: config.top_k_rank,
            },
        );
    }

    let mut stage2 = Stage {
        stage_name: format!("growth > {}%", display_tenths(threshold)),
        surviving_ids: Vec::new(),
        excluded: Vec::new(),
    };
    for id in &stage1.surviving_ids {
        let ev: &FunnelEvidence<S> = &evidence[id];
        if ev.passes_growth() {
            stage2.surviving_ids.push(id.clone());
        } else {
            let reason = match ev.growth_pct {
                None => format!("growth undefined: no {} output", config.start_year),
                Some(g) => format!("growth {}% <= {}%", display_tenths(g), display_tenths(threshold)),
            };
            stage2.excluded.push(Exclusion {
                institution_id: id.clone(),
                reason,
            });
        }
    }

    let mut stage3 = Stage {
        stage_name: format!(
            "top {} in first-authorship drop and/or international-collaboration rise",
            config.top_k_rank
        ),
        surviving_ids: Vec::new(),
        excluded: Vec::new(),
    };
    for id in &stage2.surviving_ids {
        let ev = &evidence[id];
        if ev.passes_dynamics() {
            stage3.surviving_ids.push(id.clone());
        } else {
            let show = |r: Option<u32>| r.map_or("n/a".to_string(), |r| r.to_string());
            stage3.excluded.push(Exclusion {
                institution_id: id.clone(),
                reason: format!(
                    "rank > top_k (first-authorship drop rank {}, intl-collab rise rank {}, top_k {})",
                    show(ev.first_author_drop_rank),
                    show(ev.intl_collab_rise_rank),
                    config.top_k_rank
                ),
            });
        }
    }

    let final_flagged = stage3.surviving_ids.clone();
    stages.extend([stage1, stage2, stage3]);
    Ok(ScreeningResult {
        config: config.clone(),
        stages,
        final_flagged,
        evidence,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperprolificRow {
    pub institution_id: InstitutionId,
    pub counts: BTreeMap<i32, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupPanel<S> {
    pub summary: GroupSummary<S>,
    pub hyperprolific: Vec<HyperprolificRow>,
    pub hyperprolific_totals: BTreeMap<i32, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport<S> {
    pub years: Vec<i32>,
    pub hyperprolific_rule: HyperprolificRule,
    pub study: GroupPanel<S>,
    pub control: GroupPanel<S>,
}

/// Hyperprolific author counts per member and year, plus yearly totals.
pub fn hyperprolific_table(
    corpus: &Corpus,
    members: &[InstitutionId],
    years: &[i32],
    rule: HyperprolificRule,
) -> Result<(Vec<HyperprolificRow>, BTreeMap<i32, u64>)> {
    let rows = members
        .par_iter()
        .map(|m| {
            let mut counts = BTreeMap::new();
            for &y in years {
                counts.insert(y, hyperprolific_authors(corpus, m.as_str(), y, rule)?.len() as u64);
            }
            Ok(HyperprolificRow {
                institution_id: m.clone(),
                counts,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut totals: BTreeMap<i32, u64> = years.iter().map(|&y| (y, 0)).collect();
    for row in &rows {
        for (y, c) in &row.counts {
            *totals.entry(*y).or_default() += c;
        }
    }
    Ok((rows, totals))
}

pub fn compare_groups<S: Scalar>(
    corpus: &Corpus,
    study: &[InstitutionId],
    control: &[InstitutionId],
    years: &[i32],
    rule: HyperprolificRule,
) -> Result<ComparisonReport<S>> {
    if study.is_empty() || control.is_empty() {
        return Err(Error::Precondition("study and control groups must be non-empty".into()));
    }
    let s: BTreeSet<&InstitutionId> = study.iter().collect();
    let shared: Vec<String> = control.iter().filter(|c| s.contains(c)).map(|c| c.to_string()).collect();
    if !shared.is_empty() {
        return Err(Error::OverlappingGroups(shared));
    }
    let panel = |name: &str, members: &[InstitutionId]| -> Result<GroupPanel<S>> {
        let summary = group_summary(corpus, name, members, years)?;
        let (hyperprolific, hyperprolific_totals) = hyperprolific_table(corpus, &summary.member_ids, years, rule)?;
        Ok(GroupPanel {
            summary,
            hyperprolific,
            hyperprolific_totals,
        })
    };
    Ok(ComparisonReport {
        years: years.to_vec(),
        hyperprolific_rule: rule,
        study: panel("study", study)?,
        control: panel("control", control)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DossierConfig {
    /// Raise the hyperprolific indicator when the end-year count exceeds this.
    pub hyperprolific_max: u64,
    /// Raise the external-author indicator at this many flagged authors.
    pub external_min: u64,
    /// Raise the multi-affiliation indicator when the rate rises by more
    /// than this many points.
    pub multi_affiliation_rise_points: f64,
}

impl Default for DossierConfig {
    fn default() -> Self {
        Self {
            hyperprolific_max: 2,
            external_min: 1,
            multi_affiliation_rise_points: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndicatorCheck {
    pub name: &'static str,
    pub raised: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dossier {
    pub institution_id: InstitutionId,
    pub indicators: Vec<IndicatorCheck>,
    pub flags_raised: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub network: Option<GraphStats>,
}

fn flag_institutions(flag: &FlagRecord) -> Vec<&InstitutionId> {
    match &flag.evidence {
        FlagEvidence::Hyperprolific { institution, .. } | FlagEvidence::External { institution, .. } => {
            vec![institution]
        }
        FlagEvidence::CrossGroup { institutions, .. } => institutions.iter().collect(),
        FlagEvidence::Surge { .. } => Vec::new(),
    }
}

/// One dossier per input institution. Indicators are reported as booleans
/// with evidence; the only aggregate is the number raised.
pub fn flag_report<S: Scalar>(
    corpus: &Corpus,
    result: &ScreeningResult<S>,
    flags: &[FlagRecord],
    network: Option<&GraphStats>,
    config: &DossierConfig,
) -> Result<Vec<Dossier>> {
    let c = &result.config;
    let rule = MultiAffiliationRule::default();
    let rise_threshold = S::from_decimal(config.multi_affiliation_rise_points);
    let flagged: BTreeSet<&InstitutionId> = result.final_flagged.iter().collect();
    let mut by_kind: BTreeMap<(&InstitutionId, FlagKind), Vec<&FlagRecord>> = BTreeMap::new();
    for f in flags {
        for inst in flag_institutions(f) {
            by_kind.entry((inst, f.flag)).or_default().push(f);
        }
    }
    let count = |id: &InstitutionId, kind: FlagKind, year: Option<i32>| -> u64 {
        by_kind.get(&(id, kind)).map_or(0, |v| {
            v.iter().filter(|f| year.is_none_or(|y| f.years.contains(&y))).count() as u64
        })
    };
    let input = result.stages.first().map(|s| s.surviving_ids.as_slice()).unwrap_or(&[]);
    input
        .iter()
        .map(|id| {
            let ev = result.evidence.get(id);
            let mut indicators = Vec::new();
            indicators.push(IndicatorCheck {
                name: "funnel_passage",
                raised: flagged.contains(id),
                detail: match ev {
                    Some(e) => format!(
                        "growth {} vs threshold {}; first-authorship drop rank {}; intl-collab rise rank {}",
                        e.growth_pct.map_or("n/a".into(), |g| display_tenths(g)),
                        display_tenths(e.growth_threshold),
                        e.first_author_drop_rank.map_or("n/a".into(), |r| r.to_string()),
                        e.intl_collab_rise_rank.map_or("n/a".into(), |r| r.to_string())
                    ),
                    None => "outside the stage-1 universe".into(),
                },
            });
            let hyper = count(id, FlagKind::Hyperprolific, Some(c.end_year));
            indicators.push(IndicatorCheck {
                name: "hyperprolific_authors",
                raised: hyper > config.hyperprolific_max,
                detail: format!("{hyper} in {} (limit {})", c.end_year, config.hyperprolific_max),
            });
            let external = count(id, FlagKind::ExternalAuthor, None);
            indicators.push(IndicatorCheck {
                name: "external_authors",
                raised: external >= config.external_min,
                detail: format!("{external} flagged (minimum {})", config.external_min),
            });
            let start = tallies(corpus, id.as_str(), c.start_year, rule)?.multi_affiliation_pct::<S>();
            let end = tallies(corpus, id.as_str(), c.end_year, rule)?.multi_affiliation_pct::<S>();
            let rise = start.zip(end).map(|(s, e)| e - s);
            indicators.push(IndicatorCheck {
                name: "multi_affiliation_rise",
                raised: rise.is_some_and(|r| r > rise_threshold),
                detail: format!(
                    "{} points (limit {})",
                    rise.map_or("n/a".into(), |r| display_tenths(r)),
                    config.multi_affiliation_rise_points
                ),
            });
            let cross = count(id, FlagKind::CrossGroup, None);
            indicators.push(IndicatorCheck {
                name: "overlap_participation",
                raised: cross > 0,
                detail: format!("{cross} cross-group authors"),
            });
            let ic_rank = ev.and_then(|e| e.intl_collab_rise_rank);
            indicators.push(IndicatorCheck {
                name: "intl_collab_rank",
                raised: ic_rank.is_some_and(|r| r <= c.top_k_rank),
                detail: format!(
                    "rise rank {} (top_k {})",
                    ic_rank.map_or("n/a".into(), |r| r.to_string()),
                    c.top_k_rank
                ),
            });
            let flags_raised = indicators.iter().filter(|i| i.raised).count();
            Ok(Dossier {
                institution_id: id.clone(),
                indicators,
                flags_raised,
                network: network.copied(),
            })
        })
        .collect()
}
