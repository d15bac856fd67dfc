use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::corpus::InstitutionId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Largest value gets rank 1.
    Descending,
    /// Smallest value gets rank 1.
    Ascending,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankEntry<V> {
    pub institution_id: InstitutionId,
    pub value: V,
    pub rank: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ranking<V> {
    /// Sorted best-first; equal values are listed by institution id.
    pub entries: Vec<RankEntry<V>>,
    pub no_data: Vec<InstitutionId>,
    pub warning: Option<String>,
}

impl<V> Ranking<V> {
    pub fn rank_of(&self, institution: &str) -> Option<u32> {
        self.entries
            .iter()
            .find(|e| e.institution_id.as_str() == institution)
            .map(|e| e.rank)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Standard competition ranking ("1224"): tied values share the smaller
/// rank and the next distinct value skips ahead.
pub fn competition_rank<V: PartialOrd + Copy>(
    mut values: Vec<(InstitutionId, V)>,
    direction: Direction,
) -> Vec<RankEntry<V>> {
    values.sort_by(|(ida, a), (idb, b)| {
        let ord = a.partial_cmp(b).unwrap_or(Ordering::Equal);
        let ord = match direction {
            Direction::Descending => ord.reverse(),
            Direction::Ascending => ord,
        };
        ord.then_with(|| ida.cmp(idb))
    });
    let mut out: Vec<RankEntry<V>> = Vec::with_capacity(values.len());
    for (i, (id, value)) in values.into_iter().enumerate() {
        let rank = match out.last() {
            Some(prev) if prev.value.partial_cmp(&value) == Some(Ordering::Equal) => prev.rank,
            _ => i as u32 + 1,
        };
        out.push(RankEntry {
            institution_id: id,
            value,
            rank,
        });
    }
    out
}
