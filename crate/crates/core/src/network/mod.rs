//! Institutional co-authorship networks around a seed group.

mod cluster;
mod io;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, InstitutionId};
use crate::error::{Error, Result};

pub use cluster::{cluster_graph, modularity};
pub use io::{export_graph, import_graph, GraphFormat};

/// Which record count an external institution must reach to become a node.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Qualification {
    /// All of the institution's records in the year.
    #[default]
    TotalOutput,
    /// Only records shared with at least one seed member.
    CoPublished,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphParams {
    pub year: i32,
    pub seed_group: Vec<InstitutionId>,
    pub min_articles: u64,
    pub qualification: Qualification,
}

impl Default for GraphParams {
    fn default() -> Self {
        Self {
            year: 0,
            seed_group: Vec::new(),
            min_articles: 91,
            qualification: Qualification::TotalOutput,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub institution_id: InstitutionId,
    /// Records in the year listing the institution.
    pub article_count: u64,
    /// Of those, records shared with a seed member.
    pub seed_coauthored: u64,
    pub total_link_strength: u64,
    pub cluster: Option<u32>,
    pub seed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    /// `a < b`.
    pub a: InstitutionId,
    pub b: InstitutionId,
    pub strength: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoauthorshipGraph {
    pub params: GraphParams,
    /// Sorted by institution id.
    pub nodes: Vec<Node>,
    /// Sorted by `(a, b)`.
    pub edges: Vec<Edge>,
}

impl CoauthorshipGraph {
    /// Builds a graph from nodes and edges, recomputing link strengths.
    pub fn from_parts(params: GraphParams, mut nodes: Vec<Node>, mut edges: Vec<Edge>) -> Result<Self> {
        nodes.sort_by(|x, y| x.institution_id.cmp(&y.institution_id));
        if nodes.windows(2).any(|w| w[0].institution_id == w[1].institution_id) {
            return Err(Error::Precondition("duplicate node".into()));
        }
        for e in &mut edges {
            if e.a == e.b {
                return Err(Error::Precondition(format!("self-edge on {}", e.a)));
            }
            if e.strength == 0 {
                return Err(Error::Precondition(format!("zero-strength edge {}-{}", e.a, e.b)));
            }
            if e.a > e.b {
                std::mem::swap(&mut e.a, &mut e.b);
            }
        }
        edges.sort();
        if edges.windows(2).any(|w| w[0].a == w[1].a && w[0].b == w[1].b) {
            return Err(Error::Precondition("duplicate edge".into()));
        }
        let mut graph = Self { params, nodes, edges };
        let mut strength = vec![0u64; graph.nodes.len()];
        for e in &graph.edges {
            for end in [&e.a, &e.b] {
                let i = graph
                    .index_of(end.as_str())
                    .ok_or_else(|| Error::Precondition(format!("edge endpoint {end} is not a node")))?;
                strength[i] += e.strength;
            }
        }
        for (n, s) in graph.nodes.iter_mut().zip(strength) {
            n.total_link_strength = s;
        }
        Ok(graph)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.nodes.binary_search_by(|n| n.institution_id.as_str().cmp(id)).ok()
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.index_of(id).map(|i| &self.nodes[i])
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edge_strength_sum(&self) -> u64 {
        self.edges.iter().map(|e| e.strength).sum()
    }

    pub fn node_strength_sum(&self) -> u64 {
        self.nodes.iter().map(|n| n.total_link_strength).sum()
    }

    /// Node partition by cluster label, ignoring unlabeled nodes.
    pub fn clusters(&self) -> BTreeMap<u32, Vec<&InstitutionId>> {
        let mut out: BTreeMap<u32, Vec<&InstitutionId>> = BTreeMap::new();
        for n in &self.nodes {
            if let Some(c) = n.cluster {
                out.entry(c).or_default().push(&n.institution_id);
            }
        }
        out
    }
}

#[derive(Default)]
struct YearCounts<'a> {
    output: HashMap<&'a str, u64>,
    seed_coauthored: HashMap<&'a str, u64>,
}

impl<'a> YearCounts<'a> {
    fn merge(mut self, other: Self) -> Self {
        for (k, v) in other.output {
            *self.output.entry(k).or_insert(0) += v;
        }
        for (k, v) in other.seed_coauthored {
            *self.seed_coauthored.entry(k).or_insert(0) += v;
        }
        self
    }
}

pub fn build_graph(corpus: &Corpus, params: GraphParams) -> Result<CoauthorshipGraph> {
    let mut params = params;
    params.seed_group.sort();
    params.seed_group.dedup();
    if params.seed_group.is_empty() {
        return Err(Error::Precondition("seed group must not be empty".into()));
    }
    for s in &params.seed_group {
        corpus.check_institution(s.as_str())?;
    }
    let year = params.year;
    let seed: BTreeSet<&str> = params.seed_group.iter().map(InstitutionId::as_str).collect();
    let in_year: Vec<_> = corpus.records().par_iter().filter(|r| r.year == year).collect();

    let counts = in_year
        .par_iter()
        .fold(YearCounts::default, |mut acc, r| {
            let insts = r.institutions();
            let touches_seed = insts.iter().any(|i| seed.contains(i.as_str()));
            for i in insts {
                *acc.output.entry(i.as_str()).or_insert(0) += 1;
                if touches_seed {
                    *acc.seed_coauthored.entry(i.as_str()).or_insert(0) += 1;
                }
            }
            acc
        })
        .reduce(YearCounts::default, YearCounts::merge);

    let mut members: BTreeSet<&str> = seed.clone();
    for (&inst, &shared) in &counts.seed_coauthored {
        if seed.contains(inst) {
            continue;
        }
        let measure = match params.qualification {
            Qualification::TotalOutput => counts.output[inst],
            Qualification::CoPublished => shared,
        };
        if measure >= params.min_articles {
            members.insert(inst);
        }
    }

    let pairs = in_year
        .par_iter()
        .fold(HashMap::<(&str, &str), u64>::new, |mut acc, r| {
            let listed: Vec<&str> = r
                .institutions()
                .into_iter()
                .map(InstitutionId::as_str)
                .filter(|i| members.contains(i))
                .collect();
            for (x, a) in listed.iter().enumerate() {
                for b in &listed[x + 1..] {
                    *acc.entry((*a, *b)).or_insert(0) += 1;
                }
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });

    let nodes = members
        .iter()
        .map(|&id| Node {
            institution_id: id.into(),
            article_count: counts.output.get(id).copied().unwrap_or(0),
            seed_coauthored: counts.seed_coauthored.get(id).copied().unwrap_or(0),
            total_link_strength: 0,
            cluster: None,
            seed: seed.contains(id),
        })
        .collect();
    let edges = pairs
        .into_iter()
        .map(|((a, b), strength)| Edge {
            a: a.into(),
            b: b.into(),
            strength,
        })
        .collect();
    CoauthorshipGraph::from_parts(params, nodes, edges)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub min_articles: u64,
    pub nodes: u64,
    pub external_nodes: u64,
    pub links: u64,
    /// Sum over edges.
    pub total_link_strength: u64,
    /// Sum over nodes; twice the edge sum.
    pub node_link_strength_sum: u64,
    pub clusters: u64,
}

impl GraphStats {
    pub fn footer(&self) -> String {
        format!(
            "Articles per institution: {} | External institutions: {} | Links: {} | Total link strength: {} | Clusters: {}",
            self.min_articles,
            self.external_nodes,
            self.links,
            abbreviate(self.total_link_strength),
            self.clusters
        )
    }
}

/// `7000` as `7k`; values below a thousand are printed in full.
pub fn abbreviate(value: u64) -> String {
    if value < 1000 {
        value.to_string()
    } else {
        format!("{}k", (value + 500) / 1000)
    }
}

pub fn graph_stats(graph: &CoauthorshipGraph) -> GraphStats {
    GraphStats {
        min_articles: graph.params.min_articles,
        nodes: graph.nodes.len() as u64,
        external_nodes: graph.nodes.iter().filter(|n| !n.seed).count() as u64,
        links: graph.edges.len() as u64,
        total_link_strength: graph.edge_strength_sum(),
        node_link_strength_sum: graph.node_strength_sum(),
        clusters: graph.clusters().len() as u64,
    }
}

#[cfg(test)]
mod tests;
