use std::fmt::Write as _;
use std::str::FromStr;

use quick_xml::escape::escape;
use quick_xml::events::Event;
use quick_xml::Reader;
use serde::{Deserialize, Serialize};

use super::{CoauthorshipGraph, Edge, GraphParams, Node, Qualification};
use crate::corpus::InstitutionId;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphFormat {
    /// `source,target,strength` rows.
    Csv,
    /// VOSviewer map/network JSON.
    VosviewerJson,
    Graphml,
}

impl GraphFormat {
    pub const SUPPORTED: [&'static str; 3] = ["csv", "vosviewer-json", "graphml"];

    pub fn extension(self) -> &'static str {
        match self {
            GraphFormat::Csv => "csv",
            GraphFormat::VosviewerJson => "json",
            GraphFormat::Graphml => "graphml",
        }
    }
}

impl FromStr for GraphFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" | "edge-list" | "edgelist" => Ok(GraphFormat::Csv),
            "vosviewer-json" | "vosviewer" | "json" => Ok(GraphFormat::VosviewerJson),
            "graphml" | "xml" => Ok(GraphFormat::Graphml),
            _ => Err(Error::UnsupportedFormat {
                given: s.to_string(),
                supported: Self::SUPPORTED.to_vec(),
            }),
        }
    }
}

pub fn export_graph(graph: &CoauthorshipGraph, format: GraphFormat) -> Result<Vec<u8>> {
    match format {
        GraphFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["source", "target", "strength"])?;
            for e in &graph.edges {
                w.write_record([e.a.as_str(), e.b.as_str(), &e.strength.to_string()])?;
            }
            w.into_inner().map_err(|e| Error::Io(e.into_error()))
        }
        GraphFormat::VosviewerJson => {
            let mut out = serde_json::to_vec_pretty(&VosFile::from_graph(graph))?;
            out.push(b'\n');
            Ok(out)
        }
        GraphFormat::Graphml => Ok(write_graphml(graph).into_bytes()),
    }
}

pub fn import_graph(bytes: &[u8], format: GraphFormat) -> Result<CoauthorshipGraph> {
    match format {
        GraphFormat::Csv => {
            let mut reader = csv::Reader::from_reader(bytes);
            let mut edges = Vec::new();
            let mut ids = std::collections::BTreeSet::new();
            for row in reader.deserialize::<CsvEdge>() {
                let row = row?;
                ids.insert(row.source.clone());
                ids.insert(row.target.clone());
                edges.push(Edge {
                    a: row.source.into(),
                    b: row.target.into(),
                    strength: row.strength,
                });
            }
            let nodes = ids.into_iter().map(|id| bare_node(id.into())).collect();
            CoauthorshipGraph::from_parts(GraphParams::default(), nodes, edges)
        }
        GraphFormat::VosviewerJson => serde_json::from_slice::<VosFile>(bytes)?.into_graph(),
        GraphFormat::Graphml => read_graphml(bytes),
    }
}

fn bare_node(institution_id: InstitutionId) -> Node {
    Node {
        institution_id,
        article_count: 0,
        seed_coauthored: 0,
        total_link_strength: 0,
        cluster: None,
        seed: false,
    }
}

#[derive(Deserialize)]
struct CsvEdge {
    source: String,
    target: String,
    strength: u64,
}

#[derive(Serialize, Deserialize)]
struct VosFile {
    network: VosNetwork,
}

#[derive(Serialize, Deserialize)]
struct VosNetwork {
    items: Vec<VosItem>,
    links: Vec<VosLink>,
}

#[derive(Serialize, Deserialize)]
struct VosItem {
    id: u64,
    label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cluster: Option<u32>,
    weights: VosWeights,
    scores: VosScores,
}

#[derive(Serialize, Deserialize)]
struct VosWeights {
    #[serde(rename = "Documents")]
    documents: u64,
    #[serde(rename = "Total link strength")]
    total_link_strength: u64,
    #[serde(rename = "Seed co-authored documents", default)]
    seed_coauthored: u64,
}

#[derive(Serialize, Deserialize)]
struct VosScores {
    #[serde(rename = "Seed group", default)]
    seed_group: u8,
}

#[derive(Serialize, Deserialize)]
struct VosLink {
    source_id: u64,
    target_id: u64,
    strength: u64,
}

impl VosFile {
    fn from_graph(graph: &CoauthorshipGraph) -> Self {
        let items = graph
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| VosItem {
                id: i as u64 + 1,
                label: n.institution_id.to_string(),
                cluster: n.cluster,
                weights: VosWeights {
                    documents: n.article_count,
                    total_link_strength: n.total_link_strength,
                    seed_coauthored: n.seed_coauthored,
                },
                scores: VosScores {
                    seed_group: n.seed as u8,
                },
            })
            .collect();
        let links = graph
            .edges
            .iter()
            .map(|e| VosLink {
                source_id: graph.index_of(e.a.as_str()).expect("node") as u64 + 1,
                target_id: graph.index_of(e.b.as_str()).expect("node") as u64 + 1,
                strength: e.strength,
            })
            .collect();
        VosFile {
            network: VosNetwork { items, links },
        }
    }

    fn into_graph(self) -> Result<CoauthorshipGraph> {
        let labels: std::collections::HashMap<u64, String> =
            self.network.items.iter().map(|i| (i.id, i.label.clone())).collect();
        let label = |id: u64| {
            labels
                .get(&id)
                .cloned()
                .ok_or_else(|| Error::Precondition(format!("link refers to unknown item {id}")))
        };
        let edges = self
            .network
            .links
            .iter()
            .map(|l| {
                Ok(Edge {
                    a: label(l.source_id)?.into(),
                    b: label(l.target_id)?.into(),
                    strength: l.strength,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut params = GraphParams::default();
        let nodes = self
            .network
            .items
            .into_iter()
            .map(|i| {
                if i.scores.seed_group == 1 {
                    params.seed_group.push(i.label.as_str().into());
                }
                Node {
                    institution_id: i.label.into(),
                    article_count: i.weights.documents,
                    seed_coauthored: i.weights.seed_coauthored,
                    total_link_strength: i.weights.total_link_strength,
                    cluster: i.cluster,
                    seed: i.scores.seed_group == 1,
                }
            })
            .collect();
        params.seed_group.sort();
        CoauthorshipGraph::from_parts(params, nodes, edges)
    }
}

const GRAPHML_KEYS: [(&str, &str, &str); 9] = [
    ("year", "graph", "int"),
    ("min_articles", "graph", "long"),
    ("qualification", "graph", "string"),
    ("article_count", "node", "long"),
    ("seed_coauthored", "node", "long"),
    ("total_link_strength", "node", "long"),
    ("cluster", "node", "int"),
    ("seed", "node", "boolean"),
    ("strength", "edge", "long"),
];

fn qualification_name(q: Qualification) -> &'static str {
    match q {
        Qualification::TotalOutput => "total_output",
        Qualification::CoPublished => "co_published",
    }
}

fn write_graphml(graph: &CoauthorshipGraph) -> String {
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    for (id, domain, ty) in GRAPHML_KEYS {
        let _ = writeln!(s, "  <key id=\"{id}\" for=\"{domain}\" attr.name=\"{id}\" attr.type=\"{ty}\"/>");
    }
    s.push_str("  <graph id=\"G\" edgedefault=\"undirected\">\n");
    let p = &graph.params;
    let _ = writeln!(s, "    <data key=\"year\">{}</data>", p.year);
    let _ = writeln!(s, "    <data key=\"min_articles\">{}</data>", p.min_articles);
    let _ = writeln!(s, "    <data key=\"qualification\">{}</data>", qualification_name(p.qualification));
    for n in &graph.nodes {
        let _ = writeln!(s, "    <node id=\"{}\">", escape(n.institution_id.as_str()));
        let _ = writeln!(s, "      <data key=\"article_count\">{}</data>", n.article_count);
        let _ = writeln!(s, "      <data key=\"seed_coauthored\">{}</data>", n.seed_coauthored);
        let _ = writeln!(s, "      <data key=\"total_link_strength\">{}</data>", n.total_link_strength);
        if let Some(c) = n.cluster {
            let _ = writeln!(s, "      <data key=\"cluster\">{c}</data>");
        }
        let _ = writeln!(s, "      <data key=\"seed\">{}</data>", n.seed);
        s.push_str("    </node>\n");
    }
    for e in &graph.edges {
        let _ = writeln!(
            s,
            "    <edge source=\"{}\" target=\"{}\">\n      <data key=\"strength\">{}</data>\n    </edge>",
            escape(e.a.as_str()),
            escape(e.b.as_str()),
            e.strength
        );
    }
    s.push_str("  </graph>\n</graphml>\n");
    s
}

fn xml_err(pos: u64, message: impl std::fmt::Display) -> Error {
    Error::Parse {
        line: pos as usize,
        message: format!("graphml (byte {pos}): {message}"),
    }
}

fn parse_num<T: FromStr>(text: &str, pos: u64) -> Result<T> {
    text.trim().parse().map_err(|_| xml_err(pos, format!("bad number `{text}`")))
}

fn read_graphml(bytes: &[u8]) -> Result<CoauthorshipGraph> {
    enum Owner {
        Graph,
        Node(usize),
        Edge(usize),
    }
    let mut reader = Reader::from_reader(bytes);
    reader.config_mut().trim_text(true);
    let mut params = GraphParams::default();
    let mut nodes: Vec<Node> = Vec::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut owner = Owner::Graph;
    let mut data_key: Option<String> = None;
    let mut buf = Vec::new();
    loop {
        let pos = reader.buffer_position();
        let event = reader.read_event_into(&mut buf).map_err(|e| xml_err(pos, e))?;
        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let attr = |name: &[u8]| -> Result<Option<String>> {
                    for a in e.attributes() {
                        let a = a.map_err(|err| xml_err(pos, err))?;
                        if a.key.as_ref() == name {
                            return Ok(Some(a.unescape_value().map_err(|err| xml_err(pos, err))?.into_owned()));
                        }
                    }
                    Ok(None)
                };
                let required = |name: &[u8]| -> Result<String> {
                    attr(name)?.ok_or_else(|| {
                        xml_err(pos, format!("missing attribute {}", String::from_utf8_lossy(name)))
                    })
                };
                match e.name().as_ref() {
                    b"node" => {
                        nodes.push(bare_node(required(b"id")?.into()));
                        owner = Owner::Node(nodes.len() - 1);
                    }
                    b"edge" => {
                        edges.push(Edge {
                            a: required(b"source")?.into(),
                            b: required(b"target")?.into(),
                            strength: 0,
                        });
                        owner = Owner::Edge(edges.len() - 1);
                    }
                    b"data" => data_key = Some(required(b"key")?),
                    _ => {}
                }
            }
            Event::Text(t) => {
                let Some(key) = data_key.as_deref() else { continue };
                let text = t.unescape().map_err(|e| xml_err(pos, e))?.into_owned();
                match (&owner, key) {
                    (Owner::Graph, "year") => params.year = parse_num(&text, pos)?,
                    (Owner::Graph, "min_articles") => params.min_articles = parse_num(&text, pos)?,
                    (Owner::Graph, "qualification") => {
                        params.qualification = match text.as_str() {
                            "co_published" => Qualification::CoPublished,
                            _ => Qualification::TotalOutput,
                        }
                    }
                    (Owner::Node(i), "article_count") => nodes[*i].article_count = parse_num(&text, pos)?,
                    (Owner::Node(i), "seed_coauthored") => nodes[*i].seed_coauthored = parse_num(&text, pos)?,
                    (Owner::Node(i), "total_link_strength") => {
                        nodes[*i].total_link_strength = parse_num(&text, pos)?
                    }
                    (Owner::Node(i), "cluster") => nodes[*i].cluster = Some(parse_num(&text, pos)?),
                    (Owner::Node(i), "seed") => nodes[*i].seed = text == "true",
                    (Owner::Edge(i), "strength") => edges[*i].strength = parse_num(&text, pos)?,
                    _ => {}
                }
            }
            Event::End(ref e) => match e.name().as_ref() {
                b"data" => data_key = None,
                b"node" | b"edge" => owner = Owner::Graph,
                _ => {}
            },
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    params.seed_group = nodes.iter().filter(|n| n.seed).map(|n| n.institution_id.clone()).collect();
    params.seed_group.sort();
    CoauthorshipGraph::from_parts(params, nodes, edges)
}
