//! Hb-graph file formats.
//!
//! JSON:
//! `{"n": 3, "labels": ["a", "b", "c"], "edges": [{"w": 1.0, "members": {"0": 2.0, "1": 1.0}}]}`
//! with `labels` optional and member keys being vertex indices.
//!
//! Co-occurrence CSV: one hb-edge per line, one token per field. Repeated
//! tokens become multiplicities, every hb-edge has weight 1 and vertices are
//! numbered by first appearance.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::hbgraph::{HbEdge, HbGraph, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    HbJson,
    CoocCsv,
}

impl std::str::FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hbjson" | "json" => Ok(InputFormat::HbJson),
            "cooc_csv" | "csv" => Ok(InputFormat::CoocCsv),
            other => Err(Error::InvalidArgument(format!("unknown input format `{other}`"))),
        }
    }
}

impl InputFormat {
    /// Guesses from the file extension, defaulting to JSON.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => InputFormat::CoocCsv,
            _ => InputFormat::HbJson,
        }
    }
}

#[derive(Deserialize)]
struct GraphDoc {
    n: usize,
    #[serde(default)]
    labels: Option<Vec<String>>,
    edges: Vec<EdgeDoc>,
}

#[derive(Deserialize)]
struct EdgeDoc {
    w: f64,
    members: BTreeMap<String, f64>,
}

#[derive(Serialize)]
struct GraphOut<'a> {
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<&'a [String]>,
    edges: Vec<EdgeOut<'a>>,
}

#[derive(Serialize)]
struct EdgeOut<'a> {
    w: f64,
    #[serde(serialize_with = "members_in_vertex_order")]
    members: &'a [(VertexId, f64)],
}

fn members_in_vertex_order<S: Serializer>(members: &&[(VertexId, f64)], s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut map = s.serialize_map(Some(members.len()))?;
    for (v, m) in members.iter() {
        map.serialize_entry(&v.0.to_string(), m)?;
    }
    map.end()
}

pub fn graph_to_json(g: &HbGraph) -> Result<String> {
    let doc = GraphOut {
        n: g.n(),
        labels: g.labels(),
        edges: g
            .edges()
            .iter()
            .map(|e| EdgeOut {
                w: e.weight(),
                members: e.members(),
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn graph_from_json(text: &str) -> Result<HbGraph> {
    graph_from_json_at(text, Path::new("<memory>"))
}

fn graph_from_json_at(text: &str, path: &Path) -> Result<HbGraph> {
    let doc: GraphDoc = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })?;
    let edges = doc
        .edges
        .into_iter()
        .enumerate()
        .map(|(j, e)| {
            let members = e
                .members
                .into_iter()
                .map(|(k, m)| {
                    k.trim()
                        .parse::<usize>()
                        .map(|v| (VertexId(v), m))
                        .map_err(|_| Error::Validation(format!("hb-edge {j}: member key `{k}` is not a vertex index")))
                })
                .collect::<Result<Vec<_>>>()?;
            HbEdge::new(members, e.w).map_err(|err| Error::Validation(format!("hb-edge {j}: {err}")))
        })
        .collect::<Result<Vec<_>>>()?;
    HbGraph::new(doc.n, edges, doc.labels)
}

pub fn write_graph_json(g: &HbGraph, path: &Path) -> Result<()> {
    fs::write(path, graph_to_json(g)? + "\n")?;
    Ok(())
}

pub fn read_graph_json(path: &Path) -> Result<HbGraph> {
    graph_from_json_at(&fs::read_to_string(path)?, path)
}

pub fn graph_from_cooc_csv(text: &str) -> Result<HbGraph> {
    graph_from_cooc_csv_at(text, Path::new("<memory>"))
}

fn graph_from_cooc_csv_at(text: &str, path: &Path) -> Result<HbGraph> {
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    let mut edges = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line_no = k + 1;
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message,
        };
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(line.as_bytes());
        let mut tokens = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| parse_err(e.to_string()))?;
            tokens.extend(record.iter().map(str::trim).filter(|t| !t.is_empty()).map(str::to_string));
        }
        if tokens.is_empty() {
            return Err(parse_err("empty hb-edge".into()));
        }
        let members: Vec<(VertexId, f64)> = tokens
            .into_iter()
            .map(|t| {
                let next = labels.len();
                let id = *ids.entry(t.clone()).or_insert_with(|| {
                    labels.push(t);
                    next
                });
                (VertexId(id), 1.0)
            })
            .collect();
        edges.push(HbEdge::new(members, 1.0)?);
    }
    if edges.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: "no hb-edges".into(),
        });
    }
    HbGraph::new(labels.len(), edges, Some(labels))
}

pub fn read_cooc_csv(path: &Path) -> Result<HbGraph> {
    graph_from_cooc_csv_at(&fs::read_to_string(path)?, path)
}

/// Reads and validates an hb-graph file.
pub fn ingest(path: &Path, format: InputFormat) -> Result<HbGraph> {
    match format {
        InputFormat::HbJson => read_graph_json(path),
        InputFormat::CoocCsv => read_cooc_csv(path),
    }
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}
