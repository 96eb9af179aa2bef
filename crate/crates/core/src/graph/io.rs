//! Graph files.
//!
//! JSON:
//! `{ "vertices": [{"id", "friend_count", "follower_count", "is_target"}...], "edges": [["u","v"]...] }`
//!
//! CSV: an edge list with header `src,dst` plus an optional sidecar with header
//! `id,friend_count,follower_count,is_target`.
//!
//! In both formats the edge `[u, v]` means "`v` follows `u`".

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{SocialGraph, VertexId};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphFormat {
    Json,
    CsvEdgeList { metadata: Option<PathBuf> },
}

impl GraphFormat {
    /// Picks JSON for `.json` paths and a plain CSV edge list otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => GraphFormat::Json,
            _ => GraphFormat::CsvEdgeList { metadata: None },
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub target_count: usize,
    /// Vertices whose counts were taken from graph degrees.
    pub defaulted_metadata: Vec<VertexId>,
}

impl LoadReport {
    fn new(graph: &SocialGraph, defaulted_metadata: Vec<VertexId>) -> Self {
        LoadReport {
            vertex_count: graph.len(),
            edge_count: graph.edge_count(),
            target_count: graph.targets().len(),
            defaulted_metadata,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonVertex {
    id: VertexId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    friend_count: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    follower_count: Option<u64>,
    #[serde(default)]
    is_target: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonGraph {
    vertices: Vec<JsonVertex>,
    #[serde(default)]
    edges: Vec<(VertexId, VertexId)>,
}

#[derive(Debug, Deserialize)]
struct EdgeRow {
    src: VertexId,
    dst: VertexId,
}

#[derive(Debug, Deserialize)]
struct MetaRow {
    id: VertexId,
    friend_count: Option<u64>,
    follower_count: Option<u64>,
    #[serde(default, deserialize_with = "flexible_bool")]
    is_target: bool,
}

fn flexible_bool<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<bool, D::Error> {
    let s = String::deserialize(d)?;
    match s.trim().to_ascii_lowercase().as_str() {
        "" | "0" | "false" | "no" => Ok(false),
        "1" | "true" | "yes" => Ok(true),
        other => Err(serde::de::Error::custom(format!("not a boolean: {other:?}"))),
    }
}

pub fn load_graph(path: &Path, format: &GraphFormat) -> Result<(SocialGraph, LoadReport)> {
    match format {
        GraphFormat::Json => read_json(BufReader::new(File::open(path)?)),
        GraphFormat::CsvEdgeList { metadata } => {
            let meta = match metadata {
                Some(p) => Some(BufReader::new(File::open(p)?)),
                None => None,
            };
            read_csv(BufReader::new(File::open(path)?), meta)
        }
    }
}

pub(crate) fn read_json<R: Read>(reader: R) -> Result<(SocialGraph, LoadReport)> {
    let raw: JsonGraph = serde_json::from_reader(reader).map_err(|e| {
        if e.is_io() {
            Error::Io(e.into())
        } else {
            Error::parse(e.line(), e.to_string())
        }
    })?;
    let mut b = SocialGraph::builder();
    for v in raw.vertices {
        b.vertex_partial(v.id, v.friend_count, v.follower_count, v.is_target)?;
    }
    for (u, v) in raw.edges {
        b.edge(u, v)?;
    }
    let (g, defaulted) = b.build_with_report()?;
    let report = LoadReport::new(&g, defaulted);
    Ok((g, report))
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::parse(line, format!("{kind:?}")),
    }
}

pub(crate) fn read_csv<R: Read, M: Read>(edges: R, metadata: Option<M>) -> Result<(SocialGraph, LoadReport)> {
    let mut b = SocialGraph::builder();
    if let Some(meta) = metadata {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(meta);
        for row in rdr.deserialize::<MetaRow>() {
            let row = row.map_err(csv_error)?;
            b.vertex_partial(row.id, row.friend_count, row.follower_count, row.is_target)?;
        }
    }
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(edges);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    if headers.len() != 2 || &headers[0] != "src" || &headers[1] != "dst" {
        return Err(Error::parse(1, format!("expected header \"src,dst\", got {headers:?}")));
    }
    for row in rdr.deserialize::<EdgeRow>() {
        let row = row.map_err(csv_error)?;
        for id in [&row.src, &row.dst] {
            if !b.contains(id) {
                b.vertex_without_meta(id.clone())?;
            }
        }
        b.edge(row.src, row.dst)?;
    }
    let (g, defaulted) = b.build_with_report()?;
    let report = LoadReport::new(&g, defaulted);
    Ok((g, report))
}

/// Writes the JSON schema. Output is deterministic for a given graph.
pub fn write_graph_json<W: Write>(graph: &SocialGraph, writer: W) -> Result<()> {
    let doc = JsonGraph {
        vertices: (0..graph.len())
            .map(|v| {
                let m = graph.meta(v);
                JsonVertex {
                    id: graph.id(v).clone(),
                    friend_count: Some(m.friend_count),
                    follower_count: Some(m.follower_count),
                    is_target: m.is_target,
                }
            })
            .collect(),
        edges: graph
            .edges()
            .iter()
            .map(|&(u, v)| (graph.id(u).clone(), graph.id(v).clone()))
            .collect(),
    };
    serde_json::to_writer_pretty(writer, &doc).map_err(|e| Error::Io(e.into()))
}
