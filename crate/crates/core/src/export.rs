//! Map and network files for external graph-visualization tools.
//!
//! Both files are tab-separated with a header row. The map file lists one
//! node per retained journal (`id label weight score`), the network file one
//! line per similarity edge between retained journals (`id1 id2 weight`).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::dissim::JournalDissimilarity;
use crate::error::{Error, Result};
use crate::ingest::{JournalId, JournalRegistry};
use crate::similarity::{CountMatrix, SimilarityMatrix};

/// What the node weight column counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MapWeight {
    /// Scored articles published in the journal.
    #[default]
    Articles,
    /// Inbound citations received.
    Citations,
}

impl FromStr for MapWeight {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "articles" => Ok(MapWeight::Articles),
            "citations" => Ok(MapWeight::Citations),
            other => Err(Error::Config(format!("unknown map weight {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MapNode {
    pub id: JournalId,
    pub label: String,
    pub weight: u64,
    /// Journal mean dissimilarity; `None` when no article was published there.
    pub score: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkEdge {
    pub id1: JournalId,
    pub id2: JournalId,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkExport {
    pub nodes: Vec<MapNode>,
    pub edges: Vec<NetworkEdge>,
}

/// Keeps journals with at least `min_inbound` inbound citations and every
/// stored similarity between two kept journals.
pub fn export_network(
    matrix: &SimilarityMatrix,
    counts: &CountMatrix,
    journals: &[JournalDissimilarity],
    registry: &JournalRegistry,
    min_inbound: u64,
    weight: MapWeight,
) -> Result<NetworkExport> {
    let n = matrix.dimension().min(registry.len());
    let mut stats: Vec<Option<&JournalDissimilarity>> = vec![None; n];
    for s in journals {
        if s.journal.index() < n {
            stats[s.journal.index()] = Some(s);
        }
    }
    let mut keep = vec![false; n];
    let mut nodes = Vec::new();
    for g in (0..n as u32).map(JournalId) {
        let inbound = if g.index() < counts.dimension() { counts.inbound(g) } else { 0 };
        if inbound < min_inbound.max(1) {
            continue;
        }
        keep[g.index()] = true;
        let stat = stats[g.index()];
        nodes.push(MapNode {
            id: g,
            label: registry.name(g).to_string(),
            weight: match weight {
                MapWeight::Articles => stat.map_or(0, |s| s.article_count as u64),
                MapWeight::Citations => inbound,
            },
            score: stat.map(|s| s.mean_dissimilarity),
        });
    }
    if nodes.is_empty() {
        return Err(Error::EmptyNetwork(min_inbound));
    }
    let edges = matrix
        .upper_entries()
        .filter(|(g, h, _)| keep.get(g.index()) == Some(&true) && keep.get(h.index()) == Some(&true))
        .map(|(id1, id2, weight)| NetworkEdge { id1, id2, weight })
        .collect();
    Ok(NetworkExport { nodes, edges })
}

impl NetworkExport {
    pub fn write_map(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let res = (|| {
            writeln!(w, "id\tlabel\tweight\tscore")?;
            for node in &self.nodes {
                let score = node.score.map(|s| s.to_string()).unwrap_or_default();
                writeln!(w, "{}\t{}\t{}\t{}", node.id, node.label, node.weight, score)?;
            }
            w.flush()
        })();
        res.map_err(|e| Error::io(path, e))
    }

    pub fn write_network(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let res = (|| {
            writeln!(w, "id1\tid2\tweight")?;
            for e in &self.edges {
                writeln!(w, "{}\t{}\t{}", e.id1, e.id2, e.weight)?;
            }
            w.flush()
        })();
        res.map_err(|e| Error::io(path, e))
    }
}
