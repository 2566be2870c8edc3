//! Brute-force reference implementations used to check the engine. They
//! work on raw CSV text and journal names and never touch the library's
//! ingest, similarity or dissimilarity code.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

pub fn fixture_dir(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Dense S matrix straight from the L1 form, with rows of citing journals
/// and columns of cited journals. Columns without citations follow the
/// convention S = 0 off the diagonal.
pub fn oracle_similarity(counts: &[Vec<u64>], n_cited: usize) -> Vec<Vec<f64>> {
    let totals: Vec<u64> = (0..n_cited).map(|g| counts.iter().map(|row| row[g]).sum()).collect();
    let mut s = vec![vec![0.0; n_cited]; n_cited];
    for g in 0..n_cited {
        for h in 0..n_cited {
            s[g][h] = if g == h {
                1.0
            } else if totals[g] == 0 || totals[h] == 0 {
                0.0
            } else {
                let l1: f64 = counts
                    .iter()
                    .map(|row| (row[g] as f64 / totals[g] as f64 - row[h] as f64 / totals[h] as f64).abs())
                    .sum();
                1.0 - l1 / 2.0
            };
        }
    }
    s
}

/// Σ_j min(p_jg, p_jh) for the same layout.
pub fn oracle_min_overlap(counts: &[Vec<u64>], g: usize, h: usize) -> f64 {
    let tg: u64 = counts.iter().map(|r| r[g]).sum();
    let th: u64 = counts.iter().map(|r| r[h]).sum();
    counts
        .iter()
        .map(|r| (r[g] as f64 / tg as f64).min(r[h] as f64 / th as f64))
        .sum()
}

#[derive(Debug, Clone)]
pub struct OracleRow {
    pub article: String,
    pub citing: String,
    pub cited: String,
}

fn norm(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Citations file with the default layout and no quoted fields.
pub fn oracle_rows(text: &str) -> Vec<OracleRow> {
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            OracleRow {
                article: f[1].trim().to_string(),
                citing: norm(f[2]),
                cited: norm(f[3]),
            }
        })
        .collect()
}

pub struct OracleCorpus {
    /// cited -> citing -> count
    pub inbound: BTreeMap<String, BTreeMap<String, u64>>,
    /// article -> (publisher, cited occurrences)
    pub articles: BTreeMap<String, (String, Vec<String>)>,
}

impl OracleCorpus {
    pub fn new(rows: &[OracleRow]) -> Self {
        let mut inbound: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
        let mut articles: BTreeMap<String, (String, Vec<String>)> = BTreeMap::new();
        for r in rows {
            let entry = articles
                .entry(r.article.clone())
                .or_insert_with(|| (r.citing.clone(), Vec::new()));
            if r.cited.is_empty() {
                continue;
            }
            entry.1.push(r.cited.clone());
            *inbound.entry(r.cited.clone()).or_default().entry(r.citing.clone()).or_default() += 1;
        }
        OracleCorpus { inbound, articles }
    }

    pub fn similarity(&self, g: &str, h: &str) -> f64 {
        if g == h {
            return 1.0;
        }
        let (Some(pg), Some(ph)) = (self.inbound.get(g), self.inbound.get(h)) else {
            return 0.0;
        };
        let tg: u64 = pg.values().sum();
        let th: u64 = ph.values().sum();
        let citing: BTreeSet<&String> = pg.keys().chain(ph.keys()).collect();
        let l1: f64 = citing
            .into_iter()
            .map(|j| {
                let a = *pg.get(j).unwrap_or(&0) as f64 / tg as f64;
                let b = *ph.get(j).unwrap_or(&0) as f64 / th as f64;
                (a - b).abs()
            })
            .sum();
        1.0 - l1 / 2.0
    }

    /// article -> (publisher, D, matched refs); articles without refs omitted.
    pub fn article_dissimilarity(&self) -> BTreeMap<String, (String, f64, usize)> {
        let mut out = BTreeMap::new();
        for (id, (publisher, cited)) in &self.articles {
            if cited.is_empty() {
                continue;
            }
            let mean = cited.iter().map(|h| self.similarity(publisher, h)).sum::<f64>() / cited.len() as f64;
            out.insert(id.clone(), (publisher.clone(), 1.0 - mean, cited.len()));
        }
        out
    }

    pub fn inbound_total(&self, journal: &str) -> u64 {
        self.inbound.get(journal).map_or(0, |m| m.values().sum())
    }
}

/// journal -> (article count, mean D)
pub fn oracle_journal_means(articles: &BTreeMap<String, (String, f64, usize)>) -> BTreeMap<String, (usize, f64)> {
    let mut acc: BTreeMap<String, (usize, f64)> = BTreeMap::new();
    for (publisher, d, _) in articles.values() {
        let e = acc.entry(publisher.clone()).or_default();
        e.0 += 1;
        e.1 += d;
    }
    acc.into_iter().map(|(k, (n, s))| (k, (n, s / n as f64))).collect()
}

/// Decile class (0-based) per value: nearest-rank breakpoints, ties low.
pub fn oracle_deciles(values: &[f64]) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let bp: Vec<f64> = (1..10)
        .map(|k| {
            let mut rank = k * n / 10;
            if k * n % 10 != 0 {
                rank += 1;
            }
            sorted[rank - 1]
        })
        .collect();
    values
        .iter()
        .map(|&v| {
            let mut c = 0;
            while c < 9 && v > bp[c] {
                c += 1;
            }
            c
        })
        .collect()
}

/// journal -> categories, names normalized.
pub fn oracle_categories(text: &str) -> BTreeMap<String, BTreeSet<String>> {
    let mut map: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for l in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        let (j, c) = l.split_once(',').unwrap();
        map.entry(norm(j)).or_default().insert(norm(c));
    }
    map
}

/// Reads a `key,value`-free CSV into rows of fields (no quoting support).
pub fn read_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

/// Temporary directory under the target dir.
pub fn scratch(name: &str) -> tempfile::TempDir {
    tempfile::Builder::new().prefix(name).tempdir().unwrap()
}

/// Peak resident set size of this process in bytes, where available.
pub fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}
