//! Co-citation similarity between cited journals.
//!
//! Every cited journal `g` gets a citation-share profile: the fraction of its
//! inbound citations coming from each citing journal `j`. Two profiles are
//! compared as
//!
//! ```text
//! S(g, h) = 1 - ½ Σ_j |p(j, g) - p(j, h)|
//! ```
//!
//! Both profiles sum to one, so this equals `Σ_j min(p(j, g), p(j, h))`, a
//! sum that only has terms where the two journals share a citing journal.
//! The engine exploits that with an inverted index from citing journal to
//! the cited journals it feeds, so journal pairs that are never co-cited
//! cost nothing and are stored as implicit zeros.
//!
//! Summation order is fixed: each pair's contributions are added in
//! ascending citing-journal id, inside a single task. The result is
//! bit-identical for any worker count.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ingest::{CitationRecord, JournalId};

/// Sparse citation counts, citing journal × cited journal, stored by
/// cited-journal column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountMatrix {
    dimension: usize,
    col_ptr: Vec<usize>,
    citing: Vec<JournalId>,
    counts: Vec<u64>,
}

impl CountMatrix {
    /// Builds a matrix from `(citing, cited, count)` cells. Repeated cells are
    /// summed and zero counts dropped.
    pub fn from_cells<I>(dimension: usize, cells: I) -> Self
    where
        I: IntoIterator<Item = (JournalId, JournalId, u64)>,
    {
        let mut cells: Vec<(JournalId, JournalId, u64)> = cells
            .into_iter()
            .filter(|c| c.2 > 0)
            .map(|(citing, cited, n)| (cited, citing, n))
            .collect();
        cells.sort_unstable_by_key(|c| (c.0, c.1));
        let dimension = cells
            .iter()
            .map(|c| c.0.index().max(c.1.index()) + 1)
            .max()
            .unwrap_or(0)
            .max(dimension);

        let mut col_ptr = vec![0usize; dimension + 1];
        let mut citing: Vec<JournalId> = Vec::new();
        let mut counts: Vec<u64> = Vec::new();
        let mut last: Option<(JournalId, JournalId)> = None;
        for (cited, j, n) in cells {
            if last == Some((cited, j)) {
                *counts.last_mut().expect("cell present") += n;
                continue;
            }
            last = Some((cited, j));
            col_ptr[cited.index() + 1] += 1;
            citing.push(j);
            counts.push(n);
        }
        for g in 0..dimension {
            col_ptr[g + 1] += col_ptr[g];
        }
        CountMatrix {
            dimension,
            col_ptr,
            citing,
            counts,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Non-zero `(citing, count)` cells of one cited journal, by citing id.
    pub fn column(&self, cited: JournalId) -> impl Iterator<Item = (JournalId, u64)> + '_ {
        let range = self.col_ptr[cited.index()]..self.col_ptr[cited.index() + 1];
        self.citing[range.clone()]
            .iter()
            .copied()
            .zip(self.counts[range].iter().copied())
    }

    pub fn get(&self, citing: JournalId, cited: JournalId) -> u64 {
        let range = self.col_ptr[cited.index()]..self.col_ptr[cited.index() + 1];
        let col = &self.citing[range.clone()];
        match col.binary_search(&citing) {
            Ok(i) => self.counts[range.start + i],
            Err(_) => 0,
        }
    }

    pub fn inbound(&self, cited: JournalId) -> u64 {
        self.column(cited).map(|(_, n)| n).sum()
    }

    /// Sum over all cells.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn stored_cells(&self) -> usize {
        self.counts.len()
    }

    /// Distinct citing journals with at least one citation.
    pub fn n_citing(&self) -> usize {
        let mut seen = vec![false; self.dimension];
        for j in &self.citing {
            seen[j.index()] = true;
        }
        seen.into_iter().filter(|&b| b).count()
    }

    /// Cited journals with at least one inbound citation.
    pub fn n_cited(&self) -> usize {
        self.col_ptr.windows(2).filter(|w| w[1] > w[0]).count()
    }
}

/// Counts citations per (citing, cited) journal pair. `dimension` is the
/// registry size; it grows if a record carries a larger id.
pub fn aggregate_counts(records: &[CitationRecord], dimension: usize) -> CountMatrix {
    CountMatrix::from_cells(
        dimension,
        records
            .iter()
            .map(|r| (r.citing_journal, r.cited_journal, 1)),
    )
}

/// Share of all citations going to journals with at least `min_inbound`
/// inbound citations.
pub fn retained_citation_share(counts: &CountMatrix, min_inbound: u64) -> f64 {
    let total = counts.total();
    if total == 0 {
        return 0.0;
    }
    let kept: u64 = (0..counts.dimension() as u32)
        .map(|g| counts.inbound(JournalId(g)))
        .filter(|&n| n >= min_inbound)
        .sum();
    kept as f64 / total as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct JournalProfile {
    pub cited_journal: JournalId,
    /// `(citing journal, share)` sorted by citing id; empty when the journal
    /// was never cited.
    pub shares: Vec<(JournalId, f64)>,
    pub total_inbound: u64,
}

impl JournalProfile {
    pub fn is_empty(&self) -> bool {
        self.total_inbound == 0
    }
}

/// One profile per journal id in `0..counts.dimension()`.
pub fn normalize_profiles(counts: &CountMatrix) -> Vec<JournalProfile> {
    (0..counts.dimension() as u32)
        .map(JournalId)
        .map(|g| {
            let total = counts.inbound(g);
            let shares = counts
                .column(g)
                .map(|(j, n)| (j, n as f64 / total as f64))
                .collect();
            JournalProfile {
                cited_journal: g,
                shares,
                total_inbound: total,
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum StorageMode {
    /// Upper-triangle nonzeros in 64-bit.
    #[default]
    Sparse,
    /// Full row-major 32-bit matrix.
    Dense,
}

impl FromStr for StorageMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sparse" => Ok(StorageMode::Sparse),
            "dense" => Ok(StorageMode::Dense),
            other => Err(Error::Config(format!("unknown storage mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimilarityOptions {
    pub storage: StorageMode,
    /// Off-diagonal values below this are not stored. 0 keeps every nonzero.
    pub sparsity_floor: f64,
    /// Worker threads; 0 uses every available core.
    pub threads: usize,
}

impl Default for SimilarityOptions {
    fn default() -> Self {
        SimilarityOptions {
            storage: StorageMode::Sparse,
            sparsity_floor: 0.0,
            threads: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Store {
    Sparse {
        row_ptr: Vec<usize>,
        cols: Vec<u32>,
        vals: Vec<f64>,
    },
    Dense {
        vals: Vec<f32>,
    },
}

/// Symmetric similarity matrix with unit diagonal. Only `g < h` entries are
/// kept in sparse mode, so symmetry holds by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityMatrix {
    dimension: usize,
    store: Store,
}

const DENSE_HEADER_LEN: usize = 8;

impl SimilarityMatrix {
    fn from_rows(dimension: usize, rows: Vec<Vec<(u32, f64)>>, storage: StorageMode) -> Self {
        let store = match storage {
            StorageMode::Sparse => {
                let nnz = rows.iter().map(Vec::len).sum();
                let mut row_ptr = Vec::with_capacity(dimension + 1);
                let mut cols = Vec::with_capacity(nnz);
                let mut vals = Vec::with_capacity(nnz);
                row_ptr.push(0);
                for row in rows {
                    for (h, v) in row {
                        cols.push(h);
                        vals.push(v);
                    }
                    row_ptr.push(cols.len());
                }
                Store::Sparse { row_ptr, cols, vals }
            }
            StorageMode::Dense => {
                let mut vals = vec![0f32; dimension * dimension];
                for (g, row) in rows.into_iter().enumerate() {
                    vals[g * dimension + g] = 1.0;
                    for (h, v) in row {
                        let h = h as usize;
                        vals[g * dimension + h] = v as f32;
                        vals[h * dimension + g] = v as f32;
                    }
                }
                Store::Dense { vals }
            }
        };
        SimilarityMatrix { dimension, store }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn storage(&self) -> StorageMode {
        match self.store {
            Store::Sparse { .. } => StorageMode::Sparse,
            Store::Dense { .. } => StorageMode::Dense,
        }
    }

    /// `S(g, h)`; implicit zeros for pairs that were never stored.
    pub fn lookup(&self, g: JournalId, h: JournalId) -> Result<f64> {
        for id in [g, h] {
            if id.index() >= self.dimension {
                return Err(Error::JournalOutOfRange {
                    id: id.index(),
                    dimension: self.dimension,
                });
            }
        }
        Ok(self.value(g.index(), h.index()))
    }

    /// Unchecked-range variant of [`lookup`](Self::lookup); panics on bad ids.
    pub fn value(&self, g: usize, h: usize) -> f64 {
        if g == h {
            return 1.0;
        }
        match &self.store {
            Store::Sparse { row_ptr, cols, vals } => {
                let (lo, hi) = if g < h { (g, h) } else { (h, g) };
                let range = row_ptr[lo]..row_ptr[lo + 1];
                match cols[range.clone()].binary_search(&(hi as u32)) {
                    Ok(i) => vals[range.start + i],
                    Err(_) => 0.0,
                }
            }
            Store::Dense { vals } => f64::from(vals[g * self.dimension + h]),
        }
    }

    /// Stored off-diagonal entries `(g, h, S)` with `g < h`, row-major.
    pub fn upper_entries(&self) -> Box<dyn Iterator<Item = (JournalId, JournalId, f64)> + '_> {
        match &self.store {
            Store::Sparse { row_ptr, cols, vals } => Box::new((0..self.dimension).flat_map(move |g| {
                (row_ptr[g]..row_ptr[g + 1])
                    .map(move |i| (JournalId(g as u32), JournalId(cols[i]), vals[i]))
            })),
            Store::Dense { vals } => {
                let n = self.dimension;
                Box::new((0..n).flat_map(move |g| {
                    ((g + 1)..n).filter_map(move |h| {
                        let v = vals[g * n + h];
                        (v > 0.0).then(|| (JournalId(g as u32), JournalId(h as u32), f64::from(v)))
                    })
                }))
            }
        }
    }

    pub fn stored_entries(&self) -> usize {
        match &self.store {
            Store::Sparse { vals, .. } => vals.len(),
            Store::Dense { .. } => self.upper_entries().count(),
        }
    }

    /// Writes `g_id,h_id,similarity` for stored upper-triangle nonzeros.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let res = (|| {
            writeln!(w, "g_id,h_id,similarity")?;
            for (g, h, v) in self.upper_entries() {
                writeln!(w, "{g},{h},{v}")?;
            }
            w.flush()
        })();
        res.map_err(|e| Error::io(path, e))
    }

    /// Reads a file written by [`write_csv`](Self::write_csv) into sparse
    /// storage. Entries may be in any order and either orientation.
    pub fn read_csv(path: &Path, dimension: usize) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
        let mut entries: Vec<(u32, u32, f64)> = Vec::new();
        for row in rdr.records() {
            let row = row.map_err(|e| Error::csv(path, e))?;
            let line = row.position().map_or(0, |p| p.line());
            if row.len() != 3 {
                return Err(Error::malformed(path, line, "expected g_id,h_id,similarity"));
            }
            let id = |s: &str| -> Result<u32> {
                let id: u32 = s
                    .parse()
                    .map_err(|_| Error::malformed(path, line, format!("bad journal id {s:?}")))?;
                if id as usize >= dimension {
                    return Err(Error::malformed(path, line, format!("journal id {id} out of range")));
                }
                Ok(id)
            };
            let (g, h) = (id(&row[0])?, id(&row[1])?);
            let v: f64 = row[2]
                .parse()
                .map_err(|_| Error::malformed(path, line, "bad similarity value"))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::malformed(path, line, "similarity outside [0, 1]"));
            }
            if g == h || v == 0.0 {
                continue;
            }
            entries.push((g.min(h), g.max(h), v));
        }
        entries.sort_unstable_by_key(|e| (e.0, e.1));
        if entries.windows(2).any(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::malformed(path, 0, "duplicate journal pair"));
        }
        let mut rows = vec![Vec::new(); dimension];
        for (g, h, v) in entries {
            rows[g as usize].push((h, v));
        }
        Ok(Self::from_rows(dimension, rows, StorageMode::Sparse))
    }

    /// Dense binary layout: little-endian `u64` dimension, then
    /// `dimension²` little-endian `f32` values row-major. Sparse matrices are
    /// expanded.
    pub fn write_dense(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let n = self.dimension;
        let res = (|| {
            w.write_all(&(n as u64).to_le_bytes())?;
            match &self.store {
                Store::Dense { vals } => {
                    for v in vals {
                        w.write_all(&v.to_le_bytes())?;
                    }
                }
                Store::Sparse { .. } => {
                    for g in 0..n {
                        for h in 0..n {
                            w.write_all(&(self.value(g, h) as f32).to_le_bytes())?;
                        }
                    }
                }
            }
            w.flush()
        })();
        res.map_err(|e| Error::io(path, e))
    }

    pub fn read_dense(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BufReader::new(file);
        let mut header = [0u8; DENSE_HEADER_LEN];
        r.read_exact(&mut header).map_err(|e| Error::io(path, e))?;
        let n = u64::from_le_bytes(header) as usize;
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;
        if bytes.len() != n * n * 4 {
            return Err(Error::malformed(
                path,
                0,
                format!("dense matrix of dimension {n} needs {} bytes, found {}", n * n * 4, bytes.len()),
            ));
        }
        let vals: Vec<f32> = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        Ok(SimilarityMatrix {
            dimension: n,
            store: Store::Dense { vals },
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityOutcome {
    pub matrix: SimilarityMatrix,
    /// Journals without inbound citations. Every off-diagonal pair involving
    /// one of them is undefined and set to 0.
    pub empty_profiles: Vec<JournalId>,
}

/// Computes all pairwise similarities. `profiles[i]` must describe journal
/// `i`, as returned by [`normalize_profiles`].
pub fn pairwise_similarity(profiles: &[JournalProfile], options: &SimilarityOptions) -> Result<SimilarityOutcome> {
    let n = profiles.len();
    for (i, p) in profiles.iter().enumerate() {
        if p.cited_journal.index() != i {
            return Err(Error::Config(format!(
                "profile at position {i} belongs to journal {}",
                p.cited_journal
            )));
        }
    }
    if !(options.sparsity_floor >= 0.0) {
        return Err(Error::Config("sparsity floor must be non-negative".into()));
    }

    // citing journal -> [(cited journal, share)], ascending cited id
    let citing_dim = profiles
        .iter()
        .flat_map(|p| p.shares.iter().map(|s| s.0.index() + 1))
        .max()
        .unwrap_or(0);
    let mut postings: Vec<Vec<(u32, f64)>> = vec![Vec::new(); citing_dim];
    for p in profiles {
        for &(j, share) in &p.shares {
            postings[j.index()].push((p.cited_journal.0, share));
        }
    }

    let floor = options.sparsity_floor;
    let row = |state: &mut (Vec<f64>, Vec<u32>), g: usize| -> Vec<(u32, f64)> {
        let (acc, touched) = state;
        for &(j, p) in &profiles[g].shares {
            let list = &postings[j.index()];
            let start = list.partition_point(|e| e.0 as usize <= g);
            for &(h, q) in &list[start..] {
                let slot = &mut acc[h as usize];
                if *slot == 0.0 {
                    touched.push(h);
                }
                *slot += p.min(q);
            }
        }
        touched.sort_unstable();
        let mut out = Vec::with_capacity(touched.len());
        for &h in touched.iter() {
            let v = acc[h as usize].min(1.0);
            acc[h as usize] = 0.0;
            if v > 0.0 && v >= floor {
                out.push((h, v));
            }
        }
        touched.clear();
        out
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let rows: Vec<Vec<(u32, f64)>> = pool.install(|| {
        (0..n)
            .into_par_iter()
            .map_init(|| (vec![0.0f64; n], Vec::new()), row)
            .collect()
    });

    let empty_profiles = profiles
        .iter()
        .filter(|p| p.is_empty())
        .map(|p| p.cited_journal)
        .collect();
    Ok(SimilarityOutcome {
        matrix: SimilarityMatrix::from_rows(n, rows, options.storage),
        empty_profiles,
    })
}
