//! Reading citation and category exports into a dense journal registry and
//! an article corpus.
//!
//! Journals are identified by normalized name (trimmed, internal whitespace
//! collapsed, case-folded). Citing and cited journals share one id space:
//! an article's publishing journal must be addressable in the similarity
//! matrix of cited journals.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Dense journal identifier, contiguous from 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JournalId(pub u32);

impl JournalId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for JournalId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Trim, collapse internal whitespace runs to one space, and case-fold.
pub fn normalize_name(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    for word in raw.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.extend(word.chars().flat_map(char::to_lowercase));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JournalRegistry {
    names: Vec<String>,
    citing: Vec<bool>,
    cited: Vec<bool>,
    index: HashMap<String, JournalId>,
}

impl JournalRegistry {
    /// Builds a registry from normalized names with their role flags. Ids
    /// follow the lexicographic order of the names.
    fn from_roles(roles: BTreeMap<String, (bool, bool)>) -> Self {
        let mut registry = JournalRegistry {
            names: Vec::with_capacity(roles.len()),
            citing: Vec::with_capacity(roles.len()),
            cited: Vec::with_capacity(roles.len()),
            index: HashMap::with_capacity(roles.len()),
        };
        for (name, (citing, cited)) in roles {
            debug_assert!(citing || cited);
            let id = JournalId(registry.names.len() as u32);
            registry.index.insert(name.clone(), id);
            registry.names.push(name);
            registry.citing.push(citing);
            registry.cited.push(cited);
        }
        registry
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, id: JournalId) -> &str {
        &self.names[id.index()]
    }

    pub fn is_citing(&self, id: JournalId) -> bool {
        self.citing[id.index()]
    }

    pub fn is_cited(&self, id: JournalId) -> bool {
        self.cited[id.index()]
    }

    /// Looks up a raw (unnormalized) journal name.
    pub fn resolve(&self, raw: &str) -> Option<JournalId> {
        self.index.get(&normalize_name(raw)).copied()
    }

    pub fn ids(&self) -> impl Iterator<Item = JournalId> {
        (0..self.names.len() as u32).map(JournalId)
    }

    /// Writes `journal_id,name,is_citing,is_cited` with `0`/`1` flags.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(BufWriter::new(file));
        let res = (|| {
            w.write_record(["journal_id", "name", "is_citing", "is_cited"])?;
            for id in self.ids() {
                w.write_record([
                    id.to_string().as_str(),
                    self.name(id),
                    flag(self.is_citing(id)),
                    flag(self.is_cited(id)),
                ])?;
            }
            w.flush()?;
            Ok(())
        })();
        res.map_err(|e: csv::Error| Error::csv(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
        let mut roles = BTreeMap::new();
        let mut expected = 0u32;
        for row in rdr.records() {
            let row = row.map_err(|e| Error::csv(path, e))?;
            let line = row.position().map_or(0, |p| p.line());
            if row.len() != 4 {
                return Err(Error::malformed(path, line, "expected 4 columns"));
            }
            let id: u32 = row[0]
                .parse()
                .map_err(|_| Error::malformed(path, line, "journal_id is not an integer"))?;
            if id != expected {
                return Err(Error::malformed(path, line, "journal ids must be contiguous from 0"));
            }
            expected += 1;
            let parse_flag = |s: &str| match s {
                "1" => Ok(true),
                "0" => Ok(false),
                _ => Err(Error::malformed(path, line, "role flag must be 0 or 1")),
            };
            let name = row[1].to_string();
            if normalize_name(&name) != name {
                return Err(Error::malformed(path, line, "journal name is not normalized"));
            }
            roles.insert(name, (parse_flag(&row[2])?, parse_flag(&row[3])?));
        }
        let registry = Self::from_roles(roles);
        if registry.len() != expected as usize {
            return Err(Error::malformed(path, 0, "duplicate journal names"));
        }
        Ok(registry)
    }
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// One reference occurrence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CitationRecord {
    pub article_id: String,
    pub pub_year: i32,
    pub citing_journal: JournalId,
    pub cited_journal: JournalId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArticleRecord {
    pub article_id: String,
    pub pub_year: i32,
    pub published_journal: JournalId,
    /// One entry per reference occurrence, in input order. Repeats are kept.
    pub cited_occurrences: Vec<JournalId>,
    /// References whose cited journal was left blank in the export.
    pub unmatched_refs: usize,
}

impl ArticleRecord {
    pub fn n_refs(&self) -> usize {
        self.cited_occurrences.len()
    }
}

/// Zero-based column positions in the citations file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ColumnMap {
    pub pub_year: usize,
    pub article_id: usize,
    pub citing_journal: usize,
    pub cited_journal: usize,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            pub_year: 0,
            article_id: 1,
            citing_journal: 2,
            cited_journal: 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct YearWindow {
    pub start: i32,
    pub end: i32,
}

impl YearWindow {
    pub fn contains(&self, year: i32) -> bool {
        self.start <= year && year <= self.end
    }
}

#[derive(Clone, Debug)]
pub struct IngestConfig {
    pub delimiter: u8,
    pub has_header: bool,
    pub columns: ColumnMap,
    pub year_window: Option<YearWindow>,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            delimiter: b',',
            has_header: true,
            columns: ColumnMap::default(),
            year_window: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Ingested {
    pub registry: JournalRegistry,
    /// Articles ordered by article id.
    pub corpus: Vec<ArticleRecord>,
    /// One record per retained input row with a cited journal, in file order.
    pub records: Vec<CitationRecord>,
    /// Rows dropped because their year fell outside the configured window.
    pub rows_outside_window: usize,
    pub warnings: Vec<String>,
}

struct RawRow {
    line: u64,
    year: i32,
    article: String,
    citing: String,
    cited: Option<String>,
}

/// Parses a citations export, one row per reference occurrence.
pub fn parse_citations(path: &Path, config: &IngestConfig) -> Result<Ingested> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_citations_from(file, path, config)
}

/// Same as [`parse_citations`] over any reader; `path` is only used in
/// diagnostics.
pub fn parse_citations_from<R: std::io::Read>(
    reader: R,
    path: &Path,
    config: &IngestConfig,
) -> Result<Ingested> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(config.delimiter)
        .has_headers(config.has_header)
        .flexible(true)
        .from_reader(reader);
    let cols = config.columns;
    let width = cols
        .pub_year
        .max(cols.article_id)
        .max(cols.citing_journal)
        .max(cols.cited_journal)
        + 1;

    let mut rows = Vec::new();
    let mut rows_outside_window = 0usize;
    for row in rdr.records() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() == 1 && row[0].trim().is_empty() {
            continue;
        }
        if row.len() < width {
            return Err(Error::malformed(
                path,
                line,
                format!("expected at least {width} columns, found {}", row.len()),
            ));
        }
        let year: i32 = row[cols.pub_year]
            .trim()
            .parse()
            .map_err(|_| Error::malformed(path, line, format!("bad year {:?}", &row[cols.pub_year])))?;
        let article = row[cols.article_id].trim().to_string();
        if article.is_empty() {
            return Err(Error::malformed(path, line, "empty article id"));
        }
        let citing = normalize_name(&row[cols.citing_journal]);
        if citing.is_empty() {
            return Err(Error::malformed(path, line, "empty citing journal"));
        }
        let cited = normalize_name(&row[cols.cited_journal]);
        if let Some(window) = config.year_window {
            if !window.contains(year) {
                rows_outside_window += 1;
                continue;
            }
        }
        rows.push(RawRow {
            line,
            year,
            article,
            citing,
            cited: (!cited.is_empty()).then_some(cited),
        });
    }

    let mut warnings = Vec::new();
    if rows.is_empty() {
        warnings.push(format!("{}: no citation rows, corpus is empty", path.display()));
    }
    if rows_outside_window > 0 {
        warnings.push(format!(
            "{}: {rows_outside_window} rows outside the year window were dropped",
            path.display()
        ));
    }

    let mut roles: BTreeMap<String, (bool, bool)> = BTreeMap::new();
    for r in &rows {
        roles.entry(r.citing.clone()).or_default().0 = true;
        if let Some(cited) = &r.cited {
            roles.entry(cited.clone()).or_default().1 = true;
        }
    }
    let registry = JournalRegistry::from_roles(roles);
    let id_of = |name: &str| registry.index[name];

    let mut articles: BTreeMap<String, ArticleRecord> = BTreeMap::new();
    let mut records = Vec::with_capacity(rows.len());
    for r in rows {
        let citing = id_of(&r.citing);
        let article = articles
            .entry(r.article.clone())
            .or_insert_with(|| ArticleRecord {
                article_id: r.article.clone(),
                pub_year: r.year,
                published_journal: citing,
                cited_occurrences: Vec::new(),
                unmatched_refs: 0,
            });
        if article.published_journal != citing {
            return Err(Error::malformed(
                path,
                r.line,
                format!(
                    "article {} listed under two publishing journals ({:?} and {:?})",
                    r.article,
                    registry.name(article.published_journal),
                    registry.name(citing)
                ),
            ));
        }
        article.pub_year = article.pub_year.min(r.year);
        match r.cited {
            Some(cited) => {
                let cited = id_of(&cited);
                article.cited_occurrences.push(cited);
                records.push(CitationRecord {
                    article_id: r.article,
                    pub_year: r.year,
                    citing_journal: citing,
                    cited_journal: cited,
                });
            }
            None => article.unmatched_refs += 1,
        }
    }

    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(Ingested {
        registry,
        corpus: articles.into_values().collect(),
        records,
        rows_outside_window,
        warnings,
    })
}

/// Subject categories per journal.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CategoryMap {
    by_id: BTreeMap<JournalId, BTreeSet<String>>,
    /// Category rows naming journals the registry does not know.
    unresolved: BTreeMap<String, BTreeSet<String>>,
    multidisciplinary_label: String,
    pub warnings: Vec<String>,
}

/// Result of a category query for one journal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Categories<'a> {
    Categorized(&'a BTreeSet<String>),
    Uncategorized,
}

impl CategoryMap {
    /// Builds a map from `(journal, category)` pairs. Names are normalized.
    pub fn from_pairs<'a, I>(pairs: I, multidisciplinary_label: &str, registry: &JournalRegistry) -> Self
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut map = CategoryMap {
            multidisciplinary_label: normalize_name(multidisciplinary_label),
            ..Default::default()
        };
        for (journal, category) in pairs {
            map.insert(journal, category, registry);
        }
        map.warn_unresolved();
        map
    }

    fn insert(&mut self, journal: &str, category: &str, registry: &JournalRegistry) -> bool {
        let category = normalize_name(category);
        let journal = normalize_name(journal);
        if category.is_empty() || journal.is_empty() {
            return false;
        }
        match registry.index.get(&journal) {
            Some(&id) => self.by_id.entry(id).or_default().insert(category),
            None => self.unresolved.entry(journal).or_default().insert(category),
        };
        true
    }

    fn warn_unresolved(&mut self) {
        if !self.unresolved.is_empty() {
            let w = format!(
                "{} categorized journals are not in the registry and were kept by name",
                self.unresolved.len()
            );
            log::warn!("{w}");
            self.warnings.push(w);
        }
    }

    pub fn get(&self, id: JournalId) -> Categories<'_> {
        match self.by_id.get(&id) {
            Some(set) => Categories::Categorized(set),
            None => Categories::Uncategorized,
        }
    }

    /// Categories for a journal outside the registry, by raw name.
    pub fn get_unresolved(&self, raw_name: &str) -> Categories<'_> {
        match self.unresolved.get(&normalize_name(raw_name)) {
            Some(set) => Categories::Categorized(set),
            None => Categories::Uncategorized,
        }
    }

    pub fn is_multidisciplinary(&self, id: JournalId) -> bool {
        self.by_id
            .get(&id)
            .is_some_and(|set| set.contains(&self.multidisciplinary_label))
    }

    /// Number of flagged journals, including ones outside the registry.
    pub fn multidisciplinary_count(&self) -> usize {
        self.by_id
            .values()
            .chain(self.unresolved.values())
            .filter(|set| set.contains(&self.multidisciplinary_label))
            .count()
    }

    pub fn mapped_journals(&self) -> usize {
        self.by_id.len()
    }

    pub fn unresolved_journals(&self) -> usize {
        self.unresolved.len()
    }
}

/// Parses a `journal,category` file with a header row.
pub fn parse_categories(
    path: &Path,
    multidisciplinary_label: &str,
    registry: &JournalRegistry,
) -> Result<CategoryMap> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    let mut map = CategoryMap {
        multidisciplinary_label: normalize_name(multidisciplinary_label),
        ..Default::default()
    };
    for row in rdr.records() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() == 1 && row[0].trim().is_empty() {
            continue;
        }
        if row.len() != 2 {
            return Err(Error::malformed(path, line, "expected journal,category"));
        }
        if !map.insert(&row[0], &row[1], registry) {
            return Err(Error::malformed(path, line, "empty journal or category"));
        }
    }
    map.warn_unresolved();
    Ok(map)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct IngestSummary {
    pub articles: usize,
    pub citing_journals: usize,
    pub cited_journals: usize,
    pub total_citations: usize,
    pub unmatched_references: usize,
    /// Matched references over all references; 0 for an empty corpus.
    pub match_rate: f64,
}

pub fn ingest_report(corpus: &[ArticleRecord]) -> IngestSummary {
    let mut citing = BTreeSet::new();
    let mut cited = BTreeSet::new();
    let mut total = 0usize;
    let mut unmatched = 0usize;
    for a in corpus {
        citing.insert(a.published_journal);
        cited.extend(a.cited_occurrences.iter().copied());
        total += a.n_refs();
        unmatched += a.unmatched_refs;
    }
    let all = total + unmatched;
    IngestSummary {
        articles: corpus.len(),
        citing_journals: citing.len(),
        cited_journals: cited.len(),
        total_citations: total,
        unmatched_references: unmatched,
        match_rate: if all == 0 { 0.0 } else { total as f64 / all as f64 },
    }
}

impl IngestSummary {
    /// Writes `key,value` rows, followed by any caller-supplied extras.
    pub fn write_csv(&self, path: &Path, extra: &[(&str, String)]) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let mut body = format!(
            "key,value\narticles,{}\nciting_journals,{}\ncited_journals,{}\ntotal_citations,{}\nunmatched_references,{}\nmatch_rate,{}\n",
            self.articles,
            self.citing_journals,
            self.cited_journals,
            self.total_citations,
            self.unmatched_references,
            self.match_rate
        );
        for (k, v) in extra {
            body.push_str(&format!("{k},{v}\n"));
        }
        w.write_all(body.as_bytes())
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }
}
