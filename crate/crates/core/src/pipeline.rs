//! Stage orchestration. Each stage writes its artifacts into a staging
//! directory inside the output directory and moves them into place only when
//! the whole stage succeeded, so a failed stage leaves nothing behind.

use std::path::{Path, PathBuf};

use tempfile::TempDir;

use crate::analytics::{self, DecileClasses};
use crate::config::PipelineConfig;
use crate::dissim::{self, ArticleDissimilarity, JournalDissimilarity};
use crate::error::{Error, Result};
use crate::export::export_network;
use crate::ingest::{self, CategoryMap, Ingested};
use crate::similarity::{
    self, aggregate_counts, normalize_profiles, pairwise_similarity, CountMatrix, SimilarityMatrix,
    SimilarityOutcome, StorageMode,
};

pub const REGISTRY: &str = "registry.csv";
pub const INGEST_SUMMARY: &str = "ingest_summary.csv";
pub const SIMILARITY_CSV: &str = "similarity.csv";
pub const SIMILARITY_BIN: &str = "similarity.bin";
pub const EMPTY_PROFILES: &str = "empty_profiles.csv";
pub const ARTICLES: &str = "article_dissimilarity.csv";
pub const JOURNALS: &str = "journal_dissimilarity.csv";
pub const TOP_JOURNALS: &str = "top_journals.csv";
pub const HISTOGRAM: &str = "histogram.csv";
pub const DECILES: &str = "deciles.csv";
pub const DIVERSITY: &str = "category_diversity.csv";
pub const ARTICLE_CATEGORIES: &str = "article_categories.csv";
pub const REPORT_SUMMARY: &str = "report_summary.csv";
pub const MAP: &str = "vosviewer_map.txt";
pub const NETWORK: &str = "vosviewer_network.txt";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Ingest,
    Similarity,
    Dissim,
    Report,
    Export,
    /// Every stage in sequence, keeping the matrix in memory.
    Run,
}

struct Staging {
    dir: TempDir,
    out: PathBuf,
    files: Vec<&'static str>,
}

impl Staging {
    fn new(out: &Path) -> Result<Self> {
        std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        let dir = tempfile::Builder::new()
            .prefix(".staging-")
            .tempdir_in(out)
            .map_err(|e| Error::io(out, e))?;
        Ok(Staging {
            dir,
            out: out.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn path(&mut self, name: &'static str) -> PathBuf {
        self.files.push(name);
        self.dir.path().join(name)
    }

    fn commit(self) -> Result<Vec<PathBuf>> {
        let mut written = Vec::with_capacity(self.files.len());
        for name in &self.files {
            let target = self.out.join(name);
            std::fs::rename(self.dir.path().join(name), &target).map_err(|e| Error::io(&target, e))?;
            written.push(target);
        }
        Ok(written)
    }
}

/// Everything derived from the input files alone.
pub struct Inputs {
    pub ingested: Ingested,
    pub counts: CountMatrix,
    pub categories: CategoryMap,
}

pub fn load_inputs(config: &PipelineConfig) -> Result<Inputs> {
    let path = config
        .citations
        .as_deref()
        .ok_or_else(|| Error::Config("no citations file given".into()))?;
    let ingested = ingest::parse_citations(path, &config.ingest_config())?;
    let counts = aggregate_counts(&ingested.records, ingested.registry.len());
    let categories = match &config.categories {
        Some(p) => ingest::parse_categories(p, &config.multidisciplinary_label, &ingested.registry)?,
        None => CategoryMap::from_pairs([], &config.multidisciplinary_label, &ingested.registry),
    };
    Ok(Inputs {
        ingested,
        counts,
        categories,
    })
}

fn compute_similarity(inputs: &Inputs, config: &PipelineConfig) -> Result<SimilarityOutcome> {
    let profiles = normalize_profiles(&inputs.counts);
    let outcome = pairwise_similarity(&profiles, &config.similarity_options())?;
    if !outcome.empty_profiles.is_empty() {
        log::warn!(
            "{} journals have no inbound citations; their off-diagonal similarities are set to 0",
            outcome.empty_profiles.len()
        );
    }
    Ok(outcome)
}

fn empty_profiles(counts: &CountMatrix) -> Vec<ingest::JournalId> {
    (0..counts.dimension() as u32)
        .map(ingest::JournalId)
        .filter(|&g| counts.inbound(g) == 0)
        .collect()
}

/// Loads the matrix a previous `similarity` stage left in the output
/// directory.
pub fn load_matrix(config: &PipelineConfig, dimension: usize) -> Result<SimilarityMatrix> {
    let (name, matrix) = match config.storage {
        StorageMode::Sparse => {
            let p = config.out_dir.join(SIMILARITY_CSV);
            ensure_artifact(&p)?;
            (p.clone(), SimilarityMatrix::read_csv(&p, dimension)?)
        }
        StorageMode::Dense => {
            let p = config.out_dir.join(SIMILARITY_BIN);
            ensure_artifact(&p)?;
            (p.clone(), SimilarityMatrix::read_dense(&p)?)
        }
    };
    if matrix.dimension() != dimension {
        return Err(Error::malformed(
            name,
            0,
            format!("matrix dimension {} does not match registry size {dimension}", matrix.dimension()),
        ));
    }
    Ok(matrix)
}

fn ensure_artifact(p: &Path) -> Result<()> {
    if p.exists() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "{} not found; run the similarity stage first",
            p.display()
        )))
    }
}

fn write_ingest(staging: &mut Staging, inputs: &Inputs, config: &PipelineConfig) -> Result<()> {
    let ing = &inputs.ingested;
    ing.registry.write_csv(&staging.path(REGISTRY))?;
    let summary = ingest::ingest_report(&ing.corpus);
    let share = similarity::retained_citation_share(&inputs.counts, config.min_inbound_citations);
    summary.write_csv(
        &staging.path(INGEST_SUMMARY),
        &[
            ("rows_outside_window", ing.rows_outside_window.to_string()),
            ("min_citations", config.min_inbound_citations.to_string()),
            ("citation_share_at_min_citations", share.to_string()),
            ("categorized_journals", inputs.categories.mapped_journals().to_string()),
            ("multidisciplinary_journals", inputs.categories.multidisciplinary_count().to_string()),
        ],
    )
}

fn write_similarity(staging: &mut Staging, outcome: &SimilarityOutcome, inputs: &Inputs) -> Result<()> {
    match outcome.matrix.storage() {
        StorageMode::Sparse => outcome.matrix.write_csv(&staging.path(SIMILARITY_CSV))?,
        StorageMode::Dense => outcome.matrix.write_dense(&staging.path(SIMILARITY_BIN))?,
    }
    let registry = &inputs.ingested.registry;
    let lines = outcome
        .empty_profiles
        .iter()
        .map(|&g| csv_line(&[g.to_string().as_str(), registry.name(g)]));
    write_text(&staging.path(EMPTY_PROFILES), "journal_id,name", lines)
}

struct Scores {
    articles: Vec<ArticleDissimilarity>,
    journals: Vec<JournalDissimilarity>,
}

fn score(inputs: &Inputs, matrix: &SimilarityMatrix) -> Scores {
    let empty = empty_profiles(&inputs.counts);
    let articles = dissim::corpus_dissimilarities(&inputs.ingested.corpus, matrix, &empty);
    let unscored = articles.iter().filter(|a| !a.is_scored()).count();
    if unscored > 0 {
        log::warn!("{unscored} articles have no matched reference and are unscored");
    }
    let journals = dissim::journal_mean_dissimilarity(&articles);
    Scores { articles, journals }
}

fn write_dissim(staging: &mut Staging, scores: &Scores, inputs: &Inputs, config: &PipelineConfig) -> Result<()> {
    let registry = &inputs.ingested.registry;
    dissim::write_article_results(&staging.path(ARTICLES), &scores.articles)?;
    dissim::write_journal_results(&staging.path(JOURNALS), &scores.journals, registry)?;
    let top = dissim::top_journals(&scores.journals, config.top_journals);
    let lines = top.iter().enumerate().map(|(rank, s)| {
        csv_line(&[
            (rank + 1).to_string().as_str(),
            s.journal.to_string().as_str(),
            registry.name(s.journal),
            s.article_count.to_string().as_str(),
            s.mean_dissimilarity.to_string().as_str(),
            if inputs.categories.is_multidisciplinary(s.journal) { "1" } else { "0" },
        ])
    });
    write_text(
        &staging.path(TOP_JOURNALS),
        "rank,journal_id,name,article_count,mean_dissimilarity,multidisciplinary",
        lines,
    )
}

fn write_report(staging: &mut Staging, scores: &Scores, inputs: &Inputs, config: &PipelineConfig) -> Result<()> {
    let corpus = &inputs.ingested.corpus;
    let categories = &inputs.categories;
    analytics::histogram(&scores.articles, config.bin_width)?.write_csv(&staging.path(HISTOGRAM))?;

    let filtered = dissim::filter_by_min_refs(&scores.articles, config.min_refs);
    let classes = analytics::decile_classes(&filtered.kept)?;
    let shares = analytics::multidisciplinary_share(&classes, categories, corpus);
    analytics::write_decile_report(&staging.path(DECILES), &classes, &shares)?;

    let cohort = analytics::non_multidisciplinary(&filtered.kept, categories);
    let cohort_classes = analytics::decile_classes(&cohort)?;
    let diversity = analytics::category_diversity_by_decile(&cohort_classes, categories, corpus);
    analytics::write_diversity_report(&staging.path(DIVERSITY), &diversity)?;

    let by_id: std::collections::HashMap<&str, &ingest::ArticleRecord> =
        corpus.iter().map(|a| (a.article_id.as_str(), a)).collect();
    let breakdowns: Vec<_> = filtered
        .kept
        .iter()
        .filter_map(|r| by_id.get(r.article_id.as_str()))
        .map(|a| analytics::article_category_breakdown(a, categories))
        .collect();
    analytics::write_breakdowns(&staging.path(ARTICLE_CATEGORIES), &breakdowns)?;

    let scored = scores.articles.iter().filter(|a| a.is_scored()).count();
    let summary = [
        ("scored_articles", scored.to_string()),
        ("min_refs", config.min_refs.to_string()),
        ("articles_at_min_refs", filtered.kept.len().to_string()),
        ("citation_share_at_min_refs", filtered.retained_citation_share.to_string()),
        ("non_multidisciplinary_articles", cohort.len().to_string()),
        ("top_decile_lower", top_lower(&classes).to_string()),
    ];
    write_text(
        &staging.path(REPORT_SUMMARY),
        "key,value",
        summary.iter().map(|(k, v)| format!("{k},{v}")),
    )
}

fn top_lower(classes: &DecileClasses) -> f64 {
    classes.classes.last().map_or(0.0, |c| c.lower)
}

fn write_export(
    staging: &mut Staging,
    matrix: &SimilarityMatrix,
    scores: &Scores,
    inputs: &Inputs,
    config: &PipelineConfig,
) -> Result<()> {
    let net = export_network(
        matrix,
        &inputs.counts,
        &scores.journals,
        &inputs.ingested.registry,
        config.min_inbound_citations,
        config.map_weight,
    )?;
    net.write_map(&staging.path(MAP))?;
    net.write_network(&staging.path(NETWORK))
}

/// Runs one stage and returns the paths of the artifacts it wrote.
pub fn run_stage(stage: Stage, config: &PipelineConfig) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let inputs = load_inputs(config)?;
    let mut staging = Staging::new(&config.out_dir)?;
    let dimension = inputs.ingested.registry.len();
    match stage {
        Stage::Ingest => write_ingest(&mut staging, &inputs, config)?,
        Stage::Similarity => {
            let outcome = compute_similarity(&inputs, config)?;
            write_similarity(&mut staging, &outcome, &inputs)?;
        }
        Stage::Dissim => {
            let matrix = load_matrix(config, dimension)?;
            write_dissim(&mut staging, &score(&inputs, &matrix), &inputs, config)?;
        }
        Stage::Report => {
            let matrix = load_matrix(config, dimension)?;
            write_report(&mut staging, &score(&inputs, &matrix), &inputs, config)?;
        }
        Stage::Export => {
            let matrix = load_matrix(config, dimension)?;
            let scores = score(&inputs, &matrix);
            write_export(&mut staging, &matrix, &scores, &inputs, config)?;
        }
        Stage::Run => {
            write_ingest(&mut staging, &inputs, config)?;
            let outcome = compute_similarity(&inputs, config)?;
            write_similarity(&mut staging, &outcome, &inputs)?;
            let scores = score(&inputs, &outcome.matrix);
            write_dissim(&mut staging, &scores, &inputs, config)?;
            write_report(&mut staging, &scores, &inputs, config)?;
            write_export(&mut staging, &outcome.matrix, &scores, &inputs, config)?;
        }
    }
    staging.commit()
}

fn csv_line(fields: &[&str]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(fields).expect("writing to memory");
    let mut bytes = w.into_inner().expect("writing to memory");
    bytes.pop();
    String::from_utf8(bytes).expect("utf-8 fields")
}

fn write_text<I>(path: &Path, header: &str, lines: I) -> Result<()>
where
    I: IntoIterator<Item = String>,
{
    use std::io::Write;
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let res = (|| {
        writeln!(w, "{header}")?;
        for line in lines {
            writeln!(w, "{line}")?;
        }
        w.flush()
    })();
    res.map_err(|e| Error::io(path, e))
}
